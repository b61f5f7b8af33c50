#include "cli.hpp"

int main(int argc, char** argv) { return uulab::cli::run(argc, argv); }
