#include "bl/cli.hpp"

int main(int argc, char** argv) { return bl::cli::main(argc, argv); }
