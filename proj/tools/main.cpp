#include "spinswap/cli.hpp"

int main(int argc, char** argv) { return spinswap::cli::main(argc, argv); }
