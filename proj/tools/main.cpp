#include "kilnloop/cli.hpp"

int main(int argc, char** argv) { return kilnloop::cli::main(argc, argv); }
