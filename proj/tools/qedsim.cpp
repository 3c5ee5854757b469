#include "qedsim/cli.hpp"

int main(int argc, char** argv) { return qedsim::cli::main(argc, argv); }
