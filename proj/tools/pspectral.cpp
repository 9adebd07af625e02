#include "pspectral/cli.hpp"

int main(int argc, char** argv) { return pspectral::cli::main(argc, argv); }
