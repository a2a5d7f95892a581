#include "pdcfa/cli/cli.h"

int main(int argc, char** argv) { return pdcfa::cli::main(argc, argv); }
