#include "erprop/cli.hpp"

int main(int argc, char** argv) { return erprop::cli::main(argc, argv); }
