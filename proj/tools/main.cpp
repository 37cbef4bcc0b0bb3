#include "deltaflow/cli.hpp"

int main(int argc, char** argv) { return deltaflow::cli::main_entry(argc, argv); }
