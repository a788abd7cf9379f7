#include "gamla_cli/cli.hpp"

int main(int argc, char** argv) { return gamla::cli::run(argc, argv); }
