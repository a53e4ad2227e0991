#include "hyret/cli.hpp"

int main(int argc, char** argv) { return hyret::cli_main(argc, argv); }
