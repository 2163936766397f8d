#include "covrank/cli.hpp"

int main(int argc, char** argv) { return covrank::cli_main(argc, argv); }
