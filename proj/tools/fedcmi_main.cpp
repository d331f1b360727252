#include "fedcmi/cli.hpp"

int main(int argc, char** argv) { return fedcmi::cli_main(argc, argv); }
