#include "hlab/cli.hpp"

int main(int argc, char** argv) { return hlab::run_cli(argc, argv); }
