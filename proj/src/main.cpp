#include "cltlab/cli.hpp"

int main(int argc, char** argv) { return cltlab::run_cli(argc, argv); }
