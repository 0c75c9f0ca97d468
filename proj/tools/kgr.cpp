#include "kgr/cli.hpp"

int main(int argc, char** argv) { return kgr::run_subcommand(argc, argv); }
