#include "ebdiff/cli.hpp"

int main(int argc, char** argv) { return ebdiff::run_cli(argc, argv); }
