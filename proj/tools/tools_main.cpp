#include "tgc/cli.hpp"

int main(int argc, char** argv) { return tgc::run_cli(argc, argv); }
