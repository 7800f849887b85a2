#include "sloloop/cli.hpp"

int main(int argc, char** argv) { return sloloop::run_cli(argc, argv); }
