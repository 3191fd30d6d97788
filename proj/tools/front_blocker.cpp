#include "front_blocker/cli.hpp"

int main(int argc, char** argv) { return front_blocker::run_subcommand(argc, argv); }
