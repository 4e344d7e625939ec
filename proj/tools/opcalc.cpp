#include "opcalc/cli.hpp"

int main(int argc, char** argv) { return opcalc::cli::run_command(argc, argv); }
