#include "dualarm/cli/app.hpp"

int main(int argc, char** argv) { return dualarm::cli::run_command(argc, argv); }
