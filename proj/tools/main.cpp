#include "commands.hpp"

int main(int argc, char** argv) { return igpk::cli::run_cli(argc, argv); }
