#include "epw/cli.hpp"

int main(int argc, char** argv) { return epw::cli::run_cli(argc, argv); }
