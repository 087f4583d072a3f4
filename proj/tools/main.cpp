#include "cli.hpp"

int main(int argc, char** argv) { return lpakit::run_cli(argc, argv); }
