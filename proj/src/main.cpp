#include "vaporsim/cli.hpp"

int main(int argc, char** argv) { return vaporsim::run_cli(argc, argv); }
