#include "coxsusie/cli.hpp"

int main(int argc, char** argv) { return coxsusie::run_cli(argc, argv); }
