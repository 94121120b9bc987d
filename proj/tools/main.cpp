#include "tcfou/cli.hpp"

int main(int argc, char** argv) { return tcfou::cli::main_entry(argc, argv); }
