#include "vyoung/cli.hpp"

int main(int argc, char** argv) { return vyoung::cli::main_entry(argc, argv); }
