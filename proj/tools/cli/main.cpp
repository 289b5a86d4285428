#include "cli.hpp"

int main(int argc, char **argv) { return anfis::cli::run(argc, argv); }
