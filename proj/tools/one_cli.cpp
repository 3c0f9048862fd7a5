#include "one/cli.hpp"

int main(int argc, char** argv) { return one::cli::run(argc, argv); }
