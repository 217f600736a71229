#include "hyqsim/cli.hpp"

int main(int argc, char** argv) { return hyqsim::cli::main(argc, argv); }
