#include "hydrocast/cli.hpp"

int main(int argc, char** argv) { return hydrocast::cli::main(argc, argv); }
