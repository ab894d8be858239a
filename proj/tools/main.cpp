#include "syrlab/cli.hpp"

int main(int argc, char** argv) { return syrlab::cli::run(argc, argv); }
