#include "nftgraph/cli.hpp"

int main(int argc, char** argv) { return nftgraph::cli::run(argc, argv); }
