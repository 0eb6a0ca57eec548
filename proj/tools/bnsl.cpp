#include "bnsl/cli.hpp"

int main(int argc, char** argv) { return bnsl::cli::run(argc, argv); }
