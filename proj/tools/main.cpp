#include "bvpcont/cli.hpp"

int main(int argc, char** argv) { return bvpcont::cli::run(argc, argv); }
