#include "reliance/cli.hpp"

int main(int argc, char** argv) { return reliance::cli::run(argc, argv); }
