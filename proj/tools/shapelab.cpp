#include "shapelab/cli.hpp"

int main(int argc, char** argv) { return shapelab::cli_main(argc, argv); }
