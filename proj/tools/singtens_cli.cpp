#include "cli.hpp"

int main(int argc, char** argv) { return singtens::cli::run(argc, argv); }
