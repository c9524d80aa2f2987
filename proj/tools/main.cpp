#include "fallrisk/cli.hpp"

int main(int argc, char** argv) { return fallrisk::cli::run(argc, argv); }
