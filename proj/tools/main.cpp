#include "mbse/cli.hpp"

int main(int argc, char** argv) { return mbse::cli::dispatch(argc, argv); }
