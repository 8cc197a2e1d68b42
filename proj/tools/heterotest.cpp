#include "heterotest/cli.hpp"

int main(int argc, char** argv) { return heterotest::cli::dispatch(argc, argv); }
