#include "gateseed/cli/run.hpp"

int main(int argc, char** argv) { return gateseed::cli::run(argc, argv); }
