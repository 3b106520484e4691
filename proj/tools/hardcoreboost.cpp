#include "hardcoreboost/cli.hpp"

int main(int argc, char** argv) { return hcb::cli::run(argc, argv); }
