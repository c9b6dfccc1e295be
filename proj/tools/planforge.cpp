#include "planforge/cli.hpp"

int main(int argc, char** argv) { return planforge::cli::run(argc, argv); }
