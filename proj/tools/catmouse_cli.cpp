#include "catmouse/runner.hpp"

int main(int argc, char** argv) { return catmouse::runner::cli_main(argc, argv); }
