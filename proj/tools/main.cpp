#include "hidden/runner.hpp"

int main(int argc, char** argv) { return hidden::run_cli(argc, argv); }
