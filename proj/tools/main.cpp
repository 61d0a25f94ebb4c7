#include "imputelab/cli.hpp"

int main(int argc, char** argv) { return imputelab::run_cli(argc, argv); }
