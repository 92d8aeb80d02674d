#include "reprobench/io.hpp"

int main(int argc, char** argv) { return reprobench::cli_main(argc, argv); }
