#include "experiment.hpp"

int main(int argc, char** argv) { return pslab::cli::main(argc, argv); }
