#include "seqpred/cli.hpp"

int main(int argc, char** argv) { return seqpred::run_main(argc, argv); }
