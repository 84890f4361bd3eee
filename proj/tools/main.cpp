#include "cli.hpp"

int main(int argc, char** argv) { return mfsk::cli::run(argc, argv); }
