#include "mfvar/cli.hpp"

int main(int argc, char** argv) { return mfvar::run(argc, argv); }
