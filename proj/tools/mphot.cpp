#include "mphot/cli.hpp"

int main(int argc, char** argv) { return mphot::cli::main_entry(argc, argv); }
