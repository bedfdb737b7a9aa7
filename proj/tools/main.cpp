#include "cli.hpp"

int main(int argc, char** argv) { return payofflab::cli::dispatch(argc, argv); }
