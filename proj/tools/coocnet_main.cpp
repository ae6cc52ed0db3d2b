#include "coocnet/cli.hpp"

int main(int argc, char** argv) { return coocnet::cli::run(argc, argv); }
