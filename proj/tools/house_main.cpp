#include "house/cli.hpp"

int main(int argc, char** argv) { return house::cli_main(argc, argv); }
