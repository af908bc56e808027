#include "fairbv/cli.hpp"

int main(int argc, char** argv) { return fairbv::cli_main(argc, argv); }
