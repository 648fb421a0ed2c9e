// sbscan — command-line front-end for the dephasing-glimpse toolkit.

#include <sbscan/cli_main.hpp>

int main(int argc, char** argv) { return sbscan::cli::run(argc, argv); }
