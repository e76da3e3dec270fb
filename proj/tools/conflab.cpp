#include "conflab/cli.hpp"

int main(int argc, char** argv) { return conflab::cli::run(std::vector<std::string>(argv + 1, argv + argc)); }
