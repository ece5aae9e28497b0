#include <string>
#include <vector>

#include "ldl/cli.hpp"

int main(int argc, char** argv) {
	std::vector<std::string> args(argv + 1, argv + argc);
	return ldl::cli::run_cli(args);
}
