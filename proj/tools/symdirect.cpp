#include <iostream>
#include <string>
#include <vector>

#include <symdirect/cli.hpp>

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return symdirect::cli::run(args, std::cout, std::cerr);
}
