#include <iostream>
#include <string>
#include <vector>

#include "seqqa/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return seqqa::dispatch(std::move(args), std::cin, std::cout, std::cerr);
}
