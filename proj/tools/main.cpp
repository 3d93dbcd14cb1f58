#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  return joap::cli_dispatch(argc, argv, std::cout, std::cerr);
}
