#include "bucketmask/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return bucketmask::cli::run(argc, argv, std::cout, std::cerr);
}
