#include <iostream>

#include <rampstor/cli.hpp>

int main(int argc, char** argv) {
  return rampstor::cli::run(argc, argv, std::cout, std::cerr);
}
