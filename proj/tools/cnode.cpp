#include <iostream>

#include <cnode/cli/app.hpp>
#include <cnode/cli/process.hpp>

int main(int argc, char** argv) {
  cnode::cli::tune_allocator();
  return cnode::cli::run(argc, argv, std::cout, std::cerr);
}
