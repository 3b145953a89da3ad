#include <unistd.h>

#include <iostream>

#include "mextract/cli.hpp"

int main(int argc, char** argv) {
  mextract::DispatchOptions options;
  options.interactive = isatty(STDOUT_FILENO) != 0;
  return mextract::dispatch(argc, argv, std::cout, std::cerr, options);
}
