#include <vector>

#include "stc/cli.hpp"

int main(int argc, char** argv) {
  return stc::dispatch(std::vector<std::string>(argv + 1, argv + argc));
}
