#include <cstdio>

int main() {
  std::puts("roomfit: subcommands pending");
  return 0;
}
