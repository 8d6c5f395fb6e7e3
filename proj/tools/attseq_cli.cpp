#include <cstdio>

int main() {
  std::puts("attseq: placeholder");
  return 0;
}
