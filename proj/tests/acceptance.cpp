// Acceptance suite: one line per criterion, every tolerance pinned in code.
#include <chrono>
#include <iostream>

int main() {
  std::cout << "placeholder\n";
  return 0;
}
