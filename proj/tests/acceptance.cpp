// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <cstdio>
#include <cstdlib>
#include <string>

#include "darwin/verification/criteria.hpp"

int main(int argc, char** argv) {
  int failed = 0;
  for (int id = 1; id <= 10; ++id) {
    if (argc > 1 && std::to_string(id) != argv[1]) continue;
    const auto r = darwin::verification::run_criterion(id);
    std::printf("%s\n", darwin::verification::format_result(r).c_str());
    std::fflush(stdout);
    if (!r.passed) ++failed;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
