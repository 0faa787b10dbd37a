// Prints one line per acceptance criterion; exit status 1 if any fails.
#include <cstdio>

#include "mmot/app/acceptance.hpp"

int main() {
  int failed = 0;
  for (int id = 1; id <= mmot::acceptance::kCriteria; ++id) {
    const auto r = mmot::acceptance::run_criterion(id);
    std::printf("criterion %2d  %s  %s: %s\n", id, r.pass ? "PASS" : "FAIL", r.title.c_str(), r.summary.c_str());
    std::fflush(stdout);
    failed += !r.pass;
  }
  std::printf("%d of %d criteria passed\n", mmot::acceptance::kCriteria - failed, mmot::acceptance::kCriteria);
  return failed == 0 ? 0 : 1;
}
