// Acceptance gate: one PASS/FAIL line per criterion.
//   acceptance [--criterion N] [--seed S]

#include <cstdio>
#include <cstdlib>
#include <string>

#include "qrtrig/verify.hpp"

int main(int argc, char** argv) {
  int only = 0;
  std::uint64_t seed = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (a == "--seed" && i + 1 < argc) {
      seed = std::strtoull(argv[++i], nullptr, 10);
    } else {
      std::fprintf(stderr, "usage: acceptance [--criterion N] [--seed S]\n");
      return 2;
    }
  }
  if (only < 0 || only > qrtrig::kCriterionCount) {
    std::fprintf(stderr, "criterion must be in 1..%d\n", qrtrig::kCriterionCount);
    return 2;
  }

  qrtrig::VerifyContext ctx(seed);
  bool ok = true;
  for (int n = 1; n <= qrtrig::kCriterionCount; ++n) {
    if (only && n != only) continue;
    const auto checks = qrtrig::run_criterion(ctx, n);
    double secs = 0.0;
    for (const auto& c : checks) secs += c.seconds;
    const bool pass = qrtrig::all_passed(checks);
    ok = ok && pass;
    std::printf("criterion %2d: %s (%.2fs)\n", n, pass ? "PASS" : "FAIL", secs);
    for (const auto& c : checks) std::printf("    %s\n", qrtrig::format_check(c).c_str());
    std::fflush(stdout);
  }
  return ok ? 0 : 1;
}
