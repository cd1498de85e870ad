// Acceptance suite: runs every contract criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exit code is the failure count.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "irmarl/verify.hpp"

namespace {

constexpr std::uint64_t kSeed = 1234567;  // frozen; calibration used the same set

struct Criterion {
  std::string title;
  double time_budget_seconds;
  std::function<irmarl::SuiteResult()> run;
};

}  // namespace

int main() {
  using namespace irmarl;
  const std::vector<Criterion> criteria = {
      {"standardization: reconstruction and zero conditional means (200 instances)", 10,
       [] { return standardization_suite(kSeed, 200); }},
      {"alignment: per-subset errors within 2^k * train MSE (200 pairs)", 30,
       [] { return alignment_suite(kSeed, 200); }},
      {"distribution shift: target MSE within the calibrated envelope (200 instances)", 30,
       [] { return shift_bound_suite(kSeed, 200); }},
      {"mirror descent: certified optimal and oracle-matched (1000 updates)", 10,
       [] { return update_exactness_suite(kSeed, 1000); }},
      {"drift: max-cell chi-square under B(t-1)/lambda on every run (20 runs)", 120,
       [] { return drift_suite(kSeed, 20); }},
      {"no-regret: audit bound on adversarial gain sequences (100 sequences)", 20,
       [] { return no_regret_suite(kSeed, 100); }},
      {"oracles: factored values and best responses match enumeration (100 instances)", 120,
       [] { return oracle_equivalence_suite(kSeed, 100); }},
      {"end-to-end: mean equilibrium gap within 5% of the reward range (5 seeds)", 300,
       [] { return end_to_end_suite(kSeed); }},
      {"rates: reward and transition errors decay like 1/M (slopes <= -0.8)", 300,
       [] { return rate_suite(kSeed, 20); }},
      {"mc-critic: max-cell error decays with rollouts (slope <= -0.4)", 120,
       [] { return mc_critic_suite(kSeed); }},
      {"quadratic: pairwise critic beats single-agent and joint critics", 300,
       [] { return quadratic_ordering_suite(kSeed); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    SuiteResult result;
    try {
      result = criteria[i].run();
    } catch (const std::exception& e) {
      result.passed = false;
      result.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool on_time = seconds <= criteria[i].time_budget_seconds;
    const bool ok = result.passed && on_time;
    if (!ok) ++failures;
    std::printf("[%2zu/11] %s %s (%.1fs%s) -- %s\n", i + 1, ok ? "PASS" : "FAIL",
                criteria[i].title.c_str(), seconds, on_time ? "" : ", OVER BUDGET",
                result.detail.c_str());
    std::fflush(stdout);
  }
  if (failures == 0)
    std::printf("acceptance: all 11 criteria passed\n");
  else
    std::printf("acceptance: %d criteria failed\n", failures);
  return failures;
}
