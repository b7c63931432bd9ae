// Prints how the wavelength tolerance of the factorizer shrinks with n and
// how each resource grows with the bit size of n.

#include <cstdio>
#include <vector>

#include "pw/analogue_factorizer.hpp"
#include "pw/resource_core.hpp"

int main() {
  using namespace pw;
  std::printf("%8s %6s %14s %12s\n", "n", "bits", "threshold", "precision");
  for (std::uint64_t n : {5, 15, 105, 1001, 10007, 100003}) {
    const double t = factorizer::corrigible_epsilon_threshold(n, factorizer::AnalyticThreshold{});
    const auto o = factorizer::run_device(n);
    std::printf("%8llu %6zu %14.6e %12llu\n", static_cast<unsigned long long>(n), bit_size(n), t,
                static_cast<unsigned long long>(o.resources.precision));
  }

  std::vector<std::uint64_t> ns;
  for (std::uint64_t n = 3; n <= 4095; n += 2) ns.push_back(n);
  const auto profile = factorizer::resource_profile(ns);
  for (const auto& [name, cf] : profile) std::printf("%-10s %s\n", name.c_str(), cf.growth->tag().c_str());
  std::printf("dominant:");
  for (const auto& name : dominant_resources(profile)) std::printf(" %s", name.c_str());
  std::printf("\n");
}
