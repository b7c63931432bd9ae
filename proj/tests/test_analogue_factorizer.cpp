#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "pw/analogue_factorizer.hpp"
#include "pw/json_io.hpp"

namespace {

using namespace pw;
using namespace pw::factorizer;

bool is_composite(std::uint64_t n) {
  if (n < 4) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return true;
  return false;
}

std::vector<std::uint64_t> divisors_up_to_root(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t d = 1; d * d <= n; ++d)
    if (n % d == 0) out.push_back(d);
  return out;
}

// Oracle: line from P_n = (0, 0, sqrt(2/n)) through the device surface point
// (a/n, 1/a, 0), intersected with the plane x + y = 2.
struct RayHit {
  double x, y, z;
};
RayHit ray_to_sensor_plane(double a, double n) {
  const double h = std::sqrt(2.0 / n);
  const double ax = a / n, ay = 1.0 / a;
  const double t = 2.0 / (ax + ay);
  return {t * ax, t * ay, h + t * (0.0 - h)};
}

TEST(Grid, SmallCases) {
  EXPECT_EQ(grid_points(5).size(), 12u);
  const auto g1 = grid_points(1);
  EXPECT_EQ(g1, (std::vector<std::pair<std::uint64_t, std::uint64_t>>{{0, 0}, {1, 1}}));

  std::set<std::pair<std::uint64_t, std::uint64_t>> oracle;
  for (std::uint64_t a = 0; a <= 3; ++a)
    for (std::uint64_t b = 0; b <= 3; ++b)
      if (a <= b && (b - a) % 2 == 0) oracle.insert({a, b});
  const auto g3 = grid_points(3);
  EXPECT_EQ(std::set(g3.begin(), g3.end()), oracle);
  EXPECT_EQ(oracle, (std::set<std::pair<std::uint64_t, std::uint64_t>>{{0, 0}, {0, 2}, {1, 1}, {1, 3}, {2, 2}, {3, 3}}));
}

TEST(Grid, CardinalityLaw) {
  for (std::uint64_t n = 1; n <= 99; n += 2) EXPECT_EQ(grid_points(n).size(), (n * n + 4 * n + 3) / 4) << n;
}

TEST(Grid, EvenRejected) {
  try {
    grid_points(4);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_STREQ(e.what(), "grid defined for odd n");
  }
}

TEST(WaveActivity, Examples) {
  EXPECT_EQ(wave_activity(0.2, 0.6, 5), 2.0L);
  EXPECT_NEAR(static_cast<double>(wave_activity(0.2, 0.4, 5)), 0.0, 1e-15);
  EXPECT_LT(wave_activity(0.1, 0.3, 5), 2.0L);
  EXPECT_THROW(wave_activity(0.5, 0.4, 5), DomainError);
  EXPECT_THROW(wave_activity(-0.1, 0.4, 5), DomainError);
  EXPECT_THROW(wave_activity(0.1, 1.1, 5), DomainError);
}

TEST(WaveActivity, MaximaExactlyOnGrid) {
  for (std::uint64_t n = 1; n <= 99; n += 2) {
    const double s = static_cast<double>(n);
    for (std::uint64_t a = 0; a <= n; ++a)
      for (std::uint64_t b = a; b <= n; ++b) {
        const long double w = wave_activity(a / s, b / s, n);
        if ((b - a) % 2 == 0)
          EXPECT_EQ(w, 2.0L) << n << ' ' << a << ' ' << b;
        else
          EXPECT_LT(w, 2.0L);
      }
  }
}

TEST(WaveActivity, StrictlyBelowOffGrid) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  while (checked < 10000) {
    const std::uint64_t n = 1 + 2 * (rng() % 50);
    double x = u(rng), y = u(rng);
    if (x > y) std::swap(x, y);
    const double s = static_cast<double>(n);
    const double dx = std::fabs(x * s - std::round(x * s)) / s;
    if (dx < 1e-9) continue;
    // put y on a lattice line half of the time to stress the one-coordinate case
    if (rng() % 2) {
      const double yk = std::ceil(y * s) / s;
      if (yk >= x && yk <= 1) y = yk;
    }
    EXPECT_LT(wave_activity(x, y, n), 2.0L) << n << ' ' << x << ' ' << y;
    ++checked;
  }
}

TEST(WaveActivity, MarginOfOneNanounit) {
  // nx = 1 + 5e-9, ny = 3: just off the maxima set
  EXPECT_LT(wave_activity(0.2 + 1e-9, 0.6, 5), 2.0L);
  EXPECT_EQ(wave_activity(0.2, 0.6, 5), 2.0L);
}

TEST(Sensor, CoordinateExamples) {
  const auto hit = ray_to_sensor_plane(3, 15);
  EXPECT_NEAR(hit.x, 0.75, 1e-15);
  EXPECT_DOUBLE_EQ(sensor_coord_for_factor(3, 15), 0.75);

  EXPECT_NEAR(ray_to_sensor_plane(1, 3).x, 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(sensor_coord_for_factor(1, 3), 0.5);
  EXPECT_DOUBLE_EQ(std::sqrt(3 * 0.5 / 1.5), 1.0);

  EXPECT_DOUBLE_EQ(sensor_coord_for_factor(3, 9), 1.0);
}

TEST(Sensor, BeyondArc) {
  try {
    sensor_coord_for_factor(4, 15);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_STREQ(e.what(), "beyond arc constraint 2 - x >= 1");
  }
  EXPECT_THROW(sensor_coord_for_factor(0, 15), DomainError);
}

TEST(Sensor, MatchesRayOracleAndArc) {
  for (std::uint64_t n = 3; n <= 999; n += 2) {
    for (std::uint64_t a : divisors_up_to_root(n)) {
      const double c = sensor_coord_for_factor(a, n);
      const auto hit = ray_to_sensor_plane(static_cast<double>(a), static_cast<double>(n));
      EXPECT_NEAR(c, hit.x, 1e-13);
      EXPECT_LT(std::fabs(arc_residual(c, hit.z, n)), 1e-12) << n << ' ' << a;
      EXPECT_NEAR(sensor_height(c, n), hit.z, 1e-12);
    }
  }
}

TEST(Sensor, FactorFromReading) {
  EXPECT_EQ(factor_from_reading(0.75, 15), 3u);
  EXPECT_EQ(factor_from_reading(0.5, 3), 1u);
  EXPECT_NEAR(factor_value_from_reading(0.76, 15), std::sqrt(11.4 / 1.24), 1e-15);
  EXPECT_EQ(factor_from_reading(0.76, 15), 3u);
  EXPECT_THROW(factor_from_reading(0.0, 15), DomainError);
  EXPECT_THROW(factor_from_reading(-0.2, 15), DomainError);
  EXPECT_THROW(factor_from_reading(2.0, 15), DomainError);
}

TEST(Sensor, RoundTrip) {
  for (std::uint64_t n = 9; n <= 999; n += 2) {
    if (!is_composite(n)) continue;
    for (std::uint64_t a : divisors_up_to_root(n)) EXPECT_EQ(factor_from_reading(sensor_coord_for_factor(a, n), n), a);
  }
}

std::vector<double> cs_of(const SensorProfile& p) {
  std::vector<double> out;
  for (const auto& r : p.readings) out.push_back(r.c);
  return out;
}

TEST(Profile, AnalyticMinima) {
  auto p15 = sensor_intensity_profile(15, AnalyticProfile{});
  ASSERT_EQ(p15.readings.size(), 2u);
  EXPECT_DOUBLE_EQ(p15.readings[0].c, 2.0 / 16);
  EXPECT_DOUBLE_EQ(p15.readings[1].c, 0.75);
  for (const auto& r : p15.readings) EXPECT_EQ(r.brightness, 0.0);

  EXPECT_EQ(cs_of(sensor_intensity_profile(7, AnalyticProfile{})), std::vector<double>{0.25});
  EXPECT_EQ(cs_of(sensor_intensity_profile(25, AnalyticProfile{})), (std::vector<double>{2.0 / 26, 1.0}));
  EXPECT_THROW(sensor_intensity_profile(4, AnalyticProfile{}), DomainError);
}

TEST(Profile, BrightnessVanishesAtDivisors) {
  for (std::uint64_t n : {15u, 21u, 25u, 45u, 105u})
    for (std::uint64_t a : divisors_up_to_root(n)) EXPECT_NEAR(brightness_at(sensor_coord_for_factor(a, n), n), 0.0, 1e-12);
}

TEST(Profile, ScanFindsDivisorMinima) {
  const auto p = sensor_intensity_profile(15, ScanProfile{4000});
  EXPECT_FALSE(p.warning);
  for (double target : {2.0 / 16, 0.75}) {
    bool found = false;
    for (const auto& r : p.readings)
      if (std::fabs(r.c - target) < 1e-6 && r.brightness < 1e-6) found = true;
    EXPECT_TRUE(found) << target;
  }
  for (const auto& r : p.readings) EXPECT_LT(r.brightness, 0.5);
}

TEST(Profile, ScanWarnsOnCoarseGrid) {
  const auto p = sensor_intensity_profile(15, ScanProfile{20});
  ASSERT_TRUE(p.warning);
  EXPECT_EQ(*p.warning, "aliasing risk");
}

TEST(DigitalPre, Values) {
  const auto d5 = digital_pre(5);
  EXPECT_DOUBLE_EQ(d5.two_over_n, 0.4);
  EXPECT_NEAR(d5.root_two_over_n, 0.6324555320336759, 1e-15);
  const auto d9 = digital_pre(9);
  EXPECT_NEAR(d9.two_over_n, 0.2222222222222222, 1e-15);
  EXPECT_NEAR(d9.root_two_over_n, 0.4714045207910317, 1e-15);
  EXPECT_EQ(d5.significant_bits, 5u);
}

TEST(DigitalPre, QuadraticCost) {
  const double ratio = double(digital_pre(1023).bit_ops) / double(digital_pre(31).bit_ops);
  EXPECT_DOUBLE_EQ(ratio, 4.0);
  EXPECT_EQ(digital_pre(31).bit_ops, kBitOpsPerSquaredBit * 25);
}

TEST(DigitalPre, NRecoverableFromGuardedValues) {
  for (std::uint64_t n = 3; n < 1u << 20; n = n * 3 + 2) {
    if (n % 2 == 0) ++n;
    const auto d = digital_pre(n);
    const double lam = quantize_significant(d.two_over_n, d.significant_bits);
    const double root = quantize_significant(d.root_two_over_n, d.significant_bits);
    EXPECT_EQ(round_half_up(2.0 / lam), static_cast<std::int64_t>(n)) << n;
    EXPECT_EQ(round_half_up(2.0 / (root * root)), static_cast<std::int64_t>(n)) << n;
  }
}

TEST(Geometry, WavelengthAndVertex) {
  for (std::uint64_t n : {3u, 15u, 1001u}) {
    const auto g = make_geometry(n);
    EXPECT_EQ(g.wavelength, 2.0 / double(n));
    EXPECT_NEAR(g.vertex_height * g.vertex_height, 2.0 / double(n), 2e-16);
    // abstract cone vertex height sqrt(2n) scales to sqrt(2/n)
    EXPECT_NEAR(g.scale({0, 0, std::sqrt(2.0 * n)}).z, g.vertex_height, 1e-15);
  }
}

TEST(RunDevice, Fifteen) {
  const auto o = run_device(15);
  EXPECT_EQ(o.corrected_m, 15u);
  EXPECT_EQ(o.candidates, (std::vector<Candidate>{{1, true}, {3, true}}));
  EXPECT_EQ(o.nontrivial_factor(), 3u);
  EXPECT_FALSE(o.suspect_miscorrection);
  EXPECT_EQ(o.resources.precision, 232u);
  EXPECT_EQ(o.resources.space, kAnalogueSpace);
  EXPECT_EQ(o.resources.time, kAnalogueTime + 2 * kBitOpsPerSquaredBit * 16);
}

TEST(RunDevice, Prime) {
  const auto o = run_device(7);
  EXPECT_EQ(o.candidates, (std::vector<Candidate>{{1, true}}));
  EXPECT_FALSE(o.nontrivial_factor());
}

TEST(RunDevice, Miscorrection) {
  // 0.05 exceeds 1/27.5; the band endpoints correct to 4 and 6
  const auto up = run_device(5, pipeline_error(0.05, 0), WorstCaseDraw{Endpoint::Upper});
  const auto down = run_device(5, pipeline_error(0.05, 0), WorstCaseDraw{Endpoint::Lower});
  EXPECT_EQ(up.corrected_m, 4u);
  EXPECT_EQ(down.corrected_m, 6u);
  EXPECT_TRUE(up.suspect_miscorrection);
  EXPECT_TRUE(down.suspect_miscorrection);
  for (const auto& o : {up, down})
    for (const auto& c : o.candidates)
      if (c.verified) {
        EXPECT_EQ(5 % c.factor, 0u);
      }
}

TEST(RunDevice, SmallErrorsAreCorrected) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto o = run_device(15, pipeline_error(0.004, 0.01), RandomDraw{seed});
    EXPECT_EQ(o.corrected_m, 15u);
    EXPECT_EQ(o.nontrivial_factor(), 3u);
  }
}

TEST(RunDevice, EvenNumbersAreHalved) {
  const auto o = run_device(60);
  EXPECT_EQ(o.halvings, 2u);
  EXPECT_EQ(o.odd_part, 15u);
  EXPECT_EQ(o.nontrivial_factor(), 3u);
  const auto p = run_device(64);
  EXPECT_EQ(p.halvings, 6u);
  EXPECT_EQ(p.odd_part, 1u);
  EXPECT_TRUE(p.candidates.empty());
}

TEST(RunDevice, Errors) {
  try {
    run_device(1);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_STREQ(e.what(), "n < 2");
  }
  EXPECT_THROW(run_device(15, pipeline_error(-1, 0), ExactDraw{}), DomainError);
  EXPECT_THROW(run_device(15, pipeline_error(0.2, 0), WorstCaseDraw{Endpoint::Lower}), DomainError);
}

TEST(RunDevice, ZeroErrorCompleteness) {
  for (std::uint64_t n = 2; n <= 3000; ++n) {
    const auto o = run_device(n);
    EXPECT_EQ(o.nontrivial_factor().has_value(), is_composite(o.odd_part)) << n;
    for (const auto& c : o.candidates) {
      EXPECT_TRUE(c.verified);
      EXPECT_EQ(o.odd_part % c.factor, 0u);
    }
  }
}

TEST(RunDevice, OutcomeJson) {
  const auto j = outcome_to_json(run_device(15));
  EXPECT_EQ(j.at("requested_n"), 15);
  EXPECT_EQ(j.at("halvings"), 0);
  EXPECT_EQ(j.at("corrected_m"), 15);
  EXPECT_EQ(j.at("candidates").size(), 2u);
  EXPECT_EQ(j.at("candidates")[1].at("factor"), 3);
  EXPECT_EQ(j.at("candidates")[1].at("verified"), true);
  EXPECT_EQ(j.at("resources").at("precision"), 232);
  EXPECT_EQ(j.at("nontrivial_factor"), 3);
}

TEST(Threshold, AnalyticValues) {
  EXPECT_NEAR(corrigible_epsilon_threshold(5, AnalyticThreshold{}), 0.03636363636, 1e-11);
  EXPECT_NEAR(corrigible_epsilon_threshold(15, AnalyticThreshold{}), 0.00430107527, 1e-11);
}

TEST(Threshold, BisectionMatchesAnalytic) {
  for (std::uint64_t n : {5u, 15u, 105u, 1001u}) {
    const double b = corrigible_epsilon_threshold(n, BisectionThreshold{1e-12});
    EXPECT_NEAR(b, corrigible_epsilon_threshold(n, AnalyticThreshold{}), 1e-9) << n;
  }
  EXPECT_NEAR(corrigible_epsilon_threshold(5, BisectionThreshold{1e-9}), 1.0 / 27.5, 1e-9);
  EXPECT_THROW(corrigible_epsilon_threshold(5, BisectionThreshold{0}), DomainError);
}

TEST(Precision, FloorLaw) {
  for (std::uint64_t n = 3; n <= 1023; n += 2) {
    // n (n + 1/2) = n^2 + (n - 1)/2 + 1/2 for odd n
    const Amount expected = n * n + (n - 1) / 2;
    EXPECT_EQ(run_device(n).resources.precision, expected) << n;
  }
  EXPECT_EQ(run_device(5).resources.precision, 27u);
}

TEST(Precision, ReadingThresholdBoxInsideJointRegion) {
  const std::uint64_t n = 15;
  const auto joint = wavelength_and_reading_device(n);
  const double tl = analytic_lambda_threshold(n);
  const double tc = analytic_reading_threshold(n);
  const Values x{2.0 / 15};
  EXPECT_TRUE(is_precise_for(ErrorVector{{0.99 * tl, 0.99 * tc}}, x, joint));
  EXPECT_FALSE(is_precise_for(ErrorVector{{0.0, 1.01 * tc}}, x, joint));
  const auto region = precise_error_measure(x, joint, MonteCarloMode{20000, 7});
  EXPECT_GE(region.measure + 3 * region.mc_stderr, tl * tc);
  EXPECT_GT(run_device(n).output_precision, 0u);
}

TEST(ResourceProfile, Classes) {
  std::vector<std::uint64_t> ns;
  for (std::uint64_t n = 3; n <= 1023; n += 2) ns.push_back(n);
  const auto profile = resource_profile(ns);
  EXPECT_EQ(profile.at("time").growth, GrowthClass::polynomial(2));
  EXPECT_EQ(profile.at("space").growth, GrowthClass::constant());
  EXPECT_EQ(profile.at("precision").growth, GrowthClass::exponential());
  EXPECT_EQ(dominant_resources(profile), std::set<std::string>{"precision"});
  const auto overall = overall_complexity(profile);
  EXPECT_EQ(overall.values, profile.at("precision").values);
  EXPECT_EQ(overall.growth, GrowthClass::exponential());
  EXPECT_THROW(resource_profile({3, 4}), DomainError);
}

}  // namespace
