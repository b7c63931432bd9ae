#pragma once

// Numerical model of the analogue factorization device.
//
// Abstract picture: the lattice points (a, b) with ab = n lie on a conic
// cut from a cone with vertex (0, 0, sqrt(2n)). The device realizes the
// lattice as interference maxima of a source with wavelength 2/n, the cone
// vertex as a point source P_n at height sqrt(2/n), and reads positions of
// minimal light on an arc sensor C_n in the plane x + y = 2. Everything is
// scaled into the unit cell by (x, y, z) -> (x/n, y/n, z/n).
//
// The physical wave field is replaced by W(x, y) = |cos(pi n x) + cos(pi n y)|,
// whose maxima (value 2) are exactly the points where nx and ny are
// integers of equal parity.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pw/error.hpp"
#include "pw/precision_model.hpp"
#include "pw/resource_core.hpp"

namespace pw::factorizer {

// Documentary geometry of the mirrors in abstract coordinates.
inline constexpr const char* kMirrorM1 = "y = -x^2/2 + x + 1";
inline constexpr const char* kMirrorM2 = "y = x";
inline constexpr const char* kMirrorM3 = "x = 0";

/// Bit operations charged per squared input bit for each digital step.
inline constexpr Amount kBitOpsPerSquaredBit = 4;
/// Abstract time units for wave propagation across the device.
inline constexpr Amount kAnalogueTime = 1;
/// Abstract space units: the apparatus fits one n-independent cuboid.
inline constexpr Amount kAnalogueSpace = 1;

struct Point3 {
  double x = 0, y = 0, z = 0;
};

struct DeviceGeometry {
  std::uint64_t n = 0;
  Point3 source_position{1, 1, 0};
  double wavelength = 0;
  double vertex_height = 0;

  /// Abstract coordinates to device coordinates.
  Point3 scale(const Point3& p) const {
    const auto s = static_cast<double>(n);
    return {p.x / s, p.y / s, p.z / s};
  }
};

inline DeviceGeometry make_geometry(std::uint64_t n) {
  if (n < 1 || n % 2 == 0) throw DomainError("device defined for odd n");
  DeviceGeometry g;
  g.n = n;
  g.wavelength = 2.0 / static_cast<double>(n);
  g.vertex_height = std::sqrt(2.0 / static_cast<double>(n));
  return g;
}

// ---------------------------------------------------------------------------
// Grid and field
// ---------------------------------------------------------------------------

/// {(a, b) : 0 <= a <= b <= n, a = b mod 2}
inline std::vector<std::pair<std::uint64_t, std::uint64_t>> grid_points(std::uint64_t n) {
  if (n % 2 == 0) throw DomainError("grid defined for odd n");
  std::vector<std::pair<std::uint64_t, std::uint64_t>> points;
  points.reserve((n * n + 4 * n + 3) / 4);
  for (std::uint64_t a = 0; a <= n; ++a)
    for (std::uint64_t b = a; b <= n; b += 2) points.emplace_back(a, b);
  return points;
}

namespace detail {

// cos(pi t) with the integer part of t reduced exactly.
inline long double cos_pi(long double t) {
  const long double k = std::nearbyint(t);
  const long double f = t - k;
  const long double c = std::cos(std::numbers::pi_v<long double> * f);
  return std::fmod(std::fabs(k), 2.0L) == 0 ? c : -c;
}

}  // namespace detail

/// Surrogate wave activity |cos(pi n x) + cos(pi n y)| in [0, 2].
/// Evaluated in extended precision so that points 1e-9 off the maxima set
/// still compare strictly below 2.
inline long double wave_activity(double x, double y, std::uint64_t n) {
  if (!(0 <= x && x <= y && y <= 1)) throw DomainError("point outside region 0 <= x <= y <= 1");
  const auto ln = static_cast<long double>(n);
  const long double w = std::fabs(detail::cos_pi(ln * x) + detail::cos_pi(ln * y));
  return std::min(w, 2.0L);
}

// ---------------------------------------------------------------------------
// Sensor geometry
// ---------------------------------------------------------------------------

/// Divisors a of m with a * a <= m, ascending.
inline std::vector<std::uint64_t> small_divisors(std::uint64_t m) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t a = 1; a <= m / a; ++a)
    if (m % a == 0) out.push_back(a);
  return out;
}

/// x-coordinate on C_n where the ray from P_n through the device surface
/// point (a/n, 1/a, 0) meets the plane x + y = 2: c = 2a^2 / (n + a^2).
inline double sensor_coord_for_factor(std::uint64_t a, std::uint64_t n) {
  if (a < 1) throw DomainError("factor candidate must be >= 1");
  if (a > n / a) throw DomainError("beyond arc constraint 2 - x >= 1");
  const double a2 = static_cast<double>(a) * static_cast<double>(a);
  return 2.0 * a2 / (static_cast<double>(n) + a2);
}

/// Height on the arc for sensor coordinate c: the z where the line from P_n
/// through the surface point for c reaches x + y = 2.
inline double sensor_height(double c, std::uint64_t n) {
  const double h = std::sqrt(2.0 / static_cast<double>(n));
  // c = t * a / n with ray parameter t = sqrt(n c (2 - c)); z = h (1 - t)
  const double t = std::sqrt(static_cast<double>(n) * c * (2.0 - c));
  return h * (1.0 - t);
}

/// 2 (c - 1)^2 + (z - sqrt(2/n))^2 - 2; zero on the arc.
inline double arc_residual(double c, double z, std::uint64_t n) {
  const double h = std::sqrt(2.0 / static_cast<double>(n));
  return 2.0 * (c - 1.0) * (c - 1.0) + (z - h) * (z - h) - 2.0;
}

/// sqrt(n c / (2 - c)) before interpretation.
inline double factor_value_from_reading(double c, std::uint64_t n) {
  if (!(c > 0)) throw DomainError("sensor coordinate must be positive");
  if (!(c < 2)) throw DomainError("sensor coordinate must be below 2");
  return std::sqrt(static_cast<double>(n) * c / (2.0 - c));
}

/// Interpreted factor: sqrt(n c / (2 - c)) rounded half up.
inline std::uint64_t factor_from_reading(double c, std::uint64_t n) {
  return static_cast<std::uint64_t>(round_half_up(factor_value_from_reading(c, n)));
}

struct SensorReading {
  double c = 0;
  double brightness = 0;
};

struct AnalyticProfile {};
struct ScanProfile {
  std::size_t resolution = 0;
};

struct SensorProfile {
  std::vector<SensorReading> readings;
  std::optional<std::string> warning;
};

/// Brightness 1 - W/2 at the surface point that projects to sensor coordinate c.
inline double brightness_at(double c, std::uint64_t n) {
  const double a = factor_value_from_reading(c, n);
  const double y = std::min(1.0 / a, 1.0);
  const double x = std::min(a / static_cast<double>(n), y);
  return static_cast<double>(1.0L - wave_activity(x, y, n) / 2.0L);
}

namespace detail {

inline std::vector<SensorReading> divisor_readings(std::uint64_t m) {
  std::vector<SensorReading> out;
  for (std::uint64_t a : small_divisors(m)) out.push_back({sensor_coord_for_factor(a, m), 0.0});
  return out;
}

inline double golden_min(double lo, double hi, std::uint64_t n) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = brightness_at(x1, n), f2 = brightness_at(x2, n);
  for (int i = 0; i < 200 && b - a > 1e-15; ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = brightness_at(x1, n);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = brightness_at(x2, n);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

}  // namespace detail

/// Minimally lit points of C_n.
///
/// Analytic: one zero-brightness reading per divisor a <= sqrt(n).
/// Scan: brightness sampled on a uniform grid over c in [2/(n+1), 1]; every
/// local minimum below 0.5 is refined by golden-section search and reported.
inline SensorProfile sensor_intensity_profile(std::uint64_t n, const std::variant<AnalyticProfile, ScanProfile>& mode) {
  if (n < 3 || n % 2 == 0) throw DomainError("sensor profile defined for odd n >= 3");
  SensorProfile profile;
  if (std::holds_alternative<AnalyticProfile>(mode)) {
    profile.readings = detail::divisor_readings(n);
    return profile;
  }
  const std::size_t res = std::get<ScanProfile>(mode).resolution;
  if (res < 3) throw DomainError("scan resolution must be >= 3");
  if (res < 2 * n) profile.warning = "aliasing risk";
  const double c_lo = 2.0 / (static_cast<double>(n) + 1.0);
  const double c_hi = 1.0;
  std::vector<double> cs(res), bs(res);
  for (std::size_t i = 0; i < res; ++i) {
    cs[i] = i + 1 == res ? c_hi : c_lo + (c_hi - c_lo) * static_cast<double>(i) / static_cast<double>(res - 1);
    bs[i] = brightness_at(cs[i], n);
  }
  for (std::size_t i = 0; i < res; ++i) {
    const bool left = i == 0 || bs[i] <= bs[i - 1];
    const bool right = i + 1 == res || bs[i] < bs[i + 1];
    if (!(left && right) || bs[i] >= 0.5) continue;
    const double lo = i == 0 ? cs[0] : cs[i - 1];
    const double hi = i + 1 == res ? cs[res - 1] : cs[i + 1];
    const double c = detail::golden_min(lo, hi, n);
    profile.readings.push_back({c, brightness_at(c, n)});
  }
  return profile;
}

// ---------------------------------------------------------------------------
// Digital steps
// ---------------------------------------------------------------------------

struct DigitalPre {
  double two_over_n = 0;
  double root_two_over_n = 0;
  /// Significant bits from which n is still recoverable: |n| + 2.
  std::size_t significant_bits = 0;
  Amount bit_ops = 0;
};

/// Rounds v to `bits` significant bits.
inline double quantize_significant(double v, std::size_t bits) {
  if (v == 0) return 0;
  int e = 0;
  const double m = std::frexp(v, &e);
  const double scale = std::ldexp(1.0, static_cast<int>(bits));
  return std::ldexp(std::round(m * scale) / scale, e);
}

inline Amount digital_bit_ops(std::uint64_t n) {
  const auto b = static_cast<Amount>(bit_size(n));
  return kBitOpsPerSquaredBit * b * b;
}

inline DigitalPre digital_pre(std::uint64_t n) {
  if (n < 3 || n % 2 == 0) throw DomainError("digital preprocessing defined for odd n >= 3");
  DigitalPre d;
  d.two_over_n = 2.0 / static_cast<double>(n);
  d.root_two_over_n = std::sqrt(d.two_over_n);
  d.significant_bits = bit_size(n) + 2;
  d.bit_ops = digital_bit_ops(n);
  return d;
}

// ---------------------------------------------------------------------------
// Devices for precision analysis
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr double kMinWavelength = 0x1.0p-40;
inline constexpr std::size_t kBreakpointCap = 256;

// Wavelengths 2/(k + 1/2) inside [lo, hi]: where round(2/lambda) steps.
inline std::vector<double> wavelength_breakpoints(double lo, double hi) {
  std::vector<double> out;
  if (!(hi > 0)) return out;
  const double lo_pos = std::max(lo, kMinWavelength);
  const double k_min = std::max(0.0, std::ceil(2.0 / hi - 0.5));
  const double k_max = std::floor(2.0 / lo_pos - 0.5);
  for (double k = k_min; k <= k_max && out.size() < kBreakpointCap; k += 1) out.push_back(2.0 / (k + 0.5));
  if (k_max - k_min + 1 > static_cast<double>(kBreakpointCap))
    for (double k = k_max; k > k_max - 4; k -= 1) out.push_back(2.0 / (k + 0.5));
  return out;
}

// Sensor coordinates where round(sqrt(n c / (2 - c))) steps.
inline double reading_breakpoint(double k, std::uint64_t n) {
  const double h = (k + 0.5) * (k + 0.5);
  return 2.0 * h / (static_cast<double>(n) + h);
}

inline std::vector<double> reading_breakpoints(double lo, double hi, std::uint64_t n) {
  std::vector<double> out;
  const double l = std::max(lo, 0.0);
  const double h = std::min(hi, 2.0 - 1e-12);
  if (!(h > l)) return out;
  const double k_min = std::max(0.0, std::ceil(std::sqrt(static_cast<double>(n) * l / (2.0 - l)) - 0.5));
  const double k_max = std::floor(std::sqrt(static_cast<double>(n) * h / (2.0 - h)) - 0.5);
  for (double k = k_min; k <= k_max && out.size() < kBreakpointCap; k += 1) out.push_back(reading_breakpoint(k, n));
  return out;
}

inline std::uint64_t corrected_target(double wavelength) {
  const double nu = 2.0 / wavelength;
  if (!(nu < 0x1.0p52)) throw DomainError("implemented wavelength too small");
  return static_cast<std::uint64_t>(round_half_up(nu));
}

}  // namespace detail

/// Largest additive wavelength error that still corrects to n: 1/(n(n + 1/2)).
inline double analytic_lambda_threshold(std::uint64_t n) {
  const auto s = static_cast<double>(n);
  return 1.0 / (s * (s + 0.5));
}

/// Device with the wavelength as its only error-bearing parameter. The
/// interpreted output is the corrected target round(2 / lambda).
inline DeviceModel lambda_only_device(std::uint64_t n) {
  if (n < 1 || n % 2 == 0) throw DomainError("device defined for odd n");
  DeviceModel d;
  d.inputs.push_back({"wavelength", Role::Input, {detail::kMinWavelength, 4.0}, ErrorModel::Additive});
  d.compute = [](std::span<const double> x) { return std::vector<Values>{{2.0 / x[0]}}; };
  d.correct_outputs = [n](std::span<const double>) {
    return std::optional<std::vector<Interpreted>>{{{static_cast<std::int64_t>(n)}}};
  };
  d.breakpoints = [](std::size_t, double lo, double hi) { return detail::wavelength_breakpoints(lo, hi); };
  d.coordinate_thresholds = [n](std::span<const double>) { return std::vector<double>{analytic_lambda_threshold(n)}; };
  d.error_bounding_box = {{0.0, 2.0 / static_cast<double>(n)}};
  return d;
}

/// Largest additive sensor-reading error under which every divisor reading
/// of n still interprets to its own divisor.
inline double analytic_reading_threshold(std::uint64_t n) {
  double t = std::numeric_limits<double>::infinity();
  for (std::uint64_t a : small_divisors(n)) {
    const double c = sensor_coord_for_factor(a, n);
    const auto fa = static_cast<double>(a);
    t = std::min({t, c - detail::reading_breakpoint(fa - 1.0, n), detail::reading_breakpoint(fa, n) - c});
  }
  return t;
}

/// Device with both the wavelength (input) and the sensor reading (output)
/// carrying error. Correct outputs are the divisors a <= sqrt(n). The
/// precise region is not a coordinate box, so only Monte-Carlo measurement
/// applies.
inline DeviceModel wavelength_and_reading_device(std::uint64_t n) {
  if (n < 3 || n % 2 == 0) throw DomainError("device defined for odd n >= 3");
  DeviceModel d;
  d.inputs.push_back({"wavelength", Role::Input, {detail::kMinWavelength, 4.0}, ErrorModel::Additive});
  d.outputs.push_back({"sensor_c", Role::Output, {0.0, 2.0}, ErrorModel::Additive});
  d.compute = [](std::span<const double> x) {
    std::vector<Values> out;
    const std::uint64_t m = detail::corrected_target(x[0]);
    if (m < 1 || m > (std::uint64_t{1} << 32)) return out;
    for (const auto& r : detail::divisor_readings(m)) out.push_back({r.c});
    return out;
  };
  d.interpret = [n](std::span<const double> y) -> Interpreted {
    if (!(y[0] > 0 && y[0] < 2)) return {0};
    return {static_cast<std::int64_t>(factor_from_reading(y[0], n))};
  };
  d.correct_outputs = [n](std::span<const double>) {
    std::vector<Interpreted> out;
    for (std::uint64_t a : small_divisors(n)) out.push_back({static_cast<std::int64_t>(a)});
    return std::optional(out);
  };
  d.breakpoints = [n](std::size_t coord, double lo, double hi) {
    return coord == 0 ? detail::wavelength_breakpoints(lo, hi) : detail::reading_breakpoints(lo, hi, n);
  };
  d.error_bounding_box = {{0.0, 4.0 * analytic_lambda_threshold(n)}, {0.0, 4.0 * analytic_reading_threshold(n)}};
  return d;
}

/// Corrigibility threshold of the wavelength for odd n >= 3.
struct AnalyticThreshold {};
struct BisectionThreshold {
  double tol = 1e-12;
};

inline double corrigible_epsilon_threshold(std::uint64_t n, const std::variant<AnalyticThreshold, BisectionThreshold>& method) {
  if (n < 3 || n % 2 == 0) throw DomainError("threshold defined for odd n >= 3");
  if (std::holds_alternative<AnalyticThreshold>(method)) return analytic_lambda_threshold(n);
  const double tol = std::get<BisectionThreshold>(method).tol;
  if (!(tol > 0)) throw DomainError("tolerance must be positive");
  const auto device = lambda_only_device(n);
  const Values x{2.0 / static_cast<double>(n)};
  double lo = 0.0;                              // precise
  double hi = 2.0 / static_cast<double>(n);     // not precise: band reaches lambda = 0
  while (hi - lo > tol) {
    const double mid = lo + (hi - lo) / 2;
    if (is_precise_for(ErrorVector{{mid}}, x, device))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

// ---------------------------------------------------------------------------
// The pipeline
// ---------------------------------------------------------------------------

struct Candidate {
  std::uint64_t factor = 0;
  bool verified = false;
  bool operator==(const Candidate&) const = default;
};

struct ResourceTally {
  Amount time = 0;
  Amount space = 0;
  Amount precision = 0;
  bool operator==(const ResourceTally&) const = default;
};

struct FactorizationOutcome {
  std::uint64_t requested_n = 0;
  std::uint64_t halvings = 0;
  std::uint64_t odd_part = 0;
  std::uint64_t corrected_m = 0;
  std::vector<Candidate> candidates;
  ResourceTally resources;
  /// Precision demanded by the sensor reading alone, reported apart from
  /// the wavelength-driven precision in `resources`.
  Amount output_precision = 0;
  bool suspect_miscorrection = false;

  /// Smallest verified candidate strictly between 1 and the odd part.
  std::optional<std::uint64_t> nontrivial_factor() const {
    for (const auto& c : candidates)
      if (c.verified && c.factor > 1 && c.factor < odd_part) return c.factor;
    return std::nullopt;
  }
};

/// Error vector of the pipeline: (wavelength error, sensor-reading error).
inline ErrorVector pipeline_error(double epsilon_lambda, double epsilon_c) { return ErrorVector{{epsilon_lambda, epsilon_c}}; }

/// Runs the five-step pipeline on n.
///
/// Factors of two are stripped first. The odd part m0 is preprocessed
/// digitally, the wavelength 2/m0 is set with error, corrected to the
/// nearest integer m, the minimally lit sensor points for m are read with
/// error and interpreted against m0, and each candidate is verified by
/// trial division.
inline FactorizationOutcome run_device(std::uint64_t n, const ErrorVector& error, const Draw& draw) {
  if (n < 2) throw DomainError("n < 2");
  if (error.entries.size() != 2) throw DomainError("pipeline error vector has two entries: wavelength, reading");
  for (double e : error.entries)
    if (!(e >= 0)) throw DomainError("error terms must be >= 0");

  FactorizationOutcome out;
  out.requested_n = n;
  std::uint64_t odd = n;
  while (odd % 2 == 0) {
    odd /= 2;
    ++out.halvings;
  }
  out.odd_part = odd;
  const Amount size = bit_size(n);
  out.resources.time = kAnalogueTime + out.halvings * size;
  out.resources.space = kAnalogueSpace;

  if (odd == 1) {
    out.corrected_m = 1;
    return out;
  }

  const auto pre = digital_pre(odd);
  const auto device = lambda_only_device(odd);
  const Values implemented = apply_input_error(Values{pre.two_over_n}, device, error.inputs(1), draw);
  if (!(implemented[0] > 0)) throw DomainError("implemented wavelength is not positive");
  out.corrected_m = detail::corrected_target(implemented[0]);

  // Output errors are drawn per reading from their own substream.
  const DeviceModel reader = wavelength_and_reading_device(odd);
  const auto readings = out.corrected_m >= 1 ? detail::divisor_readings(out.corrected_m) : std::vector<SensorReading>{};
  std::size_t index = 0;
  for (const auto& r : readings) {
    Draw reading_draw = draw;
    if (auto* rd = std::get_if<RandomDraw>(&draw)) reading_draw = RandomDraw{pw::detail::splitmix64(rd->seed + 1 + index)};
    ++index;
    const double c = apply_output_error(Values{r.c}, reader, error.outputs(1), reading_draw)[0];
    Candidate cand;
    if (c > 0 && c < 2) cand.factor = factor_from_reading(c, odd);
    cand.verified = cand.factor >= 1 && odd % cand.factor == 0;
    out.candidates.push_back(cand);
  }
  std::sort(out.candidates.begin(), out.candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.factor < b.factor; });
  out.candidates.erase(std::unique(out.candidates.begin(), out.candidates.end()), out.candidates.end());

  const bool any_verified = std::any_of(out.candidates.begin(), out.candidates.end(), [](const Candidate& c) { return c.verified; });
  out.suspect_miscorrection = out.corrected_m != odd || !any_verified;

  out.resources.time = add_amounts(out.resources.time, pre.bit_ops + digital_bit_ops(odd));
  out.resources.precision = precision(Values{pre.two_over_n}, device, AnalyticMode{});
  out.output_precision = precision_from_measure(analytic_reading_threshold(odd));
  return out;
}

inline FactorizationOutcome run_device(std::uint64_t n) { return run_device(n, pipeline_error(0, 0), ExactDraw{}); }

// ---------------------------------------------------------------------------
// Resource profile
// ---------------------------------------------------------------------------

/// Complexity functions {time, space, precision} over input sizes |n| for
/// exact runs on the given odd n.
inline Profile resource_profile(const std::vector<std::uint64_t>& n_values) {
  for (auto n : n_values)
    if (n < 3 || n % 2 == 0) throw DomainError("resource profile requires odd n >= 3");
  std::map<std::uint64_t, ResourceTally> tallies;
  for (auto n : n_values) tallies.try_emplace(n, run_device(n).resources);

  auto sizer = [](std::uint64_t n) { return bit_size(n); };
  auto make = [&](std::string name, Amount ResourceTally::*field) {
    ResourceFunction<std::uint64_t> f;
    f.name = std::move(name);
    f.evaluate = [&tallies, field](const std::uint64_t& n) { return tallies.at(n).*field; };
    return complexity_of(f, sizer, n_values);
  };
  Profile profile;
  profile["time"] = make("time", &ResourceTally::time);
  profile["space"] = make("space", &ResourceTally::space);
  profile["precision"] = make("precision", &ResourceTally::precision);
  return profile;
}

}  // namespace pw::factorizer
