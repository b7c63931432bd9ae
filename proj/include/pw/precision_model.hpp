#pragma once

// Precision as a computational resource.
//
// A device has p input and q output parameters. An intended input x is
// implemented as some x' within the input error bands, the device computes
// true outputs y' (possibly several), these are measured as y'' within the
// output error bands and interpreted as z = interpret(y''). An error vector
// is precise for x when every z so reachable is a correct output for x.
// The precision required for x is floor(1 / V(x)) where V(x) is the volume
// of the set of precise error vectors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "pw/error.hpp"
#include "pw/resource_core.hpp"

namespace pw {

enum class Role { Input, Output };
enum class ErrorModel { Additive, Multiplicative };

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

struct ParameterSpec {
  std::string name;
  Role role = Role::Input;
  Interval values;
  ErrorModel error_model = ErrorModel::Additive;
};

/// Error terms, inputs first then outputs.
struct ErrorVector {
  std::vector<double> entries;

  std::span<const double> inputs(std::size_t p) const { return std::span(entries).first(p); }
  std::span<const double> outputs(std::size_t p) const { return std::span(entries).subspan(p); }
};

using Values = std::vector<double>;
using Interpreted = std::vector<std::int64_t>;

/// Round half up, the default interpretation of a measured real.
inline std::int64_t round_half_up(double v) { return static_cast<std::int64_t>(std::floor(v + 0.5)); }

struct DeviceModel {
  std::vector<ParameterSpec> inputs;
  std::vector<ParameterSpec> outputs;

  /// The computation relation: every true output for an implemented input.
  /// Each reading holds at least q entries; entries beyond the q measured
  /// output parameters are passed to interpret without measurement error.
  std::function<std::vector<Values>(std::span<const double> implemented)> compute;

  /// Measured output -> interpreted output. Defaults to round half up.
  std::function<Interpreted(std::span<const double> measured)> interpret;

  /// The correct interpreted outputs for an intended input, when they can
  /// be enumerated.
  std::function<std::optional<std::vector<Interpreted>>(std::span<const double> intended)> correct_outputs;

  /// Points inside [lo, hi] of error coordinate `coord` (inputs then
  /// outputs) where the interpreted output can change. With these, checking
  /// band endpoints and breakpoints is exact for piecewise-monotone devices.
  std::function<std::vector<double>(std::size_t coord, double lo, double hi)> breakpoints;

  /// Per-coordinate corrigibility thresholds t_j, when the precise region is
  /// the box of errors with e_j < t_j for every j. May be infinite.
  std::function<std::vector<double>(std::span<const double> intended)> coordinate_thresholds;

  /// Bounding box of error space for Monte-Carlo measurement.
  std::vector<Interval> error_bounding_box;

  std::size_t p() const noexcept { return inputs.size(); }
  std::size_t q() const noexcept { return outputs.size(); }
  std::size_t dimension() const noexcept { return inputs.size() + outputs.size(); }

  Interpreted interpret_value(std::span<const double> measured) const {
    if (interpret) return interpret(measured);
    Interpreted z;
    z.reserve(measured.size());
    for (double v : measured) z.push_back(round_half_up(v));
    return z;
  }
};

// ---------------------------------------------------------------------------
// Error relations
// ---------------------------------------------------------------------------

struct ExactDraw {};
enum class Endpoint { Lower, Upper };
struct WorstCaseDraw {
  Endpoint endpoint = Endpoint::Upper;
};
struct RandomDraw {
  std::uint64_t seed = 0;
};
using Draw = std::variant<ExactDraw, WorstCaseDraw, RandomDraw>;

namespace detail {

inline void check_error_term(const ParameterSpec& spec, double e) {
  if (spec.error_model == ErrorModel::Additive && !(e >= 0))
    throw DomainError("error term for '" + spec.name + "' must be >= 0");
  if (spec.error_model == ErrorModel::Multiplicative && !(e >= 1))
    throw DomainError("multiplicative error term for '" + spec.name + "' must be >= 1");
}

// Values the error relation may produce from v: [v - e, v + e] or [v / e, e v].
inline Interval error_band(const ParameterSpec& spec, double v, double e) {
  check_error_term(spec, e);
  if (spec.error_model == ErrorModel::Additive) return {v - e, v + e};
  if (!(v > 0)) throw DomainError("multiplicative error requires a positive value for '" + spec.name + "'");
  return {v / e, v * e};
}

// Uniform double in [0, 1) from the top 53 bits.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline Values apply_error(std::span<const double> values, std::span<const ParameterSpec> specs,
                          std::span<const double> terms, const Draw& draw) {
  if (values.size() != specs.size() || terms.size() != specs.size())
    throw DomainError("parameter, value and error counts differ");
  Values out(values.begin(), values.end());
  std::mt19937_64 rng(std::holds_alternative<RandomDraw>(draw) ? std::get<RandomDraw>(draw).seed : 0);
  for (std::size_t j = 0; j < specs.size(); ++j) {
    const Interval band = error_band(specs[j], values[j], terms[j]);
    if (std::holds_alternative<WorstCaseDraw>(draw))
      out[j] = std::get<WorstCaseDraw>(draw).endpoint == Endpoint::Lower ? band.lo : band.hi;
    else if (std::holds_alternative<RandomDraw>(draw))
      out[j] = band.lo + (band.hi - band.lo) * unit_uniform(rng);
  }
  return out;
}

}  // namespace detail

/// Implemented input value for an intended one under input error terms.
inline Values apply_input_error(std::span<const double> intended, const DeviceModel& device,
                                std::span<const double> input_errors, const Draw& draw) {
  if (intended.size() != device.p()) throw DomainError("input value has wrong arity");
  for (std::size_t j = 0; j < device.p(); ++j)
    if (!device.inputs[j].values.contains(intended[j]))
      throw DomainError("intended value outside the range of '" + device.inputs[j].name + "'");
  return detail::apply_error(intended, device.inputs, input_errors, draw);
}

/// Measured output value for a true one under output error terms.
inline Values apply_output_error(std::span<const double> true_output, const DeviceModel& device,
                                 std::span<const double> output_errors, const Draw& draw) {
  if (true_output.size() != device.q()) throw DomainError("output value has wrong arity");
  return detail::apply_error(true_output, device.outputs, output_errors, draw);
}

// ---------------------------------------------------------------------------
// Precise errors
// ---------------------------------------------------------------------------

struct PreciseVerdict {
  bool precise = false;
  /// True when the verdict rests on a sampled grid rather than exact
  /// endpoint/breakpoint enumeration.
  bool sampled = false;
};

namespace detail {

inline constexpr std::size_t kSampleGrid = 65;
inline constexpr std::size_t kMaxBreakpoints = 64;

struct Candidates {
  std::vector<double> points;
  bool sampled = false;
};

inline Candidates band_candidates(const DeviceModel& device, std::size_t coord, const Interval& band,
                                  double centre) {
  Candidates c;
  c.points = {band.lo, centre, band.hi};
  if (device.breakpoints) {
    auto bps = device.breakpoints(coord, band.lo, band.hi);
    if (bps.size() > kMaxBreakpoints) {
      // Keep the outermost ones; interior pieces go unchecked.
      std::sort(bps.begin(), bps.end());
      bps.erase(bps.begin() + kMaxBreakpoints / 2, bps.end() - kMaxBreakpoints / 2);
      c.sampled = true;
    }
    for (double b : bps)
      if (band.contains(b)) c.points.push_back(b);
  } else if (band.hi > band.lo) {
    for (std::size_t i = 1; i + 1 < kSampleGrid; ++i)
      c.points.push_back(band.lo + (band.hi - band.lo) * static_cast<double>(i) / (kSampleGrid - 1));
    c.sampled = true;
  }
  std::sort(c.points.begin(), c.points.end());
  c.points.erase(std::unique(c.points.begin(), c.points.end()), c.points.end());
  return c;
}

// Calls fn on every combination of per-coordinate candidates; stops early
// when fn returns false.
template <typename Fn>
bool for_each_combination(const std::vector<std::vector<double>>& axes, Fn&& fn) {
  Values current(axes.size());
  std::vector<std::size_t> idx(axes.size(), 0);
  for (const auto& a : axes)
    if (a.empty()) return true;
  for (;;) {
    for (std::size_t j = 0; j < axes.size(); ++j) current[j] = axes[j][idx[j]];
    if (!fn(std::as_const(current))) return false;
    std::size_t j = 0;
    while (j < axes.size() && ++idx[j] == axes[j].size()) idx[j++] = 0;
    if (j == axes.size()) return true;
  }
}

}  // namespace detail

/// Decides whether `error` is precise for `intended` by walking the chain
/// intended -> implemented -> true output -> measured -> interpreted over
/// band endpoints and the device's breakpoints.
inline PreciseVerdict check_precise(const ErrorVector& error, std::span<const double> intended,
                                    const DeviceModel& device) {
  if (error.entries.size() != device.dimension()) throw DomainError("error vector has wrong length");
  if (intended.size() != device.p()) throw DomainError("input value has wrong arity");
  if (!device.correct_outputs) throw DomainError("undecidable without enumerator");
  const auto correct = device.correct_outputs(intended);
  if (!correct) throw DomainError("undecidable without enumerator");
  auto is_correct = [&](const Interpreted& z) { return std::find(correct->begin(), correct->end(), z) != correct->end(); };

  PreciseVerdict verdict{true, false};
  std::vector<std::vector<double>> input_axes;
  for (std::size_t j = 0; j < device.p(); ++j) {
    const auto band = detail::error_band(device.inputs[j], intended[j], error.entries[j]);
    auto c = detail::band_candidates(device, j, band, intended[j]);
    verdict.sampled |= c.sampled;
    input_axes.push_back(std::move(c.points));
  }

  const bool all_correct = detail::for_each_combination(input_axes, [&](const Values& implemented) {
    for (std::size_t j = 0; j < device.p(); ++j)
      if (!device.inputs[j].values.contains(implemented[j])) return false;
    const auto readings = device.compute(implemented);
    if (readings.empty()) return false;
    for (const auto& reading : readings) {
      if (reading.size() < device.q()) throw DomainError("device reading shorter than its output parameters");
      std::vector<std::vector<double>> output_axes;
      for (std::size_t k = 0; k < device.q(); ++k) {
        const auto band = detail::error_band(device.outputs[k], reading[k], error.entries[device.p() + k]);
        auto c = detail::band_candidates(device, device.p() + k, band, reading[k]);
        verdict.sampled |= c.sampled;
        output_axes.push_back(std::move(c.points));
      }
      Values measured = reading;
      const bool ok = device.q() == 0
                          ? is_correct(device.interpret_value(measured))
                          : detail::for_each_combination(output_axes, [&](const Values& out) {
                              std::copy(out.begin(), out.end(), measured.begin());
                              return is_correct(device.interpret_value(measured));
                            });
      if (!ok) return false;
    }
    return true;
  });
  verdict.precise = all_correct;
  return verdict;
}

inline bool is_precise_for(const ErrorVector& error, std::span<const double> intended, const DeviceModel& device) {
  return check_precise(error, intended, device).precise;
}

// ---------------------------------------------------------------------------
// Measure of the precise region and precision
// ---------------------------------------------------------------------------

struct AnalyticMode {};
struct MonteCarloMode {
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  /// Worker threads; results do not depend on this.
  unsigned workers = 1;
};
using MeasureMode = std::variant<AnalyticMode, MonteCarloMode>;

struct PreciseErrorRegion {
  std::size_t dimension = 0;
  std::function<bool(const ErrorVector&)> membership;
  double measure = 0.0;  // may be +infinity
  MeasureMode mode = AnalyticMode{};
  std::size_t mc_samples = 0;
  double mc_stderr = 0.0;
  /// Set when the measure is infinite because the region is unbounded.
  bool unbounded_warning = false;
  bool sampled_verdicts = false;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::size_t kChunk = 4096;

struct ChunkTally {
  std::size_t hits = 0;
  bool sampled = false;
};

inline ChunkTally mc_chunk(const DeviceModel& device, std::span<const double> intended,
                           std::uint64_t root_seed, std::size_t chunk, std::size_t count) {
  // Each chunk draws from its own substream keyed by (root seed, index).
  std::mt19937_64 rng(splitmix64(root_seed ^ splitmix64(chunk)));
  ChunkTally t;
  ErrorVector e{Values(device.dimension())};
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < e.entries.size(); ++j) {
      const auto& b = device.error_bounding_box[j];
      e.entries[j] = b.lo + (b.hi - b.lo) * unit_uniform(rng);
    }
    const auto v = check_precise(e, intended, device);
    t.hits += v.precise ? 1 : 0;
    t.sampled |= v.sampled;
  }
  return t;
}

}  // namespace detail

/// Volume of the set of errors precise for `intended`.
///
/// Analytic mode multiplies the device's per-coordinate thresholds.
/// Monte-Carlo mode samples the declared bounding box uniformly and reports
/// hit fraction times box volume with its binomial standard error.
inline PreciseErrorRegion precise_error_measure(std::span<const double> intended, const DeviceModel& device,
                                                const MeasureMode& mode) {
  PreciseErrorRegion region;
  region.dimension = device.dimension();
  region.mode = mode;
  region.membership = [device, x = Values(intended.begin(), intended.end())](const ErrorVector& e) {
    return is_precise_for(e, x, device);
  };

  if (std::holds_alternative<AnalyticMode>(mode)) {
    if (!device.coordinate_thresholds) {
      region.measure = std::numeric_limits<double>::infinity();
      region.unbounded_warning = true;
      return region;
    }
    const auto t = device.coordinate_thresholds(intended);
    if (t.size() != device.dimension()) throw DomainError("threshold count differs from error dimension");
    double measure = 1.0;
    bool zero = false;
    for (double tj : t) {
      if (!(tj >= 0)) throw DomainError("negative corrigibility threshold");
      if (tj == 0) zero = true;
      measure *= tj;
    }
    if (zero) measure = 0.0;
    region.measure = measure;
    region.unbounded_warning = std::isinf(measure);
    return region;
  }

  const auto& mc = std::get<MonteCarloMode>(mode);
  if (device.error_bounding_box.size() != device.dimension())
    throw DomainError("Monte-Carlo mode requires a bounding box for every error coordinate");
  if (mc.samples == 0) throw DomainError("Monte-Carlo mode requires samples > 0");
  double volume = 1.0;
  for (const auto& b : device.error_bounding_box) {
    if (!(b.hi >= b.lo) || !std::isfinite(b.hi - b.lo)) throw DomainError("bounding box must be finite");
    volume *= b.hi - b.lo;
  }

  const std::size_t chunks = (mc.samples + detail::kChunk - 1) / detail::kChunk;
  std::vector<detail::ChunkTally> tallies(chunks);
  auto run_range = [&](std::size_t first, std::size_t stride) {
    for (std::size_t c = first; c < chunks; c += stride) {
      const std::size_t count = std::min(detail::kChunk, mc.samples - c * detail::kChunk);
      tallies[c] = detail::mc_chunk(device, intended, mc.seed, c, count);
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(mc.workers, static_cast<unsigned>(chunks)));
  if (workers == 1) {
    run_range(0, 1);
  } else {
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < workers; ++w) jobs.push_back(std::async(std::launch::async, run_range, w, workers));
    for (auto& j : jobs) j.get();
  }

  std::size_t hits = 0;
  for (const auto& t : tallies) {
    hits += t.hits;
    region.sampled_verdicts |= t.sampled;
  }
  const double n = static_cast<double>(mc.samples);
  const double frac = static_cast<double>(hits) / n;
  region.measure = frac * volume;
  region.mc_samples = mc.samples;
  region.mc_stderr = volume * std::sqrt(frac * (1.0 - frac) / n);
  return region;
}

/// floor(1 / V) with 1/0 = infinity and 1/infinity = 0.
inline Amount precision_from_measure(double measure) {
  if (!(measure >= 0)) throw DomainError("measure must be non-negative");
  if (measure == 0) return kInfinite;
  if (std::isinf(measure)) return 0;
  const double r = std::floor(1.0 / measure);
  if (r >= 0x1.0p64) return kInfinite;
  return static_cast<Amount>(r);
}

inline Amount precision(std::span<const double> intended, const DeviceModel& device, const MeasureMode& mode) {
  return precision_from_measure(precise_error_measure(intended, device, mode).measure);
}

}  // namespace pw
