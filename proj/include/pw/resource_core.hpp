#pragma once

// Model-independent complexity framework: resource functions, complexity
// functions (worst case per input size), growth classes, dominance,
// overall complexity and normalization.

#include <algorithm>
#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pw/error.hpp"

namespace pw {

/// Natural-number resource amount. kInfinite stands for the value infinity.
using Amount = std::uint64_t;
inline constexpr Amount kInfinite = std::numeric_limits<Amount>::max();

/// Saturating addition; anything plus infinity is infinity.
constexpr Amount add_amounts(Amount a, Amount b) noexcept {
  if (a == kInfinite || b == kInfinite || a > kInfinite - b) return kInfinite;
  return a + b;
}

/// Input size in bits: the bit length of k, with |0| = 1.
constexpr std::size_t bit_size(std::uint64_t k) noexcept {
  return k == 0 ? 1 : static_cast<std::size_t>(std::bit_width(k));
}

// ---------------------------------------------------------------------------
// Growth classes
// ---------------------------------------------------------------------------

class GrowthClass {
 public:
  enum class Kind { Constant = 0, Logarithmic = 1, Polynomial = 2, Exponential = 3 };

  static constexpr GrowthClass constant() { return GrowthClass(Kind::Constant, 0); }
  static constexpr GrowthClass logarithmic() { return GrowthClass(Kind::Logarithmic, 0); }
  static GrowthClass polynomial(int degree) {
    if (degree < 1) throw DomainError("polynomial degree must be >= 1");
    return GrowthClass(Kind::Polynomial, degree);
  }
  static constexpr GrowthClass exponential() { return GrowthClass(Kind::Exponential, 0); }

  constexpr Kind kind() const noexcept { return kind_; }
  /// Polynomial degree; 0 for the other kinds.
  constexpr int degree() const noexcept { return degree_; }

  friend constexpr auto operator<=>(const GrowthClass&, const GrowthClass&) = default;

  /// Text tag: const | log | poly:<d> | exp
  std::string tag() const {
    switch (kind_) {
      case Kind::Constant: return "const";
      case Kind::Logarithmic: return "log";
      case Kind::Polynomial: return "poly:" + std::to_string(degree_);
      case Kind::Exponential: return "exp";
    }
    return "?";
  }

  static GrowthClass from_tag(const std::string& tag) {
    if (tag == "const") return constant();
    if (tag == "log") return logarithmic();
    if (tag == "exp") return exponential();
    if (tag.rfind("poly:", 0) == 0) {
      try {
        std::size_t used = 0;
        int d = std::stoi(tag.substr(5), &used);
        if (used == tag.size() - 5) return polynomial(d);
      } catch (const std::logic_error&) {
      }
    }
    throw DomainError("unknown growth tag '" + tag + "'");
  }

 private:
  constexpr GrowthClass(Kind k, int d) : kind_(k), degree_(d) {}
  // Member order makes the defaulted comparison the class total order.
  Kind kind_;
  int degree_;
};

inline std::ostream& operator<<(std::ostream& os, const GrowthClass& g) { return os << g.tag(); }

/// f in O(g) at the level of growth classes.
constexpr bool growth_leq(const GrowthClass& f, const GrowthClass& g) noexcept { return f <= g; }

namespace detail {

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
};

// Ordinary least squares y = intercept + slope * x. Requires >= 2 distinct x.
inline std::optional<LineFit> fit_line(std::span<const double> xs, std::span<const double> ys) {
  const auto n = static_cast<double>(xs.size());
  if (xs.size() < 2) return std::nullopt;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx <= 0) return std::nullopt;
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

// Models are compared in a common space: squared error of log(1 + amount).
inline double log_residual(std::span<const double> amounts, std::span<const double> predicted) {
  double r = 0;
  for (std::size_t i = 0; i < amounts.size(); ++i) {
    const double p = std::max(predicted[i], 0.0);
    const double d = std::log1p(amounts[i]) - std::log1p(p);
    r += d * d;
  }
  return r;
}

}  // namespace detail

/// Result of a growth fit: the chosen class and its residual.
struct GrowthFit {
  GrowthClass growth = GrowthClass::constant();
  double residual = 0.0;
};

/// Least-squares growth classification over (size, amount) samples.
///
/// Candidate models: Constant (mean), Logarithmic (a ~ alpha + beta ln n),
/// Polynomial (degree = log-log slope rounded into 1..6, coefficient fitted
/// in log space) and Exponential (ln a linear in n, positive rate). Each
/// model is scored by the squared error of log(1 + amount); the smallest
/// residual wins and near-ties go to the smaller class.
inline GrowthFit fit_growth(std::span<const std::pair<double, double>> samples) {
  std::set<double> sizes;
  for (const auto& [n, a] : samples) {
    if (!std::isfinite(a) || a < 0) throw DomainError("growth samples must be finite and non-negative");
    if (!(n > 0)) throw DomainError("growth sample sizes must be positive");
    sizes.insert(n);
  }
  if (sizes.size() < 4) throw DomainError("insufficient samples");

  std::vector<double> ns, as;
  for (const auto& [n, a] : samples) {
    ns.push_back(n);
    as.push_back(a);
  }
  std::vector<double> pred(ns.size());

  std::vector<GrowthFit> candidates;

  // Constant
  {
    double mean = 0;
    for (double a : as) mean += a;
    mean /= static_cast<double>(as.size());
    std::fill(pred.begin(), pred.end(), mean);
    candidates.push_back({GrowthClass::constant(), detail::log_residual(as, pred)});
  }
  // Logarithmic
  {
    std::vector<double> lx;
    for (double n : ns) lx.push_back(std::log(n));
    if (auto f = detail::fit_line(lx, as)) {
      for (std::size_t i = 0; i < ns.size(); ++i) pred[i] = f->intercept + f->slope * lx[i];
      candidates.push_back({GrowthClass::logarithmic(), detail::log_residual(as, pred)});
    }
  }
  // Log-space fits use strictly positive amounts only.
  std::vector<double> pos_n, pos_ln_n, pos_ln_a;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (as[i] > 0) {
      pos_n.push_back(ns[i]);
      pos_ln_n.push_back(std::log(ns[i]));
      pos_ln_a.push_back(std::log(as[i]));
    }
  }
  // Polynomial
  if (auto f = detail::fit_line(pos_ln_n, pos_ln_a)) {
    const int degree = std::clamp(static_cast<int>(std::lround(f->slope)), 1, 6);
    double ln_c = 0;
    for (std::size_t i = 0; i < pos_ln_n.size(); ++i) ln_c += pos_ln_a[i] - degree * pos_ln_n[i];
    ln_c /= static_cast<double>(pos_ln_n.size());
    for (std::size_t i = 0; i < ns.size(); ++i) pred[i] = std::exp(ln_c + degree * std::log(ns[i]));
    candidates.push_back({GrowthClass::polynomial(degree), detail::log_residual(as, pred)});
  }
  // Exponential
  if (auto f = detail::fit_line(pos_n, pos_ln_a); f && f->slope > 1e-12) {
    for (std::size_t i = 0; i < ns.size(); ++i) pred[i] = std::exp(f->intercept + f->slope * ns[i]);
    candidates.push_back({GrowthClass::exponential(), detail::log_residual(as, pred)});
  }

  // candidates are in ascending class order
  GrowthFit best = candidates.front();
  for (const auto& c : candidates) {
    const double tie = 1e-9 * std::max(1.0, best.residual);
    if (c.residual < best.residual - tie) best = c;
  }
  return best;
}

inline GrowthClass classify_growth(std::span<const std::pair<double, double>> samples) {
  return fit_growth(samples).growth;
}

// ---------------------------------------------------------------------------
// Resource and complexity functions
// ---------------------------------------------------------------------------

/// Enumerates the attainable values of a resource in ascending order:
/// returns the index-th value, or nullopt past the end of a finite set.
using AttainableEnumerator = std::function<std::optional<Amount>(std::size_t index)>;

/// A named resource over inputs of type Input.
template <typename Input>
struct ResourceFunction {
  std::string name;
  std::function<Amount(const Input&)> evaluate;
  std::optional<AttainableEnumerator> attainable;

  Amount operator()(const Input& x) const { return evaluate(x); }
};

/// A resource's worst-case amount for each input size (absent sizes have
/// no inputs in the sampled domain).
struct ComplexityFunction {
  std::map<std::size_t, Amount> values;
  /// Unset when fewer than four sizes were sampled or a value is infinite.
  std::optional<GrowthClass> growth;

  std::optional<Amount> at(std::size_t size) const {
    auto it = values.find(size);
    if (it == values.end()) return std::nullopt;
    return it->second;
  }

  bool operator==(const ComplexityFunction&) const = default;
};

/// Classifies a complexity function's values, or nullopt when it cannot be
/// classified (too few sizes, infinite values).
inline std::optional<GrowthClass> try_classify(const std::map<std::size_t, Amount>& values) {
  if (values.size() < 4) return std::nullopt;
  std::vector<std::pair<double, double>> samples;
  for (const auto& [size, amount] : values) {
    if (amount == kInfinite) return std::nullopt;
    samples.emplace_back(static_cast<double>(size), static_cast<double>(amount));
  }
  return classify_growth(samples);
}

/// Worst-case amount per input size over a finite domain.
template <typename Input, typename Sizer>
ComplexityFunction complexity_of(const ResourceFunction<Input>& resource, Sizer&& sizer,
                                 std::span<const Input> domain) {
  if (domain.empty()) throw DomainError("no inputs");
  ComplexityFunction result;
  for (const auto& x : domain) {
    const std::size_t size = sizer(x);
    const Amount amount = resource(x);
    auto [it, inserted] = result.values.try_emplace(size, amount);
    if (!inserted) it->second = std::max(it->second, amount);
  }
  result.growth = try_classify(result.values);
  return result;
}

template <typename Input, typename Sizer>
ComplexityFunction complexity_of(const ResourceFunction<Input>& resource, Sizer&& sizer,
                                 const std::vector<Input>& domain) {
  return complexity_of(resource, std::forward<Sizer>(sizer), std::span<const Input>(domain));
}

using Profile = std::map<std::string, ComplexityFunction>;

/// Names whose growth class is maximal; ties are all returned.
inline std::set<std::string> dominant_resources(const Profile& profiles) {
  if (profiles.empty()) throw DomainError("no resources in profile");
  std::optional<GrowthClass> top;
  for (const auto& [name, cf] : profiles) {
    if (!cf.growth) throw DomainError("resource '" + name + "' has no growth class");
    if (!top || growth_leq(*top, *cf.growth)) top = *cf.growth;
  }
  std::set<std::string> result;
  for (const auto& [name, cf] : profiles)
    if (*cf.growth == *top) result.insert(name);
  return result;
}

/// Pointwise sum of the dominant resources' complexity functions.
inline ComplexityFunction overall_complexity(const Profile& profiles) {
  const auto dominant = dominant_resources(profiles);
  std::set<std::size_t> all_sizes;
  for (const auto& name : dominant)
    for (const auto& [size, _] : profiles.at(name).values) all_sizes.insert(size);

  std::ostringstream missing;
  for (const auto& name : dominant) {
    const auto& values = profiles.at(name).values;
    for (std::size_t size : all_sizes)
      if (!values.contains(size)) missing << ' ' << name << '@' << size;
  }
  if (!missing.str().empty()) throw DomainError("mismatched size ranges, missing:" + missing.str());

  ComplexityFunction result;
  for (std::size_t size : all_sizes) {
    Amount total = 0;
    for (const auto& name : dominant) total = add_amounts(total, profiles.at(name).values.at(size));
    result.values[size] = total;
  }
  result.growth = try_classify(result.values);
  return result;
}

namespace detail {

// Index of value in an ascending enumeration, by galloping then bisection.
inline std::optional<std::size_t> rank_in(const AttainableEnumerator& attainable, Amount value) {
  std::size_t hi = 1;
  std::size_t lo = 0;
  for (;;) {
    auto v = attainable(hi - 1);
    if (!v || *v >= value) break;
    lo = hi;
    if (hi > std::numeric_limits<std::size_t>::max() / 2) return std::nullopt;
    hi *= 2;
  }
  // invariant: every index < lo holds a value below `value`; search [lo, hi)
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    auto v = attainable(mid);
    if (v && *v < value)
      lo = mid + 1;
    else
      hi = mid;
  }
  auto v = attainable(lo);
  if (v && *v == value) return lo;
  return std::nullopt;
}

}  // namespace detail

/// Rank relabeling: maps each input to the 0-based rank of its amount in
/// the ascending attainable set, so the result attains 0, 1, 2, ...
template <typename Input>
ResourceFunction<Input> normalize(const ResourceFunction<Input>& resource) {
  if (!resource.attainable) throw DomainError("normalize requires an attainable-set enumerator");
  auto attainable = *resource.attainable;
  auto evaluate = resource.evaluate;

  ResourceFunction<Input> result;
  result.name = resource.name;
  result.evaluate = [attainable, evaluate](const Input& x) -> Amount {
    const Amount v = evaluate(x);
    auto rank = detail::rank_in(attainable, v);
    if (!rank) throw DomainError("value outside declared attainable set");
    return static_cast<Amount>(*rank);
  };
  result.attainable = [attainable](std::size_t index) -> std::optional<Amount> {
    if (!attainable(index)) return std::nullopt;
    return static_cast<Amount>(index);
  };
  return result;
}

/// Attainable enumerator over an explicit ascending list.
inline AttainableEnumerator attainable_list(std::vector<Amount> ascending) {
  if (!std::is_sorted(ascending.begin(), ascending.end()) ||
      std::adjacent_find(ascending.begin(), ascending.end()) != ascending.end())
    throw DomainError("attainable list must be strictly ascending");
  return [values = std::move(ascending)](std::size_t i) -> std::optional<Amount> {
    if (i >= values.size()) return std::nullopt;
    return values[i];
  };
}

/// Attainable enumerator for all naturals 0, 1, 2, ...
inline AttainableEnumerator attainable_naturals() {
  return [](std::size_t i) -> std::optional<Amount> { return static_cast<Amount>(i); };
}

// ---------------------------------------------------------------------------
// CSV: size,amount,growth
// ---------------------------------------------------------------------------

inline std::string amount_text(Amount a) { return a == kInfinite ? "inf" : std::to_string(a); }

inline Amount parse_amount(const std::string& text) {
  if (text == "inf") return kInfinite;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used == text.size() && text.find('-') == std::string::npos) return v;
  } catch (const std::logic_error&) {
  }
  throw DomainError("bad amount '" + text + "'");
}

inline void write_complexity_csv(std::ostream& os, const ComplexityFunction& cf) {
  const std::string tag = cf.growth ? cf.growth->tag() : "";
  os << "size,amount,growth\n";
  for (const auto& [size, amount] : cf.values) os << size << ',' << amount_text(amount) << ',' << tag << '\n';
}

inline ComplexityFunction read_complexity_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "size,amount,growth") throw DomainError("missing CSV header size,amount,growth");
  ComplexityFunction cf;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string size, amount, growth;
    std::getline(row, size, ',');
    std::getline(row, amount, ',');
    std::getline(row, growth);
    cf.values[static_cast<std::size_t>(parse_amount(size))] = parse_amount(amount);
    if (!growth.empty()) cf.growth = GrowthClass::from_tag(growth);
  }
  return cf;
}

}  // namespace pw
