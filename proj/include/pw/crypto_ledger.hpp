#pragma once

// Category-tagged cost accounting for protocol traces.
//
// Events are charged to anonymous agents in four categories. An event that
// costs in more than one category marks an interaction between categories,
// which is what stops a protocol's security cost from decomposing into
// independent per-category quantities.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "pw/error.hpp"

namespace pw::ledger {

enum class Category { Computation = 0, Communication = 1, Information = 2, Primitive = 3 };

inline constexpr std::array<Category, 4> kCategories{Category::Computation, Category::Communication,
                                                     Category::Information, Category::Primitive};

/// Units: bit operations, bits transmitted, milli-bits leaked, invocations.
inline const char* category_key(Category c) {
  switch (c) {
    case Category::Computation: return "computation";
    case Category::Communication: return "communication";
    case Category::Information: return "information_millibits";
    case Category::Primitive: return "primitive";
  }
  return "?";
}

using AgentId = std::uint32_t;

struct CostEvent {
  AgentId agent = 0;
  std::string subprocess;
  std::map<Category, std::int64_t> costs;

  bool operator==(const CostEvent&) const = default;

  std::size_t positive_categories() const {
    std::size_t k = 0;
    for (const auto& [_, amount] : costs) k += amount > 0 ? 1 : 0;
    return k;
  }
};

inline void validate_event(const CostEvent& e) {
  if (e.costs.empty()) throw DomainError("cost event '" + e.subprocess + "' has no costs");
  for (const auto& [c, amount] : e.costs)
    if (amount < 0) throw DomainError("cost event '" + e.subprocess + "' has a negative " + category_key(c) + " cost");
}

/// Append-only event sequence.
class Ledger {
 public:
  void append(CostEvent e) {
    validate_event(e);
    events_.push_back(std::move(e));
  }
  const std::vector<CostEvent>& events() const noexcept { return events_; }
  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }

  /// This ledger's events followed by other's.
  Ledger concat(const Ledger& other) const {
    Ledger out = *this;
    out.events_.insert(out.events_.end(), other.events_.begin(), other.events_.end());
    return out;
  }

 private:
  std::vector<CostEvent> events_;
};

inline Ledger record_event(Ledger ledger, CostEvent event) {
  ledger.append(std::move(event));
  return ledger;
}

struct CategoryTotals {
  std::array<std::int64_t, 4> values{};

  std::int64_t& operator[](Category c) { return values[static_cast<std::size_t>(c)]; }
  std::int64_t operator[](Category c) const { return values[static_cast<std::size_t>(c)]; }
  bool operator==(const CategoryTotals&) const = default;

  bool leq(const CategoryTotals& other) const {
    for (std::size_t i = 0; i < values.size(); ++i)
      if (values[i] > other.values[i]) return false;
    return true;
  }
};

using EventPredicate = std::function<bool(const CostEvent&)>;

inline CategoryTotals category_totals(const Ledger& ledger, const EventPredicate& keep = {}) {
  CategoryTotals t;
  for (const auto& e : ledger.events()) {
    if (keep && !keep(e)) continue;
    for (const auto& [c, amount] : e.costs) t[c] += amount;
  }
  return t;
}

/// Events with positive cost in at least two categories.
inline std::vector<CostEvent> interaction_events(const Ledger& ledger) {
  std::vector<CostEvent> out;
  for (const auto& e : ledger.events())
    if (e.positive_categories() >= 2) out.push_back(e);
  return out;
}

enum class Decomposition { Decomposable, Interacting };

struct SecurityVector {
  CategoryTotals totals;
  Decomposition flag = Decomposition::Decomposable;
};

/// Per-category totals over the events an adversary can observe.
inline SecurityVector security_vector(const Ledger& ledger, const EventPredicate& observable) {
  SecurityVector v;
  v.totals = category_totals(ledger, observable);
  for (const auto& e : ledger.events())
    if (observable(e) && e.positive_categories() >= 2) v.flag = Decomposition::Interacting;
  return v;
}

/// Information leaked by a deterministic channel: log2 of the number of
/// distinct observations over the message space.
template <typename Message, typename Duration>
double timing_leak_bits(const std::function<Duration(const Message&)>& timing, std::span<const Message> message_space) {
  std::set<Duration> classes;
  for (const auto& m : message_space) classes.insert(timing(m));
  if (classes.empty()) throw DomainError("empty message space");
  return std::log2(static_cast<double>(classes.size()));
}

/// Roles inferred from a trace: whoever leaks information on an observable
/// flow is the sender, the other observable communicator is the recipient,
/// and the adversary is the first unused agent index.
struct RoleReport {
  std::optional<AgentId> sender;
  std::optional<AgentId> recipient;
  AgentId adversary = 0;
};

inline RoleReport derive_roles(const Ledger& ledger, const EventPredicate& observable) {
  RoleReport r;
  AgentId max_agent = 0;
  for (const auto& e : ledger.events()) {
    max_agent = std::max(max_agent, e.agent);
    auto it = e.costs.find(Category::Information);
    if (!r.sender && observable(e) && it != e.costs.end() && it->second > 0) r.sender = e.agent;
  }
  for (const auto& e : ledger.events()) {
    auto it = e.costs.find(Category::Communication);
    if (!r.recipient && observable(e) && it != e.costs.end() && it->second > 0 && e.agent != r.sender)
      r.recipient = e.agent;
  }
  r.adversary = ledger.empty() ? 0 : max_agent + 1;
  return r;
}

// ---------------------------------------------------------------------------
// Toy RSA
// ---------------------------------------------------------------------------

namespace rsa {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

struct ModexpCost {
  u64 squarings = 0;
  u64 multiplies = 0;
};

inline u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

inline u64 modexp(u64 base, u64 exp, u64 m, ModexpCost* cost = nullptr) {
  u64 result = 1 % m;
  base %= m;
  while (exp > 0) {
    if (exp & 1) {
      result = mulmod(result, base, m);
      if (cost) ++cost->multiplies;
    }
    exp >>= 1;
    if (exp > 0) {
      base = mulmod(base, base, m);
      if (cost) ++cost->squarings;
    }
  }
  return result;
}

// Deterministic Miller-Rabin for 64-bit n. Counts modexp invocations.
inline bool is_prime(u64 n, u64& modexps) {
  if (n < 2) return false;
  for (u64 p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while (d % 2 == 0) {
    d /= 2;
    ++s;
  }
  for (u64 a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    u64 x = modexp(a, d, n);
    ++modexps;
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

inline std::optional<u64> mod_inverse(u64 a, u64 m) {
  __int128 t = 0, new_t = 1;
  __int128 r = m, new_r = a % m;
  while (new_r != 0) {
    const __int128 q = r / new_r;
    std::tie(t, new_t) = std::make_tuple(new_t, t - q * new_t);
    std::tie(r, new_r) = std::make_tuple(new_r, r - q * new_r);
  }
  if (r != 1) return std::nullopt;
  if (t < 0) t += m;
  return static_cast<u64>(t);
}

struct KeyPair {
  u64 modulus = 0;
  u64 public_exponent = 0;
  u64 private_exponent = 0;
};

}  // namespace rsa

/// An implicit information flow of a protocol step.
struct SideChannel {
  std::string name;
  double leak_bits = 0;
  /// Whether finding the channel needs one-off (non-commodity) effort; not
  /// charged to the ledger.
  bool requires_manufacturing_resources = true;
};

struct RsaTranscript {
  std::uint64_t modulus = 0;
  std::uint64_t public_exponent = 0;
  std::uint64_t message = 0;
  std::uint64_t ciphertext = 0;
  std::uint64_t decrypted = 0;
  /// Modeled encryption duration: the bit length of the plaintext.
  std::uint64_t encrypt_duration = 0;
  SideChannel timing_channel;
};

struct RsaRun {
  Ledger trace;
  RsaTranscript transcript;
};

inline constexpr AgentId kKeyOwner = 0;
inline constexpr AgentId kEncryptor = 1;

/// Deliberately leaky timing model: duration = bit length of the plaintext.
inline std::uint64_t encrypt_duration(std::uint64_t message) { return static_cast<std::uint64_t>(std::bit_width(message)); }

/// Events an eavesdropper sees: both transmissions and the encryption timing.
inline bool toy_rsa_observable(const CostEvent& e) {
  return e.subprocess == "send_public_key" || e.subprocess == "send_ciphertext" || e.subprocess == "encrypt";
}

/// Textbook RSA on a toy modulus of exactly `modulus_bits` bits: keygen,
/// public-key transmission, encryption, ciphertext transmission, decryption.
inline RsaRun run_toy_rsa(unsigned modulus_bits, std::uint64_t message, std::uint64_t seed) {
  using namespace rsa;
  if (modulus_bits > 64) throw DomainError("toy scale only");
  if (modulus_bits < 8) throw DomainError("modulus must have at least 8 bits");

  std::mt19937_64 rng(seed);
  u64 prng_draws = 0, modexps = 0, keygen_ops = 0;
  const unsigned p_bits = modulus_bits / 2;
  const unsigned q_bits = modulus_bits - p_bits;
  auto random_prime = [&](unsigned bits) {
    for (;;) {
      u64 c = rng();
      ++prng_draws;
      if (bits < 64) c &= (u64{1} << bits) - 1;
      c |= (u64{1} << (bits - 1)) | 1;
      keygen_ops += u64{bits} * bits;
      if (is_prime(c, modexps)) return c;
    }
  };

  KeyPair key;
  for (;;) {
    const u64 p = random_prime(p_bits);
    const u64 q = random_prime(q_bits);
    if (p == q) continue;
    const u128 n = static_cast<u128>(p) * q;
    if (n >> 64 != 0 || static_cast<unsigned>(std::bit_width(static_cast<u64>(n))) != modulus_bits) continue;
    const u64 phi = (p - 1) * (q - 1);
    std::optional<u64> d;
    u64 e = 0;
    for (u64 cand : {65537, 257, 17, 5, 3}) {
      if (cand >= phi) continue;
      if ((d = mod_inverse(cand, phi))) {
        e = cand;
        break;
      }
    }
    if (!d) continue;
    key = {static_cast<u64>(n), e, *d};
    keygen_ops += u64{modulus_bits} * modulus_bits;
    break;
  }
  if (message >= key.modulus) throw DomainError("message must be below the modulus");

  // modexp costs one squared-modulus-size multiplication per step
  const u64 step_cost = u64{modulus_bits} * modulus_bits;
  keygen_ops += modexps * 64 * step_cost;

  RsaRun run;
  auto& t = run.transcript;
  t.modulus = key.modulus;
  t.public_exponent = key.public_exponent;
  t.message = message;

  ModexpCost enc_cost, dec_cost;
  t.ciphertext = modexp(message, key.public_exponent, key.modulus, &enc_cost);
  t.decrypted = modexp(t.ciphertext, key.private_exponent, key.modulus, &dec_cost);
  t.encrypt_duration = encrypt_duration(message);

  // Over the message space [0, N) bit lengths 0..|N - 1| are all attained.
  const auto timing_classes = static_cast<double>(std::bit_width(key.modulus - 1) + 1);
  t.timing_channel = {"encryption timing", std::log2(timing_classes), true};
  const auto leak_millibits = static_cast<std::int64_t>(std::llround(1000.0 * t.timing_channel.leak_bits));

  auto bits_of = [](u64 v) { return static_cast<std::int64_t>(std::max(1, static_cast<int>(std::bit_width(v)))); };
  auto ops = [&](const ModexpCost& c) { return static_cast<std::int64_t>((c.squarings + c.multiplies) * step_cost); };

  run.trace.append({kKeyOwner, "keygen",
                    {{Category::Computation, static_cast<std::int64_t>(keygen_ops)},
                     {Category::Primitive, static_cast<std::int64_t>(prng_draws + modexps)}}});
  run.trace.append({kKeyOwner, "send_public_key",
                    {{Category::Communication, bits_of(key.modulus) + bits_of(key.public_exponent)}}});
  run.trace.append({kEncryptor, "encrypt",
                    {{Category::Computation, ops(enc_cost)}, {Category::Information, leak_millibits}}});
  run.trace.append({kEncryptor, "send_ciphertext", {{Category::Communication, bits_of(key.modulus)}}});
  run.trace.append({kKeyOwner, "decrypt", {{Category::Computation, ops(dec_cost)}}});
  return run;
}

}  // namespace pw::ledger
