#pragma once

// Command-line front end: argument parsing and command execution. Kept in
// a header so tests can drive it without spawning processes.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "pw/analogue_factorizer.hpp"
#include "pw/crypto_ledger.hpp"
#include "pw/error.hpp"
#include "pw/json_io.hpp"
#include "pw/resource_core.hpp"

namespace pw::cli {

enum class DrawKind { Exact, WorstUpper, WorstLower, Random };
enum class Format { Csv, Json };

struct Factorize {
  std::uint64_t n = 0;
  double epsilon_lambda = 0;
  double epsilon_c = 0;
  DrawKind draw = DrawKind::Exact;
  std::uint64_t seed = 0;
  bool operator==(const Factorize&) const = default;
};

struct Sweep {
  std::uint64_t n_from = 3;
  std::uint64_t n_to = 1023;
  std::uint64_t step = 2;
  std::string out_path;
  Format format = Format::Csv;
  bool operator==(const Sweep&) const = default;
};

struct Analyze {
  std::string sweep_csv_path;
  bool operator==(const Analyze&) const = default;
};

struct Protocol {
  unsigned modulus_bits = 32;
  std::uint64_t message = 42;
  std::uint64_t seed = 0;
  std::string out_path;
  bool operator==(const Protocol&) const = default;
};

struct Command {
  std::variant<Factorize, Sweep, Analyze, Protocol> action;
  bool json = false;
};

struct ExitReport {
  int exit_code = 0;  // 0 success, 1 usage error, 2 domain error
  std::string summary;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown for --help; carries the help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Command parse_args(const std::vector<std::string>& args) {
  CLI::App app{"Resource and precision workbench for the analogue factorizer", "pwbench"};
  app.require_subcommand(1);
  app.fallthrough();

  Command cmd;
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "RNG seed")->capture_default_str();
  app.add_flag("--json", cmd.json, "Print results as JSON");

  Factorize f;
  std::string draw = "exact";
  auto* fac = app.add_subcommand("factorize", "Run the device on one number");
  fac->add_option("--n", f.n, "Number to factorize")->required();
  fac->add_option("--epsilon-lambda", f.epsilon_lambda, "Additive wavelength error")->check(CLI::NonNegativeNumber);
  fac->add_option("--epsilon-c", f.epsilon_c, "Additive sensor-reading error")->check(CLI::NonNegativeNumber);
  fac->add_option("--draw", draw, "exact | worst | worst-lower | random")
      ->check(CLI::IsMember({"exact", "worst", "worst-lower", "random"}));

  Sweep s;
  std::string format = "csv";
  auto* sw = app.add_subcommand("sweep", "Run the device over a range of n");
  sw->add_option("--from", s.n_from, "First n")->check(CLI::Range(std::uint64_t{2}, std::uint64_t{1} << 40));
  sw->add_option("--to", s.n_to, "Last n")->check(CLI::Range(std::uint64_t{2}, std::uint64_t{1} << 40));
  sw->add_option("--step", s.step, "Stride")->check(CLI::PositiveNumber);
  sw->add_option("--out", s.out_path, "Output path")->required();
  sw->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

  Analyze an;
  auto* ana = app.add_subcommand("analyze", "Classify the resources of a sweep CSV");
  ana->add_option("--in", an.sweep_csv_path, "Sweep CSV")->required();

  Protocol pr;
  auto* pro = app.add_subcommand("protocol", "Trace a toy public-key exchange");
  pro->add_option("--bits", pr.modulus_bits, "Modulus bits")->check(CLI::Range(8u, 64u));
  pro->add_option("--message", pr.message, "Plaintext");
  pro->add_option("--out", pr.out_path, "Ledger JSON path")->required();

  std::vector<const char*> argv{"pwbench"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (fac->parsed()) {
    f.seed = seed;
    f.draw = draw == "worst"         ? DrawKind::WorstUpper
             : draw == "worst-lower" ? DrawKind::WorstLower
             : draw == "random"      ? DrawKind::Random
                                     : DrawKind::Exact;
    cmd.action = f;
  } else if (sw->parsed()) {
    if (s.out_path.empty()) throw UsageError("--out must be nonempty");
    s.format = format == "json" ? Format::Json : Format::Csv;
    cmd.action = s;
  } else if (ana->parsed()) {
    if (an.sweep_csv_path.empty()) throw UsageError("--in must be nonempty");
    cmd.action = an;
  } else {
    if (pr.out_path.empty()) throw UsageError("--out must be nonempty");
    pr.seed = seed;
    cmd.action = pr;
  }
  return cmd;
}

// ---------------------------------------------------------------------------
// Sweep rows: n,bits,halvings,time,space,precision,factor,verified
// ---------------------------------------------------------------------------

struct SweepRow {
  std::uint64_t n = 0;
  std::size_t bits = 0;
  std::uint64_t halvings = 0;
  Amount time = 0;
  Amount space = 0;
  Amount precision = 0;
  std::uint64_t factor = 1;
  bool verified = false;
};

inline constexpr const char* kSweepHeader = "n,bits,halvings,time,space,precision,factor,verified";

inline SweepRow sweep_row(const factorizer::FactorizationOutcome& o) {
  SweepRow r;
  r.n = o.requested_n;
  r.bits = bit_size(o.requested_n);
  r.halvings = o.halvings;
  r.time = o.resources.time;
  r.space = o.resources.space;
  r.precision = o.resources.precision;
  if (auto f = o.nontrivial_factor()) {
    r.factor = *f;
    r.verified = true;
  } else {
    // the trivial factor: verified when the device reported it
    for (const auto& c : o.candidates)
      if (c.factor == 1) r.verified = c.verified;
  }
  return r;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << kSweepHeader << '\n';
  for (const auto& r : rows)
    os << r.n << ',' << r.bits << ',' << r.halvings << ',' << amount_text(r.time) << ',' << amount_text(r.space) << ','
       << amount_text(r.precision) << ',' << r.factor << ',' << (r.verified ? 1 : 0) << '\n';
}

inline json sweep_json(const std::vector<SweepRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back({{"n", r.n},
                   {"bits", r.bits},
                   {"halvings", r.halvings},
                   {"time", amount_json(r.time)},
                   {"space", amount_json(r.space)},
                   {"precision", amount_json(r.precision)},
                   {"factor", r.factor},
                   {"verified", r.verified}});
  return arr;
}

inline std::vector<SweepRow> read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kSweepHeader) throw DomainError(std::string("missing CSV header ") + kSweepHeader);
  std::vector<SweepRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 8) throw DomainError("sweep CSV line " + std::to_string(lineno) + ": expected 8 fields");
    SweepRow r;
    r.n = parse_amount(cells[0]);
    r.bits = static_cast<std::size_t>(parse_amount(cells[1]));
    r.halvings = parse_amount(cells[2]);
    r.time = parse_amount(cells[3]);
    r.space = parse_amount(cells[4]);
    r.precision = parse_amount(cells[5]);
    r.factor = parse_amount(cells[6]);
    r.verified = parse_amount(cells[7]) != 0;
    rows.push_back(r);
  }
  if (rows.empty()) throw DomainError("sweep CSV has no rows");
  return rows;
}

/// {time, space, precision} complexity functions of a sweep, by bit size.
inline Profile profile_from_rows(const std::vector<SweepRow>& rows) {
  auto sizer = [](const SweepRow& r) { return r.bits; };
  auto make = [&](std::string name, Amount SweepRow::*field) {
    ResourceFunction<SweepRow> f;
    f.name = std::move(name);
    f.evaluate = [field](const SweepRow& r) { return r.*field; };
    return complexity_of(f, sizer, rows);
  };
  Profile p;
  p["time"] = make("time", &SweepRow::time);
  p["space"] = make("space", &SweepRow::space);
  p["precision"] = make("precision", &SweepRow::precision);
  return p;
}

/// Lines "<resource>: <class>", then "dominant: a, b; overall: <class>".
inline std::string describe_profile(const Profile& profile) {
  std::ostringstream os;
  for (const auto& [name, cf] : profile) os << name << ": " << (cf.growth ? cf.growth->tag() : "unclassified") << '\n';
  const auto dominant = dominant_resources(profile);
  const auto overall = overall_complexity(profile);
  os << "dominant: ";
  bool first = true;
  for (const auto& name : dominant) {
    os << (first ? "" : ", ") << name;
    first = false;
  }
  os << "; overall: " << (overall.growth ? overall.growth->tag() : "unclassified") << '\n';
  return os.str();
}

inline json profile_json(const Profile& profile) {
  json j;
  for (const auto& [name, cf] : profile) j["growth"][name] = cf.growth ? cf.growth->tag() : "unclassified";
  j["dominant"] = dominant_resources(profile);
  const auto overall = overall_complexity(profile);
  j["overall"] = overall.growth ? overall.growth->tag() : "unclassified";
  return j;
}

/// Writes via a temporary file and rename so readers never see a partial file.
inline void write_atomically(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DomainError("cannot write " + tmp);
    out << content;
    if (!out.flush()) throw DomainError("cannot write " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DomainError("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

namespace detail {

inline Draw to_draw(DrawKind k, std::uint64_t seed) {
  switch (k) {
    case DrawKind::Exact: return ExactDraw{};
    case DrawKind::WorstUpper: return WorstCaseDraw{Endpoint::Upper};
    case DrawKind::WorstLower: return WorstCaseDraw{Endpoint::Lower};
    case DrawKind::Random: return RandomDraw{seed};
  }
  return ExactDraw{};
}

inline std::string security_line(const ledger::SecurityVector& v) {
  std::ostringstream os;
  os << "security vector:";
  for (auto c : ledger::kCategories) os << ' ' << ledger::category_key(c) << '=' << v.totals[c];
  os << "; flag: " << (v.flag == ledger::Decomposition::Interacting ? "interacting" : "decomposable");
  return os.str();
}

inline ExitReport run(const Factorize& f, bool, std::ostream& out) {
  const auto o = factorizer::run_device(f.n, factorizer::pipeline_error(f.epsilon_lambda, f.epsilon_c),
                                        to_draw(f.draw, f.seed));
  out << outcome_to_json(o).dump(2) << '\n';
  const auto factor = o.nontrivial_factor();
  return {0, factor ? "factor " + std::to_string(*factor) : "no nontrivial factor"};
}

inline ExitReport run(const Sweep& s, bool as_json, std::ostream& out) {
  if (s.n_from > s.n_to) throw DomainError("--from exceeds --to");
  std::vector<SweepRow> rows;
  for (std::uint64_t n = s.n_from; n <= s.n_to; n += s.step) rows.push_back(sweep_row(factorizer::run_device(n)));
  std::ostringstream content;
  if (s.format == Format::Csv)
    write_sweep_csv(content, rows);
  else
    content << sweep_json(rows).dump(2) << '\n';
  write_atomically(s.out_path, content.str());
  const auto profile = profile_from_rows(rows);
  if (as_json)
    out << profile_json(profile).dump(2) << '\n';
  else
    out << describe_profile(profile);
  return {0, "wrote " + std::to_string(rows.size()) + " rows to " + s.out_path};
}

inline ExitReport run(const Analyze& a, bool as_json, std::ostream& out) {
  std::ifstream in(a.sweep_csv_path);
  if (!in) throw DomainError("cannot open " + a.sweep_csv_path);
  const auto profile = profile_from_rows(read_sweep_csv(in));
  if (as_json)
    out << profile_json(profile).dump(2) << '\n';
  else
    out << describe_profile(profile);
  return {0, "analyzed " + a.sweep_csv_path};
}

inline ExitReport run(const Protocol& p, bool as_json, std::ostream& out) {
  const auto r = ledger::run_toy_rsa(p.modulus_bits, p.message, p.seed);
  write_atomically(p.out_path, ledger_to_json(r.trace).dump(2) + "\n");
  const auto v = ledger::security_vector(r.trace, ledger::toy_rsa_observable);
  if (as_json) {
    json j;
    for (auto c : ledger::kCategories) j["totals"][ledger::category_key(c)] = v.totals[c];
    j["flag"] = v.flag == ledger::Decomposition::Interacting ? "interacting" : "decomposable";
    j["roundtrip"] = r.transcript.decrypted == r.transcript.message;
    out << j.dump(2) << '\n';
  } else {
    out << security_line(v) << '\n';
  }
  return {0, "wrote ledger to " + p.out_path};
}

}  // namespace detail

/// Runs a parsed command. Domain errors become exit code 2 with the
/// module's message.
inline ExitReport execute(const Command& cmd, std::ostream& out) {
  try {
    return std::visit([&](const auto& action) { return detail::run(action, cmd.json, out); }, cmd.action);
  } catch (const DomainError& e) {
    return {2, e.what()};
  } catch (const std::exception& e) {
    return {2, e.what()};
  }
}

/// Full front end: parse, execute, report. Summaries go to `err` on failure.
inline int main_with_args(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Command cmd;
  try {
    cmd = parse_args(args);
  } catch (const HelpRequested& h) {
    out << h.what();
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  }
  const auto report = execute(cmd, out);
  if (report.exit_code != 0) err << "error: " << report.summary << '\n';
  return report.exit_code;
}

}  // namespace pw::cli
