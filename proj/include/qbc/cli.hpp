// Command implementations behind the `qbc` tool. Each command turns a
// RunSpec into an Artifact (named columns, ordered rows) that is rendered as
// CSV or JSON.
#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qbc/attacks.hpp"
#include "qbc/mcsim.hpp"
#include "qbc/optimize.hpp"
#include "qbc/protocol.hpp"
#include "qbc/strategy.hpp"

namespace qbc::cli {

using Cell = std::variant<double, std::int64_t, std::string>;

struct Artifact {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  nlohmann::ordered_json extra;  // JSON-only payload (e.g. histograms)
};

struct RunSpec {
  std::string command;
  std::string variant = "two";
  int commit = 0;
  std::optional<double> r;
  std::optional<std::string> r_range;
  std::vector<std::int64_t> m;
  double sigma_factor = 3.0;
  std::optional<double> mu;
  std::optional<std::string> mu_range;
  double alpha = 0.2;
  std::optional<double> length_km;
  std::optional<double> rd;
  std::optional<double> rn;
  double grid_step = 0.01;
  std::int64_t trials = 100000;
  std::uint64_t seed = 0;
  std::optional<double> p01;
  std::optional<double> p10;
  std::string strategy = "honest";
  std::string out;
  std::string format = "csv";
};

// ---------------------------------------------------------------------------
// Parameter helpers

inline Variant parse_variant(const std::string& s) {
  if (s == "two") return Variant::TwoState;
  if (s == "four") return Variant::FourState;
  throw std::invalid_argument("unknown variant '" + s + "' (expected two or four)");
}

inline Commitment parse_commit(int c) {
  if (c == 0) return Commitment::Zero;
  if (c == 1) return Commitment::One;
  throw std::invalid_argument("commitment must be 0 or 1");
}

/// Expands "a:b:step" into a + i*step for every i with a + i*step <= b.
inline std::vector<double> parse_range(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed range '" + text + "' (expected a:b:step)");
    }
  }
  if (parts.size() != 3) throw std::invalid_argument("malformed range '" + text + "' (expected a:b:step)");
  const double a = parts[0], b = parts[1], step = parts[2];
  if (!(step > 0.0)) throw std::invalid_argument("range step must be positive");
  if (b < a) throw std::invalid_argument("range end lies below its start");
  const auto count = static_cast<std::int64_t>(std::floor((b - a) / step + 1e-9));
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(count + 1));
  for (std::int64_t i = 0; i <= count; ++i) {
    const double x = a + static_cast<double>(i) * step;
    values.push_back(std::abs(x - b) <= 1e-12 * std::max(1.0, std::abs(b)) ? b : x);
  }
  return values;
}

/// Single value, range, or a default.
inline std::vector<double> values_or(const std::optional<double>& single, const std::optional<std::string>& range,
                                     std::vector<double> fallback) {
  if (range) return parse_range(*range);
  if (single) return {*single};
  return fallback;
}

inline std::vector<std::int64_t> m_values(const RunSpec& spec, std::vector<std::int64_t> fallback) {
  return spec.m.empty() ? fallback : spec.m;
}

inline std::int64_t single_m(const RunSpec& spec, std::int64_t fallback) {
  if (spec.m.size() > 1) throw std::invalid_argument(spec.command + " takes a single --m value");
  return spec.m.empty() ? fallback : spec.m.front();
}

/// Per-state particle count N = M / (number of sent states).
inline std::int64_t per_state(Variant v, std::int64_t m) {
  const auto k = static_cast<std::int64_t>(state_count(v));
  if (m < k || m % k != 0) {
    throw std::invalid_argument("M=" + std::to_string(m) + " is not a positive multiple of " + std::to_string(k));
  }
  return m / k;
}

inline OptimizerOptions optimizer_options(const RunSpec& spec) {
  if (!(spec.grid_step > 0.0 && spec.grid_step <= 1.0)) throw std::invalid_argument("grid step must lie in (0, 1]");
  return {spec.grid_step, 1e-6};
}

// ---------------------------------------------------------------------------
// Commands

inline Artifact cmd_honest(const RunSpec& spec) {
  const Variant v = parse_variant(spec.variant);
  const Commitment c = parse_commit(spec.commit);
  const std::int64_t n = per_state(v, single_m(spec, 100));
  Artifact a;
  a.columns.push_back("r");
  for (SentState s : sent_states(v)) {
    a.columns.push_back("p0_" + std::string(slug(s)));
    a.columns.push_back("p1_" + std::string(slug(s)));
  }
  a.columns.push_back("pass_probability");
  for (double r : values_or(spec.r, spec.r_range, {0.0})) {
    const Noise noise(r);
    const ConditionalTable t = honest_table(v, c, noise);
    std::vector<Cell> row{r};
    for (const auto& tr : t.rows()) {
      row.emplace_back(tr.p[0]);
      row.emplace_back(tr.p[1]);
    }
    row.emplace_back(pass_probability(build_test(v, c, noise, n, spec.sigma_factor), t));
    a.rows.push_back(std::move(row));
  }
  return a;
}

inline Artifact cmd_binding_failure(const RunSpec& spec) {
  const Variant v = parse_variant(spec.variant);
  const std::int64_t n = per_state(v, single_m(spec, 100));
  Artifact a{{"r", "probability"}, {}, {}};
  for (double r : values_or(spec.r, spec.r_range, parse_range("0:0.5:0.01"))) {
    a.rows.push_back({r, binding_failure(v, Noise(r), n, spec.sigma_factor)});
  }
  return a;
}

inline Artifact cmd_cheat_surface(const RunSpec& spec) {
  const Variant v = parse_variant(spec.variant);
  const Commitment c = parse_commit(spec.commit);
  const std::int64_t n = per_state(v, single_m(spec, v == Variant::TwoState ? 100 : 200));
  const Noise noise(spec.r.value_or(0.0));
  const OptimizerOptions opts = optimizer_options(spec);
  const AcceptanceTest test = build_test(v, c, noise, n, spec.sigma_factor);
  const auto cells = static_cast<std::int64_t>(std::ceil(1.0 / opts.grid_step - 1e-9));
  Artifact a{{"p01", "p10", "probability"}, {}, {}};
  for (std::int64_t i = 0; i <= cells; ++i) {
    for (std::int64_t j = 0; j <= cells; ++j) {
      const FlipParams f{std::min(1.0, static_cast<double>(i) * opts.grid_step),
                         std::min(1.0, static_cast<double>(j) * opts.grid_step)};
      a.rows.push_back({f.p01, f.p10, pass_probability(test, cheat_table(v, noise, f))});
    }
  }
  return a;
}

inline Objective objective_of(const RunSpec& spec) {
  if (spec.mu) return MultiPhotonIdeal{*spec.mu};
  return SinglePhoton{};
}

inline Artifact cmd_cheat_max(const RunSpec& spec) {
  const Variant v = parse_variant(spec.variant);
  const Commitment c = parse_commit(spec.commit);
  const OptimizerOptions opts = optimizer_options(spec);
  const Objective objective = objective_of(spec);
  Artifact a{{"m", "r", "p01", "p10", "probability"}, {}, {}};
  for (std::int64_t m : m_values(spec, {100, 200, 300, 400})) {
    const std::int64_t n = per_state(v, m);
    for (double r : values_or(spec.r, spec.r_range, parse_range("0:0.5:0.05"))) {
      const OptimizationResult res = optimize(v, c, Noise(r), n, spec.sigma_factor, objective, opts);
      a.rows.push_back({m, r, res.best.p01, res.best.p10, res.value});
    }
  }
  return a;
}

/// Optimal flips for both source models. Rows are indexed by M = 2N, with N
/// the particle count per sent state, for both variants.
inline Artifact cmd_tables(const RunSpec& spec) {
  const Variant v = parse_variant(spec.variant);
  const Commitment c = parse_commit(spec.commit);
  const Noise noise(spec.r.value_or(0.1));
  const double mu = spec.mu.value_or(0.2);
  const OptimizerOptions opts = optimizer_options(spec);
  Artifact a{{"m", "n_per_state", "single_p01", "single_p10", "single_value", "multi_p01", "multi_p10", "multi_value"},
             {},
             {}};
  for (std::int64_t m : m_values(spec, {100, 200, 300, 400})) {
    if (m < 2 || m % 2 != 0) throw std::invalid_argument("table M must be a positive even number");
    const std::int64_t n = m / 2;
    const OptimizationResult single = optimize(v, c, noise, n, spec.sigma_factor, SinglePhoton{}, opts);
    const OptimizationResult multi = optimize(v, c, noise, n, spec.sigma_factor, MultiPhotonIdeal{mu}, opts);
    a.rows.push_back({m, n, single.best.p01, single.best.p10, single.value, multi.best.p01, multi.best.p10,
                      multi.value});
  }
  return a;
}

inline Artifact cmd_distance(const RunSpec& spec) {
  Artifact a{{"alpha", "l_max_km", "r_distant", "r_near", "l_max_noisy_km"}, {}, {}};
  const double rd = spec.rd.value_or(0.0);
  const double rn = spec.rn.value_or(0.0);
  const auto noisy = max_safe_distance_noisy(spec.alpha, DistanceScenario(rd, rn));
  a.rows.push_back({spec.alpha, max_safe_distance(spec.alpha), rd, rn,
                    noisy ? Cell{*noisy} : Cell{std::string("none")}});
  if (spec.length_km) {
    // Faked statistics at the given length for the selected variant/claim.
    const Variant v = parse_variant(spec.variant);
    const ConditionalTable t = faked_table(v, parse_commit(spec.commit), DistanceScenario(rd, rn), *spec.length_km,
                                           spec.alpha);
    a.columns.push_back("length_km");
    a.columns.push_back("padding_ratio");
    a.rows.front().emplace_back(*spec.length_km);
    a.rows.front().emplace_back(padding_ratio(spec.alpha, *spec.length_km));
    for (const auto& row : t.rows()) {
      a.columns.push_back("p0_" + std::string(slug(row.state)));
      a.rows.front().emplace_back(row.p[0]);
    }
  }
  return a;
}

inline Artifact cmd_multiphoton(const RunSpec& spec) {
  const Variant v = parse_variant(spec.variant);
  const Commitment c = parse_commit(spec.commit);
  const std::int64_t n = per_state(v, single_m(spec, 100));
  const OptimizerOptions opts = optimizer_options(spec);
  if (spec.p01.has_value() != spec.p10.has_value()) throw std::invalid_argument("give both --p01 and --p10 or neither");
  Artifact a{{"r", "mu", "ideal", "ideal_p01", "ideal_p10", "beam_splitter"}, {}, {}};
  for (double r : values_or(spec.r, spec.r_range, parse_range("0:0.3:0.05"))) {
    const Noise noise(r);
    for (double mu : values_or(spec.mu, spec.mu_range, parse_range("0.05:1:0.05"))) {
      FlipParams f;
      double ideal = 0.0;
      if (spec.p01) {
        f = FlipParams(*spec.p01, *spec.p10);
        ideal = multiphoton_success(v, c, noise, n, spec.sigma_factor, mu, f, MultiPhotonMode::Ideal);
      } else {
        const OptimizationResult res = optimize(v, c, noise, n, spec.sigma_factor, MultiPhotonIdeal{mu}, opts);
        f = res.best;
        ideal = res.value;
      }
      const double bs = multiphoton_success(v, c, noise, n, spec.sigma_factor, mu, {}, MultiPhotonMode::BeamSplitter);
      a.rows.push_back({r, mu, ideal, f.p01, f.p10, bs});
    }
  }
  return a;
}

inline mc::StrategyDescriptor strategy_of(const RunSpec& spec) {
  const FlipParams f(spec.p01.value_or(0.0), spec.p10.value_or(0.0));
  if (spec.strategy == "honest") return mc::Honest{};
  if (spec.strategy == "breidbart") return mc::BreidbartFlips{f};
  if (spec.strategy == "beam-splitter") return mc::BeamSplitter{spec.mu.value_or(0.2)};
  if (spec.strategy == "ideal") return mc::IdealMultiPhoton{spec.mu.value_or(0.2), f};
  if (spec.strategy == "faked") {
    if (!spec.length_km) throw std::invalid_argument("faked strategy needs --length-km");
    return mc::FakedDistance{DistanceScenario(spec.rd.value_or(spec.r.value_or(0.0)), spec.rn.value_or(0.0)),
                             *spec.length_km, spec.alpha};
  }
  throw std::invalid_argument("unknown strategy '" + spec.strategy + "'");
}

inline Artifact cmd_mc(const RunSpec& spec) {
  const Variant v = parse_variant(spec.variant);
  mc::TrialConfig config;
  config.variant = v;
  config.claimed = parse_commit(spec.commit);
  // The faked-distance strategy is judged against the claimed location's noise.
  const double r = spec.strategy == "faked" ? spec.rd.value_or(spec.r.value_or(0.0)) : spec.r.value_or(0.0);
  config.noise = Noise(r);
  config.n_per_state = per_state(v, single_m(spec, v == Variant::TwoState ? 100 : 200));
  config.sigma_factor = spec.sigma_factor;
  config.strategy = strategy_of(spec);
  if (spec.trials < 1) throw std::invalid_argument("trials must be positive");
  config.trials = spec.trials;
  config.seed = spec.seed;
  const mc::TrialReport report = mc::run(config);
  Artifact a{{"accept_rate", "standard_error", "trials", "analytic"}, {}, {}};
  a.rows.push_back({report.accept_rate, report.standard_error, report.trials, mc::analytic_accept(config)});
  auto& hist = a.extra["histograms"];
  hist = nlohmann::ordered_json::object();
  for (const auto& h : report.histograms) hist[std::string(slug(h.state))] = h.counts;
  return a;
}

inline const std::map<std::string, Artifact (*)(const RunSpec&)>& commands() {
  static const std::map<std::string, Artifact (*)(const RunSpec&)> table{
      {"honest", cmd_honest},       {"binding-failure", cmd_binding_failure},
      {"cheat-surface", cmd_cheat_surface}, {"cheat-max", cmd_cheat_max},
      {"tables", cmd_tables},       {"distance", cmd_distance},
      {"multiphoton", cmd_multiphoton}, {"mc", cmd_mc},
  };
  return table;
}

inline Artifact run_command(const RunSpec& spec) {
  const auto& table = commands();
  const auto it = table.find(spec.command);
  if (it == table.end()) throw std::invalid_argument("unknown command '" + spec.command + "'");
  if (spec.format != "csv" && spec.format != "json") throw std::invalid_argument("format must be csv or json");
  return it->second(spec);
}

// ---------------------------------------------------------------------------
// Rendering

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

inline std::string to_csv(const Artifact& a) {
  std::string out;
  for (std::size_t i = 0; i < a.columns.size(); ++i) {
    if (i) out += ',';
    out += a.columns[i];
  }
  out += '\n';
  for (const auto& row : a.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      std::visit(
          [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, double>) out += format_double(x);
            else if constexpr (std::is_same_v<T, std::int64_t>) out += std::to_string(x);
            else out += x;
          },
          row[i]);
    }
    out += '\n';
  }
  return out;
}

inline std::string to_json(const std::string& command, const Artifact& a) {
  nlohmann::ordered_json doc;
  doc["command"] = command;
  doc["columns"] = a.columns;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : a.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::visit([&](const auto& x) { obj[a.columns[i]] = x; }, row[i]);
    }
    rows.push_back(std::move(obj));
  }
  doc["rows"] = std::move(rows);
  for (const auto& [key, value] : a.extra.items()) doc[key] = value;
  return doc.dump(2) + "\n";
}

inline std::string render(const RunSpec& spec, const Artifact& a) {
  return spec.format == "json" ? to_json(spec.command, a) : to_csv(a);
}

// ---------------------------------------------------------------------------
// Argument parsing

/// Registers every flag on `app`. Flags beat values from --config, which
/// beat the defaults in RunSpec.
inline void register_options(CLI::App& app, RunSpec& spec) {
  app.set_config("--config", "", "key=value configuration file");
  app.add_option("--variant", spec.variant, "protocol variant")->check(CLI::IsMember({"two", "four"}));
  app.add_option("--commit", spec.commit, "claimed commitment")->check(CLI::IsMember({0, 1}));
  app.add_option("--r", spec.r, "depolarizing noise")->check(CLI::Range(0.0, 1.0));
  app.add_option("--r-range", spec.r_range, "noise sweep a:b:step");
  app.add_option("--m", spec.m, "total measurements M (one or more)")->delimiter(',');
  app.add_option("--sigma-factor", spec.sigma_factor, "acceptance window half-width in sigmas");
  app.add_option("--mu", spec.mu, "mean photons per pulse");
  app.add_option("--mu-range", spec.mu_range, "photon-number sweep a:b:step");
  app.add_option("--alpha", spec.alpha, "fibre attenuation in dB/km");
  app.add_option("--length-km", spec.length_km, "fibre length in km");
  app.add_option("--rd", spec.rd, "noise at the claimed location");
  app.add_option("--rn", spec.rn, "noise at the true location");
  app.add_option("--grid-step", spec.grid_step, "flip-parameter grid step");
  app.add_option("--trials", spec.trials, "Monte Carlo trials");
  app.add_option("--seed", spec.seed, "Monte Carlo seed");
  app.add_option("--p01", spec.p01, "fixed flip probability 0->1")->check(CLI::Range(0.0, 1.0));
  app.add_option("--p10", spec.p10, "fixed flip probability 1->0")->check(CLI::Range(0.0, 1.0));
  app.add_option("--strategy", spec.strategy, "mc strategy")
      ->check(CLI::IsMember({"honest", "breidbart", "beam-splitter", "ideal", "faked"}));
  app.add_option("--out", spec.out, "output path (stdout when empty)");
  app.add_option("--format", spec.format, "output format")->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace qbc::cli
