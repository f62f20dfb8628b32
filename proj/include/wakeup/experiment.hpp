#pragma once

// Experiment harness: flat key=value configs, the random-topology sweep
// behind the duty-cycle / delay-drift / violation tables, and the
// convergecast comparison.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "constraints.hpp"
#include "distrt.hpp"
#include "netsim.hpp"
#include "numtheory.hpp"
#include "planner.hpp"
#include "random.hpp"
#include "schedule.hpp"
#include "topology.hpp"

namespace wakeup {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `key = value` lines; `#` starts a comment. Keys outside `allowed` and
/// repeated keys are rejected.
class FlatConfig {
 public:
  FlatConfig() = default;

  static FlatConfig parse(const std::string& text, const std::set<std::string>& allowed) {
    FlatConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const auto key_end = line.find('=');
      if (trim(line).empty()) continue;
      if (key_end == std::string::npos)
        throw ConfigError("line " + std::to_string(lineno) + ": expected `key = value`");
      const std::string key = trim(line.substr(0, key_end));
      const std::string value = trim(line.substr(key_end + 1));
      if (!allowed.count(key)) throw ConfigError("line " + std::to_string(lineno) + ": unknown key `" + key + "`");
      if (!cfg.values_.emplace(key, value).second)
        throw ConfigError("line " + std::to_string(lineno) + ": key `" + key + "` given twice");
    }
    return cfg;
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string str(const std::string& key, const std::string& def) const {
    auto it = values_.find(key);
    return it == values_.end() ? def : it->second;
  }

  long long integer(const std::string& key, long long def, long long lo, long long hi) const {
    if (!has(key)) return def;
    const auto v = to_integer(key, values_.at(key));
    if (v < lo || v > hi)
      throw ConfigError(key + " = " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
    return v;
  }

  double real(const std::string& key, double def, double lo, double hi) const {
    if (!has(key)) return def;
    const auto v = to_real(key, values_.at(key));
    if (!(v >= lo && v <= hi)) throw ConfigError(key + " = " + values_.at(key) + " out of range");
    return v;
  }

  std::vector<double> reals(const std::string& key, const std::vector<double>& def, double lo, double hi) const {
    if (!has(key)) return def;
    std::vector<double> out;
    for (auto& tok : split(values_.at(key), ',')) {
      const double v = to_real(key, tok);
      if (!(v >= lo && v <= hi)) throw ConfigError(key + ": value " + tok + " out of range");
      out.push_back(v);
    }
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
  }

  /// `2 | 2,3,5` style list of factor bases.
  std::vector<FactorBasis> bases(const std::string& key, const std::vector<FactorBasis>& def) const {
    if (!has(key)) return def;
    std::vector<FactorBasis> out;
    for (auto& group : split(values_.at(key), '|')) {
      std::vector<std::int64_t> primes;
      for (auto& tok : split(group, ',')) primes.push_back(to_integer(key, tok));
      try {
        out.emplace_back(primes);
      } catch (const std::domain_error& e) {
        throw ConfigError(key + ": " + e.what());
      }
    }
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string tok;
    std::istringstream in(s);
    while (std::getline(in, tok, sep)) {
      tok = trim(tok);
      if (!tok.empty()) out.push_back(tok);
    }
    return out;
  }

 private:
  static long long to_integer(const std::string& key, const std::string& s) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw ConfigError(key + ": `" + s + "` is not an integer");
    return v;
  }

  static double to_real(const std::string& key, const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw ConfigError(key + ": `" + s + "` is not a number");
    return v;
  }

  std::map<std::string, std::string> values_;
};

inline std::string basis_label(const FactorBasis& b) {
  std::string s = b.str();
  std::replace(s.begin(), s.end(), ',', '-');
  return s;
}

// ---------------------------------------------------------------------------
// Random-topology sweep

struct SweepConfig {
  int n_nodes = 200;
  double side_m = 100;
  std::vector<double> ranges{10, 20, 30, 40, 50, 60, 70, 80};
  Slot L_lo = 1, L_hi = 35, U_lo = 50, U_hi = 100;
  std::vector<FactorBasis> bases{FactorBasis{2}, FactorBasis{2, 3, 5}};
  int runs = 100;
  std::uint64_t seed = 1;
  bool bfs = true, parallel = true;
  int threads = 0;  // 0: hardware concurrency

  static const std::set<std::string>& keys() {
    static const std::set<std::string> k{"n_nodes", "side_m", "range_m", "L_lo", "L_hi", "U_lo", "U_hi",
                                         "basis", "runs", "seed", "algorithm", "threads"};
    return k;
  }

  static SweepConfig from(const FlatConfig& f) {
    SweepConfig c;
    c.n_nodes = static_cast<int>(f.integer("n_nodes", c.n_nodes, 1, 100000));
    c.side_m = f.real("side_m", c.side_m, 1e-9, 1e9);
    c.ranges = f.reals("range_m", c.ranges, 1e-9, 1e9);
    c.L_lo = f.integer("L_lo", c.L_lo, 1, 1000000);
    c.L_hi = f.integer("L_hi", c.L_hi, c.L_lo, 1000000);
    c.U_lo = f.integer("U_lo", c.U_lo, 1, 1000000);
    c.U_hi = f.integer("U_hi", c.U_hi, c.U_lo, 1000000);
    c.bases = f.bases("basis", c.bases);
    c.runs = static_cast<int>(f.integer("runs", c.runs, 1, 1000000));
    c.seed = static_cast<std::uint64_t>(f.integer("seed", 1, 0, INT64_MAX));
    c.threads = static_cast<int>(f.integer("threads", 0, 0, 1024));
    const auto alg = f.str("algorithm", "both");
    if (alg != "bfs" && alg != "parallel" && alg != "both")
      throw ConfigError("algorithm must be bfs, parallel or both");
    c.bfs = alg != "parallel";
    c.parallel = alg != "bfs";
    return c;
  }
};

struct SweepRow {
  double range_m = 0;
  std::string algorithm;
  std::string basis;
  int run = 0;
  Rational dc, dd, violation_pct, violation_mag;
  std::size_t messages = 0;
  int rounds = 0;
  bool feasible = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::size_t discarded = 0;  // disconnected draws replaced
};

struct SweepCell {
  Topology topo;
  ConstraintSet constraints;
  Origins origins;
  std::uint64_t timer_seed = 0;
  std::size_t discarded = 0;
};

/// Instance for one (range, run) cell; the stream depends only on
/// (seed, range, run), so cells can be evaluated in any order.
inline SweepCell make_cell(const SweepConfig& cfg, double range, int run) {
  SweepCell cell;
  const auto range_key = static_cast<std::uint64_t>(std::llround(range * 1000.0));
  const std::uint64_t base = derive_seed(cfg.seed, {range_key, static_cast<std::uint64_t>(run)});
  for (std::uint64_t attempt = 0;; ++attempt) {
    cell.topo = random_geometric(cfg.n_nodes, cfg.side_m, range, derive_seed(base, {1, attempt}));
    if (is_connected(cell.topo)) break;
    ++cell.discarded;
  }
  cell.constraints = assign_constraints(cell.topo, {cfg.L_lo, cfg.L_hi}, {cfg.U_lo, cfg.U_hi}, derive_seed(base, {2}));
  Rng rng(derive_seed(base, {3}));
  for (NodeId v : cell.topo.nodes()) cell.origins[v] = uniform_int(rng, 0, cell.constraints.upper(v) - 1);
  cell.timer_seed = derive_seed(base, {4});
  return cell;
}

inline std::vector<SweepRow> evaluate_cell(const SweepConfig& cfg, const SweepCell& cell, double range, int run) {
  std::vector<SweepRow> rows;
  auto add = [&](const std::string& alg, const FactorBasis& b, const DistributedResult& r) {
    const auto rep = verify(r.schedule, cell.topo, cell.constraints);
    SweepRow row;
    row.range_m = range;
    row.algorithm = alg;
    row.basis = basis_label(b);
    row.run = run;
    row.dc = rep.duty_cycle;
    row.dd = rep.delay_drift;
    row.violation_pct = rep.violation_percentage * 100;
    row.violation_mag = rep.violation_magnitude;
    row.messages = r.stats.messages_total;
    row.rounds = r.stats.rounds;
    row.feasible = rep.feasible;
    rows.push_back(std::move(row));
  };
  for (const auto& b : cfg.bases) {
    if (cfg.bfs) add("bfs", b, simulate_bfs(cell.topo, cell.constraints, b, cell.origins, false));
    if (cfg.parallel)
      add("parallel", b,
          simulate_parallel(cell.topo, cell.constraints, b, ActivationOrder::from_seed(cell.timer_seed), cell.origins, false));
  }
  return rows;
}

inline SweepResult run_sweep(const SweepConfig& cfg) {
  struct Job {
    double range;
    int run;
  };
  std::vector<Job> jobs;
  for (double r : cfg.ranges)
    for (int k = 0; k < cfg.runs; ++k) jobs.push_back({r, k});
  std::vector<std::vector<SweepRow>> out(jobs.size());
  std::vector<std::size_t> discarded(jobs.size(), 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
      const auto cell = make_cell(cfg, jobs[i].range, jobs[i].run);
      discarded[i] = cell.discarded;
      out[i] = evaluate_cell(cfg, cell, jobs[i].range, jobs[i].run);
    }
  };
  unsigned n = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(std::max<std::size_t>(1, jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  SweepResult res;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    res.discarded += discarded[i];
    for (auto& row : out[i]) res.rows.push_back(std::move(row));
  }
  return res;
}

inline std::string format_range(double r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", r);
  return buf;
}

/// CSV `range_m,algorithm,basis,run,DC,DD,violation_pct,violation_mag,messages,rounds`.
inline std::string sweep_csv(const SweepResult& res) {
  std::string out = "range_m,algorithm,basis,run,DC,DD,violation_pct,violation_mag,messages,rounds\n";
  for (auto& r : res.rows)
    out += format_range(r.range_m) + "," + r.algorithm + "," + r.basis + "," + std::to_string(r.run) + "," +
           to_decimal(r.dc) + "," + to_decimal(r.dd) + "," + to_decimal(r.violation_pct) + "," +
           to_decimal(r.violation_mag) + "," + std::to_string(r.messages) + "," + std::to_string(r.rounds) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Convergecast comparison

struct NetsimExperiment {
  int n_nodes = 50;
  double side_m = 100;
  double range_m = 10;
  double slot_s = 0.1;
  double packet_period_s = 30;
  std::int64_t energy_budget = 6000;
  Slot upper = 64;
  FactorBasis basis{2};
  std::string algorithm = "bfs";
  Point sink_at{1, 1};
  std::uint64_t seed = 1;

  static const std::set<std::string>& keys() {
    static const std::set<std::string> k{"n_nodes", "side_m", "range_m", "slot_s", "packet_period_s",
                                         "energy_budget", "U", "basis", "algorithm", "sink_x", "sink_y", "seed"};
    return k;
  }

  static NetsimExperiment from(const FlatConfig& f) {
    NetsimExperiment e;
    e.n_nodes = static_cast<int>(f.integer("n_nodes", e.n_nodes, 2, 100000));
    e.side_m = f.real("side_m", e.side_m, 1e-9, 1e9);
    e.range_m = f.real("range_m", e.range_m, 1e-9, 1e9);
    e.slot_s = f.real("slot_s", e.slot_s, 1e-9, 1e9);
    e.packet_period_s = f.real("packet_period_s", e.packet_period_s, 1e-9, 1e9);
    e.energy_budget = f.integer("energy_budget", e.energy_budget, 1, 1000000000);
    e.upper = f.integer("U", e.upper, 1, 1000000);
    auto b = f.bases("basis", {e.basis});
    if (b.size() != 1) throw ConfigError("basis: netsim takes a single basis");
    e.basis = b.front();
    e.algorithm = f.str("algorithm", e.algorithm);
    if (e.algorithm != "bfs" && e.algorithm != "parallel") throw ConfigError("algorithm must be bfs or parallel");
    e.sink_at = {f.real("sink_x", 1, -1e9, 1e9), f.real("sink_y", 1, -1e9, 1e9)};
    e.seed = static_cast<std::uint64_t>(f.integer("seed", 1, 0, INT64_MAX));
    return e;
  }
};

struct NetsimOutcome {
  Topology topo;
  RouteSet routes;
  ConstraintSet constraints;
  Schedule schedule;
  std::vector<SchemeResult> results;
};

inline NetsimOutcome run_netsim(const NetsimExperiment& e) {
  NetsimOutcome o;
  o.topo = random_connected_geometric(e.n_nodes, e.side_m, e.range_m, derive_seed(e.seed, {1}));
  o.routes = shortest_path_tree(o.topo, nearest_node(o.topo, e.sink_at));
  o.constraints = distance_dependent_constraints(o.routes, e.upper);
  if (e.algorithm == "bfs")
    o.schedule = bfs_wakeup(o.topo, o.constraints, e.basis).schedule;
  else
    o.schedule = parallel_wakeup(o.topo, o.constraints, e.basis, ActivationOrder::from_seed(derive_seed(e.seed, {2})))
                     .schedule;
  SimConfig cfg;
  cfg.topo = o.topo;
  cfg.routes = o.routes;
  cfg.schedule = o.schedule;
  cfg.slot_duration = e.slot_s;
  cfg.packet_period = e.packet_period_s;
  cfg.energy_budget = e.energy_budget;
  o.results = compare_schemes(cfg, {Scheme::Wakeup, Scheme::NoPowerSaving, Scheme::Uniform}, derive_seed(e.seed, {3}));
  return o;
}

}  // namespace wakeup
