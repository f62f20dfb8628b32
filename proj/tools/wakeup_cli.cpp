// wakeup: generate topologies, plan and verify wake-up schedules, run the
// sweep and convergecast experiments, split route deadlines.
//
// Exit codes: 0 success (an infeasible schedule is still a result),
// 2 usage or config error, 3 bad input data.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "wakeup/delaybudget.hpp"
#include "wakeup/distrt.hpp"
#include "wakeup/experiment.hpp"
#include "wakeup/netsim.hpp"
#include "wakeup/planner.hpp"
#include "wakeup/schedule.hpp"
#include "wakeup/topology.hpp"

namespace fs = std::filesystem;
using namespace wakeup;

namespace {

constexpr int kUsage = 2;
constexpr int kData = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write to a sibling temp file, then rename, so readers never see a torn file.
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path);
    out << text;
  }
  fs::rename(tmp, target);
}

struct ConstraintFile {
  ConstraintSet constraints;
  Origins origins;
};

// `node L U [alpha]` lines, or a CSV whose header names node, L and U
// columns (the budget output is accepted as is).
ConstraintFile parse_constraints(const std::string& text) {
  ConstraintFile out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  int col_node = -1, col_l = -1, col_u = -1;
  bool csv = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (FlatConfig::trim(line).empty()) continue;
    if (!csv && col_node < 0 && line.find(',') != std::string::npos &&
        line.find_first_of("0123456789") > line.find_first_not_of(" \t")) {
      auto cols = FlatConfig::split(line, ',');
      for (int k = 0; k < static_cast<int>(cols.size()); ++k) {
        if (cols[k] == "node") col_node = k;
        if (cols[k] == "L") col_l = k;
        if (cols[k] == "U") col_u = k;
      }
      if (col_node < 0 || col_l < 0 || col_u < 0) throw ParseError(lineno, "CSV header needs node, L and U");
      csv = true;
      continue;
    }
    std::vector<std::string> tok;
    if (csv) {
      std::string cell;
      std::istringstream ls(line);
      while (std::getline(ls, cell, ',')) tok.push_back(FlatConfig::trim(cell));
    } else {
      std::istringstream ls(line);
      for (std::string t; ls >> t;) tok.push_back(t);
    }
    auto num = [&](std::size_t k) -> long long {
      if (k >= tok.size()) throw ParseError(lineno, "missing column");
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(tok[k], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != tok[k].size()) throw ParseError(lineno, "bad integer `" + tok[k] + "`");
      return v;
    };
    NodeId v;
    Slot l, u;
    if (csv) {
      v = static_cast<NodeId>(num(static_cast<std::size_t>(col_node)));
      l = num(static_cast<std::size_t>(col_l));
      u = num(static_cast<std::size_t>(col_u));
    } else {
      if (tok.size() < 3 || tok.size() > 4) throw ParseError(lineno, "expected `node L U [alpha]`");
      v = static_cast<NodeId>(num(0));
      l = num(1);
      u = num(2);
      if (tok.size() == 4) out.origins[v] = num(3);
    }
    if (out.constraints.contains(v)) throw ParseError(lineno, "duplicate node " + std::to_string(v));
    try {
      out.constraints.set(v, l, u);
    } catch (const std::domain_error& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return out;
}

void require_constraints(const Topology& topo, const ConstraintSet& c) {
  for (NodeId v : topo.nodes())
    if (!c.contains(v)) throw DataError("no constraints for node " + std::to_string(v));
  for (auto& [v, b] : c)
    if (b.lower > b.upper)
      throw DataError("node " + std::to_string(v) + ": L = " + std::to_string(b.lower) + " exceeds U = " +
                      std::to_string(b.upper));
}

FactorBasis parse_basis(const std::string& s) {
  std::vector<std::int64_t> primes;
  for (auto& tok : FlatConfig::split(s, ',')) {
    try {
      primes.push_back(std::stoll(tok));
    } catch (const std::exception&) {
      throw UsageError("basis: `" + tok + "` is not an integer");
    }
  }
  try {
    return FactorBasis(primes);
  } catch (const std::domain_error& e) {
    throw UsageError(e.what());
  }
}

std::vector<NodeId> parse_order(const std::string& s) {
  std::vector<NodeId> out;
  for (auto& tok : FlatConfig::split(s, ',')) {
    try {
      out.push_back(static_cast<NodeId>(std::stoi(tok)));
    } catch (const std::exception&) {
      throw UsageError("order: `" + tok + "` is not a node id");
    }
  }
  return out;
}

std::string report_csv(const std::string& algorithm, const ScheduleReport& r, const RunStats* stats) {
  std::string out = "algorithm,feasible,tight,strictly,DC,DD,violation_pct,violation_mag,messages,rounds\n";
  out += algorithm + "," + (r.feasible ? "true" : "false") + "," + (r.tight ? "true" : "false") + "," +
         (r.strictly ? "true" : "false") + "," + to_decimal(r.duty_cycle) + "," + to_decimal(r.delay_drift) + "," +
         to_decimal(r.violation_percentage * 100) + "," + to_decimal(r.violation_magnitude) + "," +
         (stats ? std::to_string(stats->messages_total) : "") + "," + (stats ? std::to_string(stats->rounds) : "") +
         "\n";
  return out;
}

std::string edge_detail(const ScheduleReport& r) {
  std::string out;
  for (auto& e : r.constraints)
    if (e.violated || !e.gap)
      out += "edge " + std::to_string(e.from) + "->" + std::to_string(e.to) + ": " +
             (e.gap ? "gap " + std::to_string(*e.gap) + " > U " + std::to_string(e.bound) : std::string("never meet")) +
             "\n";
  for (NodeId v : r.energy_violations) out += "node " + std::to_string(v) + ": period below L * |A|\n";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wake-up scheduling toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "random geometric topology");
  int g_n = 200;
  double g_side = 100, g_range = 40;
  std::uint64_t g_seed = 1;
  std::string g_out = ".";
  bool g_connected = false;
  std::vector<Slot> g_bounds;
  gen->add_option("--n", g_n, "node count")->check(CLI::PositiveNumber);
  gen->add_option("--side", g_side, "square side (m)")->check(CLI::PositiveNumber);
  gen->add_option("--range", g_range, "communication range (m)")->check(CLI::PositiveNumber);
  gen->add_option("--seed", g_seed, "random seed");
  gen->add_option("--out", g_out, "output directory");
  gen->add_flag("--connected", g_connected, "grow a connected deployment instead of independent points");
  gen->add_option("--constraints", g_bounds, "also draw constraints: L_lo L_hi U_lo U_hi")->expected(4);

  // plan
  auto* plan = app.add_subcommand("plan", "build a schedule");
  std::string p_topo, p_cons, p_alg = "bfs", p_basis = "2", p_order, p_out = "-", p_report, p_trace;
  std::optional<std::uint64_t> p_seed;
  bool p_distributed = false;
  plan->add_option("--topology", p_topo, "edge list")->required();
  plan->add_option("--constraints", p_cons, "node L U [alpha] lines or node,L,U CSV")->required();
  plan->add_option("--algorithm", p_alg)->check(CLI::IsMember({"bfs", "parallel"}));
  plan->add_option("--basis", p_basis, "comma list of primes");
  plan->add_option("--order", p_order, "PARALLEL activation order (comma list)");
  plan->add_option("--seed", p_seed, "PARALLEL timer seed");
  plan->add_option("--out", p_out, "schedule output ('-' for stdout)");
  plan->add_option("--report", p_report, "report CSV");
  plan->add_option("--trace", p_trace, "step trace (or message trace with --distributed)");
  plan->add_flag("--distributed", p_distributed, "run the message-level simulation");

  // verify
  auto* ver = app.add_subcommand("verify", "check a schedule");
  std::string v_topo, v_cons, v_sched, v_report;
  ver->add_option("--topology", v_topo)->required();
  ver->add_option("--constraints", v_cons)->required();
  ver->add_option("--schedule", v_sched)->required();
  ver->add_option("--report", v_report, "report CSV (default stdout)");

  // sweep
  auto* sw = app.add_subcommand("sweep", "random-topology metric sweep");
  std::string s_cfg, s_out = "-";
  std::vector<std::string> s_set;
  sw->add_option("--config", s_cfg, "flat key=value config");
  sw->add_option("--set", s_set, "override key=value");
  sw->add_option("--out", s_out, "CSV output");

  // netsim
  auto* ns = app.add_subcommand("netsim", "convergecast lifetime/latency comparison");
  std::string n_cfg, n_out = "-";
  std::vector<std::string> n_set;
  ns->add_option("--config", n_cfg, "flat key=value config");
  ns->add_option("--set", n_set, "override key=value");
  ns->add_option("--out", n_out, "CSV output");

  // budget
  auto* bud = app.add_subcommand("budget", "split route deadlines into per-node U");
  std::string b_topo, b_cons, b_deadlines, b_out = "-";
  NodeId b_sink = 0;
  std::optional<Slot> b_L, b_eta;
  bud->add_option("--topology", b_topo)->required();
  bud->add_option("--sink", b_sink)->required();
  bud->add_option("--L", b_L, "uniform energy bound")->check(CLI::PositiveNumber);
  bud->add_option("--constraints", b_cons, "take L from a constraints file");
  bud->add_option("--eta", b_eta, "uniform route deadline")->check(CLI::PositiveNumber);
  bud->add_option("--deadlines", b_deadlines, "`node eta` lines");
  bud->add_option("--out", b_out, "CSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*gen) {
      auto topo = g_connected ? random_connected_geometric(g_n, g_side, g_range, g_seed)
                              : random_geometric(g_n, g_side, g_range, g_seed);
      emit((fs::path(g_out) / "edges.txt").string(), to_edge_list(topo));
      emit((fs::path(g_out) / "positions.txt").string(), to_positions(topo));
      if (!g_bounds.empty()) {
        auto c = assign_constraints(topo, {g_bounds[0], g_bounds[1]}, {g_bounds[2], g_bounds[3]},
                                    derive_seed(g_seed, {2}));
        std::string text;
        for (auto& [v, b] : c) text += std::to_string(v) + " " + std::to_string(b.lower) + " " + std::to_string(b.upper) + "\n";
        emit((fs::path(g_out) / "constraints.txt").string(), text);
      }
      if (!is_connected(topo)) std::cerr << "warning: topology is disconnected\n";
      return 0;
    }

    if (*plan) {
      const auto topo = from_edge_list(slurp(p_topo));
      const auto cf = parse_constraints(slurp(p_cons));
      require_constraints(topo, cf.constraints);
      for (NodeId v : constraint_warnings(topo, cf.constraints))
        std::cerr << "warning: node " << v << " has U below 1 + max neighbor L\n";
      const auto basis = parse_basis(p_basis);
      const auto order = p_seed ? ActivationOrder::from_seed(*p_seed) : ActivationOrder::from_list(parse_order(p_order));
      Schedule s;
      std::string trace;
      std::optional<RunStats> stats;
      if (p_distributed) {
        auto r = p_alg == "bfs" ? simulate_bfs(topo, cf.constraints, basis, cf.origins)
                                : simulate_parallel(topo, cf.constraints, basis, order, cf.origins);
        s = r.schedule;
        trace = dump_messages(r.stats);
        stats = r.stats;
      } else {
        auto r = p_alg == "bfs" ? bfs_wakeup(topo, cf.constraints, basis, cf.origins)
                                : parallel_wakeup(topo, cf.constraints, basis, order, cf.origins);
        s = r.schedule;
        trace = dump_trace(r.trace);
      }
      const auto rep = verify(s, topo, cf.constraints);
      emit(p_out, serialize(s));
      if (!p_report.empty()) emit(p_report, report_csv(p_alg, rep, stats ? &*stats : nullptr));
      if (!p_trace.empty()) emit(p_trace, trace);
      std::cerr << "feasible=" << (rep.feasible ? "true" : "false") << " tight=" << (rep.tight ? "true" : "false")
                << " strictly=" << (rep.strictly ? "true" : "false") << "\n";
      return 0;
    }

    if (*ver) {
      const auto topo = from_edge_list(slurp(v_topo));
      const auto cf = parse_constraints(slurp(v_cons));
      require_constraints(topo, cf.constraints);
      const auto s = parse_schedule(slurp(v_sched));
      ScheduleReport rep;
      try {
        rep = verify(s, topo, cf.constraints);
      } catch (const std::domain_error& e) {
        throw DataError(e.what());
      }
      emit(v_report.empty() ? "-" : v_report, report_csv("-", rep, nullptr));
      std::cerr << edge_detail(rep);
      return 0;
    }

    auto load_config = [](const std::string& path, const std::vector<std::string>& sets,
                          const std::set<std::string>& keys) {
      std::string text = path.empty() ? std::string() : slurp(path);
      for (auto& kv : sets) text += "\n" + kv;
      return FlatConfig::parse(text, keys);
    };

    if (*sw) {
      const auto cfg = SweepConfig::from(load_config(s_cfg, s_set, SweepConfig::keys()));
      const auto res = run_sweep(cfg);
      emit(s_out, sweep_csv(res));
      std::cerr << "discarded disconnected draws: " << res.discarded << "\n";
      return 0;
    }

    if (*ns) {
      const auto e = NetsimExperiment::from(load_config(n_cfg, n_set, NetsimExperiment::keys()));
      const auto o = run_netsim(e);
      emit(n_out, results_csv(o.results, e.algorithm));
      return 0;
    }

    if (*bud) {
      const auto topo = from_edge_list(slurp(b_topo));
      if (!topo.contains(b_sink)) throw DataError("sink " + std::to_string(b_sink) + " is not in the topology");
      if (!b_L == b_cons.empty()) throw UsageError("give exactly one of --L and --constraints");
      if (!b_eta == b_deadlines.empty()) throw UsageError("give exactly one of --eta and --deadlines");
      BudgetProblem p;
      p.routes = shortest_path_tree(topo, b_sink);
      ConstraintFile cf;
      if (!b_cons.empty()) cf = parse_constraints(slurp(b_cons));
      std::map<NodeId, Slot> eta;
      if (!b_deadlines.empty()) {
        std::istringstream in(slurp(b_deadlines));
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
          ++lineno;
          if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
          std::istringstream ls(line);
          long long v, d;
          if (!(ls >> v)) continue;
          if (!(ls >> d) || d < 1) throw ParseError(lineno, "expected `node eta` with eta >= 1");
          eta[static_cast<NodeId>(v)] = d;
        }
      }
      for (NodeId v : p.routes.sources()) {
        if (b_L) {
          p.L[v] = *b_L;
        } else {
          if (!cf.constraints.contains(v)) throw DataError("no L for node " + std::to_string(v));
          p.L[v] = cf.constraints.lower(v);
        }
        if (b_eta) {
          p.eta[v] = *b_eta;
        } else {
          auto it = eta.find(v);
          if (it == eta.end()) throw DataError("no deadline for node " + std::to_string(v));
          p.eta[v] = it->second;
        }
      }
      const auto sol = assign_uniform(p);
      std::cerr << "feasible=" << (sol ? "true" : "false") << "\n";
      emit(b_out, sol ? budget_csv(p, *sol) : std::string("feasible\nfalse\n"));
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const DisconnectedError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kData;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kData;
  } catch (const DataError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kData;
  } catch (const std::domain_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
