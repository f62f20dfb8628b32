#pragma once

// Slot-stepped simulation of duty-cycled convergecast: periodic traffic
// routed up a tree to an always-on sink, awake-slot energy accounting,
// node lifetimes and end-to-end latency.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "constraints.hpp"
#include "random.hpp"
#include "schedule.hpp"
#include "topology.hpp"

namespace wakeup {

enum class Scheme { Wakeup, NoPowerSaving, Uniform };

inline std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Wakeup: return "wakeup";
    case Scheme::NoPowerSaving: return "no_power_saving";
    case Scheme::Uniform: return "uniform";
  }
  return "?";
}

struct SimConfig {
  Topology topo;
  RouteSet routes;
  Scheme scheme = Scheme::Wakeup;
  Schedule schedule;            // used by Scheme::Wakeup
  double slot_duration = 0.1;   // seconds
  double packet_period = 30.0;  // seconds
  std::int64_t energy_budget = 1000;  // awake slots per node
  std::optional<Slot> horizon;  // default: until every node has died
};

struct PacketRecord {
  NodeId source = 0;
  int hops = 0;
  Slot generated = 0;
  Slot delivered = 0;
  double latency_s = 0;
};

struct HopBucket {
  int hop_distance = 0;
  double mean_lifetime_s = 0;
  double mean_latency_s = 0;
  std::size_t n_packets = 0;
  std::size_t n_nodes = 0;
};

struct SimResult {
  std::map<NodeId, double> lifetime_s;      // sink absent
  std::map<NodeId, std::int64_t> consumed;  // awake slots spent
  std::vector<PacketRecord> packets;        // delivered before the first death
  double first_death_s = 0;
  std::vector<HopBucket> buckets;
};

namespace detail {

inline bool scheme_awake(const SimConfig& cfg, NodeId v, Slot t) {
  if (v == cfg.routes.sink) return true;
  switch (cfg.scheme) {
    case Scheme::NoPowerSaving: return true;
    case Scheme::Uniform: return t % 2 == 0;
    case Scheme::Wakeup: return cfg.schedule.at(v).awake(t);
  }
  return false;
}

// Slot in which the node spends its last unit of energy.
inline Slot death_slot(const SimConfig& cfg, NodeId v) {
  switch (cfg.scheme) {
    case Scheme::NoPowerSaving: return cfg.energy_budget - 1;
    case Scheme::Uniform: return 2 * (cfg.energy_budget - 1);
    case Scheme::Wakeup: {
      const auto& ns = cfg.schedule.at(v);
      const auto per = static_cast<std::int64_t>(ns.phases.size());
      const std::int64_t full = (cfg.energy_budget - 1) / per;
      const std::int64_t rest = (cfg.energy_budget - 1) % per;
      return full * ns.period + ns.phases[static_cast<std::size_t>(rest)];
    }
  }
  return 0;
}

}  // namespace detail

inline SimResult run(const SimConfig& cfg, std::uint64_t seed) {
  if (cfg.slot_duration <= 0 || cfg.packet_period <= 0 || cfg.energy_budget < 1)
    throw std::domain_error("netsim: durations and energy budget must be positive");
  if (cfg.scheme == Scheme::Wakeup) require_covers(cfg.schedule, cfg.topo);
  const Slot traffic_period = std::max<Slot>(1, std::llround(cfg.packet_period / cfg.slot_duration));
  const NodeId sink = cfg.routes.sink;
  const auto sources = cfg.routes.sources();

  std::map<NodeId, Slot> death;
  Slot last_death = 0, first_death = std::numeric_limits<Slot>::max();
  for (NodeId v : sources) {
    death[v] = detail::death_slot(cfg, v);
    last_death = std::max(last_death, death[v]);
    first_death = std::min(first_death, death[v]);
  }
  const Slot horizon = cfg.horizon.value_or(last_death + 1);

  Rng rng(derive_seed(seed, {0x6e657473696dULL}));
  std::map<NodeId, Slot> offset;
  for (NodeId v : sources) offset[v] = uniform_int(rng, 0, traffic_period - 1);

  struct InFlight {
    NodeId source;
    Slot generated;
  };
  std::map<NodeId, std::vector<InFlight>> queue;
  SimResult res;
  std::map<NodeId, std::int64_t> energy;

  for (Slot t = 0; t < horizon; ++t) {
    auto alive = [&](NodeId v) { return v == sink || t <= death.at(v); };
    for (NodeId v : sources)
      if (t <= death[v] && t >= offset[v] && (t - offset[v]) % traffic_period == 0) queue[v].push_back({v, t});
    for (NodeId v : sources)
      if (alive(v) && detail::scheme_awake(cfg, v, t)) ++energy[v];

    // Forward everything queued at the start of the slot; arrivals land at
    // the end of it, so a packet moves at most one hop per slot.
    std::map<NodeId, std::vector<InFlight>> arriving;
    for (auto& [v, pkts] : queue) {
      if (pkts.empty() || v == sink) continue;
      const NodeId p = cfg.routes.parent.at(v);
      if (!alive(v) || !alive(p) || !detail::scheme_awake(cfg, v, t) || !detail::scheme_awake(cfg, p, t)) continue;
      auto& dst = arriving[p];
      dst.insert(dst.end(), pkts.begin(), pkts.end());
      pkts.clear();
    }
    for (auto& [p, pkts] : arriving) {
      if (p != sink) {
        auto& q = queue[p];
        q.insert(q.end(), pkts.begin(), pkts.end());
        continue;
      }
      for (auto& pk : pkts) {
        const Slot delivered = t + 1;
        if (delivered > first_death + 1) continue;
        res.packets.push_back({pk.source, cfg.routes.length(pk.source), pk.generated, delivered,
                               static_cast<double>(delivered - pk.generated) * cfg.slot_duration});
      }
    }
  }

  for (NodeId v : sources) {
    res.lifetime_s[v] = static_cast<double>(death[v] + 1) * cfg.slot_duration;
    res.consumed[v] = energy[v];
  }
  res.first_death_s = sources.empty() ? 0 : static_cast<double>(first_death + 1) * cfg.slot_duration;

  // sums in whole slots, so equal lifetimes give bit-equal means
  std::map<int, HopBucket> b;
  std::map<int, Slot> life_slots, lat_slots;
  for (NodeId v : sources) {
    auto& h = b[cfg.routes.length(v)];
    h.hop_distance = cfg.routes.length(v);
    life_slots[h.hop_distance] += death[v] + 1;
    ++h.n_nodes;
  }
  for (auto& pk : res.packets) {
    ++b[pk.hops].n_packets;
    lat_slots[pk.hops] += pk.delivered - pk.generated;
  }
  for (auto& [h, bucket] : b) {
    bucket.mean_lifetime_s =
        static_cast<double>(life_slots[h]) / static_cast<double>(bucket.n_nodes) * cfg.slot_duration;
    bucket.mean_latency_s =
        bucket.n_packets ? static_cast<double>(lat_slots[h]) / static_cast<double>(bucket.n_packets) * cfg.slot_duration
                         : 0.0;
    res.buckets.push_back(bucket);
  }
  return res;
}

/// Worst delay over all arrival slots for one hop from `from` to `to`: a
/// packet arriving during slot t leaves in the first common slot s > t and
/// reaches the next hop at the end of s, i.e. after s + 1 - t slots.
inline std::optional<Slot> worst_one_hop_delay(const NodeSchedule& from, const NodeSchedule& to) {
  const auto r = rendezvous(from, to);
  if (r.never()) return std::nullopt;
  Slot worst = 0;
  for (Slot t = 0; t < r.hyperperiod; ++t) {
    const Slot s = *next_rendezvous(r, t + 1);
    worst = std::max(worst, s + 1 - t);
  }
  return worst;
}

/// L_i = 2 * ceil(hops / 2), at least 2; the sink gets 2.
inline ConstraintSet distance_dependent_constraints(const RouteSet& routes, Slot upper) {
  ConstraintSet c;
  for (auto& [v, h] : routes.hops) {
    const Slot l = std::max<Slot>(2, 2 * ((h + 1) / 2));
    c.set(v, l, std::max(upper, l));
  }
  return c;
}

struct SchemeResult {
  Scheme scheme;
  SimResult result;
};

/// Runs every scheme on the same topology, routes, traffic seed and budget.
inline std::vector<SchemeResult> compare_schemes(const SimConfig& base, const std::vector<Scheme>& schemes,
                                                 std::uint64_t seed) {
  std::vector<SchemeResult> out;
  for (Scheme s : schemes) {
    SimConfig cfg = base;
    cfg.scheme = s;
    out.push_back({s, run(cfg, seed)});
  }
  return out;
}

inline std::string fixed(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

/// CSV `scheme,hop_distance,mean_lifetime_s,mean_latency_s,n_packets,n_nodes`.
/// `wakeup_label` names the duty-cycled scheme (e.g. the planner used).
inline std::string results_csv(const std::vector<SchemeResult>& rows, const std::string& wakeup_label = "wakeup") {
  std::string out = "scheme,hop_distance,mean_lifetime_s,mean_latency_s,n_packets,n_nodes\n";
  for (auto& r : rows)
    for (auto& b : r.result.buckets)
      out += (r.scheme == Scheme::Wakeup ? wakeup_label : scheme_name(r.scheme)) + "," + std::to_string(b.hop_distance) + "," + fixed(b.mean_lifetime_s) + "," +
             fixed(b.mean_latency_s) + "," + std::to_string(b.n_packets) + "," + std::to_string(b.n_nodes) + "\n";
  return out;
}

}  // namespace wakeup
