#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

namespace wakeup {

using NodeId = int;
using Slot = std::int64_t;

struct Bounds {
  Slot lower;  // L_i: energy bound, n_i >= L_i * |A_i|
  Slot upper;  // U_i: max gap between consecutive rendezvous with any neighbor

  friend bool operator==(const Bounds&, const Bounds&) = default;
};

/// Per-node energy and delay bounds.
class ConstraintSet {
 public:
  ConstraintSet() = default;

  void set(NodeId node, Slot lower, Slot upper) {
    if (lower < 1 || upper < 1)
      throw std::domain_error("constraints for node " + std::to_string(node) + " must be positive");
    bounds_[node] = {lower, upper};
  }

  const Bounds& at(NodeId node) const {
    auto it = bounds_.find(node);
    if (it == bounds_.end()) throw std::out_of_range("no constraints for node " + std::to_string(node));
    return it->second;
  }

  Slot lower(NodeId node) const { return at(node).lower; }
  Slot upper(NodeId node) const { return at(node).upper; }
  bool contains(NodeId node) const { return bounds_.count(node) != 0; }
  std::size_t size() const { return bounds_.size(); }

  auto begin() const { return bounds_.begin(); }
  auto end() const { return bounds_.end(); }

  friend bool operator==(const ConstraintSet&, const ConstraintSet&) = default;

 private:
  std::map<NodeId, Bounds> bounds_;
};

}  // namespace wakeup
