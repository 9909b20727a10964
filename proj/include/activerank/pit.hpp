#pragma once

// Preference Interval Tree over a ranked list.
//
// The ranked list is stored worst-first: index 0 is the worst item so far and
// "z beats ranked[mid]" moves toward higher indices. Each node spans an open
// interval (left, right) of list indices; the leaves are the |S|+1 gaps into
// which a new item can be inserted. The two ends are open sentinels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "activerank/core.hpp"

namespace activerank {

// A list index extended with -inf / +inf.
struct ExtIndex {
  std::int64_t value = 0;

  static constexpr std::int64_t kNegInf = std::numeric_limits<std::int64_t>::min();
  static constexpr std::int64_t kPosInf = std::numeric_limits<std::int64_t>::max();

  static constexpr ExtIndex neg_inf() { return {kNegInf}; }
  static constexpr ExtIndex pos_inf() { return {kPosInf}; }

  constexpr bool is_neg_inf() const { return value == kNegInf; }
  constexpr bool is_pos_inf() const { return value == kPosInf; }
  constexpr bool is_finite() const { return !is_neg_inf() && !is_pos_inf(); }

  friend constexpr bool operator==(ExtIndex, ExtIndex) = default;
  friend constexpr auto operator<=>(ExtIndex, ExtIndex) = default;
};

using NodeIndex = std::size_t;

struct PitNode {
  ExtIndex left;
  ExtIndex right;
  std::int64_t mid = 0;
  std::optional<NodeIndex> lchild;
  std::optional<NodeIndex> rchild;
  std::optional<NodeIndex> parent;

  bool is_leaf() const { return !lchild && !rchild; }
  bool is_root() const { return !parent; }
};

class Pit {
 public:
  static constexpr NodeIndex kRoot = 0;

  const PitNode& node(NodeIndex i) const { return nodes_.at(i); }
  const PitNode& root() const { return nodes_.front(); }
  std::size_t node_count() const { return nodes_.size(); }
  const std::vector<PitNode>& nodes() const { return nodes_; }

  const std::vector<ItemId>& ranked() const { return ranked_; }

  // Number of levels, root counted as 1.
  std::size_t depth() const { return depth_; }

  // ⌈1 + log2(1 + |S|)⌉, the depth bound used to size the insertion walk.
  std::size_t nominal_depth() const {
    return static_cast<std::size_t>(std::ceil(1.0 + std::log2(1.0 + static_cast<double>(ranked_.size()))));
  }

  // Leaves in left-to-right order.
  std::vector<NodeIndex> leaves() const {
    std::vector<NodeIndex> out;
    collect_leaves(kRoot, out);
    return out;
  }

  // Item at a finite list index.
  ItemId item_at(ExtIndex idx) const {
    if (!idx.is_finite()) throw std::invalid_argument("Pit::item_at: sentinel index");
    return ranked_.at(static_cast<std::size_t>(idx.value));
  }

 private:
  friend Pit build_pit(std::vector<ItemId> ranked);

  void collect_leaves(NodeIndex i, std::vector<NodeIndex>& out) const {
    const PitNode& n = nodes_[i];
    if (n.is_leaf()) {
      out.push_back(i);
      return;
    }
    collect_leaves(*n.lchild, out);
    collect_leaves(*n.rchild, out);
  }

  std::vector<PitNode> nodes_;
  std::vector<ItemId> ranked_;
  std::size_t depth_ = 0;
};

// Breadth-first construction: the root spans (-1, |S|), every node with
// right - left > 1 splits at mid = floor((left + right) / 2), and the raw
// bounds -1 and |S| become the sentinels once the tree is complete.
inline Pit build_pit(std::vector<ItemId> ranked) {
  if (ranked.empty()) throw std::invalid_argument("build_pit: empty ranked list");
  {
    std::vector<ItemId> sorted = ranked;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("build_pit: duplicate items");
    }
  }

  const auto size = static_cast<std::int64_t>(ranked.size());
  auto floor_mid = [](std::int64_t l, std::int64_t r) {
    const std::int64_t s = l + r;
    return s >= 0 ? s / 2 : -((-s + 1) / 2);
  };

  Pit pit;
  pit.ranked_ = std::move(ranked);
  pit.nodes_.push_back(PitNode{{-1}, {size}, floor_mid(-1, size), {}, {}, {}});

  std::vector<std::size_t> level(1, 1);
  std::deque<NodeIndex> queue{Pit::kRoot};
  while (!queue.empty()) {
    const NodeIndex x = queue.front();
    queue.pop_front();
    const std::int64_t l = pit.nodes_[x].left.value;
    const std::int64_t r = pit.nodes_[x].right.value;
    const std::int64_t mid = floor_mid(l, r);
    pit.nodes_[x].mid = mid;
    if (r - l > 1) {
      const NodeIndex lc = pit.nodes_.size();
      pit.nodes_.push_back(PitNode{{l}, {mid}, floor_mid(l, mid), {}, {}, x});
      const NodeIndex rc = pit.nodes_.size();
      pit.nodes_.push_back(PitNode{{mid}, {r}, floor_mid(mid, r), {}, {}, x});
      pit.nodes_[x].lchild = lc;
      pit.nodes_[x].rchild = rc;
      level.push_back(level[x] + 1);
      level.push_back(level[x] + 1);
      queue.push_back(lc);
      queue.push_back(rc);
    }
  }
  pit.depth_ = *std::max_element(level.begin(), level.end());

  for (PitNode& n : pit.nodes_) {
    if (n.left.value == -1) n.left = ExtIndex::neg_inf();
    if (n.right.value == size) n.right = ExtIndex::pos_inf();
  }
  return pit;
}

// Index into the worst-first list at which an item bracketed by this leaf is
// inserted (0 prepends, |S| appends).
inline std::size_t leaf_interval_to_position(const Pit& pit, NodeIndex leaf) {
  const PitNode& n = pit.node(leaf);
  if (!n.is_leaf()) throw std::invalid_argument("leaf_interval_to_position: node is not a leaf");
  if (n.left.is_neg_inf()) return 0;
  return static_cast<std::size_t>(n.left.value) + 1;
}

}  // namespace activerank
