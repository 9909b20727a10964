#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "activerank/pit.hpp"

namespace activerank {
namespace {

std::vector<ItemId> iota_list(std::size_t n) {
  std::vector<ItemId> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

TEST(BuildPit, RejectsEmptyAndDuplicates) {
  EXPECT_THROW(build_pit({}), std::invalid_argument);
  EXPECT_THROW(build_pit({4, 2, 4}), std::invalid_argument);
}

TEST(BuildPit, SingleItem) {
  const Pit pit = build_pit({7});
  const PitNode& root = pit.root();
  EXPECT_TRUE(root.left.is_neg_inf());
  EXPECT_TRUE(root.right.is_pos_inf());
  EXPECT_EQ(root.mid, 0);
  const auto leaves = pit.leaves();
  ASSERT_EQ(leaves.size(), 2u);
  EXPECT_TRUE(pit.node(leaves[0]).left.is_neg_inf());
  EXPECT_EQ(pit.node(leaves[0]).right, ExtIndex{0});
  EXPECT_EQ(pit.node(leaves[1]).left, ExtIndex{0});
  EXPECT_TRUE(pit.node(leaves[1]).right.is_pos_inf());
}

TEST(BuildPit, ThreeItems) {
  const Pit pit = build_pit({10, 11, 12});
  EXPECT_EQ(pit.root().mid, 1);
  const auto leaves = pit.leaves();
  ASSERT_EQ(leaves.size(), 4u);
  EXPECT_TRUE(pit.node(leaves[0]).left.is_neg_inf());
  EXPECT_EQ(pit.node(leaves[0]).right, ExtIndex{0});
  EXPECT_EQ(pit.node(leaves[1]).left, ExtIndex{0});
  EXPECT_EQ(pit.node(leaves[1]).right, ExtIndex{1});
  EXPECT_EQ(pit.node(leaves[2]).left, ExtIndex{1});
  EXPECT_EQ(pit.node(leaves[2]).right, ExtIndex{2});
  EXPECT_EQ(pit.node(leaves[3]).left, ExtIndex{2});
  EXPECT_TRUE(pit.node(leaves[3]).right.is_pos_inf());
}

TEST(BuildPit, StructuralInvariantsUpTo64) {
  for (std::size_t n = 1; n <= 64; ++n) {
    SCOPED_TRACE(n);
    const Pit pit = build_pit(iota_list(n));
    const auto leaves = pit.leaves();
    EXPECT_EQ(leaves.size(), n + 1);
    EXPECT_LE(pit.depth(), static_cast<std::size_t>(std::ceil(1.0 + std::log2(1.0 + static_cast<double>(n)))));

    // Leaves tile (-inf, +inf): consecutive, no gaps or overlaps.
    EXPECT_TRUE(pit.node(leaves.front()).left.is_neg_inf());
    EXPECT_TRUE(pit.node(leaves.back()).right.is_pos_inf());
    for (std::size_t k = 0; k + 1 < leaves.size(); ++k) {
      EXPECT_EQ(pit.node(leaves[k]).right, pit.node(leaves[k + 1]).left);
    }

    for (std::size_t i = 0; i < pit.node_count(); ++i) {
      const PitNode& node = pit.node(i);
      if (i == Pit::kRoot) {
        EXPECT_FALSE(node.parent.has_value());
      } else {
        ASSERT_TRUE(node.parent.has_value());
      }
      if (node.is_leaf()) continue;
      ASSERT_TRUE(node.lchild && node.rchild);
      const PitNode& l = pit.node(*node.lchild);
      const PitNode& r = pit.node(*node.rchild);
      EXPECT_EQ(l.left, node.left);
      EXPECT_EQ(l.right, ExtIndex{node.mid});
      EXPECT_EQ(r.left, ExtIndex{node.mid});
      EXPECT_EQ(r.right, node.right);
      EXPECT_EQ(*l.parent, i);
      EXPECT_EQ(*r.parent, i);
      EXPECT_LT(node.left, ExtIndex{node.mid});
      EXPECT_LT(ExtIndex{node.mid}, node.right);
    }
  }
}

TEST(LeafPosition, SentinelsAndInterior) {
  const Pit pit = build_pit({10, 11, 12});
  const auto leaves = pit.leaves();
  EXPECT_EQ(leaf_interval_to_position(pit, leaves[0]), 0u);
  EXPECT_EQ(leaf_interval_to_position(pit, leaves[2]), 2u);
  EXPECT_EQ(leaf_interval_to_position(pit, leaves[3]), 3u);
  EXPECT_THROW(leaf_interval_to_position(pit, Pit::kRoot), std::invalid_argument);
}

// Noiseless navigation: "item beats ranked[mid] -> rchild" reaches the leaf
// bracketing the item's true position.
TEST(PitNavigation, NoiselessWalkFindsTruePosition) {
  for (std::size_t n = 1; n <= 40; ++n) {
    // Ranked list holds the even values 0, 2, ..., worst-first; insert every odd value.
    std::vector<ItemId> ranked(n);
    for (std::size_t k = 0; k < n; ++k) ranked[k] = static_cast<ItemId>(2 * k);
    const Pit pit = build_pit(ranked);
    for (std::size_t v = 0; v <= n; ++v) {
      const ItemId z = static_cast<ItemId>(2 * v) - 1;
      NodeIndex x = Pit::kRoot;
      while (!pit.node(x).is_leaf()) {
        const PitNode& node = pit.node(x);
        x = z > pit.item_at({node.mid}) ? *node.rchild : *node.lchild;
      }
      EXPECT_EQ(leaf_interval_to_position(pit, x), v) << "n=" << n << " z=" << z;
    }
  }
}

}  // namespace
}  // namespace activerank
