#ifndef RB_TREE_HPP
#define RB_TREE_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace rb {

// Branching vector [b0, ..., bd] of a tree cluster state. Trailing zeros
// reduce the depth: [b0, b1, 0] is stored as the depth-1 tree [b0, b1].
// Invariants: b0 >= 1 and every stored level >= 1.
class TreeVector {
 public:
  explicit TreeVector(std::vector<std::int32_t> levels);
  TreeVector(std::initializer_list<std::int32_t> levels)
      : TreeVector(std::vector<std::int32_t>(levels)) {}

  std::span<const std::int32_t> levels() const { return levels_; }
  // Level k branch count, 0 beyond the depth.
  std::int32_t level(std::size_t k) const {
    return k < levels_.size() ? levels_[k] : 0;
  }
  std::size_t depth() const { return levels_.size() - 1; }

  // Total photons: sum over k of prod_{j<=k} b_j.
  std::int64_t photon_count() const;

  bool operator==(const TreeVector& other) const { return levels_ == other.levels_; }

 private:
  std::vector<std::int32_t> levels_;
};

}  // namespace rb

#endif
