#pragma once

#include <cstdint>
#include <vector>

#include "pcqa/cloud.hpp"

namespace pcqa {

struct Neighbor {
  std::uint32_t index;  // index into the indexed cloud
  double dist2;         // squared Euclidean distance
};

// Exact nearest-neighbor index over a cloud's positions (median-split k-d
// tree over a private copy of the coordinates). Equal distances resolve to
// the lowest point index, so results are deterministic regardless of build
// or traversal order. Immutable after construction; concurrent queries are
// safe.
class NNIndex {
public:
  explicit NNIndex(const PointCloud& cloud);

  std::size_t size() const { return entries_.size(); }

  // Exact nearest neighbor; ties resolve to the lowest index.
  Neighbor nearest(const Vec3& query) const;

  // The k exact nearest neighbors sorted by (distance, index) ascending.
  // Throws for k == 0 or k > size().
  std::vector<Neighbor> k_nearest(const Vec3& query, std::size_t k) const;

private:
  struct Entry {
    Vec3 p;
    std::uint32_t index;
  };
  struct Best;
  struct KnnAcc;

  void build(std::size_t lo, std::size_t hi);
  void search_one(std::size_t lo, std::size_t hi, const Vec3& q, Best& best) const;
  void search_k(std::size_t lo, std::size_t hi, const Vec3& q, KnnAcc& acc) const;

  std::vector<Entry> entries_;          // tree order
  std::vector<std::uint8_t> axes_;      // split axis per tree slot
};

}  // namespace pcqa
