#include "pcqa/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pcqa/error.hpp"

namespace pcqa {

namespace {

inline double dist2(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace

struct NNIndex::Best {
  double d2 = std::numeric_limits<double>::infinity();
  std::uint32_t index = 0;

  bool improves(double cand_d2, std::uint32_t cand_idx) const {
    return cand_d2 < d2 || (cand_d2 == d2 && cand_idx < index);
  }
};

// Bounded candidate list ordered by (dist2, index); linear insertion is fine
// for the small k used here.
struct NNIndex::KnnAcc {
  std::size_t k;
  std::vector<Neighbor> items;

  explicit KnnAcc(std::size_t k_) : k(k_) { items.reserve(k_); }

  double worst_d2() const {
    return items.size() < k ? std::numeric_limits<double>::infinity()
                            : items.back().dist2;
  }

  void offer(double d2_, std::uint32_t idx) {
    if (items.size() == k) {
      const Neighbor& w = items.back();
      if (d2_ > w.dist2 || (d2_ == w.dist2 && idx > w.index)) return;
      items.pop_back();
    }
    auto pos = std::upper_bound(
        items.begin(), items.end(), Neighbor{idx, d2_},
        [](const Neighbor& a, const Neighbor& b) {
          return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
        });
    items.insert(pos, Neighbor{idx, d2_});
  }
};

NNIndex::NNIndex(const PointCloud& cloud) {
  if (cloud.empty()) throw InputError("cannot index an empty cloud");
  const std::size_t n = cloud.size();
  entries_.resize(n);
  axes_.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    entries_[i] = Entry{cloud.positions[i], static_cast<std::uint32_t>(i)};
  }
  build(0, n);
}

void NNIndex::build(std::size_t lo, std::size_t hi) {
  if (hi - lo <= 1) return;

  Vec3 bb_lo = entries_[lo].p, bb_hi = entries_[lo].p;
  for (std::size_t i = lo + 1; i < hi; ++i) {
    for (int a = 0; a < 3; ++a) {
      bb_lo[a] = std::min(bb_lo[a], entries_[i].p[a]);
      bb_hi[a] = std::max(bb_hi[a], entries_[i].p[a]);
    }
  }
  int axis = 0;
  double widest = bb_hi[0] - bb_lo[0];
  for (int a = 1; a < 3; ++a) {
    if (bb_hi[a] - bb_lo[a] > widest) {
      widest = bb_hi[a] - bb_lo[a];
      axis = a;
    }
  }

  // Median split ordered by (coordinate, original index) so duplicate
  // coordinates partition predictably.
  const std::size_t mid = lo + (hi - lo) / 2;
  auto first = entries_.begin() + static_cast<std::ptrdiff_t>(lo);
  std::nth_element(first, entries_.begin() + static_cast<std::ptrdiff_t>(mid),
                   entries_.begin() + static_cast<std::ptrdiff_t>(hi),
                   [axis](const Entry& a, const Entry& b) {
                     return a.p[axis] < b.p[axis] ||
                            (a.p[axis] == b.p[axis] && a.index < b.index);
                   });
  axes_[mid] = static_cast<std::uint8_t>(axis);
  build(lo, mid);
  build(mid + 1, hi);
}

void NNIndex::search_one(std::size_t lo, std::size_t hi, const Vec3& q, Best& best) const {
  if (lo >= hi) return;
  const std::size_t mid = lo + (hi - lo) / 2;
  const Entry& e = entries_[mid];
  const double d2_mid = dist2(q, e.p);
  if (best.improves(d2_mid, e.index)) {
    best.d2 = d2_mid;
    best.index = e.index;
  }
  if (hi - lo == 1) return;

  const int axis = axes_[mid];
  const double delta = q[axis] - e.p[axis];
  const bool left_first = delta < 0.0;
  const std::size_t n_lo = left_first ? lo : mid + 1;
  const std::size_t n_hi = left_first ? mid : hi;
  const std::size_t f_lo = left_first ? mid + 1 : lo;
  const std::size_t f_hi = left_first ? hi : mid;
  search_one(n_lo, n_hi, q, best);
  // <= keeps equal-distance candidates reachable so the index tie-break holds.
  if (delta * delta <= best.d2) search_one(f_lo, f_hi, q, best);
}

void NNIndex::search_k(std::size_t lo, std::size_t hi, const Vec3& q, KnnAcc& acc) const {
  if (lo >= hi) return;
  const std::size_t mid = lo + (hi - lo) / 2;
  acc.offer(dist2(q, entries_[mid].p), entries_[mid].index);
  if (hi - lo == 1) return;

  const int axis = axes_[mid];
  const double delta = q[axis] - entries_[mid].p[axis];
  const bool left_first = delta < 0.0;
  const std::size_t n_lo = left_first ? lo : mid + 1;
  const std::size_t n_hi = left_first ? mid : hi;
  const std::size_t f_lo = left_first ? mid + 1 : lo;
  const std::size_t f_hi = left_first ? hi : mid;
  search_k(n_lo, n_hi, q, acc);
  if (delta * delta <= acc.worst_d2()) search_k(f_lo, f_hi, q, acc);
}

Neighbor NNIndex::nearest(const Vec3& query) const {
  Best best;
  search_one(0, entries_.size(), query, best);
  return Neighbor{best.index, best.d2};
}

std::vector<Neighbor> NNIndex::k_nearest(const Vec3& query, std::size_t k) const {
  if (k == 0) throw InputError("k_nearest requires k >= 1");
  if (k > entries_.size()) {
    throw InputError("k_nearest: k = " + std::to_string(k) + " exceeds cloud size " +
                     std::to_string(entries_.size()));
  }
  KnnAcc acc(k);
  search_k(0, entries_.size(), query, acc);
  return std::move(acc.items);
}

}  // namespace pcqa
