#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <map>

#include "pcqa/error.hpp"
#include "pcqa/projection.hpp"
#include "pcqa/random.hpp"
#include "test_support.hpp"

using namespace pcqa;
using testsupport::make_cloud;

namespace {

ProjectionSet make_empty_set(int precision) {
  const int side = 1 << precision;
  ProjectionSet set;
  set.precision = precision;
  for (PlaneId plane : kAllPlanes) {
    ViewImage& v = set.view(plane);
    v.plane = plane;
    v.image = RgbImage(side, side, kBackground);
    v.occupancy = MaskImage(side, side, 0);
    v.depth = DepthImage(side, side, is_min_depth(plane) ? side : 0);
  }
  return set;
}

int occupied_count(const MaskImage& m) {
  int count = 0;
  for (std::uint8_t o : m.data) count += o;
  return count;
}

// Dense solve of the same reflected 4-neighbor Laplace operator pad() uses,
// restricted to the unoccupied pixels. Independent of the library path.
Plane<double> laplace_oracle(const Plane<double>& img, const MaskImage& occ) {
  const int rows = img.rows, cols = img.cols;
  std::map<std::pair<int, int>, int> unknown;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (!occ.at(r, c)) {
        const int id = static_cast<int>(unknown.size());
        unknown[{r, c}] = id;
      }
    }
  }
  const int n = static_cast<int>(unknown.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  auto reflect = [](int i, int n_) { return i < 0 ? 0 : (i >= n_ ? n_ - 1 : i); };
  for (const auto& [pix, id] : unknown) {
    const auto [r, c] = pix;
    a(id, id) += 4.0;
    const std::pair<int, int> nbrs[4] = {{reflect(r - 1, rows), c},
                                         {reflect(r + 1, rows), c},
                                         {r, reflect(c - 1, cols)},
                                         {r, reflect(c + 1, cols)}};
    for (const auto& [nr, nc] : nbrs) {
      if (!occ.at(nr, nc)) {
        a(id, unknown.at({nr, nc})) -= 1.0;
      } else {
        b(id) += img.at(nr, nc);
      }
    }
  }
  const Eigen::VectorXd x = a.fullPivLu().solve(b);
  Plane<double> out = img;
  for (const auto& [pix, id] : unknown) out.at(pix.first, pix.second) = x(id);
  return out;
}

}  // namespace

TEST_CASE("a single point is visible from both sides of each pair") {
  const PointCloud cloud = make_cloud({{1, 2, 3}}, {{9, 8, 7}}, 2);
  const ProjectionSet set = project(cloud);

  CHECK(set.view(PlaneId::kXY).occupancy.at(1, 2) == 1);
  CHECK(set.view(PlaneId::kXYP).occupancy.at(1, 2) == 1);
  CHECK(set.view(PlaneId::kXY).depth.at(1, 2) == 3);
  CHECK(set.view(PlaneId::kXYP).depth.at(1, 2) == 3);
  CHECK(set.view(PlaneId::kXY).image.at(1, 2) == Rgb8{9, 8, 7});

  CHECK(set.view(PlaneId::kXZ).occupancy.at(1, 3) == 1);
  CHECK(set.view(PlaneId::kYZ).occupancy.at(2, 3) == 1);

  for (PlaneId plane : kAllPlanes) {
    CHECK(occupied_count(set.view(plane).occupancy) == 1);
  }
}

TEST_CASE("occlusion resolves to the extremal depth per side") {
  const PointCloud cloud =
      make_cloud({{1, 1, 0}, {1, 1, 3}}, {{10, 10, 10}, {200, 200, 200}}, 2);
  const ProjectionSet set = project(cloud);
  // Min-depth view keeps z = 0, max-depth view keeps z = 3.
  CHECK(set.view(PlaneId::kXYP).image.at(1, 1) == Rgb8{10, 10, 10});
  CHECK(set.view(PlaneId::kXYP).depth.at(1, 1) == 0);
  CHECK(set.view(PlaneId::kXY).image.at(1, 1) == Rgb8{200, 200, 200});
  CHECK(set.view(PlaneId::kXY).depth.at(1, 1) == 3);
}

TEST_CASE("project matches the per-pixel extremal-depth oracle") {
  SplitMix64 rng(71);
  for (int round = 0; round < 10; ++round) {
    const PointCloud cloud = testsupport::random_voxel_cloud(rng, 500, 5);
    const ProjectionSet got = project(cloud);
    const ProjectionSet expected = testsupport::projection_oracle(cloud);
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(testsupport::views_equal(got.views[i], expected.views[i]));
    }
  }
}

TEST_CASE("occupancy and depth do not depend on colors") {
  SplitMix64 rng(83);
  const PointCloud a = testsupport::random_voxel_cloud(rng, 400, 5);
  PointCloud b = a;
  for (Rgb8& c : b.colors) c = {static_cast<std::uint8_t>(rng.next_below(256)), 0, 255};
  const ProjectionSet pa = project(a);
  const ProjectionSet pb = project(b);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(pa.views[i].occupancy == pb.views[i].occupancy);
    CHECK(pa.views[i].depth == pb.views[i].depth);
  }
}

TEST_CASE("project validates its input") {
  CHECK_THROWS_AS(project(PointCloud{}), InputError);
  CHECK_THROWS_AS(project(make_cloud({{0, 0, 0}}, {{0, 0, 0}}, 0)), InputError);
  CHECK_THROWS_WITH_AS(project(make_cloud({{4, 0, 0}}, {{0, 0, 0}}, 2)),
                       doctest::Contains("outside"), InputError);
}

TEST_CASE("filtering keeps a flat plaque") {
  ProjectionSet set = make_empty_set(9);
  ViewImage& v = set.view(PlaneId::kXYP);
  for (int r = 10; r < 20; ++r) {
    for (int c = 10; c < 20; ++c) {
      v.occupancy.at(r, c) = 1;
      v.depth.at(r, c) = 100;
      v.image.at(r, c) = {50, 60, 70};
    }
  }
  const ProjectionSet out = filter_occlusions(set, 5, 20);
  CHECK(out.view(PlaneId::kXYP).occupancy == set.view(PlaneId::kXYP).occupancy);
  CHECK(out.view(PlaneId::kXYP).image == set.view(PlaneId::kXYP).image);
}

TEST_CASE("filtering removes a far-side pixel poking through a min view") {
  ProjectionSet set = make_empty_set(9);
  ViewImage& v = set.view(PlaneId::kXYP);
  for (int r = 100; r < 103; ++r) {
    for (int c = 100; c < 103; ++c) {
      v.occupancy.at(r, c) = 1;
      v.depth.at(r, c) = 100;
      v.image.at(r, c) = {1, 2, 3};
    }
  }
  v.depth.at(101, 101) = 300;  // the hole shows the far surface

  const ProjectionSet out = filter_occlusions(set, 5, 20);
  const ViewImage& f = out.view(PlaneId::kXYP);
  CHECK(f.occupancy.at(101, 101) == 0);
  CHECK(f.image.at(101, 101) == kBackground);
  CHECK(f.depth.at(101, 101) == 1 << 9);
  CHECK(occupied_count(f.occupancy) == 8);
}

TEST_CASE("filtering removes a near-side mirror case on a max view") {
  ProjectionSet set = make_empty_set(9);
  ViewImage& v = set.view(PlaneId::kXY);
  for (int r = 100; r < 103; ++r) {
    for (int c = 100; c < 103; ++c) {
      v.occupancy.at(r, c) = 1;
      v.depth.at(r, c) = 300;
      v.image.at(r, c) = {1, 2, 3};
    }
  }
  v.depth.at(101, 101) = 100;  // far-side point visible through the near surface

  const ProjectionSet out = filter_occlusions(set, 5, 20);
  CHECK(out.view(PlaneId::kXY).occupancy.at(101, 101) == 0);
  CHECK(occupied_count(out.view(PlaneId::kXY).occupancy) == 8);
}

TEST_CASE("a threshold above the depth range removes nothing") {
  SplitMix64 rng(101);
  const PointCloud cloud = testsupport::random_voxel_cloud(rng, 600, 5);
  const ProjectionSet before = project(cloud);
  const ProjectionSet after = filter_occlusions(before, 5, (1 << 5) + 1);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(after.views[i].occupancy == before.views[i].occupancy);
  }
}

TEST_CASE("filtering never adds occupancy") {
  SplitMix64 rng(113);
  const PointCloud cloud = testsupport::random_voxel_cloud(rng, 800, 5);
  const ProjectionSet before = project(cloud);
  const ProjectionSet after = filter_occlusions(before, 5, 20);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(occupied_count(after.views[i].occupancy) <=
          occupied_count(before.views[i].occupancy));
    for (std::size_t j = 0; j < after.views[i].occupancy.data.size(); ++j) {
      if (after.views[i].occupancy.data[j]) CHECK(before.views[i].occupancy.data[j]);
    }
  }
}

TEST_CASE("an isolated pixel has no neighbors and is kept") {
  ProjectionSet set = make_empty_set(9);
  ViewImage& v = set.view(PlaneId::kXYP);
  v.occupancy.at(50, 50) = 1;
  v.depth.at(50, 50) = 450;
  const ProjectionSet out = filter_occlusions(set, 5, 20);
  CHECK(out.view(PlaneId::kXYP).occupancy.at(50, 50) == 1);
}

TEST_CASE("filter parameter validation") {
  ProjectionSet set = make_empty_set(4);
  CHECK_THROWS_AS(filter_occlusions(set, 4, 20), InputError);
  CHECK_THROWS_AS(filter_occlusions(set, 1, 20), InputError);
  CHECK_THROWS_AS(filter_occlusions(set, 5, 0), InputError);
}

TEST_CASE("compute_crop finds the tight bounds") {
  MaskImage full(16, 16, 1);
  CHECK(compute_crop(full) == CropRect{0, 0, 15, 15});

  MaskImage occ(1024, 1024, 0);
  for (int r = 5; r <= 10; ++r) {
    for (int c = 5; c <= 12; ++c) occ.at(r, c) = 1;
  }
  const CropRect rect = compute_crop(occ);
  CHECK(rect == CropRect{5, 5, 10, 12});
  CHECK(rect.rows() == 6);
  CHECK(rect.cols() == 8);

  MaskImage single(64, 64, 0);
  single.at(30, 40) = 1;
  const CropRect tiny = compute_crop(single);
  CHECK(tiny.rows() == 1);
  CHECK(tiny.cols() == 1);

  CHECK_THROWS_WITH_AS(compute_crop(MaskImage(8, 8, 0)),
                       doctest::Contains("nothing projected"), InputError);
}

TEST_CASE("crop slices image, occupancy and depth together") {
  ProjectionSet set = make_empty_set(4);
  ViewImage& v = set.view(PlaneId::kXZ);
  v.occupancy.at(3, 4) = 1;
  v.depth.at(3, 4) = 7;
  v.image.at(3, 4) = {1, 2, 3};
  const ViewImage out = crop(v, CropRect{3, 4, 5, 6});
  CHECK(out.image.rows == 3);
  CHECK(out.image.cols == 3);
  CHECK(out.occupancy.at(0, 0) == 1);
  CHECK(out.depth.at(0, 0) == 7);
  CHECK(out.image.at(0, 0) == Rgb8{1, 2, 3});
  CHECK(out.plane == PlaneId::kXZ);
}

TEST_CASE("pad returns a fully occupied image bit-exact") {
  SplitMix64 rng(131);
  RgbImage img(20, 20);
  for (Rgb8& c : img.px) {
    c = {static_cast<std::uint8_t>(rng.next_below(256)),
         static_cast<std::uint8_t>(rng.next_below(256)),
         static_cast<std::uint8_t>(rng.next_below(256))};
  }
  const MaskImage occ(20, 20, 1);
  CHECK(pad(img, occ) == img);
}

TEST_CASE("pad fills holes in a constant image with the constant") {
  RgbImage img(32, 32, {77, 130, 200});
  MaskImage occ(32, 32, 1);
  SplitMix64 rng(139);
  for (int i = 0; i < 300; ++i) {
    const int r = static_cast<int>(rng.next_below(32));
    const int c = static_cast<int>(rng.next_below(32));
    occ.at(r, c) = 0;
    img.at(r, c) = {0, 0, 0};
  }
  bool any_occupied = false;
  for (std::uint8_t o : occ.data) any_occupied |= o != 0;
  REQUIRE(any_occupied);

  const RgbImage out = pad(img, occ);
  for (int r = 0; r < 32; ++r) {
    for (int c = 0; c < 32; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        const int expected = Rgb8{77, 130, 200}[ch];
        CHECK(std::abs(out.at(r, c)[ch] - expected) <= 1);
      }
    }
  }
}

TEST_CASE("pad keeps occupied pixels bit-exact and obeys the max principle") {
  SplitMix64 rng(149);
  RgbImage img(24, 24, {255, 255, 255});
  MaskImage occ(24, 24, 0);
  int lo = 255, hi = 0;
  for (int i = 0; i < 60; ++i) {
    const int r = static_cast<int>(rng.next_below(24));
    const int c = static_cast<int>(rng.next_below(24));
    const std::uint8_t v = static_cast<std::uint8_t>(40 + rng.next_below(150));
    occ.at(r, c) = 1;
    img.at(r, c) = {v, v, v};
    lo = std::min<int>(lo, v);
    hi = std::max<int>(hi, v);
  }
  const RgbImage out = pad(img, occ);
  for (int r = 0; r < 24; ++r) {
    for (int c = 0; c < 24; ++c) {
      if (occ.at(r, c)) {
        CHECK(out.at(r, c) == img.at(r, c));
      } else {
        CHECK(out.at(r, c)[0] >= lo);
        CHECK(out.at(r, c)[0] <= hi);
      }
    }
  }
}

TEST_CASE("pad matches a dense Laplace solve across a gap") {
  const int rows = 8, cols = 20;
  RgbImage img(rows, cols, {255, 255, 255});
  MaskImage occ(rows, cols, 0);
  for (int r = 0; r < rows; ++r) {
    occ.at(r, 0) = 1;
    img.at(r, 0) = {0, 0, 0};
    occ.at(r, cols - 1) = 1;
    img.at(r, cols - 1) = {100, 100, 100};
  }
  const RgbImage out = pad(img, occ);

  Plane<double> luma(rows, cols, 0.0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) luma.at(r, c) = img.at(r, c)[0];
  }
  const Plane<double> solved = laplace_oracle(luma, occ);

  for (int r = 0; r < rows; ++r) {
    for (int c = 1; c + 1 < cols; ++c) {
      CHECK(out.at(r, c)[0] > 0);
      CHECK(out.at(r, c)[0] < 100);
      CHECK(out.at(r, c)[0] >= out.at(r, c - 1)[0]);  // monotone across the gap
      // The 0.1-per-sweep stop bounds the distance to the exact harmonic
      // solution to a couple of levels, not to 0.1.
      CHECK(std::abs(out.at(r, c)[0] - solved.at(r, c)) <= 2.5);
    }
  }
}

TEST_CASE("pad rejects shape mismatches and empty occupancy") {
  CHECK_THROWS_AS(pad(RgbImage(4, 4), MaskImage(4, 5, 1)), InputError);
  CHECK_THROWS_WITH_AS(pad(RgbImage(4, 4), MaskImage(4, 4, 0)),
                       doctest::Contains("anchors"), InputError);
}
