// Copyright 2026 The vowelspace authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "test_util.hpp"
#include "vowelspace/geometry.hpp"

using namespace vowelspace;

namespace {

std::vector<double> test_grid(size_t n) {
  std::vector<double> g(n);
  for (size_t i = 0; i < n; ++i) g[i] = 100.0 + 10.0 * double(i);
  return g;
}

CochleaScaledSpectrum make_spectrum(const std::vector<double>& levels, bool normalized = true) {
  return CochleaScaledSpectrum{test_grid(levels.size()), levels, normalized};
}

// Embedding from explicit 2-D points, centered like an MDS output.
MdsEmbedding make_embedding(const std::vector<std::string>& labels,
                            const std::vector<std::array<double, 2>>& pts) {
  MdsEmbedding e;
  e.labels = labels;
  e.dims = 2;
  e.coords.resize(pts.size() * 2);
  double m0 = 0.0, m1 = 0.0;
  for (const auto& p : pts) {
    m0 += p[0];
    m1 += p[1];
  }
  m0 /= double(pts.size());
  m1 /= double(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    e.coord(i, 0) = pts[i][0] - m0;
    e.coord(i, 1) = pts[i][1] - m1;
  }
  return e;
}

double embedded_distance(const MdsEmbedding& e, size_t i, size_t j) {
  double sum = 0.0;
  for (size_t d = 0; d < e.dims; ++d) {
    const double diff = e.coord(i, d) - e.coord(j, d);
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

DistanceMatrix exact_planar_distances(const std::vector<std::array<double, 2>>& pts) {
  const size_t n = pts.size();
  DistanceMatrix m;
  m.labels.resize(n);
  for (size_t i = 0; i < n; ++i) m.labels[i] = "p" + std::to_string(i);
  m.values.assign(n * n, 0.0);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      m.values[i * n + j] = std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
  return m;
}

}  // namespace

TEST_CASE("euclidean distance basics") {
  auto p = make_spectrum({0, 0, 0, 0, 0, 0});
  auto q = make_spectrum({0, 3, 0, 0, 4, 0});
  CHECK(euclidean_distance(p, p) == 0.0);
  CHECK(euclidean_distance(p, q) == Catch::Approx(5.0).margin(1e-12));
  CHECK(euclidean_distance(q, p) == Catch::Approx(5.0).margin(1e-12));
}

TEST_CASE("euclidean distance matches per-bin summation") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(200), b(200);
    for (size_t i = 0; i < a.size(); ++i) {
      a[i] = testutil::uniform(rng, -40.0, 40.0);
      b[i] = testutil::uniform(rng, -40.0, 40.0);
    }
    double sum = 0.0;
    for (size_t i = 0; i < a.size(); ++i) sum += (b[i] - a[i]) * (b[i] - a[i]);
    CHECK(euclidean_distance(make_spectrum(a), make_spectrum(b)) ==
          Catch::Approx(std::sqrt(sum)).margin(1e-9));
  }
}

TEST_CASE("euclidean distance rejects bad inputs") {
  auto p = make_spectrum({1, 2, 3});
  CHECK_THROWS_AS(euclidean_distance(p, make_spectrum({1, 2, 3}, false)), DataError);
  CHECK_THROWS_AS(euclidean_distance(make_spectrum({1, 2, 3}, false), p), DataError);
  CHECK_THROWS_AS(euclidean_distance(p, make_spectrum({1, 2, 3, 4})), DataError);
  auto shifted = make_spectrum({1, 2, 3});
  shifted.center_frequencies[1] += 0.5;
  CHECK_THROWS_AS(euclidean_distance(p, shifted), DataError);
}

TEST_CASE("pairwise distances build a valid matrix") {
  std::mt19937_64 rng(7);
  std::vector<CochleaScaledSpectrum> spectra;
  std::vector<std::string> labels;
  for (int i = 0; i < 8; ++i) {
    std::vector<double> lv(50);
    for (double& v : lv) v = testutil::uniform(rng, -30.0, 30.0);
    spectra.push_back(make_spectrum(lv));
    labels.push_back("v" + std::to_string(i));
  }
  const auto m = pairwise_distances(spectra, labels);
  REQUIRE(m.size() == 8);
  validate_distance_matrix(m);

  // Metric property: triangle inequality on all triples.
  for (size_t i = 0; i < 8; ++i)
    for (size_t j = 0; j < 8; ++j)
      for (size_t k = 0; k < 8; ++k)
        CHECK(m.at(i, j) <= m.at(i, k) + m.at(k, j) + 1e-12);

  const auto zero =
      pairwise_distances({spectra[0], spectra[0]}, {"a", "b"});
  for (double v : zero.values) CHECK(v == 0.0);

  CHECK_THROWS_AS(pairwise_distances({spectra[0]}, {"a"}), DataError);
  CHECK_THROWS_AS(pairwise_distances(spectra, {"a"}), DataError);
}

TEST_CASE("distance matrix validation catches defects") {
  DistanceMatrix m{{"a", "b"}, {0.0, 1.0, 1.0, 0.0}};
  validate_distance_matrix(m);

  auto bad = m;
  bad.values[3] = 0.5;  // nonzero diagonal
  CHECK_THROWS_AS(validate_distance_matrix(bad), DataError);
  bad = m;
  bad.values[1] = 2.0;  // asymmetric
  CHECK_THROWS_AS(validate_distance_matrix(bad), DataError);
  bad = m;
  bad.values[1] = bad.values[2] = -1.0;  // negative
  CHECK_THROWS_AS(validate_distance_matrix(bad), DataError);
  bad = m;
  bad.values.pop_back();  // size mismatch
  CHECK_THROWS_AS(validate_distance_matrix(bad), DataError);
}

TEST_CASE("classical MDS two-point and equilateral cases") {
  DistanceMatrix two{{"a", "b"}, {0.0, 10.0, 10.0, 0.0}};
  const auto e1 = classical_mds(two, 1);
  REQUIRE(e1.dims == 1);
  CHECK(std::abs(e1.coord(0, 0)) == Catch::Approx(5.0).margin(1e-9));
  CHECK(std::abs(e1.coord(1, 0)) == Catch::Approx(5.0).margin(1e-9));
  CHECK(e1.coord(0, 0) == Catch::Approx(-e1.coord(1, 0)).margin(1e-9));

  DistanceMatrix tri{{"a", "b", "c"},
                     {0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0}};
  const auto e2 = classical_mds(tri, 2);
  for (size_t i = 0; i < 3; ++i)
    for (size_t j = i + 1; j < 3; ++j)
      CHECK(embedded_distance(e2, i, j) == Catch::Approx(1.0).margin(1e-9));
  CHECK(e2.eigenvalues[0] >= e2.eigenvalues[1]);
}

TEST_CASE("classical MDS round-trips planar configurations") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    const size_t n = 3 + size_t(trial % 10);
    std::vector<std::array<double, 2>> pts(n);
    for (auto& p : pts) {
      p[0] = testutil::uniform(rng, -10.0, 10.0);
      p[1] = testutil::uniform(rng, -10.0, 10.0);
    }
    const auto dmat = exact_planar_distances(pts);
    const auto e = classical_mds(dmat, 2);

    // Coordinates reproduce the input distances and are centered.
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j)
        CHECK(embedded_distance(e, i, j) == Catch::Approx(dmat.at(i, j)).margin(1e-9));
    double mean0 = 0.0, mean1 = 0.0;
    for (size_t i = 0; i < n; ++i) {
      mean0 += e.coord(i, 0);
      mean1 += e.coord(i, 1);
    }
    CHECK(std::abs(mean0 / double(n)) < 1e-9);
    CHECK(std::abs(mean1 / double(n)) < 1e-9);

    // Planar data: every eigenvalue past the second is numerically zero.
    const double scale = std::max(1.0, e.eigenvalues[0]);
    for (size_t i = 2; i < e.eigenvalues.size(); ++i)
      CHECK(std::abs(e.eigenvalues[i]) < 1e-8 * scale);
  }
}

TEST_CASE("classical MDS rank-2 strain matches the eigenvalue optimum") {
  // For a non-planar configuration the rank-2 reconstruction of the centered
  // Gram matrix has squared error equal to the sum of squared trailing
  // eigenvalues; anything lower would contradict the eigendecomposition.
  std::mt19937_64 rng(4242);
  const size_t n = 7;
  std::vector<std::array<double, 3>> pts(n);
  for (auto& p : pts)
    for (double& c : p) c = testutil::uniform(rng, -5.0, 5.0);

  DistanceMatrix m;
  m.labels.resize(n);
  m.values.assign(n * n, 0.0);
  for (size_t i = 0; i < n; ++i) m.labels[i] = "p" + std::to_string(i);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      const double dx = pts[i][0] - pts[j][0];
      const double dy = pts[i][1] - pts[j][1];
      const double dz = pts[i][2] - pts[j][2];
      m.values[i * n + j] = std::sqrt(dx * dx + dy * dy + dz * dz);
    }
  const auto e = classical_mds(m, 2);

  // Rebuild B and compare ||B - X X^T||_F^2 with sum of trailing lambda^2.
  std::vector<double> row_mean(n, 0.0);
  double grand = 0.0;
  std::vector<double> d2(n * n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      d2[i * n + j] = m.at(i, j) * m.at(i, j);
      row_mean[i] += d2[i * n + j];
    }
  for (size_t i = 0; i < n; ++i) {
    row_mean[i] /= double(n);
    grand += row_mean[i];
  }
  grand /= double(n);

  double strain = 0.0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      const double b = -0.5 * (d2[i * n + j] - row_mean[i] - row_mean[j] + grand);
      double recon = 0.0;
      for (size_t d = 0; d < 2; ++d) recon += e.coord(i, d) * e.coord(j, d);
      strain += (b - recon) * (b - recon);
    }

  double expected = 0.0;
  for (size_t i = 2; i < e.eigenvalues.size(); ++i)
    expected += e.eigenvalues[i] * e.eigenvalues[i];
  CHECK(strain == Catch::Approx(expected).margin(1e-6 * std::max(1.0, expected)));
}

TEST_CASE("classical MDS degenerate inputs") {
  DistanceMatrix zeros{{"a", "b", "c"}, std::vector<double>(9, 0.0)};
  const auto e = classical_mds(zeros, 2);
  for (double c : e.coords) CHECK(c == 0.0);
  for (double v : e.eigenvalues) CHECK(v == 0.0);

  DistanceMatrix two{{"a", "b"}, {0.0, 1.0, 1.0, 0.0}};
  CHECK_THROWS_AS(classical_mds(two, 2), DataError);  // needs dims+1 points
  CHECK_THROWS_AS(classical_mds(two, 0), DataError);
}

TEST_CASE("procrustes alignment recovers rotations and reflections") {
  const auto target = make_embedding(
      {"a", "b", "c", "d"}, {{0.0, 0.0}, {4.0, 0.0}, {4.0, 3.0}, {1.0, 2.0}});

  SECTION("rotation by 90 degrees") {
    auto source = target;
    for (size_t i = 0; i < source.size(); ++i) {
      const double x = source.coord(i, 0), y = source.coord(i, 1);
      source.coord(i, 0) = -y;
      source.coord(i, 1) = x;
    }
    const auto aligned = procrustes_align(target, source);
    for (size_t i = 0; i < target.size(); ++i)
      for (size_t d = 0; d < 2; ++d)
        CHECK(aligned.coord(i, d) == Catch::Approx(target.coord(i, d)).margin(1e-9));
  }

  SECTION("reflection") {
    auto source = target;
    for (size_t i = 0; i < source.size(); ++i) source.coord(i, 0) = -source.coord(i, 0);
    const auto aligned = procrustes_align(target, source);
    for (size_t i = 0; i < target.size(); ++i)
      for (size_t d = 0; d < 2; ++d)
        CHECK(aligned.coord(i, d) == Catch::Approx(target.coord(i, d)).margin(1e-9));
  }

  SECTION("arbitrary rotation") {
    const double theta = 0.77;
    auto source = target;
    for (size_t i = 0; i < source.size(); ++i) {
      const double x = source.coord(i, 0), y = source.coord(i, 1);
      source.coord(i, 0) = std::cos(theta) * x - std::sin(theta) * y;
      source.coord(i, 1) = std::sin(theta) * x + std::cos(theta) * y;
    }
    const auto aligned = procrustes_align(target, source);
    for (size_t i = 0; i < target.size(); ++i)
      for (size_t d = 0; d < 2; ++d)
        CHECK(aligned.coord(i, d) == Catch::Approx(target.coord(i, d)).margin(1e-9));
  }
}

TEST_CASE("procrustes alignment preserves distances and is idempotent") {
  std::mt19937_64 rng(555);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::array<double, 2>> tp(6), sp(6);
    for (size_t i = 0; i < 6; ++i) {
      tp[i] = {testutil::uniform(rng, -5.0, 5.0), testutil::uniform(rng, -5.0, 5.0)};
      sp[i] = {testutil::uniform(rng, -5.0, 5.0), testutil::uniform(rng, -5.0, 5.0)};
    }
    const std::vector<std::string> labels{"a", "b", "c", "d", "e", "f"};
    const auto target = make_embedding(labels, tp);
    const auto source = make_embedding(labels, sp);
    const auto once = procrustes_align(target, source);

    for (size_t i = 0; i < 6; ++i)
      for (size_t j = i + 1; j < 6; ++j)
        CHECK(embedded_distance(once, i, j) ==
              Catch::Approx(embedded_distance(source, i, j)).margin(1e-9));

    const auto twice = procrustes_align(target, once);
    for (size_t i = 0; i < once.coords.size(); ++i)
      CHECK(twice.coords[i] == Catch::Approx(once.coords[i]).margin(1e-12));
  }

  const auto target = make_embedding({"a", "b", "c"}, {{0, 0}, {1, 0}, {0, 1}});
  auto source = target;
  source.labels = {"a", "b", "x"};
  CHECK_THROWS_AS(procrustes_align(target, source), DataError);
}

TEST_CASE("axis ratio from coordinate ranges") {
  const auto square = make_embedding(
      {"a", "b", "c", "d"}, {{0.0, 0.0}, {2.0, 0.0}, {2.0, 2.0}, {0.0, 2.0}});
  CHECK(axis_ratio(square) == Catch::Approx(1.0).margin(1e-12));

  const auto line = make_embedding({"a", "b", "c"}, {{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}});
  CHECK(axis_ratio(line) == 0.0);

  const auto tall = make_embedding({"a", "b"}, {{0.0, 0.0}, {1.0, 3.0}});
  CHECK(axis_ratio(tall) == Catch::Approx(3.0).margin(1e-12));

  const auto vertical = make_embedding({"a", "b"}, {{0.0, 0.0}, {0.0, 1.0}});
  CHECK_THROWS_AS(axis_ratio(vertical), DataError);
}

TEST_CASE("orientation flips put reference labels on the right sides") {
  const auto e = make_embedding(
      {"i", "e", "a", "u"}, {{3.0, 1.0}, {1.0, 0.5}, {0.0, -2.0}, {-3.0, 1.0}});
  const auto o = orient_embedding(e, "i", "a");
  const size_t ii = 0, ia = 2;
  CHECK(o.coord(ii, 0) < 0.0);
  CHECK(o.coord(ia, 1) > 0.0);

  // Flips change neither distances nor the axis ratio.
  for (size_t i = 0; i < e.size(); ++i)
    for (size_t j = i + 1; j < e.size(); ++j)
      CHECK(embedded_distance(o, i, j) ==
            Catch::Approx(embedded_distance(e, i, j)).margin(1e-12));
  CHECK(axis_ratio(o) == Catch::Approx(axis_ratio(e)).margin(1e-12));

  // Already-oriented embeddings pass through unchanged.
  const auto o2 = orient_embedding(o, "i", "a");
  for (size_t i = 0; i < o.coords.size(); ++i) CHECK(o2.coords[i] == o.coords[i]);

  CHECK_THROWS_AS(orient_embedding(e, "nope", "a"), DataError);
}

TEST_CASE("convex hull membership") {
  const auto e = make_embedding({"sw", "se", "ne", "nw", "mid"},
                                {{0.0, 0.0}, {4.0, 0.0}, {4.0, 4.0}, {0.0, 4.0}, {2.0, 1.0}});
  const auto hull = convex_hull_labels(e);
  CHECK(std::find(hull.begin(), hull.end(), "sw") != hull.end());
  CHECK(std::find(hull.begin(), hull.end(), "se") != hull.end());
  CHECK(std::find(hull.begin(), hull.end(), "ne") != hull.end());
  CHECK(std::find(hull.begin(), hull.end(), "nw") != hull.end());
  CHECK(std::find(hull.begin(), hull.end(), "mid") == hull.end());

  // A point on a hull edge counts as on the hull.
  const auto edge = make_embedding({"a", "b", "c", "d"},
                                   {{0.0, 0.0}, {4.0, 0.0}, {2.0, 0.0}, {2.0, 3.0}});
  const auto hull2 = convex_hull_labels(edge);
  CHECK(std::find(hull2.begin(), hull2.end(), "c") != hull2.end());
}

TEST_CASE("spectrum averaging stays on the grid and is exact") {
  auto a = make_spectrum({1.0, -1.0, 3.0, -3.0});
  auto b = make_spectrum({2.0, 0.0, -2.0, 0.0});
  auto c = make_spectrum({0.0, 4.0, -1.0, -3.0});
  const auto avg = average_spectra({a, b, c});
  REQUIRE(avg.normalized);
  REQUIRE(avg.levels_db.size() == 4);
  CHECK(avg.levels_db[0] == Catch::Approx(1.0).margin(1e-12));
  CHECK(avg.levels_db[1] == Catch::Approx(1.0).margin(1e-12));
  CHECK(avg.levels_db[2] == Catch::Approx(0.0).margin(1e-12));
  CHECK(avg.levels_db[3] == Catch::Approx(-2.0).margin(1e-12));

  CHECK_THROWS_AS(average_spectra({}), DataError);
  CHECK_THROWS_AS(average_spectra({a, make_spectrum({1.0, 2.0}, true)}), DataError);
  auto un = a;
  un.normalized = false;
  CHECK_THROWS_AS(average_spectra({a, un}), DataError);
}
