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

// Spectral distance matrices, classical (Torgerson) multidimensional scaling,
// orthogonal Procrustes alignment, and axis-extent diagnostics.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vowelspace/auditory.hpp"
#include "vowelspace/error.hpp"

namespace vowelspace {

/// Symmetric nonnegative distance matrix with item labels.
/// values is row-major n x n.
struct DistanceMatrix {
  std::vector<std::string> labels;
  std::vector<double> values;

  std::size_t size() const { return labels.size(); }
  double at(std::size_t i, std::size_t j) const { return values[i * size() + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * size() + j]; }
};

inline void validate_distance_matrix(const DistanceMatrix& m) {
  const std::size_t n = m.labels.size();
  if (n == 0) throw DataError("distance matrix: no items");
  if (m.values.size() != n * n)
    throw DataError("distance matrix: values size " + std::to_string(m.values.size()) +
                    " does not match " + std::to_string(n) + " labels");
  for (std::size_t i = 0; i < n; ++i) {
    if (m.at(i, i) != 0.0)
      throw DataError("distance matrix: nonzero diagonal at " + m.labels[i]);
    for (std::size_t j = 0; j < n; ++j) {
      const double v = m.at(i, j);
      if (!std::isfinite(v) || v < 0.0)
        throw DataError("distance matrix: bad entry at (" + m.labels[i] + ", " + m.labels[j] + ")");
      if (std::abs(v - m.at(j, i)) > 1e-9)
        throw DataError("distance matrix: asymmetric at (" + m.labels[i] + ", " + m.labels[j] + ")");
    }
  }
}

/// Low-dimensional embedding of labelled items. coords is row-major n x dims;
/// dimension 1 is read as frontness and dimension 2 as height once the
/// embedding has been oriented/aligned. eigenvalues holds the full descending
/// spectrum of the centered Gram matrix.
struct MdsEmbedding {
  std::vector<std::string> labels;
  std::vector<double> coords;
  std::size_t dims = 2;
  std::vector<double> eigenvalues;

  std::size_t size() const { return labels.size(); }
  double coord(std::size_t i, std::size_t d) const { return coords[i * dims + d]; }
  double& coord(std::size_t i, std::size_t d) { return coords[i * dims + d]; }
};

/// Euclidean distance between two normalized spectra on the same channel grid.
inline double euclidean_distance(const CochleaScaledSpectrum& p, const CochleaScaledSpectrum& q) {
  if (!p.normalized || !q.normalized)
    throw DataError("euclidean_distance: inputs must be normalized");
  if (p.center_frequencies.size() != q.center_frequencies.size() ||
      p.center_frequencies != q.center_frequencies)
    throw DataError("euclidean_distance: channel grids do not match");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.levels_db.size(); ++i) {
    const double diff = q.levels_db[i] - p.levels_db[i];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

inline DistanceMatrix pairwise_distances(const std::vector<CochleaScaledSpectrum>& spectra,
                                         const std::vector<std::string>& labels) {
  if (spectra.size() != labels.size())
    throw DataError("pairwise_distances: " + std::to_string(spectra.size()) + " spectra vs " +
                    std::to_string(labels.size()) + " labels");
  if (spectra.size() < 2) throw DataError("pairwise_distances: need at least 2 spectra");
  const std::size_t n = spectra.size();
  DistanceMatrix m;
  m.labels = labels;
  m.values.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = euclidean_distance(spectra[i], spectra[j]);
      m.at(i, j) = d;
      m.at(j, i) = d;
    }
  return m;
}

/// Classical MDS (Torgerson): double-center the squared distances,
/// eigendecompose, scale the top eigenvectors by sqrt of the clamped
/// eigenvalues. An all-zero distance matrix yields all-zero coordinates.
inline MdsEmbedding classical_mds(const DistanceMatrix& dmat, std::size_t dims = 2) {
  validate_distance_matrix(dmat);
  const std::size_t n = dmat.size();
  if (dims < 1) throw DataError("classical_mds: dims must be >= 1");
  if (n < dims + 1)
    throw DataError("classical_mds: need at least " + std::to_string(dims + 1) + " items, got " +
                    std::to_string(n));

  Eigen::MatrixXd d2(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d2(i, j) = dmat.at(i, j) * dmat.at(i, j);

  const Eigen::MatrixXd j_center =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / double(n));
  const Eigen::MatrixXd b = -0.5 * j_center * d2 * j_center;

  MdsEmbedding e;
  e.labels = dmat.labels;
  e.dims = dims;
  e.coords.assign(n * dims, 0.0);
  e.eigenvalues.assign(n, 0.0);

  const double b_norm = b.norm();
  if (b_norm == 0.0) return e;  // coincident points: zero spectrum, zero coords

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
  if (solver.info() != Eigen::Success)
    throw NumericError("classical_mds: eigendecomposition failed");

  // Solver returns ascending order; we report descending.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = n - 1 - i;
  for (std::size_t i = 0; i < n; ++i) e.eigenvalues[i] = solver.eigenvalues()(Eigen::Index(order[i]));

  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Index col = Eigen::Index(order[i]);
    const double lambda = solver.eigenvalues()(col);
    const Eigen::VectorXd v = solver.eigenvectors().col(col);
    const double residual = (b * v - lambda * v).norm() / b_norm;
    if (residual > 1e-10)
      throw NumericError("classical_mds: eigenpair residual " + std::to_string(residual) +
                         " exceeds tolerance");
  }

  const double lambda_max = e.eigenvalues.front();
  const double lambda_min = e.eigenvalues.back();
  if (lambda_min < 0.0 && std::abs(lambda_min) > 1e-6 * std::max(lambda_max, 0.0))
    std::fprintf(stderr,
                 "warning: classical_mds: clamping negative eigenvalue %.6g "
                 "(non-Euclidean distances)\n",
                 lambda_min);

  for (std::size_t d = 0; d < dims; ++d) {
    const double lambda = std::max(0.0, e.eigenvalues[d]);
    const double scale = std::sqrt(lambda);
    const Eigen::VectorXd v = solver.eigenvectors().col(Eigen::Index(order[d]));
    for (std::size_t i = 0; i < n; ++i) e.coord(i, d) = scale * v(Eigen::Index(i));
  }
  return e;
}

/// Rotate/reflect source (orthogonal transform, no scaling) to minimize the
/// summed squared coordinate differences to target. Labels must match in
/// order. Pairwise distances within source are preserved.
inline MdsEmbedding procrustes_align(const MdsEmbedding& target, const MdsEmbedding& source) {
  if (target.labels != source.labels)
    throw DataError("procrustes_align: label sets do not match");
  if (target.dims != source.dims)
    throw DataError("procrustes_align: dimension mismatch");
  const std::size_t n = source.size();
  const std::size_t k = source.dims;

  Eigen::MatrixXd s(n, k), t(n, k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < k; ++d) {
      s(Eigen::Index(i), Eigen::Index(d)) = source.coord(i, d);
      t(Eigen::Index(i), Eigen::Index(d)) = target.coord(i, d);
    }

  const Eigen::MatrixXd m = s.transpose() * t;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXd rot = svd.matrixU() * svd.matrixV().transpose();

  MdsEmbedding out = source;
  const Eigen::MatrixXd aligned = s * rot;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < k; ++d) out.coord(i, d) = aligned(Eigen::Index(i), Eigen::Index(d));
  return out;
}

namespace detail {

inline std::size_t label_index(const MdsEmbedding& e, const std::string& label) {
  const auto it = std::find(e.labels.begin(), e.labels.end(), label);
  if (it == e.labels.end()) throw DataError("embedding has no item labelled " + label);
  return std::size_t(it - e.labels.begin());
}

}  // namespace detail

/// Fix the sign ambiguity of an embedding: flip dimension 1 so low_dim1 sits
/// on the negative side and dimension 2 so high_dim2 sits on the positive
/// side. MDS coordinates are centered, so the sign of a single reference
/// coordinate decides each flip.
inline MdsEmbedding orient_embedding(const MdsEmbedding& e, const std::string& low_dim1,
                                     const std::string& high_dim2) {
  if (e.dims < 2) throw DataError("orient_embedding: need a 2-D embedding");
  const std::size_t i1 = detail::label_index(e, low_dim1);
  const std::size_t i2 = detail::label_index(e, high_dim2);
  MdsEmbedding out = e;
  if (out.coord(i1, 0) > 0.0)
    for (std::size_t i = 0; i < out.size(); ++i) out.coord(i, 0) = -out.coord(i, 0);
  if (out.coord(i2, 1) < 0.0)
    for (std::size_t i = 0; i < out.size(); ++i) out.coord(i, 1) = -out.coord(i, 1);
  return out;
}

/// Height extent over frontness extent: range of dimension 2 divided by range
/// of dimension 1.
inline double axis_ratio(const MdsEmbedding& e) {
  if (e.size() < 2) throw DataError("axis_ratio: need at least 2 points");
  if (e.dims < 2) throw DataError("axis_ratio: need a 2-D embedding");
  double min1 = e.coord(0, 0), max1 = min1;
  double min2 = e.coord(0, 1), max2 = min2;
  for (std::size_t i = 1; i < e.size(); ++i) {
    min1 = std::min(min1, e.coord(i, 0));
    max1 = std::max(max1, e.coord(i, 0));
    min2 = std::min(min2, e.coord(i, 1));
    max2 = std::max(max2, e.coord(i, 1));
  }
  const double range1 = max1 - min1;
  if (range1 <= 0.0) throw DataError("axis_ratio: zero range along dimension 1");
  return (max2 - min2) / range1;
}

/// Labels lying on the convex hull of a 2-D embedding, boundary-inclusive:
/// points on a hull edge count as on the hull.
inline std::vector<std::string> convex_hull_labels(const MdsEmbedding& e) {
  if (e.dims < 2) throw DataError("convex_hull_labels: need a 2-D embedding");
  const std::size_t n = e.size();
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (e.coord(a, 0) != e.coord(b, 0)) return e.coord(a, 0) < e.coord(b, 0);
    return e.coord(a, 1) < e.coord(b, 1);
  });

  const auto cross = [&](std::size_t o, std::size_t a, std::size_t b) {
    return (e.coord(a, 0) - e.coord(o, 0)) * (e.coord(b, 1) - e.coord(o, 1)) -
           (e.coord(a, 1) - e.coord(o, 1)) * (e.coord(b, 0) - e.coord(o, 0));
  };

  // Monotone chain; the strict pop condition (< -eps) keeps collinear
  // boundary points in the chain.
  const double eps = 1e-12;
  const auto build = [&](bool lower) {
    std::vector<std::size_t> chain;
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t i = lower ? idx[t] : idx[n - 1 - t];
      while (chain.size() >= 2 && cross(chain[chain.size() - 2], chain.back(), i) < -eps)
        chain.pop_back();
      chain.push_back(i);
    }
    return chain;
  };

  std::vector<bool> on_hull(n, false);
  for (std::size_t i : build(true)) on_hull[i] = true;
  for (std::size_t i : build(false)) on_hull[i] = true;

  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i)
    if (on_hull[i]) out.push_back(e.labels[i]);
  return out;
}

/// Channel-wise mean of several normalized spectra on a common grid.
/// The mean of mean-zero spectra is mean-zero, so the result stays normalized.
inline CochleaScaledSpectrum average_spectra(const std::vector<CochleaScaledSpectrum>& spectra) {
  if (spectra.empty()) throw DataError("average_spectra: no spectra");
  const auto& first = spectra.front();
  CochleaScaledSpectrum out;
  out.center_frequencies = first.center_frequencies;
  out.levels_db.assign(first.levels_db.size(), 0.0);
  out.normalized = true;
  for (const auto& s : spectra) {
    if (!s.normalized) throw DataError("average_spectra: inputs must be normalized");
    if (s.center_frequencies != first.center_frequencies)
      throw DataError("average_spectra: channel grids do not match");
    for (std::size_t i = 0; i < s.levels_db.size(); ++i) out.levels_db[i] += s.levels_db[i];
  }
  const double inv = 1.0 / double(spectra.size());
  for (double& v : out.levels_db) v *= inv;
  return out;
}

}  // namespace vowelspace
