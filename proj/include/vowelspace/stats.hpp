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

// Within-cluster distance observations, piecewise (broken-stick) regression
// with speaker random intercepts, paired f0-condition tests, and
// Benjamini-Hochberg FDR control.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "vowelspace/error.hpp"
#include "vowelspace/geometry.hpp"
#include "vowelspace/vowel.hpp"

namespace vowelspace {

/// Named group of vowels whose pairwise distances are analyzed together.
struct ClusterDef {
  std::string name;
  std::vector<Vowel> members;
};

inline void validate_clusters(const std::vector<ClusterDef>& clusters) {
  std::set<Vowel> seen;
  for (const auto& c : clusters) {
    if (c.members.size() < 2)
      throw DataError("cluster " + c.name + ": needs at least 2 members");
    std::set<Vowel> local(c.members.begin(), c.members.end());
    if (local.size() != c.members.size())
      throw DataError("cluster " + c.name + ": duplicate member");
    for (Vowel v : c.members) {
      if (!seen.insert(v).second)
        throw DataError("clusters overlap at vowel " + std::string(to_label(v)));
    }
  }
}

inline std::vector<ClusterDef> default_clusters() {
  return {{"front", {Vowel::I, Vowel::E, Vowel::Y}},
          {"mid", {Vowel::Oe, Vowel::Eh, Vowel::A}},
          {"back", {Vowel::U, Vowel::O}}};
}

/// One normalized spectrum of the corpus, addressed by its cell coordinates.
struct SpectrumCell {
  Vowel vowel;
  std::string speaker_id;
  double f0 = 0.0;
  CochleaScaledSpectrum spectrum;
};

/// A within-cluster spectral distance for one (speaker, f0, vowel pair).
struct DistanceObservation {
  double f0 = 0.0;
  std::string speaker_id;
  std::string cluster;
  std::pair<Vowel, Vowel> pair{Vowel::I, Vowel::I};
  double distance = 0.0;
};

/// Euclidean distances between all within-cluster vowel pairs, one observation
/// per (speaker, f0, pair). Output ordered by (f0, speaker, cluster, pair).
inline std::vector<DistanceObservation> within_cluster_distances(
    const std::vector<SpectrumCell>& cells, const std::vector<ClusterDef>& clusters) {
  validate_clusters(clusters);

  std::map<std::tuple<double, std::string, int>, const CochleaScaledSpectrum*> index;
  std::set<double> f0s;
  std::set<std::string> speakers;
  for (const auto& c : cells) {
    const auto key = std::make_tuple(c.f0, c.speaker_id, int(c.vowel));
    if (!index.emplace(key, &c.spectrum).second)
      throw DataError("duplicate cell: speaker=" + c.speaker_id + " f0=" + std::to_string(c.f0) +
                      " vowel=" + std::string(to_label(c.vowel)));
    f0s.insert(c.f0);
    speakers.insert(c.speaker_id);
  }

  const auto lookup = [&](double f0, const std::string& spk, Vowel v) {
    const auto it = index.find(std::make_tuple(f0, spk, int(v)));
    if (it == index.end())
      throw DataError("missing cell: speaker=" + spk + " f0=" + std::to_string(f0) +
                      " vowel=" + std::string(to_label(v)));
    return it->second;
  };

  std::vector<DistanceObservation> obs;
  for (double f0 : f0s)
    for (const auto& spk : speakers)
      for (const auto& cluster : clusters)
        for (std::size_t i = 0; i < cluster.members.size(); ++i)
          for (std::size_t j = i + 1; j < cluster.members.size(); ++j) {
            const auto* p = lookup(f0, spk, cluster.members[i]);
            const auto* q = lookup(f0, spk, cluster.members[j]);
            obs.push_back({f0, spk, cluster.name,
                           {cluster.members[i], cluster.members[j]},
                           euclidean_distance(*p, *q)});
          }
  return obs;
}

/// Five-number-ish summary of the distances at one f0.
struct DistanceSummary {
  double f0 = 0.0;
  std::size_t n = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

namespace detail {

// Linear-interpolation quantile on a sorted copy (R type 7).
inline double quantile(std::vector<double> sorted, double p) {
  std::sort(sorted.begin(), sorted.end());
  const double h = (double(sorted.size()) - 1.0) * p;
  const auto lo = std::size_t(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - double(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

inline std::vector<DistanceSummary> summarize_distances(
    const std::vector<DistanceObservation>& obs) {
  if (obs.empty()) throw DataError("summarize_distances: no observations");
  std::map<double, std::vector<double>> by_f0;
  for (const auto& o : obs) by_f0[o.f0].push_back(o.distance);
  std::vector<DistanceSummary> out;
  for (auto& [f0, values] : by_f0) {
    DistanceSummary s;
    s.f0 = f0;
    s.n = values.size();
    s.median = detail::quantile(values, 0.5);
    s.q1 = detail::quantile(values, 0.25);
    s.q3 = detail::quantile(values, 0.75);
    out.push_back(s);
  }
  return out;
}

/// Broken-stick regression distance = b0 + b1*f0 + b2*max(0, f0 - breakpoint)
/// with a random intercept per speaker. beta2 is the slope change above the
/// breakpoint; the above-break total slope is beta1 + beta2.
struct PiecewiseFit {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double breakpoint = 523.0;
  double se_beta1 = 0.0;
  double se_beta2 = 0.0;
  double p_beta1 = 1.0;
  double p_beta2 = 1.0;
  std::map<std::string, double> speaker_intercepts;
  double residual_variance = 0.0;
  double intercept_variance = 0.0;

  double predict(double f0) const {
    return beta0 + beta1 * f0 + beta2 * std::max(0.0, f0 - breakpoint);
  }
};

namespace detail {

// Objective pieces for one variance ratio psi = intercept_var / residual_var.
// V = I + psi Z Z^T; by Woodbury V^-1 a = a - Z diag(psi/(1+psi n_j)) Z^T a,
// and log|V| = sum_j log(1 + psi n_j).
struct RemlWorkspace {
  Eigen::MatrixXd x;            // n x 3
  Eigen::VectorXd y;            // n
  std::vector<int> group;       // n, speaker index per row
  std::vector<double> gsize;    // per group

  Eigen::MatrixXd vinv(const Eigen::MatrixXd& a, double psi) const {
    const auto g = group.size();
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(Eigen::Index(gsize.size()), a.cols());
    for (std::size_t i = 0; i < g; ++i) sums.row(group[i]) += a.row(Eigen::Index(i));
    Eigen::MatrixXd out = a;
    for (std::size_t i = 0; i < g; ++i) {
      const double w = psi / (1.0 + psi * gsize[std::size_t(group[i])]);
      out.row(Eigen::Index(i)) -= w * sums.row(group[i]);
    }
    return out;
  }

  // Profiled -2 restricted log-likelihood up to a constant; also returns the
  // GLS pieces so the minimizer's final evaluation can be reused.
  double objective(double psi, Eigen::Vector3d* beta_out = nullptr,
                   Eigen::Matrix3d* xtvx_inv_out = nullptr, double* rss_out = nullptr) const {
    const double n = double(y.size());
    const Eigen::MatrixXd xv = vinv(x, psi);
    const Eigen::Matrix3d xtvx = x.transpose() * xv;
    Eigen::FullPivLU<Eigen::Matrix3d> lu(xtvx);
    if (lu.rank() < 3) throw NumericError("piecewise_fit: rank-deficient design");
    const Eigen::Vector3d xty = xv.transpose() * y;
    const Eigen::Vector3d beta = lu.solve(xty);
    const Eigen::VectorXd r = y - x * beta;
    const double rss = (r.transpose() * vinv(r, psi))(0, 0);
    double logdet_v = 0.0;
    for (double gs : gsize) logdet_v += std::log(1.0 + psi * gs);
    const double logdet_xtvx = std::log(std::abs(lu.determinant()));
    if (beta_out) *beta_out = beta;
    if (xtvx_inv_out) *xtvx_inv_out = lu.inverse();
    if (rss_out) *rss_out = rss;
    return (n - 3.0) * std::log(std::max(rss, 1e-300)) + logdet_v + logdet_xtvx;
  }
};

inline double student_t_two_sided_p(double t, double dof) {
  if (!std::isfinite(t)) return t == 0.0 ? 1.0 : 0.0;
  const boost::math::students_t dist(dof);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

}  // namespace detail

/// REML fit of the broken-stick model. Needs >=2 distinct f0 on each side of
/// the breakpoint; with fewer than 2 speakers the random intercept is dropped
/// and a plain least-squares fit is reported.
inline PiecewiseFit piecewise_fit(const std::vector<DistanceObservation>& obs,
                                  double breakpoint = 523.0) {
  const std::size_t n = obs.size();
  if (n < 5) throw DataError("piecewise_fit: too few observations");

  std::set<double> below, above;
  double f0_min = obs.front().f0, f0_max = obs.front().f0;
  for (const auto& o : obs) {
    (o.f0 <= breakpoint ? below : above).insert(o.f0);
    f0_min = std::min(f0_min, o.f0);
    f0_max = std::max(f0_max, o.f0);
  }
  if (below.size() < 2 || above.size() < 2)
    throw DataError("piecewise_fit: need >=2 distinct f0 on each side of the breakpoint");
  if (breakpoint < f0_min || breakpoint > f0_max)
    throw DataError("piecewise_fit: breakpoint outside the observed f0 range");

  std::map<std::string, int> speaker_index;
  for (const auto& o : obs) speaker_index.emplace(o.speaker_id, 0);
  int next = 0;
  for (auto& [id, idx] : speaker_index) idx = next++;
  const std::size_t s = speaker_index.size();

  detail::RemlWorkspace w;
  w.x.resize(Eigen::Index(n), 3);
  w.y.resize(Eigen::Index(n));
  w.group.resize(n);
  w.gsize.assign(s, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    w.x(Eigen::Index(i), 0) = 1.0;
    w.x(Eigen::Index(i), 1) = obs[i].f0;
    w.x(Eigen::Index(i), 2) = std::max(0.0, obs[i].f0 - breakpoint);
    w.y(Eigen::Index(i)) = obs[i].distance;
    w.group[i] = speaker_index[obs[i].speaker_id];
    w.gsize[std::size_t(w.group[i])] += 1.0;
  }

  double psi = 0.0;
  if (s >= 2) {
    // Golden-section search on [0, 1000]; the profiled objective is smooth
    // and unimodal for this one-parameter family.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0, b = 1000.0;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = w.objective(c), fd = w.objective(d);
    for (int iter = 0; iter < 200 && (b - a) > 1e-8 * std::max(1.0, b); ++iter) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - inv_phi * (b - a);
        fc = w.objective(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + inv_phi * (b - a);
        fd = w.objective(d);
      }
    }
    psi = 0.5 * (a + b);
    if (w.objective(0.0) <= w.objective(psi)) psi = 0.0;  // boundary wins
  }

  Eigen::Vector3d beta;
  Eigen::Matrix3d xtvx_inv;
  double rss = 0.0;
  w.objective(psi, &beta, &xtvx_inv, &rss);

  PiecewiseFit fit;
  fit.breakpoint = breakpoint;
  fit.beta0 = beta(0);
  fit.beta1 = beta(1);
  fit.beta2 = beta(2);

  const double dof = double(n) - 3.0 - (s >= 2 ? double(s) - 1.0 : 0.0);
  if (dof < 1.0) throw DataError("piecewise_fit: nonpositive residual degrees of freedom");
  const double sigma2 = rss / (double(n) - 3.0);
  fit.residual_variance = sigma2;
  fit.intercept_variance = psi * sigma2;

  // Degenerate fit (essentially zero residual variance): slopes carry no
  // evidence either way, report p = 1.
  const double y_scale = w.y.squaredNorm() + 1.0;
  if (sigma2 <= 1e-12 * y_scale) {
    fit.p_beta1 = fit.p_beta2 = 1.0;
    fit.se_beta1 = fit.se_beta2 = 0.0;
  } else {
    fit.se_beta1 = std::sqrt(sigma2 * xtvx_inv(1, 1));
    fit.se_beta2 = std::sqrt(sigma2 * xtvx_inv(2, 2));
    fit.p_beta1 = detail::student_t_two_sided_p(fit.beta1 / fit.se_beta1, dof);
    fit.p_beta2 = detail::student_t_two_sided_p(fit.beta2 / fit.se_beta2, dof);
  }

  if (s >= 2) {
    // BLUP of the speaker offsets: psi * (group residual sum) / (1 + psi n_j).
    const Eigen::VectorXd r = w.y - w.x * beta;
    std::vector<double> rsum(s, 0.0);
    for (std::size_t i = 0; i < n; ++i) rsum[std::size_t(w.group[i])] += r(Eigen::Index(i));
    for (const auto& [id, idx] : speaker_index)
      fit.speaker_intercepts[id] =
          psi * rsum[std::size_t(idx)] / (1.0 + psi * w.gsize[std::size_t(idx)]);
  }
  return fit;
}

/// Benjamini-Hochberg step-up adjustment and rejection flags at level q.
struct FdrResult {
  std::vector<double> raw_p;
  std::vector<double> adjusted_p;
  std::vector<bool> rejected;
  double q = 0.05;
};

inline FdrResult bh_fdr(const std::vector<double>& raw_p, double q = 0.05) {
  if (q <= 0.0 || q >= 1.0) throw DataError("bh_fdr: q must be in (0,1)");
  for (double p : raw_p)
    if (!(p >= 0.0 && p <= 1.0)) throw DataError("bh_fdr: p-value out of [0,1]");

  const std::size_t m = raw_p.size();
  FdrResult out;
  out.raw_p = raw_p;
  out.q = q;
  out.adjusted_p.assign(m, 0.0);
  out.rejected.assign(m, false);
  if (m == 0) return out;

  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return raw_p[a] < raw_p[b]; });

  double running = 1.0;
  for (std::size_t k = m; k-- > 0;) {
    const double candidate = double(m) * raw_p[order[k]] / double(k + 1);
    running = std::min(running, candidate);
    out.adjusted_p[order[k]] = std::min(1.0, running);
  }
  for (std::size_t i = 0; i < m; ++i) out.rejected[i] = out.adjusted_p[i] <= q;
  return out;
}

/// One paired comparison of distances at f0 against the reference f0.
struct PairwiseTest {
  double f0 = 0.0;
  std::size_t n = 0;
  double statistic = 0.0;
  double raw_p = 1.0;
};

struct PairwiseTestResult {
  double reference_f0 = 220.0;
  std::vector<PairwiseTest> tests;  // ascending f0, reference excluded
  FdrResult fdr;
};

enum class PairedTestKind { TTest, Wilcoxon };

namespace detail {

inline double paired_t_p(const std::vector<double>& diffs, double* statistic) {
  const std::size_t n = diffs.size();
  double mean = 0.0;
  for (double d : diffs) mean += d;
  mean /= double(n);
  double ss = 0.0;
  for (double d : diffs) ss += (d - mean) * (d - mean);
  if (n < 2 || ss == 0.0) {
    *statistic = 0.0;
    return 1.0;  // zero or undefined variance: no evidence of a difference
  }
  const double sd = std::sqrt(ss / double(n - 1));
  const double t = mean / (sd / std::sqrt(double(n)));
  *statistic = t;
  return student_t_two_sided_p(t, double(n - 1));
}

// Wilcoxon signed-rank with normal approximation, average ranks for ties,
// zero differences dropped.
inline double wilcoxon_p(const std::vector<double>& diffs, double* statistic) {
  std::vector<double> nonzero;
  for (double d : diffs)
    if (d != 0.0) nonzero.push_back(d);
  const std::size_t m = nonzero.size();
  if (m == 0) {
    *statistic = 0.0;
    return 1.0;
  }
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(nonzero[a]) < std::abs(nonzero[b]);
  });
  std::vector<double> rank(m, 0.0);
  double tie_correction = 0.0;
  for (std::size_t i = 0; i < m;) {
    std::size_t j = i;
    while (j < m && std::abs(nonzero[order[j]]) == std::abs(nonzero[order[i]])) ++j;
    const double avg = 0.5 * (double(i + 1) + double(j));
    for (std::size_t k = i; k < j; ++k) rank[order[k]] = avg;
    const double t = double(j - i);
    tie_correction += t * t * t - t;
    i = j;
  }
  double w_plus = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    if (nonzero[i] > 0.0) w_plus += rank[i];
  const double mn = double(m);
  const double mu = mn * (mn + 1.0) / 4.0;
  const double var = mn * (mn + 1.0) * (2.0 * mn + 1.0) / 24.0 - tie_correction / 48.0;
  if (var <= 0.0) {
    *statistic = 0.0;
    return 1.0;
  }
  const double num = w_plus - mu;
  const double z = (num - (num > 0 ? 0.5 : num < 0 ? -0.5 : 0.0)) / std::sqrt(var);
  *statistic = z;
  const boost::math::normal norm;
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(norm, std::abs(z))));
}

}  // namespace detail

/// Paired tests of each f0 condition against the reference, FDR-adjusted as
/// one family. Observations pair by (speaker, cluster, vowel pair).
inline PairwiseTestResult pairwise_f0_tests(const std::vector<DistanceObservation>& obs,
                                            double reference_f0 = 220.0, double q = 0.05,
                                            PairedTestKind kind = PairedTestKind::TTest) {
  using PairKey = std::tuple<std::string, std::string, int, int>;
  std::map<double, std::map<PairKey, double>> by_f0;
  for (const auto& o : obs) {
    const PairKey key{o.speaker_id, o.cluster, int(o.pair.first), int(o.pair.second)};
    if (!by_f0[o.f0].emplace(key, o.distance).second)
      throw DataError("pairwise_f0_tests: duplicate observation at f0=" + std::to_string(o.f0));
  }
  const auto ref_it = by_f0.find(reference_f0);
  if (ref_it == by_f0.end())
    throw DataError("pairwise_f0_tests: no observations at the reference f0");
  const auto& ref = ref_it->second;

  PairwiseTestResult out;
  out.reference_f0 = reference_f0;
  std::vector<double> raw;
  for (const auto& [f0, cells] : by_f0) {
    if (f0 == reference_f0) continue;
    if (cells.size() != ref.size())
      throw DataError("pairwise_f0_tests: unpaired observations at f0=" + std::to_string(f0));
    std::vector<double> diffs;
    diffs.reserve(cells.size());
    for (const auto& [key, dist] : cells) {
      const auto match = ref.find(key);
      if (match == ref.end())
        throw DataError("pairwise_f0_tests: no reference pair for an observation at f0=" +
                        std::to_string(f0));
      diffs.push_back(dist - match->second);
    }
    PairwiseTest t;
    t.f0 = f0;
    t.n = diffs.size();
    t.raw_p = kind == PairedTestKind::TTest ? detail::paired_t_p(diffs, &t.statistic)
                                            : detail::wilcoxon_p(diffs, &t.statistic);
    raw.push_back(t.raw_p);
    out.tests.push_back(t);
  }
  if (out.tests.empty()) throw DataError("pairwise_f0_tests: nothing to compare");
  out.fdr = bh_fdr(raw, q);
  return out;
}

}  // namespace vowelspace
