//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retrograph/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "retrograph/chem/fingerprint.hpp"
#include "retrograph/error.hpp"

namespace retro::eval {

int gold_rank(const std::vector<std::string> &ranked, const std::string &gold) {
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (ranked[i] == gold)
      return static_cast<int>(i) + 1;
  }
  return 0;
}

std::vector<double> topk_accuracy(const std::vector<std::vector<std::string>> &predictions,
                                  const std::vector<std::string> &gold, const std::vector<int> &ks) {
  if (predictions.size() != gold.size())
    throw ShapeMismatch("prediction and gold counts differ");
  std::vector<double> out(ks.size(), 0.0);
  if (gold.empty())
    return out;
  for (std::size_t r = 0; r < gold.size(); ++r) {
    if (gold[r].empty())
      throw MissingGroundTruth("record " + std::to_string(r) + " has no ground truth");
    int rank = gold_rank(predictions[r], gold[r]);
    for (std::size_t i = 0; i < ks.size(); ++i) {
      if (rank > 0 && rank <= ks[i])
        out[i] += 1.0;
    }
  }
  for (double &v: out)
    v /= static_cast<double>(gold.size());
  return out;
}

double max_weight_matching(const std::vector<std::vector<double>> &w) {
  int rows = static_cast<int>(w.size());
  int cols = rows == 0 ? 0 : static_cast<int>(w[0].size());
  if (rows == 0 || cols == 0)
    return 0.0;
  // Square cost matrix: minimize -w, padding with zeros.
  int n = std::max(rows, cols);
  auto cost = [&](int i, int j) { return (i < rows && j < cols) ? -w[i][j] : 0.0; };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j])
          continue;
        double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j) {
    if (p[j] > 0 && p[j] - 1 < rows && j - 1 < cols)
      total += w[p[j] - 1][j - 1];
  }
  return total;
}

namespace {

std::vector<chem::MorganFingerprint> component_fingerprints(const chem::MolGraph &g, int radius, int width) {
  int count = 0;
  std::vector<int> labels = g.component_labels(&count);
  std::vector<std::vector<int>> members(count);
  for (int a = 0; a < g.num_atoms(); ++a)
    members[labels[a]].push_back(a);
  std::vector<chem::MorganFingerprint> out;
  for (const std::vector<int> &m: members)
    out.push_back(chem::morgan_fingerprint(g.subgraph(m), radius, width));
  return out;
}

}  // namespace

double reaction_similarity(const chem::MolGraph &a, const chem::MolGraph &b, int radius, int width) {
  std::vector<chem::MorganFingerprint> fa = component_fingerprints(a, radius, width);
  std::vector<chem::MorganFingerprint> fb = component_fingerprints(b, radius, width);
  if (fa.empty() && fb.empty())
    return 1.0;
  if (fa.empty() || fb.empty())
    return 0.0;
  std::vector<std::vector<double>> w(fa.size(), std::vector<double>(fb.size()));
  for (std::size_t i = 0; i < fa.size(); ++i) {
    for (std::size_t j = 0; j < fb.size(); ++j)
      w[i][j] = chem::tanimoto(fa[i], fb[j]);
  }
  return max_weight_matching(w) / static_cast<double>(std::max(fa.size(), fb.size()));
}

std::vector<double> histogram(const std::vector<double> &values, int bins) {
  if (bins < 1)
    throw OutOfRange("histogram needs at least one bin");
  std::vector<double> out(bins, 0.0);
  if (values.empty())
    return out;
  for (double v: values) {
    int b = static_cast<int>(std::floor(std::clamp(v, 0.0, 1.0) * bins));
    out[std::min(b, bins - 1)] += 1.0;
  }
  for (double &v: out)
    v /= static_cast<double>(values.size());
  return out;
}

double pearson(const std::vector<double> &x, const std::vector<double> &y) {
  if (x.size() != y.size())
    throw ShapeMismatch("pearson: length mismatch");
  std::size_t n = x.size();
  if (n < 2)
    return 0.0;
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0)
    return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

namespace {

double sq_dist(const std::vector<double> &a, const std::vector<double> &b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>> &points, int k, std::uint64_t seed, int max_iter) {
  if (k < 1)
    throw OutOfRange("k must be positive");
  if (static_cast<int>(points.size()) < k)
    throw FewerPointsThanClusters("fewer points than clusters");
  std::size_t n = points.size();
  std::size_t dim = points[0].size();
  for (const auto &p: points) {
    if (p.size() != dim)
      throw ShapeMismatch("k-means points differ in dimension");
  }
  std::mt19937_64 rng(seed);
  KMeansResult r;
  // k-means++ seeding.
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  r.centroids.push_back(points[pick(rng)]);
  std::vector<double> d2(n);
  while (static_cast<int>(r.centroids.size()) < k) {
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::numeric_limits<double>::infinity();
      for (const auto &c: r.centroids)
        d2[i] = std::min(d2[i], sq_dist(points[i], c));
      total += d2[i];
    }
    std::size_t chosen = 0;
    if (total <= 0) {
      chosen = pick(rng);
    } else {
      double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      double acc = 0;
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target) {
          chosen = i;
          break;
        }
      }
    }
    r.centroids.push_back(points[chosen]);
  }

  r.assignment.assign(n, -1);
  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double bd = sq_dist(points[i], r.centroids[0]);
      for (int c = 1; c < k; ++c) {
        double d = sq_dist(points[i], r.centroids[c]);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      changed = changed || r.assignment[i] != best;
      r.assignment[i] = best;
    }
    // Update; an empty cluster keeps its centroid.
    std::vector<std::vector<double>> sum(k, std::vector<double>(dim, 0.0));
    std::vector<int> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++count[r.assignment[i]];
      for (std::size_t d = 0; d < dim; ++d)
        sum[r.assignment[i]][d] += points[i][d];
    }
    for (int c = 0; c < k; ++c) {
      if (count[c] == 0)
        continue;
      for (std::size_t d = 0; d < dim; ++d)
        r.centroids[c][d] = sum[c][d] / count[c];
    }
    double after = 0;
    for (std::size_t i = 0; i < n; ++i)
      after += sq_dist(points[i], r.centroids[r.assignment[i]]);
    r.objective.push_back(after);
    if (!changed && it > 0)
      break;
  }
  return r;
}

DiversityReport diversity_cluster(const std::vector<ProductDiversity> &products, int clusters, std::uint64_t seed) {
  std::vector<std::vector<double>> points;
  for (const ProductDiversity &p: products)
    points.push_back(histogram(p.similarities, 10));
  KMeansResult km = kmeans(points, clusters, seed);
  DiversityReport rep;
  rep.assignment = km.assignment;
  rep.cluster_mean_similarity.assign(clusters, 0.0);
  rep.cluster_mean_centers.assign(clusters, 0.0);
  rep.cluster_size.assign(clusters, 0);
  for (std::size_t i = 0; i < products.size(); ++i) {
    int c = km.assignment[i];
    const std::vector<double> &s = products[i].similarities;
    double mean = s.empty() ? 0.0 : std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    rep.cluster_mean_similarity[c] += mean;
    rep.cluster_mean_centers[c] += products[i].num_centers;
    ++rep.cluster_size[c];
  }
  std::vector<double> xs, ys;
  for (int c = 0; c < clusters; ++c) {
    if (rep.cluster_size[c] == 0)
      continue;
    rep.cluster_mean_similarity[c] /= rep.cluster_size[c];
    rep.cluster_mean_centers[c] /= rep.cluster_size[c];
    xs.push_back(rep.cluster_mean_similarity[c]);
    ys.push_back(rep.cluster_mean_centers[c]);
  }
  rep.correlation = pearson(xs, ys);
  return rep;
}

std::string diversity_csv(const std::vector<ProductDiversity> &products, const DiversityReport &report) {
  std::ostringstream os;
  os << "cluster,size,mean_similarity,mean_centers\n";
  for (std::size_t c = 0; c < report.cluster_size.size(); ++c) {
    os << c << "," << report.cluster_size[c] << "," << report.cluster_mean_similarity[c] << ","
       << report.cluster_mean_centers[c] << "\n";
  }
  os << "correlation,,," << report.correlation << "\n";
  os << "\nproduct,cluster,num_centers\n";
  for (std::size_t i = 0; i < products.size(); ++i)
    os << products[i].product << "," << report.assignment[i] << "," << products[i].num_centers << "\n";
  return os.str();
}

}  // namespace retro::eval
