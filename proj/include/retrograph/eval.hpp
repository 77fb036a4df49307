//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETROGRAPH_EVAL_HPP_
#define RETROGRAPH_EVAL_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "retrograph/chem/mol_graph.hpp"

namespace retro::eval {

// Fraction of records whose gold key is among the first k predictions, for
// each k. Keys are canonical SMILES. Throws MissingGroundTruth on an empty
// gold key.
std::vector<double> topk_accuracy(const std::vector<std::vector<std::string>> &predictions,
                                  const std::vector<std::string> &gold, const std::vector<int> &ks);

// Rank (1-based) of `gold` in `ranked`, 0 when absent.
int gold_rank(const std::vector<std::string> &ranked, const std::string &gold);

// Maximum total weight of a one-to-one assignment between rows and columns
// of a non-negative weight matrix (Hungarian method).
double max_weight_matching(const std::vector<std::vector<double>> &w);

// Similarity of two reactant sets of one product: best pairing of their
// molecules by Morgan Tanimoto, summed and divided by the larger count.
double reaction_similarity(const chem::MolGraph &a, const chem::MolGraph &b, int radius = 2, int width = 2048);

// Fractions of values per bin over [0, 1]; 1.0 falls in the last bin.
std::vector<double> histogram(const std::vector<double> &values, int bins = 10);

double pearson(const std::vector<double> &x, const std::vector<double> &y);

struct KMeansResult {
  std::vector<int> assignment;
  std::vector<std::vector<double>> centroids;
  std::vector<double> objective;  // sum of squared distances after each iteration
};

// Lloyd iterations from a seeded k-means++ start. Throws
// FewerPointsThanClusters.
KMeansResult kmeans(const std::vector<std::vector<double>> &points, int k, std::uint64_t seed, int max_iter = 100);

struct ProductDiversity {
  std::string product;
  std::vector<double> similarities;  // pairwise among the top predictions
  int num_centers = 0;               // distinct centers among them
};

struct DiversityReport {
  std::vector<int> assignment;
  std::vector<double> cluster_mean_similarity;
  std::vector<double> cluster_mean_centers;
  std::vector<int> cluster_size;
  double correlation = 0.0;  // mean similarity vs center count over clusters
};

DiversityReport diversity_cluster(const std::vector<ProductDiversity> &products, int clusters, std::uint64_t seed);
std::string diversity_csv(const std::vector<ProductDiversity> &products, const DiversityReport &report);

}  // namespace retro::eval

#endif  // RETROGRAPH_EVAL_HPP_
