//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "retrograph/chem/fingerprint.hpp"
#include "retrograph/chem/smiles.hpp"
#include "retrograph/error.hpp"
#include "retrograph/eval.hpp"

using namespace retro;

TEST(TopK, RankThreeCountsFromKThree) {
  std::vector<std::vector<std::string>> p = { { "a", "b", "g", "c" } };
  std::vector<double> acc = eval::topk_accuracy(p, { "g" }, { 1, 2, 3, 5, 10 });
  EXPECT_EQ(acc, (std::vector<double> { 0, 0, 1, 1, 1 }));
}

TEST(TopK, EmptyPredictionListScoresZero) {
  std::vector<double> acc = eval::topk_accuracy({ {} }, { "g" }, { 1, 10 });
  EXPECT_EQ(acc, (std::vector<double> { 0, 0 }));
}

TEST(TopK, MissingGroundTruthThrows) {
  EXPECT_THROW(eval::topk_accuracy({ { "a" } }, { "" }, { 1 }), MissingGroundTruth);
}

TEST(TopK, MatchesHandCountAndIsPermutationInvariant) {
  std::mt19937_64 rng(5);
  std::vector<std::vector<std::string>> preds;
  std::vector<std::string> gold;
  std::vector<int> ranks;
  for (int r = 0; r < 40; ++r) {
    int rank = std::uniform_int_distribution<int>(0, 12)(rng);  // 0: absent
    std::vector<std::string> list;
    for (int i = 1; i <= 12; ++i)
      list.push_back(i == rank ? "gold" + std::to_string(r) : "x" + std::to_string(i));
    preds.push_back(list);
    gold.push_back("gold" + std::to_string(r));
    ranks.push_back(rank);
  }
  std::vector<int> ks = { 1, 3, 5, 10 };
  std::vector<double> acc = eval::topk_accuracy(preds, gold, ks);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    int hand = 0;
    for (int r: ranks)
      hand += (r > 0 && r <= ks[i]) ? 1 : 0;
    EXPECT_DOUBLE_EQ(acc[i], hand / 40.0);
  }
  std::vector<int> order(40);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::string>> p2;
  std::vector<std::string> g2;
  for (int i: order) {
    p2.push_back(preds[i]);
    g2.push_back(gold[i]);
  }
  EXPECT_EQ(eval::topk_accuracy(p2, g2, ks), acc);
  EXPECT_TRUE(std::is_sorted(acc.begin(), acc.end()));
}

TEST(Matching, AgreesWithBruteForceOnSmallMatrices) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    int rows = 1 + trial % 4, cols = 1 + (trial / 4) % 4;
    std::vector<std::vector<double>> w(rows, std::vector<double>(cols));
    for (auto &row: w)
      for (double &v: row)
        v = u(rng);
    // Brute force over injections of the smaller side.
    int n = std::max(rows, cols);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 0;
    do {
      double s = 0;
      for (int i = 0; i < rows; ++i) {
        if (perm[i] < cols)
          s += w[i][perm[i]];
      }
      best = std::max(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_NEAR(eval::max_weight_matching(w), best, 1e-12);
  }
}

TEST(Similarity, IdenticalSetsScoreOne) {
  chem::MolGraph a = chem::parse_smiles("CCO.c1ccccc1C(=O)Cl");
  EXPECT_EQ(eval::reaction_similarity(a, a), 1.0);
}

TEST(Similarity, TwoByTwoMatchesBestPairingHalved) {
  chem::MolGraph a = chem::parse_smiles("CCO.c1ccccc1C(=O)Cl");
  chem::MolGraph b = chem::parse_smiles("CCN.c1ccccc1C(=O)O");
  auto fp = [](const std::string &s) { return chem::morgan_fingerprint(chem::parse_smiles(s)); };
  double t11 = chem::tanimoto(fp("CCO"), fp("CCN")), t22 = chem::tanimoto(fp("c1ccccc1C(=O)Cl"), fp("c1ccccc1C(=O)O"));
  double t12 = chem::tanimoto(fp("CCO"), fp("c1ccccc1C(=O)O")), t21 = chem::tanimoto(fp("c1ccccc1C(=O)Cl"), fp("CCN"));
  EXPECT_NEAR(eval::reaction_similarity(a, b), std::max(t11 + t22, t12 + t21) / 2, 1e-12);
  EXPECT_DOUBLE_EQ(eval::reaction_similarity(a, b), eval::reaction_similarity(b, a));
  EXPECT_LT(eval::reaction_similarity(a, b), 1.0);
}

TEST(KMeans, SeparatesTwoBlobs) {
  std::vector<std::vector<double>> pts;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0, 0.05);
  for (int i = 0; i < 40; ++i)
    pts.push_back({ (i < 20 ? 0.0 : 5.0) + noise(rng), noise(rng) });
  eval::KMeansResult r = eval::kmeans(pts, 2, 1);
  for (int i = 0; i < 40; ++i)
    EXPECT_EQ(r.assignment[i] == r.assignment[0], i < 20);
  for (std::size_t i = 1; i < r.objective.size(); ++i)
    EXPECT_LE(r.objective[i], r.objective[i - 1] + 1e-12);
}

TEST(KMeans, SingleClusterIsTheMean) {
  std::vector<std::vector<double>> pts = { { 0, 1 }, { 2, 3 }, { 4, 8 } };
  eval::KMeansResult r = eval::kmeans(pts, 1, 3);
  EXPECT_NEAR(r.centroids[0][0], 2.0, 1e-12);
  EXPECT_NEAR(r.centroids[0][1], 4.0, 1e-12);
}

TEST(KMeans, FewerPointsThanClustersThrows) {
  EXPECT_THROW(eval::kmeans({ { 1.0 } }, 2, 0), FewerPointsThanClusters);
}

TEST(KMeans, ObjectiveNeverIncreases) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<double>> pts(60, std::vector<double>(10));
    for (auto &p: pts)
      for (double &v: p)
        v = u(rng);
    eval::KMeansResult r = eval::kmeans(pts, 5, trial);
    for (std::size_t i = 1; i < r.objective.size(); ++i)
      EXPECT_LE(r.objective[i], r.objective[i - 1] + 1e-12);
  }
}

TEST(Diversity, AntiCorrelatedClustersGiveNegativeCorrelation) {
  std::vector<eval::ProductDiversity> products;
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < 5; ++i) {
      eval::ProductDiversity p;
      p.product = "P" + std::to_string(c * 5 + i);
      p.similarities.assign(45, 0.1 + 0.25 * c);
      p.num_centers = 8 - 2 * c;
      products.push_back(p);
    }
  }
  eval::DiversityReport rep = eval::diversity_cluster(products, 4, 1);
  EXPECT_LT(rep.correlation, -0.9);
  std::string csv = eval::diversity_csv(products, rep);
  EXPECT_EQ(csv.rfind("cluster,size,mean_similarity,mean_centers\n", 0), 0u);
}

TEST(Histogram, TenBinsSumToOne) {
  std::vector<double> h = eval::histogram({ 0.0, 0.05, 0.5, 0.99, 1.0 }, 10);
  ASSERT_EQ(h.size(), 10u);
  EXPECT_DOUBLE_EQ(h[0], 0.4);
  EXPECT_DOUBLE_EQ(h[5], 0.2);
  EXPECT_DOUBLE_EQ(h[9], 0.4);
}
