#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "substory/clustering.hpp"
#include "substory/corpus.hpp"

namespace substory::spectral {

struct SpectralConfig {
  int k = 10;                      // number of word clusters
  double npmi_threshold = 0.1;
  std::uint32_t min_word_freq = 10;
  int embedding_dim = 0;           // 0 -> defaults to k
  int kmeans_iters = 100;
  int kmeans_restarts = 8;
  std::uint64_t seed = 0;
};

// Undirected NPMI-weighted word graph; edges stored once with a < b.
struct WordGraph {
  struct Edge {
    TermId a;
    TermId b;
    double weight;
  };
  std::vector<TermId> nodes;  // sorted
  std::vector<Edge> edges;
};

// Word clusters with per-word importance scores (normalized weighted degree
// within the cluster's induced subgraph).
struct WordClusters {
  struct Member {
    TermId term;
    double score;
  };
  std::vector<std::vector<Member>> clusters;
  std::vector<TermId> unclustered;  // retained words outside the LCC
};

// Spectral coordinates per node plus the Laplacian eigenvalues used.
struct Embedding {
  std::vector<TermId> nodes;                 // sorted, aligned with coords
  std::vector<std::vector<double>> coords;   // row per node, unit length
  std::vector<double> eigenvalues;           // nondecreasing, size dim
};

struct KmeansResult {
  std::vector<int> assignment;
  std::vector<std::vector<double>> centroids;
  double wcss = 0.0;
  std::vector<double> wcss_history;  // per Lloyd iteration of the winning restart
};

// Normalized pointwise mutual information from document counts,
// ln(p(x,y) / (p(x) p(y))) / (-ln p(x,y)); -1 when the pair never co-occurs,
// 1 when x, y and the pair always coincide. Throws on inconsistent counts.
double npmi(std::int64_t count_xy, std::int64_t count_x, std::int64_t count_y,
            std::int64_t n_docs);

// Words with document frequency >= min_word_freq; edges between pairs that
// share at least one tweet (counted once per tweet) with NPMI >= threshold.
WordGraph build_graph(const Corpus& corpus, const SpectralConfig& config);

// Largest component by node count; ties by total edge weight, then by
// smallest member id.
WordGraph largest_connected_component(const WordGraph& graph);

// Rows of the dim eigenvectors of the smallest eigenvalues of
// L_sym = I - D^{-1/2} W D^{-1/2}, sign-fixed (largest-magnitude entry
// positive) and row-normalized. Requires a connected graph.
Embedding laplacian_embedding(const WordGraph& graph, int dim);

// k-means++ with Lloyd iterations; best of `restarts` by within-cluster sum
// of squares; empty clusters re-seeded from the farthest point.
KmeansResult kmeans(const std::vector<std::vector<double>>& points, int k, int iters,
                    int restarts, std::uint64_t seed);

// build_graph -> LCC -> laplacian_embedding -> kmeans, then importance scores.
WordClusters cluster_words(const Corpus& corpus, const SpectralConfig& config);

// score(tweet, cluster) = sum over tweet terms in the cluster of
// importance * count; ties to the lower cluster id; no overlap -> outlier.
Clustering assign_tweets(const Corpus& corpus, const WordClusters& clusters);

std::string word_clusters_to_json(const WordClusters& clusters, const Vocabulary& vocabulary,
                                  const SpectralConfig& config);

}  // namespace substory::spectral
