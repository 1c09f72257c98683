#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "substory/corpus.hpp"

namespace substory {

// Cluster id for tweets that no method could place (empty tweets, zero
// similarity everywhere).
inline constexpr int kOutlierCluster = -1;

// Total map tweet id -> cluster id; the common output of all detection
// methods. The key set is the clustering's universe.
struct Clustering {
  std::unordered_map<std::string, int> assignment;
  std::unordered_map<int, std::string> names;  // optional display names

  int at(const std::string& tweet_id) const;
  std::size_t size() const { return assignment.size(); }
  std::vector<int> cluster_ids() const;          // distinct, sorted
  std::size_t n_clusters() const { return cluster_ids().size(); }
  std::vector<std::string> sorted_tweet_ids() const;
};

// Gold clustering over labeled tweets only. Ids are dense in lexicographic
// label order; names carries the original label strings.
Clustering gold_clustering(const Corpus& corpus);

// u restricted to the key set of reference.
Clustering restrict_to(const Clustering& u, const Clustering& reference);

}  // namespace substory
