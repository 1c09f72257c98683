#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "substory/clustering.hpp"
#include "substory/corpus.hpp"

namespace substory::lsh {

struct LshConfig {
  int k_bits = 13;       // hyperplanes per table, <= 64
  int n_tables = 71;     // h
  int bucket_size = 10;  // b
  double cosine_threshold = 0.5;
  std::uint64_t seed = 0;

  // Named settings `k12h56b10` and `k13h71b10`; the cosine threshold keeps
  // its default. Throws on unknown names.
  static LshConfig preset(std::string_view name);
};

// Signature bit i is set iff dot(x, hyperplanes[i]) > 0.
std::uint64_t hash_signature(const TfIdfVector& x,
                             const std::vector<std::vector<double>>& hyperplanes);

// h hash tables of FIFO buckets capped at bucket_size; hyperplane entries are
// standard normal draws fixed at construction. Tables for one table index are
// seeded independently of k_bits so that longer signatures refine shorter
// ones.
class HashTables {
 public:
  HashTables(const LshConfig& config, std::size_t dim);

  std::uint64_t signature(const TfIdfVector& x, int table) const;
  void insert(const std::string& tweet_id, const TfIdfVector& x);

  struct Neighbor {
    std::string tweet_id;
    double cosine;
  };
  // Candidates are the union of x's buckets across tables; ties in cosine go
  // to the earlier-inserted tweet.
  std::optional<Neighbor> nearest_neighbor(const TfIdfVector& x) const;

  int max_bucket_load() const { return max_bucket_load_; }
  std::size_t size() const { return stored_ids_.size(); }

 private:
  LshConfig config_;
  std::vector<std::vector<std::vector<double>>> hyperplanes_;  // [table][bit][dim]
  std::vector<std::unordered_map<std::uint64_t, std::deque<std::uint32_t>>> buckets_;
  std::vector<std::string> stored_ids_;     // by insertion order
  std::vector<TfIdfVector> stored_vectors_;
  int max_bucket_load_ = 0;
};

// Streaming threshold clustering: tweets in nondecreasing timestamp order
// (ties by id) join their nearest neighbor's cluster when cosine similarity
// exceeds the threshold, otherwise open a new cluster.
Clustering cluster_stream(const Corpus& corpus,
                          const std::unordered_map<std::string, TfIdfVector>& vectors,
                          const LshConfig& config);

}  // namespace substory::lsh
