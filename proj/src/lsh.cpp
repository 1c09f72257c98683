#include "substory/lsh.hpp"

#include <algorithm>
#include <stdexcept>

#include "substory/rng.hpp"

namespace substory::lsh {

LshConfig LshConfig::preset(std::string_view name) {
  LshConfig config;
  if (name == "k12h56b10") {
    config.k_bits = 12;
    config.n_tables = 56;
    config.bucket_size = 10;
  } else if (name == "k13h71b10") {
    config.k_bits = 13;
    config.n_tables = 71;
    config.bucket_size = 10;
  } else {
    throw std::invalid_argument("unknown LSH preset: " + std::string(name));
  }
  return config;
}

std::uint64_t hash_signature(const TfIdfVector& x,
                             const std::vector<std::vector<double>>& hyperplanes) {
  std::uint64_t key = 0;
  for (std::size_t bit = 0; bit < hyperplanes.size(); ++bit) {
    const std::vector<double>& u = hyperplanes[bit];
    double dot = 0.0;
    for (const auto& [term, weight] : x.entries) {
      if (term < u.size()) dot += weight * u[term];
    }
    if (dot > 0.0) key |= (std::uint64_t{1} << bit);
  }
  return key;
}

HashTables::HashTables(const LshConfig& config, std::size_t dim) : config_(config) {
  if (config.k_bits < 1 || config.k_bits > 64) {
    throw std::invalid_argument("LshConfig: k_bits must lie in [1, 64]");
  }
  if (config.n_tables < 1 || config.bucket_size < 1) {
    throw std::invalid_argument("LshConfig: n_tables and bucket_size must be >= 1");
  }
  hyperplanes_.resize(static_cast<std::size_t>(config.n_tables));
  buckets_.resize(static_cast<std::size_t>(config.n_tables));
  for (int t = 0; t < config.n_tables; ++t) {
    // per-table stream: adding hyperplanes extends, never reshuffles
    Rng rng(config.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(t + 1)));
    auto& planes = hyperplanes_[static_cast<std::size_t>(t)];
    planes.resize(static_cast<std::size_t>(config.k_bits));
    for (auto& plane : planes) {
      plane.resize(dim);
      for (double& c : plane) c = rng.normal();
    }
  }
}

std::uint64_t HashTables::signature(const TfIdfVector& x, int table) const {
  return hash_signature(x, hyperplanes_.at(static_cast<std::size_t>(table)));
}

void HashTables::insert(const std::string& tweet_id, const TfIdfVector& x) {
  const auto order = static_cast<std::uint32_t>(stored_ids_.size());
  stored_ids_.push_back(tweet_id);
  stored_vectors_.push_back(x);
  for (int t = 0; t < config_.n_tables; ++t) {
    auto& bucket = buckets_[static_cast<std::size_t>(t)][signature(x, t)];
    bucket.push_back(order);
    if (bucket.size() > static_cast<std::size_t>(config_.bucket_size)) {
      bucket.pop_front();  // oldest-first eviction
    }
    max_bucket_load_ = std::max(max_bucket_load_, static_cast<int>(bucket.size()));
  }
}

std::optional<HashTables::Neighbor> HashTables::nearest_neighbor(const TfIdfVector& x) const {
  std::vector<std::uint32_t> candidates;
  for (int t = 0; t < config_.n_tables; ++t) {
    const auto& table = buckets_[static_cast<std::size_t>(t)];
    auto it = table.find(signature(x, t));
    if (it == table.end()) continue;
    candidates.insert(candidates.end(), it->second.begin(), it->second.end());
  }
  if (candidates.empty()) return std::nullopt;
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::uint32_t best = candidates.front();
  double best_cosine = -1.0;
  for (const std::uint32_t c : candidates) {  // ascending insertion order breaks ties
    const double cosine = x.dot(stored_vectors_[c]);
    if (cosine > best_cosine) {
      best_cosine = cosine;
      best = c;
    }
  }
  return Neighbor{stored_ids_[best], best_cosine};
}

Clustering cluster_stream(const Corpus& corpus,
                          const std::unordered_map<std::string, TfIdfVector>& vectors,
                          const LshConfig& config) {
  if (config.cosine_threshold < 0.0 || config.cosine_threshold > 1.0) {
    throw std::invalid_argument("LshConfig: cosine_threshold must lie in [0, 1]");
  }
  std::vector<std::size_t> order(corpus.tweets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Tweet& ta = corpus.tweets[a];
    const Tweet& tb = corpus.tweets[b];
    return ta.timestamp != tb.timestamp ? ta.timestamp < tb.timestamp : ta.id < tb.id;
  });

  HashTables tables(config, corpus.vocabulary.size());
  Clustering out;
  int next_cluster = 0;
  for (const std::size_t i : order) {
    const Tweet& tweet = corpus.tweets[i];
    auto it = vectors.find(tweet.id);
    if (it == vectors.end()) {
      throw std::invalid_argument("cluster_stream: no vector for tweet `" + tweet.id + "`");
    }
    const TfIdfVector& vec = it->second;
    const auto nn = tables.nearest_neighbor(vec);
    if (nn && nn->cosine > config.cosine_threshold) {
      out.assignment.emplace(tweet.id, out.at(nn->tweet_id));
    } else {
      out.assignment.emplace(tweet.id, next_cluster++);
    }
    tables.insert(tweet.id, vec);
  }
  return out;
}

}  // namespace substory::lsh
