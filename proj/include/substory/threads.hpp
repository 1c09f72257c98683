#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "substory/clustering.hpp"
#include "substory/corpus.hpp"

namespace substory::threads {

// Conversational structure: every tweet maps to the root of its thread;
// sources map to themselves.
struct ThreadIndex {
  std::unordered_map<std::string, std::string> root_of;
  std::unordered_map<std::string, std::vector<std::string>> children;  // root -> descendants

  bool is_source(const std::string& tweet_id) const {
    auto it = root_of.find(tweet_id);
    return it != root_of.end() && it->second == tweet_id;
  }
};

// Resolves transitive reply chains to their roots. Tweets whose parent is
// missing from the corpus become their own root. Throws on reply cycles,
// naming the cycle.
ThreadIndex build_thread_index(const Corpus& corpus);

// Corpus restricted to source tweets; the vocabulary is rebuilt on the subset.
Corpus source_only(const Corpus& corpus, const ThreadIndex& index);

// Every reply inherits the cluster of its root; sources keep their clusters.
// Throws when a root has no assignment.
Clustering propagate_to_replies(const Clustering& source_clustering, const ThreadIndex& index);

// Each conversational thread is its own cluster; precision 1 by construction
// when gold labels are inherited from sources.
Clustering thread_baseline(const Corpus& corpus, const ThreadIndex& index);

}  // namespace substory::threads
