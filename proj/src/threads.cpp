#include "substory/threads.hpp"

#include <algorithm>
#include <stdexcept>

namespace substory::threads {

ThreadIndex build_thread_index(const Corpus& corpus) {
  ThreadIndex index;
  index.root_of.reserve(corpus.tweets.size());

  for (const Tweet& tweet : corpus.tweets) {
    if (index.root_of.count(tweet.id)) continue;
    // walk up the reply chain, collecting the path for compression
    std::vector<std::string> path;
    std::string current = tweet.id;
    std::string root;
    for (;;) {
      auto known = index.root_of.find(current);
      if (known != index.root_of.end()) {
        root = known->second;
        break;
      }
      if (std::find(path.begin(), path.end(), current) != path.end()) {
        std::string cycle;
        for (const std::string& id : path) cycle += id + " -> ";
        cycle += current;
        throw std::runtime_error("reply cycle detected: " + cycle);
      }
      path.push_back(current);
      const auto idx = corpus.index_of(current);
      const Tweet& node = corpus.tweets[*idx];
      if (!node.reply_to) {
        root = current;
        break;
      }
      const auto parent_idx = corpus.index_of(*node.reply_to);
      if (!parent_idx) {
        // parent fell outside the collection; this tweet is a source
        root = current;
        break;
      }
      current = *node.reply_to;
    }
    for (const std::string& id : path) index.root_of.emplace(id, root);
  }

  for (const Tweet& tweet : corpus.tweets) {
    const std::string& root = index.root_of.at(tweet.id);
    if (root != tweet.id) index.children[root].push_back(tweet.id);
  }
  return index;
}

Corpus source_only(const Corpus& corpus, const ThreadIndex& index) {
  Corpus out;
  for (std::size_t i = 0; i < corpus.tweets.size(); ++i) {
    const Tweet& tweet = corpus.tweets[i];
    if (index.root_of.at(tweet.id) != tweet.id) continue;
    out.tweets.push_back(tweet);
    if (corpus.is_processed()) {
      const ProcessedTweet& old = corpus.processed[i];
      ProcessedTweet pt;
      pt.tweet_id = old.tweet_id;
      for (const TermId old_id : old.tokens) {
        const TermId id = out.vocabulary.add(corpus.vocabulary.term_of(old_id));
        pt.tokens.push_back(id);
        ++pt.term_counts[id];
      }
      for (const auto& [term, count] : pt.term_counts) {
        out.vocabulary.bump_document_frequency(term);
        out.vocabulary.bump_corpus_frequency(term, count);
      }
      out.processed.push_back(std::move(pt));
    }
  }
  out.rebuild_index();
  return out;
}

Clustering propagate_to_replies(const Clustering& source_clustering, const ThreadIndex& index) {
  Clustering out = source_clustering;
  for (const auto& [tweet, root] : index.root_of) {
    if (tweet == root) continue;
    auto it = source_clustering.assignment.find(root);
    if (it == source_clustering.assignment.end()) {
      throw std::invalid_argument("propagate_to_replies: no cluster for source tweet `" + root +
                                  "`");
    }
    out.assignment[tweet] = it->second;
  }
  return out;
}

Clustering thread_baseline(const Corpus& corpus, const ThreadIndex& index) {
  // dense cluster ids in the order roots appear in the corpus
  Clustering out;
  std::unordered_map<std::string, int> cluster_of_root;
  int next = 0;
  for (const Tweet& tweet : corpus.tweets) {
    const std::string& root = index.root_of.at(tweet.id);
    auto [it, inserted] = cluster_of_root.emplace(root, next);
    if (inserted) ++next;
    out.assignment.emplace(tweet.id, it->second);
  }
  return out;
}

}  // namespace substory::threads
