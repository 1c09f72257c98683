#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "substory/clustering.hpp"
#include "substory/corpus.hpp"
#include "substory/rng.hpp"

namespace substory::hdp {

struct HdpConfig {
  double alpha_init = 1.0;  // top-level concentration (stick over topics)
  double gamma_init = 1.0;  // tweet-level concentration
  double eta = 0.01;        // symmetric Dirichlet over the vocabulary
  int max_topics = 50;      // truncation k
  int sweeps = 500;
  int burn_in = 250;
  bool resample_concentrations = true;
  int chains = 1;  // independent chains; best kept by model log likelihood
  std::uint64_t seed = 0;

  void validate() const;
};

// pi[i] = breaks[i] * prod_{l<i} (1 - breaks[l]); breaks in (0, 1], a final
// break of 1 closes the truncation.
std::vector<double> stick_break(const std::vector<double>& breaks);

// Collapsed Chinese-restaurant-franchise state truncated at max_topics.
// Topic slots are append-only within a run; emptied topics keep their index.
class HdpState {
 public:
  HdpState(const Corpus& corpus, const HdpConfig& config, Rng& rng);

  std::vector<std::vector<int>> z;     // [doc][token position] -> topic
  std::vector<std::vector<int>> n_dk;  // [doc][topic] token counts
  std::vector<std::vector<int>> n_kw;  // [topic][term] token counts
  std::vector<std::int64_t> n_k;       // [topic] totals
  std::vector<std::vector<int>> m_dk;  // [doc][topic] table counts
  std::vector<double> pi0;             // global stick weights, active topics
  double pi0_remainder = 1.0;
  double alpha = 1.0;
  double gamma = 1.0;

  int n_topics() const { return static_cast<int>(pi0.size()); }
  std::int64_t total_tables() const;
  std::int64_t total_tokens() const;

  // Throws when count or stick invariants are violated; used by tests and
  // the acceptance suite.
  void check_consistency(const Corpus& corpus) const;

 private:
  friend void gibbs_sweep(HdpState&, const Corpus&, const HdpConfig&, Rng&);
  void resample_token(std::size_t doc, std::size_t pos, TermId term, const HdpConfig& config,
                      Rng& rng);
  void resample_tables_and_sticks(Rng& rng);
  std::size_t vocab_size_ = 0;
};

// One full sweep: every token assignment is redrawn from its conditional,
// then table counts and the global stick are resampled.
void gibbs_sweep(HdpState& state, const Corpus& corpus, const HdpConfig& config, Rng& rng);

// Auxiliary-variable resampling of both concentration parameters under
// Gamma(1,1) hyperpriors.
void resample_concentrations(HdpState& state, const HdpConfig& config, Rng& rng);

struct Topic {
  int id = 0;                      // sampler topic index
  std::vector<double> theta;       // smoothed distribution over the vocabulary
  double weight = 0.0;             // averaged global stick weight
  std::vector<TermId> top_terms;   // highest-probability terms
};

struct TopicModel {
  std::vector<Topic> topics;  // ascending id
  int effective_topic_count = 0;
  double log_likelihood = 0.0;
  HdpConfig config;

  bool empty() const { return topics.empty(); }
};

// Called after each sweep with the corpus the chain trains on (the held-out
// view when several chains run).
using SweepObserver =
    std::function<void(int chain, int sweep, const HdpState& state, const Corpus& corpus)>;

// Runs the Gibbs chains and estimates topics from post-burn-in averaged
// counts; topics with fewer than 3 tokens in the final state are dropped.
TopicModel fit(const Corpus& corpus, const HdpConfig& config, const SweepObserver& observer = {});

// Similarity of a tweet to each sub-topic: sum over tweet terms of
// theta_i(term) * count. Returns the argmax topic id (ties to the lower id)
// and its score; empty tweets go to the outlier cluster with score 0.
std::pair<int, double> assign_tweet(const ProcessedTweet& tweet, const TopicModel& model);

Clustering cluster_corpus(const Corpus& corpus, const TopicModel& model);

struct TopicReport {
  struct Entry {
    int topic_id = 0;
    std::vector<std::string> terms;
  };
  std::vector<Entry> topics;
  std::vector<std::string> shared;  // terms in the top-n of at least half the topics
};

TopicReport report_topics(const TopicModel& model, const Vocabulary& vocabulary, int top_n);

std::string model_to_json(const TopicModel& model, const Vocabulary& vocabulary);

}  // namespace substory::hdp
