#include "substory/hdp.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace substory::hdp {

void HdpConfig::validate() const {
  if (alpha_init <= 0.0 || gamma_init <= 0.0 || eta <= 0.0) {
    throw std::invalid_argument("HdpConfig: alpha_init, gamma_init and eta must be positive");
  }
  if (max_topics < 1) throw std::invalid_argument("HdpConfig: max_topics must be >= 1");
  if (sweeps < 1) throw std::invalid_argument("HdpConfig: sweeps must be >= 1");
  if (burn_in < 0 || burn_in >= sweeps) {
    throw std::invalid_argument("HdpConfig: burn_in must lie in [0, sweeps)");
  }
  if (chains < 1) throw std::invalid_argument("HdpConfig: chains must be >= 1");
}

std::vector<double> stick_break(const std::vector<double>& breaks) {
  std::vector<double> weights;
  weights.reserve(breaks.size());
  double remaining = 1.0;
  for (const double b : breaks) {
    if (!(b > 0.0) || b > 1.0) {
      throw std::invalid_argument("stick_break: breaks must lie in (0, 1]");
    }
    weights.push_back(b * remaining);
    remaining *= 1.0 - b;
  }
  return weights;
}

// ---------------------------------------------------------------------------
// State

HdpState::HdpState(const Corpus& corpus, const HdpConfig& config, Rng& rng) {
  if (!corpus.is_processed()) throw std::runtime_error("HdpState: corpus is not processed");
  vocab_size_ = corpus.vocabulary.size();
  alpha = config.alpha_init;
  gamma = config.gamma_init;
  pi0.clear();
  pi0_remainder = 1.0;

  const std::size_t n_docs = corpus.processed.size();
  z.assign(n_docs, {});
  n_dk.assign(n_docs, {});
  m_dk.assign(n_docs, {});

  // incremental initialization: each token is drawn from its conditional
  // given the state built so far, so topics grow as the data demands
  for (std::size_t d = 0; d < n_docs; ++d) {
    const ProcessedTweet& pt = corpus.processed[d];
    z[d].assign(pt.tokens.size(), -1);
    for (std::size_t pos = 0; pos < pt.tokens.size(); ++pos) {
      resample_token(d, pos, pt.tokens[pos], config, rng);
    }
  }
  resample_tables_and_sticks(rng);
}

std::int64_t HdpState::total_tables() const {
  std::int64_t t = 0;
  for (const auto& row : m_dk) t = std::accumulate(row.begin(), row.end(), t);
  return t;
}

std::int64_t HdpState::total_tokens() const {
  std::int64_t t = 0;
  for (const std::int64_t c : n_k) t += c;
  return t;
}

void HdpState::check_consistency(const Corpus& corpus) const {
  const int k = n_topics();
  if (k > 0 && static_cast<std::size_t>(k) != n_kw.size()) {
    throw std::logic_error("hdp state: topic bookkeeping out of sync");
  }
  for (int topic = 0; topic < k; ++topic) {
    std::int64_t sum = 0;
    for (const int c : n_kw[static_cast<std::size_t>(topic)]) sum += c;
    if (sum != n_k[static_cast<std::size_t>(topic)]) {
      throw std::logic_error("hdp state: sum_w n_kw != n_k for topic " + std::to_string(topic));
    }
  }
  for (std::size_t d = 0; d < corpus.processed.size(); ++d) {
    std::int64_t sum = 0;
    for (const int c : n_dk[d]) sum += c;
    if (sum != static_cast<std::int64_t>(corpus.processed[d].tokens.size())) {
      throw std::logic_error("hdp state: sum_k n_dk != token count for doc " + std::to_string(d));
    }
  }
  double stick = pi0_remainder;
  for (const double w : pi0) {
    if (w < 0.0) throw std::logic_error("hdp state: negative stick weight");
    stick += w;
  }
  if (std::abs(stick - 1.0) > 1e-9) {
    throw std::logic_error("hdp state: stick weights sum to " + std::to_string(stick));
  }
}

void HdpState::resample_token(std::size_t doc, std::size_t pos, TermId term,
                              const HdpConfig& config, Rng& rng) {
  const int old_topic = z[doc][pos];
  if (old_topic >= 0) {
    const auto k = static_cast<std::size_t>(old_topic);
    --n_dk[doc][k];
    --n_kw[k][term];
    --n_k[k];
  }

  const int active = n_topics();
  const double v = static_cast<double>(vocab_size_);
  const bool can_grow = active < config.max_topics;

  // conditional posterior over active topics plus an optional fresh topic
  static thread_local std::vector<double> cumulative;
  cumulative.assign(static_cast<std::size_t>(active) + (can_grow ? 1 : 0), 0.0);
  double total = 0.0;
  for (int k = 0; k < active; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const double doc_part = static_cast<double>(n_dk[doc][ks]) + gamma * pi0[ks];
    const double word_part = (static_cast<double>(n_kw[ks][term]) + config.eta) /
                             (static_cast<double>(n_k[ks]) + config.eta * v);
    total += doc_part * word_part;
    cumulative[ks] = total;
  }
  if (can_grow) {
    total += gamma * pi0_remainder / v;
    cumulative[static_cast<std::size_t>(active)] = total;
  }

  int topic;
  if (total <= 0.0) {
    topic = active > 0 ? 0 : -1;
    if (topic < 0) {
      // first token of the corpus with an empty stick: force a fresh topic
      topic = active;
    }
  } else {
    const double u = rng.uniform() * total;
    topic = static_cast<int>(
        std::lower_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    if (topic > active) topic = active;
  }

  if (topic == active) {
    // instantiate a new topic by splitting the stick remainder
    const double b = rng.beta(1.0, alpha);
    pi0.push_back(b * pi0_remainder);
    pi0_remainder *= 1.0 - b;
    n_kw.emplace_back(vocab_size_, 0);
    n_k.push_back(0);
    for (std::size_t d = 0; d < n_dk.size(); ++d) {
      n_dk[d].push_back(0);
      m_dk[d].push_back(0);
    }
  }

  const auto k = static_cast<std::size_t>(topic);
  z[doc][pos] = topic;
  ++n_dk[doc][k];
  ++n_kw[k][term];
  ++n_k[k];
}

void HdpState::resample_tables_and_sticks(Rng& rng) {
  const int k = n_topics();
  if (k == 0) return;
  std::vector<std::int64_t> tables_per_topic(static_cast<std::size_t>(k), 0);
  for (std::size_t d = 0; d < n_dk.size(); ++d) {
    for (int topic = 0; topic < k; ++topic) {
      const auto ks = static_cast<std::size_t>(topic);
      const int count = n_dk[d][ks];
      int tables = 0;
      if (count > 0) {
        const double w = gamma * pi0[ks];
        if (w <= 0.0) {
          tables = 1;
        } else {
          for (int i = 1; i <= count; ++i) {
            if (rng.uniform() * (w + static_cast<double>(i - 1)) < w) ++tables;
          }
          if (tables == 0) tables = 1;
        }
      }
      m_dk[d][ks] = tables;
      tables_per_topic[ks] += tables;
    }
  }

  // (pi0, remainder) ~ Dirichlet(m_.1, ..., m_.K, alpha)
  std::vector<double> draws(static_cast<std::size_t>(k) + 1, 0.0);
  double total = 0.0;
  for (int topic = 0; topic < k; ++topic) {
    const auto ks = static_cast<std::size_t>(topic);
    draws[ks] = rng.gamma(static_cast<double>(tables_per_topic[ks]));
    total += draws[ks];
  }
  draws[static_cast<std::size_t>(k)] = rng.gamma(alpha);
  total += draws[static_cast<std::size_t>(k)];
  if (total <= 0.0) {
    // degenerate; keep the current stick
    return;
  }
  for (int topic = 0; topic < k; ++topic) {
    pi0[static_cast<std::size_t>(topic)] = draws[static_cast<std::size_t>(topic)] / total;
  }
  pi0_remainder = draws[static_cast<std::size_t>(k)] / total;
}

void gibbs_sweep(HdpState& state, const Corpus& corpus, const HdpConfig& config, Rng& rng) {
  for (std::size_t d = 0; d < corpus.processed.size(); ++d) {
    const ProcessedTweet& pt = corpus.processed[d];
    for (std::size_t pos = 0; pos < pt.tokens.size(); ++pos) {
      state.resample_token(d, pos, pt.tokens[pos], config, rng);
    }
  }
  state.resample_tables_and_sticks(rng);
}

void resample_concentrations(HdpState& state, const HdpConfig& config, Rng& rng) {
  (void)config;
  constexpr int kIterations = 5;
  constexpr double kPriorShape = 1.0;
  constexpr double kPriorRate = 1.0;

  const std::int64_t total_tables = state.total_tables();

  // tweet-level gamma: auxiliary Beta/Bernoulli per document
  std::vector<std::int64_t> doc_tokens(state.n_dk.size(), 0);
  for (std::size_t d = 0; d < state.n_dk.size(); ++d) {
    for (const int c : state.n_dk[d]) doc_tokens[d] += c;
  }
  for (int it = 0; it < kIterations; ++it) {
    double sum_log_w = 0.0;
    double sum_s = 0.0;
    for (const std::int64_t n_d : doc_tokens) {
      if (n_d == 0) continue;
      const double nd = static_cast<double>(n_d);
      sum_log_w += std::log(rng.beta(state.gamma + 1.0, nd));
      if (rng.bernoulli(nd / (nd + state.gamma))) sum_s += 1.0;
    }
    const double shape = kPriorShape + static_cast<double>(total_tables) - sum_s;
    const double rate = kPriorRate - sum_log_w;
    const double sample = rng.gamma(std::max(shape, 1e-3), 1.0 / std::max(rate, 1e-12));
    state.gamma = std::max(sample, 1e-10);
  }

  // top-level alpha: Escobar-West update with tables as customers and
  // occupied topics as components
  std::int64_t occupied = 0;
  {
    std::vector<std::int64_t> per_topic(static_cast<std::size_t>(state.n_topics()), 0);
    for (const auto& row : state.m_dk) {
      for (std::size_t k = 0; k < row.size(); ++k) per_topic[k] += row[k];
    }
    for (const std::int64_t m : per_topic) {
      if (m > 0) ++occupied;
    }
  }
  if (total_tables > 0 && occupied > 0) {
    const double t = static_cast<double>(total_tables);
    const double k = static_cast<double>(occupied);
    for (int it = 0; it < kIterations; ++it) {
      const double aux = rng.beta(state.alpha + 1.0, t);
      const double log_aux = std::log(std::max(aux, 1e-300));
      const double mix_a = kPriorShape + k - 1.0;
      const double mix_b = t * (kPriorRate - log_aux);
      const bool high = rng.uniform() * (mix_a + mix_b) < mix_a;
      const double shape = kPriorShape + k - (high ? 0.0 : 1.0);
      const double rate = kPriorRate - log_aux;
      const double sample = rng.gamma(std::max(shape, 1e-3), 1.0 / std::max(rate, 1e-12));
      state.alpha = std::max(sample, 1e-10);
    }
  }
}

// ---------------------------------------------------------------------------
// Fitting

namespace {

// every 10th token position is held out for chain selection when several
// chains run; single chains train on everything
constexpr std::size_t kHoldoutStride = 10;

bool held_out(std::size_t pos) { return pos % kHoldoutStride == kHoldoutStride - 1; }

Corpus training_view(const Corpus& corpus) {
  Corpus out;
  out.tweets = corpus.tweets;
  out.vocabulary = corpus.vocabulary;
  out.processed.reserve(corpus.processed.size());
  for (const ProcessedTweet& pt : corpus.processed) {
    ProcessedTweet kept;
    kept.tweet_id = pt.tweet_id;
    for (std::size_t pos = 0; pos < pt.tokens.size(); ++pos) {
      if (held_out(pos)) continue;
      kept.tokens.push_back(pt.tokens[pos]);
      ++kept.term_counts[pt.tokens[pos]];
    }
    out.processed.push_back(std::move(kept));
  }
  out.rebuild_index();
  return out;
}

struct ChainOutput {
  TopicModel model;
  HdpState state;  // final sampler state
};

ChainOutput run_chain(const Corpus& corpus, const HdpConfig& config, int chain,
                      const SweepObserver& observer) {
  Rng rng(config.seed + 1000003ULL * static_cast<std::uint64_t>(chain));
  HdpState state(corpus, config, rng);

  const std::size_t v = corpus.vocabulary.size();
  std::vector<std::vector<double>> sum_n_kw;
  std::vector<double> sum_n_k;
  std::vector<double> sum_pi0;
  int averaged_sweeps = 0;

  auto grow_to = [&](std::size_t k) {
    while (sum_n_kw.size() < k) {
      sum_n_kw.emplace_back(v, 0.0);
      sum_n_k.push_back(0.0);
      sum_pi0.push_back(0.0);
    }
  };

  for (int sweep = 0; sweep < config.sweeps; ++sweep) {
    gibbs_sweep(state, corpus, config, rng);
    if (config.resample_concentrations) resample_concentrations(state, config, rng);
    if (observer) observer(chain, sweep, state, corpus);
    if (sweep >= config.burn_in) {
      grow_to(static_cast<std::size_t>(state.n_topics()));
      for (int k = 0; k < state.n_topics(); ++k) {
        const auto ks = static_cast<std::size_t>(k);
        for (std::size_t w = 0; w < v; ++w) {
          sum_n_kw[ks][w] += static_cast<double>(state.n_kw[ks][w]);
        }
        sum_n_k[ks] += static_cast<double>(state.n_k[ks]);
        sum_pi0[ks] += state.pi0[ks];
      }
      ++averaged_sweeps;
    }
  }

  const double s = static_cast<double>(averaged_sweeps);
  // prune sampler debris; fall back to any populated topic on tiny corpora
  std::int64_t prune_below = 3;
  bool any_kept = false;
  for (int k = 0; k < state.n_topics(); ++k) {
    if (state.n_k[static_cast<std::size_t>(k)] >= prune_below) any_kept = true;
  }
  if (!any_kept) prune_below = 1;

  TopicModel model;
  model.config = config;
  for (int k = 0; k < state.n_topics(); ++k) {
    const auto ks = static_cast<std::size_t>(k);
    if (state.n_k[ks] < prune_below) continue;
    Topic topic;
    topic.id = k;
    topic.weight = sum_pi0[ks] / s;
    topic.theta.resize(v);
    const double denom = sum_n_k[ks] / s + config.eta * static_cast<double>(v);
    for (std::size_t w = 0; w < v; ++w) {
      topic.theta[w] = (sum_n_kw[ks][w] / s + config.eta) / denom;
    }
    std::vector<TermId> order(v);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t top = std::min<std::size_t>(10, v);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top),
                      order.end(), [&](TermId a, TermId b) {
                        return topic.theta[a] != topic.theta[b] ? topic.theta[a] > topic.theta[b]
                                                                : a < b;
                      });
    topic.top_terms.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top));
    model.topics.push_back(std::move(topic));
  }
  model.effective_topic_count = static_cast<int>(model.topics.size());

  return {std::move(model), std::move(state)};
}

// document-completion likelihood of the held-out token positions under the
// averaged model, with doc mixtures from the training counts
double holdout_likelihood(const Corpus& corpus, const Corpus& training, const HdpState& state,
                          const TopicModel& model) {
  if (model.topics.empty()) return -std::numeric_limits<double>::infinity();
  double weight_total = 0.0;
  for (const Topic& t : model.topics) weight_total += t.weight;
  double ll = 0.0;
  for (std::size_t d = 0; d < corpus.processed.size(); ++d) {
    const ProcessedTweet& pt = corpus.processed[d];
    const double n_train = static_cast<double>(training.processed[d].tokens.size());
    for (std::size_t pos = 0; pos < pt.tokens.size(); ++pos) {
      if (!held_out(pos)) continue;
      const TermId term = pt.tokens[pos];
      double p = 0.0;
      for (const Topic& t : model.topics) {
        const auto ks = static_cast<std::size_t>(t.id);
        const double mix = (static_cast<double>(state.n_dk[d][ks]) + state.gamma * t.weight) /
                           (n_train + state.gamma * weight_total);
        p += mix * t.theta[term];
      }
      ll += std::log(std::max(p, 1e-300));
    }
  }
  return ll;
}

}  // namespace

TopicModel fit(const Corpus& corpus, const HdpConfig& config, const SweepObserver& observer) {
  config.validate();
  if (!corpus.is_processed()) throw std::runtime_error("hdp::fit: corpus is not processed");
  bool any_tokens = false;
  for (const ProcessedTweet& pt : corpus.processed) {
    if (!pt.tokens.empty()) {
      any_tokens = true;
      break;
    }
  }
  if (!any_tokens) throw std::runtime_error("hdp::fit: every tweet is empty after preprocessing");

  if (config.chains == 1) {
    ChainOutput out = run_chain(corpus, config, 0, observer);
    // in-sample completion score, for reporting only
    out.model.log_likelihood = holdout_likelihood(corpus, corpus, out.state, out.model);
    return std::move(out.model);
  }

  // several chains: train on the non-held-out tokens and keep the chain with
  // the best held-out likelihood
  const Corpus training = training_view(corpus);
  bool training_has_tokens = false;
  for (const ProcessedTweet& pt : training.processed) {
    if (!pt.tokens.empty()) {
      training_has_tokens = true;
      break;
    }
  }
  const Corpus& fit_corpus = training_has_tokens ? training : corpus;

  std::vector<std::future<std::pair<TopicModel, double>>> futures;
  futures.reserve(static_cast<std::size_t>(config.chains));
  for (int c = 0; c < config.chains; ++c) {
    futures.push_back(std::async(std::launch::async, [&, c] {
      ChainOutput out = run_chain(fit_corpus, config, c, observer);
      const double score = holdout_likelihood(corpus, fit_corpus, out.state, out.model);
      return std::pair<TopicModel, double>{std::move(out.model), score};
    }));
  }
  std::vector<std::pair<TopicModel, double>> chains;
  chains.reserve(static_cast<std::size_t>(config.chains));
  for (auto& f : futures) chains.push_back(f.get());

  std::size_t best = 0;
  for (std::size_t c = 1; c < chains.size(); ++c) {
    if (chains[c].second > chains[best].second) best = c;
  }
  TopicModel selected = std::move(chains[best].first);
  selected.log_likelihood = chains[best].second;
  return selected;
}

std::pair<int, double> assign_tweet(const ProcessedTweet& tweet, const TopicModel& model) {
  if (model.empty()) throw std::invalid_argument("assign_tweet: empty topic model");
  if (tweet.empty()) return {kOutlierCluster, 0.0};
  int best_id = kOutlierCluster;
  double best_score = -1.0;
  for (const Topic& topic : model.topics) {
    double score = 0.0;
    for (const auto& [term, count] : tweet.term_counts) {
      if (term < topic.theta.size()) {
        score += topic.theta[term] * static_cast<double>(count);
      }
    }
    if (score > best_score) {
      best_score = score;
      best_id = topic.id;
    }
  }
  return {best_id, best_score};
}

Clustering cluster_corpus(const Corpus& corpus, const TopicModel& model) {
  Clustering out;
  for (const ProcessedTweet& pt : corpus.processed) {
    out.assignment.emplace(pt.tweet_id, assign_tweet(pt, model).first);
  }
  return out;
}

TopicReport report_topics(const TopicModel& model, const Vocabulary& vocabulary, int top_n) {
  if (top_n < 1) throw std::invalid_argument("report_topics: top_n must be >= 1");
  const int n_topics = static_cast<int>(model.topics.size());

  std::vector<std::vector<TermId>> top_lists;
  std::unordered_map<TermId, int> appearance;
  for (const Topic& topic : model.topics) {
    std::vector<TermId> order(topic.theta.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(top_n), order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top),
                      order.end(), [&](TermId a, TermId b) {
                        return topic.theta[a] != topic.theta[b] ? topic.theta[a] > topic.theta[b]
                                                                : a < b;
                      });
    order.resize(top);
    for (const TermId t : order) ++appearance[t];
    top_lists.push_back(std::move(order));
  }

  // shared: present in the top-n of at least half of the topics (and at
  // least two of them)
  std::set<TermId> shared;
  for (const auto& [term, count] : appearance) {
    if (count >= 2 && 2 * count >= n_topics) shared.insert(term);
  }

  TopicReport report;
  for (const TermId t : shared) report.shared.push_back(vocabulary.term_of(t));
  std::sort(report.shared.begin(), report.shared.end());
  for (int i = 0; i < n_topics; ++i) {
    TopicReport::Entry entry;
    entry.topic_id = model.topics[static_cast<std::size_t>(i)].id;
    for (const TermId t : top_lists[static_cast<std::size_t>(i)]) {
      if (!shared.count(t)) entry.terms.push_back(vocabulary.term_of(t));
    }
    report.topics.push_back(std::move(entry));
  }
  return report;
}

std::string model_to_json(const TopicModel& model, const Vocabulary& vocabulary) {
  nlohmann::json doc;
  doc["config"] = {{"alpha_init", model.config.alpha_init},
                   {"gamma_init", model.config.gamma_init},
                   {"eta", model.config.eta},
                   {"max_topics", model.config.max_topics},
                   {"sweeps", model.config.sweeps},
                   {"burn_in", model.config.burn_in},
                   {"resample_concentrations", model.config.resample_concentrations},
                   {"chains", model.config.chains},
                   {"seed", model.config.seed}};
  doc["effective_topic_count"] = model.effective_topic_count;
  doc["topics"] = nlohmann::json::array();
  for (const Topic& topic : model.topics) {
    nlohmann::json entry;
    entry["topic_id"] = topic.id;
    entry["weight"] = topic.weight;
    std::vector<TermId> order(topic.theta.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](TermId a, TermId b) {
      return topic.theta[a] != topic.theta[b] ? topic.theta[a] > topic.theta[b] : a < b;
    });
    entry["terms"] = nlohmann::json::array();
    for (const TermId t : order) {
      entry["terms"].push_back({vocabulary.term_of(t), topic.theta[t]});
    }
    doc["topics"].push_back(std::move(entry));
  }
  return doc.dump(2);
}

}  // namespace substory::hdp
