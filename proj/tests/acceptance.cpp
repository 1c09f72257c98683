// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Exits nonzero if any criterion fails.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "substory/corpus.hpp"
#include "substory/eval.hpp"
#include "substory/hdp.hpp"
#include "substory/lsh.hpp"
#include "substory/pipeline.hpp"
#include "substory/rng.hpp"
#include "substory/spectral.hpp"
#include "substory/threads.hpp"
#include "../tests/test_support.hpp"

using namespace substory;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& message) {
  if (!ok) throw Failure(message);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

Clustering clustering_of(const std::vector<int>& labels) {
  return test_support::make_clustering(labels);
}

std::vector<int> random_labels(std::size_t n, int k, Rng& rng) {
  std::vector<int> labels(n);
  for (auto& l : labels) l = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(k)));
  return labels;
}

// ---------------------------------------------------------------------------
// criterion 1: metric oracles

double brute_entropy(const std::vector<int>& labels) {
  return test_support::entropy_of_labels(labels);
}

struct BrutePrf {
  double p, r, f;
};

// independent max-overlap alignment and micro P/R/F by direct scanning
BrutePrf brute_micro_prf(const std::vector<int>& gold, const std::vector<int>& predicted) {
  std::set<int> stories(gold.begin(), gold.end());
  long tp_sum = 0, fp_sum = 0, fn_sum = 0;
  for (const int story : stories) {
    std::map<int, long> overlap;
    long story_size = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (gold[i] == story) {
        ++overlap[predicted[i]];
        ++story_size;
      }
    }
    int aligned = overlap.begin()->first;
    long best = overlap.begin()->second;
    for (const auto& [cluster, count] : overlap) {
      if (count > best) {
        best = count;
        aligned = cluster;
      }
    }
    long cluster_size = 0;
    for (const int p : predicted) {
      if (p == aligned) ++cluster_size;
    }
    tp_sum += best;
    fp_sum += cluster_size - best;
    fn_sum += story_size - best;
  }
  BrutePrf out{};
  out.p = tp_sum + fp_sum > 0 ? static_cast<double>(tp_sum) / (tp_sum + fp_sum) : 0.0;
  out.r = tp_sum + fn_sum > 0 ? static_cast<double>(tp_sum) / (tp_sum + fn_sum) : 0.0;
  out.f = out.p + out.r > 0 ? 2.0 * out.p * out.r / (out.p + out.r) : 0.0;
  return out;
}

void criterion_metric_oracles() {
  Rng rng(1001);
  std::vector<std::pair<std::vector<int>, std::vector<int>>> fixtures = {
      {{0, 0, 1, 1}, {0, 0, 1, 1}},
      {{0, 0, 1, 1}, {0, 1, 0, 1}},
      {{0, 0, 0, 0, 1, 1, 1, 1}, {0, 0, 0, 1, 1, 1, 1, 1}},
      {{0, 0, 0, 1, 1, 2}, {5, 5, 6, 6, 7, 7}},
      {{0, 1, 2, 3}, {0, 0, 0, 0}},
  };
  for (int extra = 0; extra < 7; ++extra) {
    const std::size_t n = 6 + rng.uniform_index(30);
    fixtures.emplace_back(random_labels(n, 2 + static_cast<int>(rng.uniform_index(4)), rng),
                          random_labels(n, 2 + static_cast<int>(rng.uniform_index(5)), rng));
  }
  expect(fixtures.size() >= 10, "need at least 10 fixtures");

  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    const auto& [u_labels, v_labels] = fixtures[i];
    const Clustering u = clustering_of(u_labels);
    const Clustering v = clustering_of(v_labels);
    const auto table = eval::contingency(u, v);

    const double mi = eval::mutual_information(table);
    const double mi_oracle = std::max(test_support::mi_of_labels(u_labels, v_labels), 0.0);
    expect(std::abs(mi - mi_oracle) <= 1e-9,
           "MI mismatch on fixture " + std::to_string(i) + ": " + fmt(mi) + " vs " +
               fmt(mi_oracle));

    const double hu = eval::entropy(table.row_marginals, table.total);
    expect(std::abs(hu - brute_entropy(u_labels)) <= 1e-9,
           "entropy mismatch on fixture " + std::to_string(i));
    const double hv = eval::entropy(table.col_marginals, table.total);
    expect(std::abs(hv - brute_entropy(v_labels)) <= 1e-9,
           "entropy mismatch (cols) on fixture " + std::to_string(i));

    const double nmi = eval::nmi(u, v);
    const double hmax = std::max(brute_entropy(u_labels), brute_entropy(v_labels));
    const double nmi_oracle = hmax > 0.0 ? mi_oracle / hmax : 0.0;
    expect(std::abs(nmi - nmi_oracle) <= 1e-9,
           "NMI mismatch on fixture " + std::to_string(i));

    const auto prf = eval::micro_prf(eval::align_max_overlap(u, v));
    const BrutePrf brute = brute_micro_prf(u_labels, v_labels);
    expect(std::abs(prf.precision - brute.p) <= 1e-9 && std::abs(prf.recall - brute.r) <= 1e-9 &&
               std::abs(prf.f1 - brute.f) <= 1e-9,
           "micro P/R/F mismatch on fixture " + std::to_string(i));
  }

  // EMI vs a 100,000-draw permutation oracle on tables with N <= 12
  for (std::int64_t n = 2; n <= 12; ++n) {
    const auto u_labels =
        random_labels(static_cast<std::size_t>(n), 2 + static_cast<int>(rng.uniform_index(3)), rng);
    auto v_labels =
        random_labels(static_cast<std::size_t>(n), 2 + static_cast<int>(rng.uniform_index(3)), rng);
    const auto table = eval::contingency(clustering_of(u_labels), clustering_of(v_labels));
    const double emi = eval::expected_mi(table);

    const int draws = 100000;
    double sum = 0.0, sum_sq = 0.0;
    std::vector<int> perm = v_labels;
    for (int d = 0; d < draws; ++d) {
      rng.shuffle(perm);
      const double mi = test_support::mi_of_labels(u_labels, perm);
      sum += mi;
      sum_sq += mi * mi;
    }
    const double mean = sum / draws;
    const double variance = std::max(sum_sq / draws - mean * mean, 0.0);
    const double se = std::sqrt(variance / draws);
    expect(std::abs(emi - mean) <= std::max(3.0 * se, 1e-9),
           "EMI outside 3 standard errors at N=" + std::to_string(n) + ": emi=" + fmt(emi) +
               " mc=" + fmt(mean) + " se=" + fmt(se));
  }
}

// ---------------------------------------------------------------------------
// criterion 2: AMI chance correction

void criterion_ami_chance() {
  Rng rng(2002);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 10 + rng.uniform_index(60);
    auto labels = random_labels(n, 2 + static_cast<int>(rng.uniform_index(5)), rng);
    labels[0] = 0;
    labels[n - 1] = 1;  // at least two clusters
    const Clustering u = clustering_of(labels);
    const double self_ami = eval::ami(u, u);
    expect(std::abs(self_ami - 1.0) <= 1e-9,
           "AMI(U,U) = " + fmt(self_ami) + " on trial " + std::to_string(trial));
  }

  std::vector<int> base;
  for (int c = 0; c < 5; ++c) {
    for (int i = 0; i < 12 + 4 * c; ++i) base.push_back(c);
  }
  const Clustering u = clustering_of(base);
  std::vector<int> shuffled = base;
  double sum = 0.0;
  const int seeds = 1000;
  for (int s = 0; s < seeds; ++s) {
    rng.shuffle(shuffled);
    sum += eval::ami(u, clustering_of(shuffled));
  }
  const double mean = sum / seeds;
  expect(std::abs(mean) <= 0.02,
         "mean AMI of random relabelings = " + fmt(mean) + " (want within +/-0.02 of 0)");
}

// ---------------------------------------------------------------------------
// criterion 3: over-clustering penalty

void criterion_overclustering() {
  std::vector<int> gold_labels;
  for (int c = 0; c < 5; ++c) {
    for (int i = 0; i < 20; ++i) gold_labels.push_back(c);
  }
  std::vector<int> singleton_labels(100);
  for (int i = 0; i < 100; ++i) singleton_labels[i] = 1000 + i;
  const Clustering gold = clustering_of(gold_labels);
  const Clustering singletons = clustering_of(singleton_labels);
  const double a = eval::ami(gold, singletons);
  const double n = eval::nmi(gold, singletons);
  expect(a < n - 0.1, "AMI " + fmt(a) + " not below NMI " + fmt(n) + " - 0.1");
}

// ---------------------------------------------------------------------------
// criterion 4: NPMI properties

void criterion_npmi() {
  Rng rng(4004);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::int64_t n = 1 + static_cast<std::int64_t>(rng.uniform_index(500));
    const std::int64_t cx =
        1 + static_cast<std::int64_t>(rng.uniform_index(static_cast<std::size_t>(n)));
    const std::int64_t cy =
        1 + static_cast<std::int64_t>(rng.uniform_index(static_cast<std::size_t>(n)));
    const std::int64_t cxy = static_cast<std::int64_t>(
        rng.uniform_index(static_cast<std::size_t>(std::min(cx, cy) + 1)));
    const double v = spectral::npmi(cxy, cx, cy, n);
    expect(v >= -1.0 - 1e-12 && v <= 1.0 + 1e-12,
           "npmi out of range: " + fmt(v));
    const double sym = spectral::npmi(cxy, cy, cx, n);
    expect(std::abs(v - sym) <= 1e-12, "npmi asymmetric");
  }
  expect(spectral::npmi(7, 7, 7, 20) == 1.0, "perfect co-occurrence must give exactly 1");
  expect(spectral::npmi(5, 5, 5, 5) == 1.0, "p=1 boundary must give exactly 1");
  expect(spectral::npmi(0, 9, 4, 30) == -1.0, "never co-occurring must give exactly -1");
}

// ---------------------------------------------------------------------------
// criterion 5: spectral embedding oracle

spectral::WordGraph random_connected_graph(std::size_t n, Rng& rng) {
  spectral::WordGraph g;
  for (std::size_t i = 0; i < n; ++i) g.nodes.push_back(static_cast<TermId>(i));
  std::set<std::pair<TermId, TermId>> used;
  for (std::size_t i = 1; i < n; ++i) {
    const auto j = static_cast<TermId>(rng.uniform_index(i));
    g.edges.push_back({j, static_cast<TermId>(i), 0.2 + 0.8 * rng.uniform()});
    used.insert({j, static_cast<TermId>(i)});
  }
  for (std::size_t e = 0; e < n; ++e) {
    auto a = static_cast<TermId>(rng.uniform_index(n));
    auto b = static_cast<TermId>(rng.uniform_index(n));
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!used.insert({a, b}).second) continue;
    g.edges.push_back({a, b, 0.2 + 0.8 * rng.uniform()});
  }
  return g;
}

void criterion_spectral_oracle() {
  Rng rng(5005);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5 + rng.uniform_index(46);  // up to 50 nodes
    const auto g = random_connected_graph(n, rng);
    const int dim = 1 + static_cast<int>(rng.uniform_index(std::min<std::size_t>(4, n)));
    const auto emb = spectral::laplacian_embedding(g, dim);

    expect(std::abs(emb.eigenvalues[0]) <= 1e-8,
           "smallest eigenvalue " + fmt(emb.eigenvalues[0]) + " not ~0");
    for (const double ev : emb.eigenvalues) {
      expect(ev >= -1e-8 && ev <= 2.0 + 1e-8, "eigenvalue out of [0,2]: " + fmt(ev));
    }

    // dense Jacobi oracle with identical sign and row-normalization rules
    std::vector<std::size_t> index_of(n);
    for (std::size_t i = 0; i < n; ++i) index_of[g.nodes[i]] = i;
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    std::vector<double> degree(n, 0.0);
    for (const auto& e : g.edges) {
      const std::size_t i = index_of[e.a];
      const std::size_t j = index_of[e.b];
      w[i][j] += e.weight;
      w[j][i] += e.weight;
      degree[i] += e.weight;
      degree[j] += e.weight;
    }
    std::vector<std::vector<double>> l(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        l[i][j] = (i == j ? 1.0 : 0.0) - w[i][j] / std::sqrt(degree[i] * degree[j]);
      }
    }
    const auto eig = test_support::jacobi_eigen(l);
    std::vector<std::vector<double>> oracle(n, std::vector<double>(dim, 0.0));
    for (int c = 0; c < dim; ++c) {
      std::vector<double> vec = eig.vectors[static_cast<std::size_t>(c)];
      std::size_t argmax = 0;
      for (std::size_t i = 1; i < n; ++i) {
        if (std::abs(vec[i]) > std::abs(vec[argmax])) argmax = i;
      }
      if (vec[argmax] < 0.0) {
        for (double& x : vec) x = -x;
      }
      for (std::size_t i = 0; i < n; ++i) oracle[i][static_cast<std::size_t>(c)] = vec[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      double norm = 0.0;
      for (const double x : oracle[i]) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > 0.0) {
        for (double& x : oracle[i]) x /= norm;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < dim; ++c) {
        const double got = emb.coords[i][static_cast<std::size_t>(c)];
        const double want = oracle[i][static_cast<std::size_t>(c)];
        expect(std::abs(got - want) <= 1e-6,
               "embedding coordinate off at trial " + std::to_string(trial) + " node " +
                   std::to_string(i) + " dim " + std::to_string(c) + ": " + fmt(got) + " vs " +
                   fmt(want));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// criterion 6: LSH nearest-neighbor quality

void criterion_lsh_quality() {
  Rng rng(6006);
  const std::size_t n = 1000;
  const std::size_t dim = 25;
  const std::size_t n_centers = 50;

  std::vector<std::vector<double>> centers(n_centers, std::vector<double>(dim));
  for (auto& c : centers) {
    for (double& x : c) x = rng.normal();
  }
  std::vector<TfIdfVector> vectors;
  vectors.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = centers[rng.uniform_index(n_centers)];
    std::vector<double> x(dim);
    double norm = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      x[d] = c[d] + 0.25 * rng.normal();
      norm += x[d] * x[d];
    }
    norm = std::sqrt(norm);
    TfIdfVector v;
    for (std::size_t d = 0; d < dim; ++d) {
      v.entries.emplace_back(static_cast<TermId>(d), x[d] / norm);
    }
    vectors.push_back(std::move(v));
  }

  auto config = lsh::LshConfig::preset("k13h71b10");
  config.seed = 606;
  lsh::HashTables tables(config, dim);
  std::size_t agreements = 0;
  std::size_t evaluated = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      std::size_t best = 0;
      double best_cos = -1.0;
      for (std::size_t j = 0; j < i; ++j) {
        const double c = vectors[i].dot(vectors[j]);
        if (c > best_cos) {
          best_cos = c;
          best = j;
        }
      }
      const auto nn = tables.nearest_neighbor(vectors[i]);
      ++evaluated;
      if (nn && nn->tweet_id == "v" + std::to_string(best)) ++agreements;
    }
    tables.insert("v" + std::to_string(i), vectors[i]);
    expect(tables.max_bucket_load() <= config.bucket_size,
           "bucket size invariant violated after insertion " + std::to_string(i));
  }
  const double rate = static_cast<double>(agreements) / static_cast<double>(evaluated);
  expect(rate >= 0.8, "LSH/brute-force NN agreement " + fmt(rate) + " below 0.8");
  std::cout << "    (nn agreement rate " << rate << ")\n";
}

// ---------------------------------------------------------------------------
// criterion 7: HDP recovery

void criterion_hdp_recovery() {
  SynthSpec spec;
  spec.n_substories = 5;
  spec.tweets_per_story = 200;
  spec.vocab_per_story = 20;
  spec.shared_vocab_size = 10;
  spec.seed = 4;
  const Corpus corpus = preprocess(synth_generate(spec), PreprocessOptions{});

  hdp::HdpConfig config;
  config.max_topics = 20;
  config.sweeps = 500;
  config.burn_in = 250;
  config.chains = 4;
  config.seed = 0;

  std::atomic<long> sweeps_checked{0};
  const auto observer = [&](int, int, const hdp::HdpState& state, const Corpus& training) {
    state.check_consistency(training);  // throws on any count/stick violation
    sweeps_checked.fetch_add(1, std::memory_order_relaxed);
  };
  const hdp::TopicModel model = hdp::fit(corpus, config, observer);
  expect(sweeps_checked.load() == static_cast<long>(config.sweeps) * config.chains,
         "observer did not see every sweep");

  for (const auto& topic : model.topics) {
    double sum = 0.0;
    for (const double p : topic.theta) sum += p;
    expect(std::abs(sum - 1.0) <= 1e-9,
           "theta of topic " + std::to_string(topic.id) + " sums to " + fmt(sum));
  }

  const Clustering predicted = hdp::cluster_corpus(corpus, model);
  const Clustering gold = gold_clustering(corpus);
  const double ami = eval::ami(gold, restrict_to(predicted, gold));
  expect(ami >= 0.8, "HDP AMI " + fmt(ami) + " below 0.8");
  std::cout << "    (hdp recovery AMI " << ami << ", effective topics "
            << model.effective_topic_count << ")\n";
}

// ---------------------------------------------------------------------------
// criteria 8 + 9: directional pattern, thread baseline

struct DirectionalResults {
  std::map<std::string, json> all_tweets;   // method -> row
  std::map<std::string, json> propagated;
};

DirectionalResults run_directional(const fs::path& dir) {
  SynthSpec spec;
  spec.n_substories = 5;
  spec.tweets_per_story = 120;
  spec.vocab_per_story = 15;
  spec.shared_vocab_size = 8;
  spec.background_tweets = 80;
  spec.reply_fraction = 0.3;
  spec.seed = 42;
  const std::string input = (dir / "directional.jsonl").string();
  write_jsonl(synth_generate(spec), input);

  auto base = [&](pipeline::Method method) {
    pipeline::RunConfig c;
    c.input_path = input;
    c.method = method;
    c.seed = 17;
    c.hdp_config.max_topics = 20;
    c.hdp_config.sweeps = 400;
    c.hdp_config.burn_in = 200;
    c.hdp_config.chains = 3;
    c.sc_config.k = 3;
    c.sc_config.min_word_freq = 5;
    c.sc_config.npmi_threshold = 0.0;
    c.lsh_config = lsh::LshConfig::preset("k12h56b10");
    c.lsh_config.cosine_threshold = 0.4;
    return c;
  };

  DirectionalResults results;
  for (const auto mode :
       {pipeline::Mode::all_tweets, pipeline::Mode::source_then_propagate}) {
    std::vector<pipeline::RunConfig> configs;
    for (const auto method : {pipeline::Method::hdp, pipeline::Method::sc,
                              pipeline::Method::lsh, pipeline::Method::thread_baseline}) {
      auto c = base(method);
      c.mode = mode;
      configs.push_back(std::move(c));
    }
    const fs::path out = dir / ("cmp_" + pipeline::to_string(mode));
    pipeline::compare(configs, out.string());

    std::ifstream in(out / "comparison.json");
    json doc;
    in >> doc;
    for (const auto& row : doc.at("rows")) {
      auto& slot = (mode == pipeline::Mode::all_tweets) ? results.all_tweets
                                                        : results.propagated;
      slot[row.at("method").get<std::string>()] = row;
    }
  }
  return results;
}

void criterion_directional(const DirectionalResults& results) {
  const auto& at = results.all_tweets;
  const double p_lsh = at.at("lsh").at("p_micro").get<double>();
  const double p_hdp = at.at("hdp").at("p_micro").get<double>();
  const double p_sc = at.at("sc").at("p_micro").get<double>();
  const double f_lsh = at.at("lsh").at("f_micro").get<double>();
  const double f_hdp = at.at("hdp").at("f_micro").get<double>();
  const double f_sc = at.at("sc").at("f_micro").get<double>();
  expect(p_lsh > p_hdp && p_hdp > p_sc,
         "precision order violated: lsh=" + fmt(p_lsh) + " hdp=" + fmt(p_hdp) +
             " sc=" + fmt(p_sc));
  expect(f_hdp >= f_lsh, "F(hdp)=" + fmt(f_hdp) + " below F(lsh)=" + fmt(f_lsh));
  expect(f_hdp >= f_sc, "F(hdp)=" + fmt(f_hdp) + " below F(sc)=" + fmt(f_sc));

  for (const std::string method : {"hdp", "sc", "lsh"}) {
    const double r_all = results.all_tweets.at(method).at("r_micro").get<double>();
    const double r_prop = results.propagated.at(method).at("r_micro").get<double>();
    expect(r_prop > r_all, "propagation did not improve recall for " + method + ": " +
                               fmt(r_all) + " -> " + fmt(r_prop));
  }
  std::cout << "    (P: lsh " << p_lsh << " > hdp " << p_hdp << " > sc " << p_sc << "; F hdp "
            << f_hdp << ")\n";
}

void criterion_thread_baseline(const DirectionalResults& results, const fs::path& dir) {
  // exact precision 1 on a fresh synthetic corpus with inherited labels
  SynthSpec spec;
  spec.n_substories = 4;
  spec.tweets_per_story = 60;
  spec.background_tweets = 40;
  spec.reply_fraction = 0.5;
  spec.seed = 909;
  const Corpus corpus = synth_generate(spec);
  const auto index = threads::build_thread_index(corpus);
  const Clustering baseline = threads::thread_baseline(corpus, index);
  const Clustering gold = gold_clustering(corpus);
  const auto prf = eval::micro_prf(eval::align_max_overlap(gold, baseline));
  expect(prf.precision == 1.0,
         "thread baseline micro-precision " + fmt(prf.precision) + " != 1.0");

  // and on the directional fixture, below every propagated recall
  const double r_baseline =
      results.propagated.at("thread-baseline").at("r_micro").get<double>();
  for (const std::string method : {"hdp", "sc", "lsh"}) {
    const double r = results.propagated.at(method).at("r_micro").get<double>();
    expect(r_baseline < r, "baseline recall " + fmt(r_baseline) + " not below " + method +
                               " propagated recall " + fmt(r));
  }
  (void)dir;
}

// ---------------------------------------------------------------------------
// criterion 10: determinism of pipeline artifacts

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_determinism(const fs::path& dir) {
  SynthSpec spec;
  spec.n_substories = 3;
  spec.tweets_per_story = 40;
  spec.shared_vocab_size = 5;
  spec.background_tweets = 20;
  spec.reply_fraction = 0.3;
  spec.seed = 77;
  const std::string input = (dir / "determinism.jsonl").string();
  write_jsonl(synth_generate(spec), input);

  for (const auto method : {pipeline::Method::hdp, pipeline::Method::sc, pipeline::Method::lsh,
                            pipeline::Method::thread_baseline}) {
    pipeline::RunConfig config;
    config.input_path = input;
    config.method = method;
    config.seed = 50;
    config.hdp_config.sweeps = 60;
    config.hdp_config.burn_in = 30;
    config.hdp_config.max_topics = 10;
    config.hdp_config.chains = 2;
    config.sc_config.k = 3;
    config.sc_config.min_word_freq = 4;
    config.sc_config.npmi_threshold = 0.0;
    config.lsh_config = lsh::LshConfig::preset("k12h56b10");

    config.out_dir = (dir / (pipeline::to_string(method) + "_a")).string();
    pipeline::run(config);
    config.out_dir = (dir / (pipeline::to_string(method) + "_b")).string();
    pipeline::run(config);

    const std::string a =
        slurp(dir / (pipeline::to_string(method) + "_a") / "assignments.csv");
    const std::string b =
        slurp(dir / (pipeline::to_string(method) + "_b") / "assignments.csv");
    expect(!a.empty() && a == b,
           "assignments differ across identical runs for " + pipeline::to_string(method));
  }
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "substory_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  DirectionalResults directional;
  bool directional_ready = false;

  struct Criterion {
    int id;
    std::string name;
    std::function<void()> body;
  };
  const std::vector<Criterion> criteria = {
      {1, "metric oracle suite (MI, entropy, NMI, micro P/R/F, EMI)",
       [] { criterion_metric_oracles(); }},
      {2, "AMI chance correction", [] { criterion_ami_chance(); }},
      {3, "over-clustering penalty (AMI vs NMI on singletons)",
       [] { criterion_overclustering(); }},
      {4, "NPMI range, symmetry and boundary cases", [] { criterion_npmi(); }},
      {5, "spectral embedding matches dense eigendecomposition",
       [] { criterion_spectral_oracle(); }},
      {6, "LSH nearest-neighbor quality at k13h71b10", [] { criterion_lsh_quality(); }},
      {7, "HDP recovery on the 5-story corpus", [] { criterion_hdp_recovery(); }},
      {8, "directional precision/recall pattern and propagation gains",
       [&] {
         if (!directional_ready) {
           directional = run_directional(work);
           directional_ready = true;
         }
         criterion_directional(directional);
       }},
      {9, "thread baseline precision and recall bounds",
       [&] {
         if (!directional_ready) {
           directional = run_directional(work);
           directional_ready = true;
         }
         criterion_thread_baseline(directional, work);
       }},
      {10, "byte-identical artifacts under fixed seeds",
       [&] { criterion_determinism(work); }},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
      criterion.body();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char timing[32];
    std::snprintf(timing, sizeof(timing), "%.2fs", seconds);
    if (error.empty()) {
      std::cout << "[PASS] criterion " << criterion.id << ": " << criterion.name << " ("
                << timing << ")\n";
    } else {
      ++failures;
      std::cout << "[FAIL] criterion " << criterion.id << ": " << criterion.name << " ("
                << timing << ") - " << error << "\n";
    }
  }

  fs::remove_all(work);
  if (failures > 0) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all 10 acceptance criteria passed\n";
  return 0;
}
