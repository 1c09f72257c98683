#include "substory/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "substory/threads.hpp"

namespace substory::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string to_string(Method method) {
  switch (method) {
    case Method::hdp:
      return "hdp";
    case Method::sc:
      return "sc";
    case Method::lsh:
      return "lsh";
    case Method::thread_baseline:
      return "thread-baseline";
  }
  return "?";
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::all_tweets:
      return "all-tweets";
    case Mode::source_only:
      return "source-only";
    case Mode::source_then_propagate:
      return "source-then-propagate";
  }
  return "?";
}

Method method_from_string(const std::string& name) {
  if (name == "hdp") return Method::hdp;
  if (name == "sc") return Method::sc;
  if (name == "lsh") return Method::lsh;
  if (name == "thread-baseline") return Method::thread_baseline;
  throw std::invalid_argument("unknown method: " + name +
                              " (expected hdp|sc|lsh|thread-baseline)");
}

Mode mode_from_string(const std::string& name) {
  if (name == "all-tweets") return Mode::all_tweets;
  if (name == "source-only") return Mode::source_only;
  if (name == "source-then-propagate") return Mode::source_then_propagate;
  throw std::invalid_argument(
      "unknown mode: " + name +
      " (expected all-tweets|source-only|source-then-propagate)");
}

std::string RunConfig::params_string() const {
  std::ostringstream os;
  switch (method) {
    case Method::hdp:
      os << "k" << hdp_config.max_topics << " sweeps" << hdp_config.sweeps << " burnin"
         << hdp_config.burn_in << " eta" << hdp_config.eta;
      break;
    case Method::sc:
      os << "k" << sc_config.k << " npmi" << sc_config.npmi_threshold << " minfreq"
         << sc_config.min_word_freq;
      break;
    case Method::lsh:
      os << "k" << lsh_config.k_bits << "h" << lsh_config.n_tables << "b"
         << lsh_config.bucket_size << " cos" << lsh_config.cosine_threshold;
      break;
    case Method::thread_baseline:
      os << "threads";
      break;
  }
  return os.str();
}

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// subset carrying raw tweets and re-mapped token streams on a fresh vocabulary
Corpus subset_corpus(const Corpus& corpus, const std::vector<std::size_t>& indices) {
  Corpus out;
  for (const std::size_t i : indices) {
    out.tweets.push_back(corpus.tweets[i]);
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
  out.rebuild_index();
  return out;
}

struct MethodOutput {
  Clustering clustering;
  json topics;  // null unless the method reports topics
};

MethodOutput run_method_once(const Corpus& corpus, const RunConfig& config,
                             std::uint64_t seed) {
  MethodOutput out;
  switch (config.method) {
    case Method::hdp: {
      hdp::HdpConfig hc = config.hdp_config;
      hc.seed = seed;
      const hdp::TopicModel model = hdp::fit(corpus, hc);
      out.clustering = hdp::cluster_corpus(corpus, model);
      out.topics["model"] = json::parse(hdp::model_to_json(model, corpus.vocabulary));
      // top-words view with terms common to at least half the topics split out
      const hdp::TopicReport report = hdp::report_topics(model, corpus.vocabulary, 10);
      json entries = json::array();
      for (const auto& entry : report.topics) {
        entries.push_back({{"topic_id", entry.topic_id}, {"terms", entry.terms}});
      }
      out.topics["report"] = {{"shared", report.shared}, {"topics", std::move(entries)}};
      break;
    }
    case Method::sc: {
      spectral::SpectralConfig sc = config.sc_config;
      sc.seed = seed;
      const spectral::WordClusters wc = spectral::cluster_words(corpus, sc);
      out.clustering = spectral::assign_tweets(corpus, wc);
      out.topics = json::parse(spectral::word_clusters_to_json(wc, corpus.vocabulary, sc));
      break;
    }
    case Method::lsh: {
      lsh::LshConfig lc = config.lsh_config;
      lc.seed = seed;
      const auto vectors = tfidf(corpus);
      out.clustering = lsh::cluster_stream(corpus, vectors, lc);
      break;
    }
    case Method::thread_baseline: {
      const threads::ThreadIndex index = threads::build_thread_index(corpus);
      out.clustering = threads::thread_baseline(corpus, index);
      break;
    }
  }
  return out;
}

MethodOutput run_method(const Corpus& corpus, const RunConfig& config) {
  if (config.partition_size == 0 || corpus.tweets.size() <= config.partition_size) {
    return run_method_once(corpus, config, config.seed);
  }

  // contiguous-time partitions, cluster ids namespaced per partition
  std::vector<std::size_t> order(corpus.tweets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Tweet& ta = corpus.tweets[a];
    const Tweet& tb = corpus.tweets[b];
    return ta.timestamp != tb.timestamp ? ta.timestamp < tb.timestamp : ta.id < tb.id;
  });

  MethodOutput out;
  out.topics = json::array();
  int offset = 0;
  std::size_t begin = 0;
  std::uint64_t partition_index = 0;
  while (begin < order.size()) {
    const std::size_t end = std::min(begin + config.partition_size, order.size());
    const std::vector<std::size_t> chunk(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                         order.begin() + static_cast<std::ptrdiff_t>(end));
    const Corpus part = subset_corpus(corpus, chunk);
    MethodOutput local = run_method_once(part, config, config.seed + partition_index);
    int max_local = -1;
    for (const auto& [tweet, cluster] : local.clustering.assignment) {
      if (cluster == kOutlierCluster) {
        out.clustering.assignment.emplace(tweet, kOutlierCluster);
      } else {
        out.clustering.assignment.emplace(tweet, cluster + offset);
        max_local = std::max(max_local, cluster);
      }
    }
    offset += max_local + 1;
    if (!local.topics.is_null()) {
      json entry;
      entry["partition"] = partition_index;
      entry["topics"] = std::move(local.topics);
      out.topics.push_back(std::move(entry));
    }
    begin = end;
    ++partition_index;
  }
  return out;
}

void write_assignments(const Clustering& clustering, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "tweet_id,cluster_id\n";
  for (const std::string& id : clustering.sorted_tweet_ids()) {
    out << id << ',' << clustering.at(id) << '\n';
  }
}

void write_temporal_profile(const Corpus& corpus, const Clustering& clustering,
                            std::int64_t bucket_seconds, const std::string& path) {
  std::map<std::pair<int, std::int64_t>, std::int64_t> counts;
  for (const Tweet& tweet : corpus.tweets) {
    auto it = clustering.assignment.find(tweet.id);
    if (it == clustering.assignment.end()) continue;
    std::int64_t bucket = tweet.timestamp / bucket_seconds;
    if (tweet.timestamp < 0 && tweet.timestamp % bucket_seconds != 0) --bucket;
    ++counts[{it->second, bucket}];
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "cluster_id,bucket,count\n";
  for (const auto& [key, count] : counts) {
    out << key.first << ',' << key.second << ',' << count << '\n';
  }
}

json params_json(const RunConfig& config) {
  json params;
  switch (config.method) {
    case Method::hdp:
      params = {{"max_topics", config.hdp_config.max_topics},
                {"sweeps", config.hdp_config.sweeps},
                {"burn_in", config.hdp_config.burn_in},
                {"eta", config.hdp_config.eta},
                {"alpha_init", config.hdp_config.alpha_init},
                {"gamma_init", config.hdp_config.gamma_init},
                {"resample_concentrations", config.hdp_config.resample_concentrations},
                {"chains", config.hdp_config.chains}};
      break;
    case Method::sc:
      params = {{"k", config.sc_config.k},
                {"npmi_threshold", config.sc_config.npmi_threshold},
                {"min_word_freq", config.sc_config.min_word_freq},
                {"embedding_dim",
                 config.sc_config.embedding_dim > 0 ? config.sc_config.embedding_dim
                                                    : config.sc_config.k},
                {"kmeans_iters", config.sc_config.kmeans_iters},
                {"kmeans_restarts", config.sc_config.kmeans_restarts}};
      break;
    case Method::lsh:
      params = {{"k_bits", config.lsh_config.k_bits},
                {"n_tables", config.lsh_config.n_tables},
                {"bucket_size", config.lsh_config.bucket_size},
                {"cosine_threshold", config.lsh_config.cosine_threshold}};
      break;
    case Method::thread_baseline:
      params = json::object();
      break;
  }
  return params;
}

}  // namespace

RunResult run(const RunConfig& config) {
  const auto run_start = Clock::now();
  RunResult result;
  std::vector<std::string> written;

  try {
    if (!config.out_dir.empty()) fs::create_directories(config.out_dir);

    auto stage_start = Clock::now();
    Corpus raw = load_jsonl(config.input_path);
    result.stage_seconds["load"] = seconds_since(stage_start);

    stage_start = Clock::now();
    Corpus full = preprocess(raw, config.preprocess_options);
    result.stage_seconds["preprocess"] = seconds_since(stage_start);

    stage_start = Clock::now();
    const threads::ThreadIndex index = threads::build_thread_index(full);
    bool has_replies = false;
    for (const auto& [tweet, root] : index.root_of) {
      if (tweet != root) {
        has_replies = true;
        break;
      }
    }

    Mode mode = config.mode;
    if (mode == Mode::source_then_propagate && !has_replies) {
      result.warnings.push_back(
          "input has no resolvable reply structure; running in all-tweets mode");
      std::cerr << "warning: " << result.warnings.back() << '\n';
      mode = Mode::all_tweets;
    }

    const Corpus* target = &full;
    Corpus sources;
    if (mode != Mode::all_tweets) {
      sources = threads::source_only(full, index);
      target = &sources;
    }

    MethodOutput method_output = run_method(*target, config);
    if (mode == Mode::source_then_propagate) {
      method_output.clustering = threads::propagate_to_replies(method_output.clustering, index);
    }
    result.clustering = std::move(method_output.clustering);
    result.stage_seconds["cluster"] = seconds_since(stage_start);

    stage_start = Clock::now();
    const Corpus& evaluated =
        (mode == Mode::source_only) ? sources : full;
    const Clustering gold = gold_clustering(evaluated);
    if (!gold.assignment.empty()) {
      MetricsReport metrics;
      metrics.alignment = eval::align_max_overlap(gold, result.clustering);
      const eval::Prf prf = eval::micro_prf(metrics.alignment);
      metrics.p_micro = prf.precision;
      metrics.r_micro = prf.recall;
      metrics.f_micro = prf.f1;
      const Clustering predicted_labeled = restrict_to(result.clustering, gold);
      metrics.ami = eval::ami(gold, predicted_labeled);
      metrics.nmi = eval::nmi(gold, predicted_labeled);
      metrics.mi = eval::mutual_information(eval::contingency(gold, predicted_labeled));
      metrics.n_clusters = result.clustering.n_clusters();
      result.metrics = std::move(metrics);
    }
    result.stage_seconds["evaluate"] = seconds_since(stage_start);

    stage_start = Clock::now();
    if (!config.out_dir.empty()) {
      const fs::path dir(config.out_dir);

      const std::string assignments_path = (dir / "assignments.csv").string();
      write_assignments(result.clustering, assignments_path);
      written.push_back(assignments_path);

      const std::string temporal_path = (dir / "temporal.csv").string();
      write_temporal_profile(evaluated, result.clustering, config.bucket_seconds, temporal_path);
      written.push_back(temporal_path);

      if (!method_output.topics.is_null()) {
        const std::string topics_path = (dir / "topics.json").string();
        std::ofstream out(topics_path);
        if (!out) throw std::runtime_error("cannot write " + topics_path);
        out << method_output.topics.dump(2) << '\n';
        written.push_back(topics_path);
      }

      if (result.metrics) {
        const MetricsReport& m = *result.metrics;
        json doc;
        doc["method"] = to_string(config.method);
        doc["mode"] = to_string(mode);
        doc["params"] = params_json(config);
        doc["seed"] = config.seed;
        doc["p_micro"] = m.p_micro;
        doc["r_micro"] = m.r_micro;
        doc["f_micro"] = m.f_micro;
        doc["ami"] = m.ami;
        doc["nmi"] = m.nmi;
        doc["mi"] = m.mi;
        doc["n_clusters"] = m.n_clusters;
        doc["background_excluded"] = true;
        doc["per_story"] = json::array();
        for (const eval::StoryAlignment& s : m.alignment.stories) {
          const eval::Prf prf = eval::per_story_prf(m.alignment, s.story_id);
          doc["per_story"].push_back({{"label", s.label},
                                      {"aligned_cluster", s.aligned_cluster},
                                      {"tp", s.tp},
                                      {"fp", s.fp},
                                      {"fn", s.fn},
                                      {"precision", prf.precision},
                                      {"recall", prf.recall},
                                      {"f1", prf.f1}});
        }
        if (!result.warnings.empty()) doc["warnings"] = result.warnings;
        const std::string metrics_path = (dir / "metrics.json").string();
        std::ofstream out(metrics_path);
        if (!out) throw std::runtime_error("cannot write " + metrics_path);
        out << doc.dump(2) << '\n';
        written.push_back(metrics_path);
      }
    }
    result.stage_seconds["write"] = seconds_since(stage_start);
    result.total_seconds = seconds_since(run_start);

    if (!config.out_dir.empty()) {
      json timing;
      timing["stages"] = result.stage_seconds;
      timing["total_seconds"] = result.total_seconds;
      if (!result.warnings.empty()) timing["warnings"] = result.warnings;
      const std::string timing_path = (fs::path(config.out_dir) / "timing.json").string();
      std::ofstream out(timing_path);
      if (!out) throw std::runtime_error("cannot write " + timing_path);
      out << timing.dump(2) << '\n';
      written.push_back(timing_path);
    }
    result.artifacts = written;
    return result;
  } catch (...) {
    for (const std::string& path : written) {
      std::error_code ec;
      fs::remove(path, ec);
    }
    throw;
  }
}

Comparison compare(const std::vector<RunConfig>& configs, const std::string& out_dir) {
  if (configs.size() < 2) {
    throw std::invalid_argument("compare: need at least two run configurations");
  }
  for (const RunConfig& c : configs) {
    if (c.input_path != configs.front().input_path) {
      throw std::invalid_argument("compare: all runs must share one input corpus");
    }
    if (c.mode != configs.front().mode) {
      throw std::invalid_argument("compare: mixed modes are not comparable");
    }
  }
  fs::create_directories(out_dir);

  Comparison comparison;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    RunConfig config = configs[i];
    if (config.label.empty()) {
      config.label = to_string(config.method) + " (" + config.params_string() + ")";
    }
    if (config.out_dir.empty()) {
      config.out_dir =
          (fs::path(out_dir) / ("run_" + std::to_string(i) + "_" + to_string(config.method)))
              .string();
    }
    const RunResult result = run(config);

    ComparisonRow row;
    row.label = config.label;
    row.method = to_string(config.method);
    row.params = config.params_string();
    row.runtime_seconds = result.total_seconds;
    row.n_clusters = result.clustering.n_clusters();
    if (result.metrics) {
      row.p_micro = result.metrics->p_micro;
      row.r_micro = result.metrics->r_micro;
      row.f_micro = result.metrics->f_micro;
      row.ami = result.metrics->ami;
    } else {
      row.p_micro = row.r_micro = row.f_micro = row.ami =
          std::numeric_limits<double>::quiet_NaN();
    }
    comparison.rows.push_back(std::move(row));
  }

  // flag the best value per metric column
  const std::vector<std::pair<std::string, double ComparisonRow::*>> columns = {
      {"p_micro", &ComparisonRow::p_micro},
      {"r_micro", &ComparisonRow::r_micro},
      {"f_micro", &ComparisonRow::f_micro},
      {"ami", &ComparisonRow::ami},
  };
  for (const auto& [name, member] : columns) {
    double best = -std::numeric_limits<double>::infinity();
    for (const ComparisonRow& row : comparison.rows) {
      const double v = row.*member;
      if (!std::isnan(v)) best = std::max(best, v);
    }
    if (!std::isfinite(best)) continue;
    for (ComparisonRow& row : comparison.rows) {
      if (!std::isnan(row.*member) && row.*member == best) row.best.push_back(name);
    }
  }

  json doc;
  doc["input"] = configs.front().input_path;
  doc["mode"] = to_string(configs.front().mode);
  doc["rows"] = json::array();
  for (const ComparisonRow& row : comparison.rows) {
    doc["rows"].push_back({{"label", row.label},
                           {"method", row.method},
                           {"params", row.params},
                           {"p_micro", row.p_micro},
                           {"r_micro", row.r_micro},
                           {"f_micro", row.f_micro},
                           {"ami", row.ami},
                           {"n_clusters", row.n_clusters},
                           {"runtime_seconds", row.runtime_seconds},
                           {"best", row.best}});
  }
  {
    const std::string path = (fs::path(out_dir) / "comparison.json").string();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << doc.dump(2) << '\n';
  }
  {
    const std::string path = (fs::path(out_dir) / "comparison.csv").string();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "label,method,params,p_micro,r_micro,f_micro,ami,n_clusters,runtime_seconds,best\n";
    for (const ComparisonRow& row : comparison.rows) {
      std::string best_joined;
      for (std::size_t i = 0; i < row.best.size(); ++i) {
        if (i) best_joined += ';';
        best_joined += row.best[i];
      }
      out << '"' << row.label << "\"," << row.method << ",\"" << row.params << "\","
          << row.p_micro << ',' << row.r_micro << ',' << row.f_micro << ',' << row.ami << ','
          << row.n_clusters << ',' << row.runtime_seconds << ",\"" << best_joined << "\"\n";
    }
  }
  return comparison;
}

}  // namespace substory::pipeline
