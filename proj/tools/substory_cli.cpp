// Command-line front end: synthetic corpus generation, single pipeline runs,
// and multi-method comparisons over one corpus.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "substory/pipeline.hpp"
#include "substory/stopwords.hpp"

namespace {

using substory::pipeline::Method;
using substory::pipeline::RunConfig;

void apply_stopword_overrides(RunConfig& config, const std::string& stopword_path) {
  config.preprocess_options.stopword_list = substory::resolve_stopwords(stopword_path);
}

// "hdp" or "hdp:k=300,sweeps=200" or "lsh:preset=k12h56b10,cosine-threshold=0.4"
RunConfig parse_run_spec(const std::string& spec, const RunConfig& base) {
  RunConfig config = base;
  const std::size_t colon = spec.find(':');
  config.method = substory::pipeline::method_from_string(spec.substr(0, colon));
  if (colon == std::string::npos) return config;

  std::stringstream rest(spec.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("run spec entry `" + item + "` is not key=value");
    }
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    auto as_int = [&] { return std::stoi(value); };
    auto as_double = [&] { return std::stod(value); };
    if (key == "k") {
      config.hdp_config.max_topics = as_int();
      config.sc_config.k = as_int();
    } else if (key == "sweeps") {
      config.hdp_config.sweeps = as_int();
    } else if (key == "burn-in") {
      config.hdp_config.burn_in = as_int();
    } else if (key == "eta") {
      config.hdp_config.eta = as_double();
    } else if (key == "chains") {
      config.hdp_config.chains = as_int();
    } else if (key == "npmi-threshold") {
      config.sc_config.npmi_threshold = as_double();
    } else if (key == "min-word-freq") {
      config.sc_config.min_word_freq = static_cast<std::uint32_t>(as_int());
    } else if (key == "preset") {
      const double threshold = config.lsh_config.cosine_threshold;
      config.lsh_config = substory::lsh::LshConfig::preset(value);
      config.lsh_config.cosine_threshold = threshold;
    } else if (key == "k-bits") {
      config.lsh_config.k_bits = as_int();
    } else if (key == "tables") {
      config.lsh_config.n_tables = as_int();
    } else if (key == "bucket-size") {
      config.lsh_config.bucket_size = as_int();
    } else if (key == "cosine-threshold") {
      config.lsh_config.cosine_threshold = as_double();
    } else if (key == "label") {
      config.label = value;
    } else {
      throw std::invalid_argument("unknown run spec key: " + key);
    }
  }
  return config;
}

void print_metrics(const substory::pipeline::RunResult& result) {
  std::cout << "clusters: " << result.clustering.n_clusters() << "\n";
  if (result.metrics) {
    const auto& m = *result.metrics;
    std::cout << "P_micro=" << m.p_micro << " R_micro=" << m.r_micro << " F_micro=" << m.f_micro
              << " AMI=" << m.ami << " NMI=" << m.nmi << "\n";
  } else {
    std::cout << "no gold labels in input; metrics skipped\n";
  }
  std::cout << "total_seconds=" << result.total_seconds << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sub-story detection over short-text streams"};
  app.require_subcommand(1);

  // --- synth ----------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "generate a synthetic labeled corpus");
  substory::SynthSpec synth_spec;
  std::string synth_out;
  synth->add_option("--out", synth_out, "output JSONL path")->required();
  synth->add_option("--n-substories", synth_spec.n_substories, "number of sub-stories");
  synth->add_option("--tweets-per-story", synth_spec.tweets_per_story, "tweets per sub-story");
  synth->add_option("--vocab-per-story", synth_spec.vocab_per_story, "story vocabulary size");
  synth->add_option("--shared-vocab", synth_spec.shared_vocab_size, "shared vocabulary size");
  synth->add_option("--background", synth_spec.background_tweets, "background tweet count");
  synth->add_option("--reply-fraction", synth_spec.reply_fraction,
                    "fraction of story tweets that reply to an earlier source");
  synth->add_option("--seed", synth_spec.seed, "generator seed");

  // --- shared run options ----------------------------------------------
  RunConfig base;
  std::string method_name = "hdp";
  std::string mode_name = "all-tweets";
  std::string preset;
  std::string stopword_path;
  bool no_stem = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--input", base.input_path, "input JSONL corpus")->required();
    cmd->add_option("--mode", mode_name,
                    "all-tweets | source-only | source-then-propagate");
    cmd->add_option("--seed", base.seed, "random seed");
    cmd->add_option("--partition-size", base.partition_size,
                    "run per contiguous-time partition of this many tweets");
    cmd->add_option("--bucket-seconds", base.bucket_seconds,
                    "temporal profile bucket width in seconds");
    cmd->add_option("--stopwords", stopword_path,
                    "stopword file (one word per line); also SUBSTORY_STOPWORDS");
    cmd->add_option("--min-token-len", base.preprocess_options.min_token_len,
                    "minimum token length");
    cmd->add_flag("--no-stem", no_stem, "disable Porter stemming");
  };

  // --- run --------------------------------------------------------------
  auto* run_cmd = app.add_subcommand("run", "run one detection method end to end");
  add_common(run_cmd);
  run_cmd->add_option("--method", method_name, "hdp | sc | lsh | thread-baseline")->required();
  run_cmd->add_option("--out", base.out_dir, "artifact output directory")->required();
  run_cmd->add_option("--k", base.hdp_config.max_topics,
                      "topic cap (hdp) / cluster count (sc)");
  run_cmd->add_option("--sweeps", base.hdp_config.sweeps, "Gibbs sweeps");
  run_cmd->add_option("--burn-in", base.hdp_config.burn_in, "burn-in sweeps");
  run_cmd->add_option("--eta", base.hdp_config.eta, "topic-word smoothing");
  run_cmd->add_option("--chains", base.hdp_config.chains, "independent Gibbs chains");
  run_cmd->add_option("--npmi-threshold", base.sc_config.npmi_threshold, "NPMI edge threshold");
  run_cmd->add_option("--min-word-freq", base.sc_config.min_word_freq,
                      "word document-frequency threshold");
  run_cmd->add_option("--k-bits", base.lsh_config.k_bits, "LSH bits per table");
  run_cmd->add_option("--tables", base.lsh_config.n_tables, "LSH hash tables");
  run_cmd->add_option("--bucket-size", base.lsh_config.bucket_size, "LSH bucket size");
  run_cmd->add_option("--cosine-threshold", base.lsh_config.cosine_threshold,
                      "LSH clustering threshold");
  run_cmd->add_option("--preset", preset, "LSH preset: k12h56b10 | k13h71b10");

  // --- compare ------------------------------------------------------------
  auto* compare_cmd =
      app.add_subcommand("compare", "run several methods on one corpus and tabulate");
  add_common(compare_cmd);
  std::vector<std::string> run_specs;
  compare_cmd->add_option("--out", base.out_dir, "comparison output directory")->required();
  compare_cmd
      ->add_option("--run", run_specs,
                   "method spec, e.g. hdp:k=50,sweeps=200 or lsh:preset=k12h56b10 (repeatable)")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      const substory::Corpus corpus = substory::synth_generate(synth_spec);
      substory::write_jsonl(corpus, synth_out);
      std::cout << "wrote " << corpus.tweets.size() << " tweets to " << synth_out << "\n";
      return 0;
    }

    base.mode = substory::pipeline::mode_from_string(mode_name);
    base.preprocess_options.stem = !no_stem;
    apply_stopword_overrides(base, stopword_path);
    // the hdp and sc configs share the pipeline seed unless set per run spec
    base.hdp_config.seed = base.seed;
    base.sc_config.seed = base.seed;
    base.lsh_config.seed = base.seed;

    if (*run_cmd) {
      base.method = substory::pipeline::method_from_string(method_name);
      base.sc_config.k = base.hdp_config.max_topics;
      if (!preset.empty()) {
        const double threshold = base.lsh_config.cosine_threshold;
        base.lsh_config = substory::lsh::LshConfig::preset(preset);
        base.lsh_config.cosine_threshold = threshold;
      }
      const auto result = substory::pipeline::run(base);
      print_metrics(result);
      std::cout << "artifacts in " << base.out_dir << "\n";
      return 0;
    }

    if (*compare_cmd) {
      const std::string out_dir = base.out_dir;
      std::vector<RunConfig> configs;
      for (const std::string& spec : run_specs) {
        RunConfig config = parse_run_spec(spec, base);
        config.out_dir.clear();  // per-run directories live under out_dir
        configs.push_back(std::move(config));
      }
      const auto comparison = substory::pipeline::compare(configs, out_dir);
      std::cout << "label\tP\tR\tF\tAMI\tclusters\tseconds\tbest\n";
      for (const auto& row : comparison.rows) {
        std::string best;
        for (std::size_t i = 0; i < row.best.size(); ++i) {
          if (i) best += ';';
          best += row.best[i];
        }
        std::cout << row.label << '\t' << row.p_micro << '\t' << row.r_micro << '\t'
                  << row.f_micro << '\t' << row.ami << '\t' << row.n_clusters << '\t'
                  << row.runtime_seconds << '\t' << best << "\n";
      }
      std::cout << "comparison artifacts in " << out_dir << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
