#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace substory {

using TermId = std::uint32_t;

struct Tweet {
  std::string id;
  std::string text;
  std::int64_t timestamp = 0;
  std::optional<std::string> reply_to;
  std::optional<std::string> gold_substory;
};

// Token-count form of a tweet after preprocessing. term_counts is keyed by
// term id so iteration is deterministic.
struct ProcessedTweet {
  std::string tweet_id;
  std::vector<TermId> tokens;
  std::map<TermId, std::uint32_t> term_counts;

  bool empty() const { return tokens.empty(); }
  std::size_t length() const { return tokens.size(); }
};

class Vocabulary {
 public:
  // get-or-create; new terms receive the next dense id
  TermId add(const std::string& term);
  std::optional<TermId> id_of(std::string_view term) const;
  const std::string& term_of(TermId id) const { return terms_.at(id); }
  std::size_t size() const { return terms_.size(); }

  std::uint32_t document_frequency(TermId id) const { return doc_freq_.at(id); }
  std::uint32_t corpus_frequency(TermId id) const { return corpus_freq_.at(id); }
  void bump_document_frequency(TermId id) { ++doc_freq_.at(id); }
  void bump_corpus_frequency(TermId id, std::uint32_t n) { corpus_freq_.at(id) += n; }

 private:
  std::unordered_map<std::string, TermId> ids_;
  std::vector<std::string> terms_;
  std::vector<std::uint32_t> doc_freq_;
  std::vector<std::uint32_t> corpus_freq_;
};

struct Corpus {
  std::vector<Tweet> tweets;
  std::vector<ProcessedTweet> processed;  // index-aligned with tweets once processed
  Vocabulary vocabulary;

  bool is_processed() const { return !tweets.empty() && processed.size() == tweets.size(); }
  std::optional<std::size_t> index_of(std::string_view tweet_id) const;
  void rebuild_index();

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

struct LoadReport {
  // (tweet id, missing parent id) pairs; the tweets are kept and treated as sources
  std::vector<std::pair<std::string, std::string>> unresolved_replies;
  std::size_t n_tweets = 0;
};

struct PreprocessOptions {
  std::size_t min_token_len = 3;
  std::vector<std::string> stopword_list;  // empty -> default_stopwords()
  bool stem = true;
};

// Sparse L2-normalized tf-idf vector; entries sorted by term id, weights > 0.
struct TfIdfVector {
  std::vector<std::pair<TermId, double>> entries;

  bool empty() const { return entries.empty(); }
  double norm() const;
  double dot(const TfIdfVector& other) const;
};

struct SynthSpec {
  std::size_t n_substories = 5;
  std::size_t tweets_per_story = 100;
  std::size_t vocab_per_story = 20;
  std::size_t shared_vocab_size = 10;
  std::size_t background_tweets = 0;
  double reply_fraction = 0.0;
  std::uint64_t seed = 0;
};

// JSON Lines ingestion: one object per line with required `id`, `text` and
// optional `timestamp`, `reply_to`, `gold_substory`. Malformed lines and
// duplicate ids raise with line numbers. Missing timestamps default to the
// line index.
Corpus load_jsonl(const std::string& path, LoadReport* report = nullptr);
void write_jsonl(const Corpus& corpus, const std::string& path);

// Lowercases, splits on Unicode whitespace, strips surrounding punctuation,
// drops mentions/hashtags/URLs/short/non-alphabetic-majority/stopword tokens,
// then Porter-stems. Returns a processed copy with a fresh vocabulary.
Corpus preprocess(const Corpus& corpus, const PreprocessOptions& options);

// Tokenization of a single text, exposed for tests and tooling.
std::vector<std::string> tokenize(std::string_view text, const PreprocessOptions& options);

// weight(t, d) = tf * ln(n_docs / df), L2-normalized per tweet.
std::unordered_map<std::string, TfIdfVector> tfidf(const Corpus& corpus);

// Deterministic synthetic corpus with planted sub-stories, shared vocabulary,
// optional background chatter and reply structure. Gold labels follow the
// source tweet of each thread.
Corpus synth_generate(const SynthSpec& spec);

}  // namespace substory
