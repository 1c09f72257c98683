#include "substory/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"
#include "substory/porter.hpp"
#include "substory/rng.hpp"
#include "substory/stopwords.hpp"

namespace substory {

using json = nlohmann::json;

TermId Vocabulary::add(const std::string& term) {
  auto it = ids_.find(term);
  if (it != ids_.end()) return it->second;
  const TermId id = static_cast<TermId>(terms_.size());
  ids_.emplace(term, id);
  terms_.push_back(term);
  doc_freq_.push_back(0);
  corpus_freq_.push_back(0);
  return id;
}

std::optional<TermId> Vocabulary::id_of(std::string_view term) const {
  auto it = ids_.find(std::string(term));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Corpus::index_of(std::string_view tweet_id) const {
  auto it = index_.find(std::string(tweet_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Corpus::rebuild_index() {
  index_.clear();
  index_.reserve(tweets.size());
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    index_.emplace(tweets[i].id, i);
  }
}

// ---------------------------------------------------------------------------
// JSON Lines I/O

Corpus load_jsonl(const std::string& path, LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open input file: " + path);

  Corpus corpus;
  std::unordered_map<std::string, std::size_t> first_line_of_id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed JSON line: " + e.what());
    }
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("text") ||
        !obj["id"].is_string() || !obj["text"].is_string()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": line must be an object with string `id` and `text`");
    }
    Tweet tweet;
    tweet.id = obj["id"].get<std::string>();
    tweet.text = obj["text"].get<std::string>();
    if (tweet.id.empty()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": empty tweet id");
    }
    auto [it, inserted] = first_line_of_id.emplace(tweet.id, line_no);
    if (!inserted) {
      throw std::runtime_error(path + ": duplicate tweet id `" + tweet.id + "` on lines " +
                               std::to_string(it->second) + " and " + std::to_string(line_no));
    }
    if (obj.contains("timestamp") && !obj["timestamp"].is_null()) {
      if (!obj["timestamp"].is_number_integer()) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": `timestamp` must be an integer");
      }
      tweet.timestamp = obj["timestamp"].get<std::int64_t>();
    } else {
      tweet.timestamp = static_cast<std::int64_t>(corpus.tweets.size());
    }
    if (obj.contains("reply_to") && !obj["reply_to"].is_null()) {
      if (!obj["reply_to"].is_string()) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": `reply_to` must be a string");
      }
      tweet.reply_to = obj["reply_to"].get<std::string>();
    }
    if (obj.contains("gold_substory") && !obj["gold_substory"].is_null()) {
      if (!obj["gold_substory"].is_string()) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": `gold_substory` must be a string");
      }
      tweet.gold_substory = obj["gold_substory"].get<std::string>();
    }
    corpus.tweets.push_back(std::move(tweet));
  }
  corpus.rebuild_index();

  if (report) {
    report->n_tweets = corpus.tweets.size();
    report->unresolved_replies.clear();
    for (const Tweet& t : corpus.tweets) {
      if (t.reply_to && !corpus.index_of(*t.reply_to)) {
        report->unresolved_replies.emplace_back(t.id, *t.reply_to);
      }
    }
  }
  return corpus;
}

void write_jsonl(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  for (const Tweet& t : corpus.tweets) {
    json obj;
    obj["id"] = t.id;
    obj["text"] = t.text;
    obj["timestamp"] = t.timestamp;
    if (t.reply_to) obj["reply_to"] = *t.reply_to;
    if (t.gold_substory) obj["gold_substory"] = *t.gold_substory;
    out << obj.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Tokenization

namespace {

// Decodes UTF-8; invalid bytes pass through as single code points.
std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    char32_t cp = c;
    std::size_t len = 1;
    if (c >= 0xF0) {
      len = 4;
      cp = c & 0x07u;
    } else if (c >= 0xE0) {
      len = 3;
      cp = c & 0x0Fu;
    } else if (c >= 0xC0) {
      len = 2;
      cp = c & 0x1Fu;
    }
    if (len > 1) {
      if (i + len > s.size()) {
        out.push_back(c);
        ++i;
        continue;
      }
      bool ok = true;
      char32_t acc = cp;
      for (std::size_t k = 1; k < len; ++k) {
        const unsigned char cc = static_cast<unsigned char>(s[i + k]);
        if ((cc & 0xC0u) != 0x80u) {
          ok = false;
          break;
        }
        acc = (acc << 6) | (cc & 0x3Fu);
      }
      if (!ok) {
        out.push_back(c);
        ++i;
        continue;
      }
      out.push_back(acc);
      i += len;
    } else {
      out.push_back(cp);
      ++i;
    }
  }
  return out;
}

bool is_unicode_space(char32_t cp) {
  switch (cp) {
    case 0x09:
    case 0x0A:
    case 0x0B:
    case 0x0C:
    case 0x0D:
    case 0x20:
    case 0x85:
    case 0xA0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

char32_t lower(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 32;
  // Latin-1 capitals, skipping the multiplication sign
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  return cp;
}

bool is_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

// Non-ASCII non-space code points count as letters; emoji and accented
// characters thus survive stripping and the alphabetic-majority test.
bool is_alpha(char32_t cp) {
  if (cp >= U'a' && cp <= U'z') return true;
  return cp >= 0x80 && !is_unicode_space(cp);
}

std::string encode_utf8(const std::vector<char32_t>& cps, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to; ++i) {
    const char32_t cp = cps[i];
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

bool contains_url_marker(const std::string& token) {
  return token.find("://") != std::string::npos || token.rfind("www.", 0) == 0;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const PreprocessOptions& options) {
  const std::vector<std::string>& stop_source =
      options.stopword_list.empty() ? default_stopwords() : options.stopword_list;
  std::unordered_set<std::string_view> stopwords(stop_source.begin(), stop_source.end());

  std::vector<char32_t> cps = decode_utf8(text);
  for (char32_t& cp : cps) cp = lower(cp);

  std::vector<std::string> out;
  std::size_t i = 0;
  const std::size_t n = cps.size();
  while (i < n) {
    while (i < n && is_unicode_space(cps[i])) ++i;
    std::size_t begin = i;
    while (i < n && !is_unicode_space(cps[i])) ++i;
    if (begin == i) continue;
    std::size_t end = i;

    // strip surrounding punctuation; leading @ and # survive so the
    // mention/hashtag filters can see them
    while (begin < end) {
      const char32_t cp = cps[begin];
      if (is_alpha(cp) || is_digit(cp) || cp == U'@' || cp == U'#') break;
      ++begin;
    }
    while (end > begin) {
      const char32_t cp = cps[end - 1];
      if (is_alpha(cp) || is_digit(cp)) break;
      --end;
    }
    if (begin >= end) continue;
    if (cps[begin] == U'@' || cps[begin] == U'#') continue;

    std::string token = encode_utf8(cps, begin, end);
    if (contains_url_marker(token)) continue;

    const std::size_t len = end - begin;
    if (len < options.min_token_len) continue;
    std::size_t alpha_count = 0;
    for (std::size_t k = begin; k < end; ++k) {
      if (is_alpha(cps[k])) ++alpha_count;
    }
    if (2 * alpha_count <= len) continue;
    if (stopwords.count(token)) continue;

    if (options.stem) {
      // stem to a fixed point (Porter is not idempotent on words like
      // "agreed" -> "agre" -> "agr") and re-apply the length and stopword
      // filters, so preprocessing is idempotent on its own output
      std::string previous;
      do {
        previous = token;
        token = porter_stem(token);
      } while (token != previous);
      std::size_t stem_len = 0;
      for (unsigned char c : token) {
        if ((c & 0xC0u) != 0x80u) ++stem_len;
      }
      if (stem_len < options.min_token_len) continue;
      if (stopwords.count(std::string_view(token))) continue;
    }
    out.push_back(std::move(token));
  }
  return out;
}

Corpus preprocess(const Corpus& corpus, const PreprocessOptions& options) {
  Corpus out;
  out.tweets = corpus.tweets;
  out.processed.clear();
  out.processed.reserve(out.tweets.size());
  for (const Tweet& tweet : out.tweets) {
    ProcessedTweet pt;
    pt.tweet_id = tweet.id;
    for (const std::string& tok : tokenize(tweet.text, options)) {
      const TermId id = out.vocabulary.add(tok);
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

// ---------------------------------------------------------------------------
// tf-idf

double TfIdfVector::norm() const {
  double s = 0.0;
  for (const auto& [term, w] : entries) s += w * w;
  return std::sqrt(s);
}

double TfIdfVector::dot(const TfIdfVector& other) const {
  double s = 0.0;
  auto a = entries.begin();
  auto b = other.entries.begin();
  while (a != entries.end() && b != other.entries.end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      s += a->second * b->second;
      ++a;
      ++b;
    }
  }
  return s;
}

std::unordered_map<std::string, TfIdfVector> tfidf(const Corpus& corpus) {
  if (!corpus.is_processed()) throw std::runtime_error("tfidf: corpus is not processed");
  const double n_docs = static_cast<double>(corpus.tweets.size());
  std::unordered_map<std::string, TfIdfVector> out;
  out.reserve(corpus.processed.size());
  for (const ProcessedTweet& pt : corpus.processed) {
    TfIdfVector vec;
    for (const auto& [term, count] : pt.term_counts) {
      const double idf = std::log(n_docs / corpus.vocabulary.document_frequency(term));
      const double w = static_cast<double>(count) * idf;
      if (w > 0.0) vec.entries.emplace_back(term, w);
    }
    const double nrm = vec.norm();
    if (nrm > 0.0) {
      for (auto& [term, w] : vec.entries) w /= nrm;
    } else {
      vec.entries.clear();
    }
    out.emplace(pt.tweet_id, std::move(vec));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic corpus

namespace {

// Letter pool chosen so that generated words are Porter fixed points: no
// vowels other than `o` and no suffix-forming consonants.
std::string synth_word(std::size_t idx, std::size_t width) {
  static constexpr char kConsonants[] = "bdgkmnptz";
  std::string w;
  for (std::size_t pos = 0; pos < width; ++pos) {
    const std::size_t digit = idx % 9;
    idx /= 9;
    w.push_back(kConsonants[digit]);
    w.push_back('o');
  }
  w.pop_back();  // end on a consonant
  std::reverse(w.begin(), w.end());
  return w;
}

std::string format_id(std::size_t n) {
  std::ostringstream os;
  os << 't';
  std::string digits = std::to_string(n);
  for (std::size_t i = digits.size(); i < 6; ++i) os << '0';
  os << digits;
  return os.str();
}

}  // namespace

Corpus synth_generate(const SynthSpec& spec) {
  if (spec.n_substories == 0 && spec.tweets_per_story > 0) {
    throw std::invalid_argument("synth_generate: tweets_per_story > 0 requires n_substories > 0");
  }
  if (spec.reply_fraction < 0.0 || spec.reply_fraction > 1.0) {
    throw std::invalid_argument("synth_generate: reply_fraction must lie in [0, 1]");
  }

  constexpr std::size_t kChatterVocab = 12;
  const std::size_t background_vocab =
      spec.background_tweets > 0 ? 20 + spec.background_tweets / 10 : 0;
  const std::size_t total_words = spec.n_substories * spec.vocab_per_story +
                                  spec.shared_vocab_size + kChatterVocab + background_vocab;
  std::size_t width = 3;
  std::size_t capacity = 9 * 9 * 9;
  while (capacity < total_words) {
    capacity *= 9;
    ++width;
  }

  std::size_t next_word = 0;
  auto take_words = [&](std::size_t count) {
    std::vector<std::string> words;
    words.reserve(count);
    for (std::size_t i = 0; i < count; ++i) words.push_back(synth_word(next_word++, width));
    return words;
  };

  std::vector<std::vector<std::string>> story_vocab;
  for (std::size_t s = 0; s < spec.n_substories; ++s) {
    story_vocab.push_back(take_words(spec.vocab_per_story));
  }
  const std::vector<std::string> shared_vocab = take_words(spec.shared_vocab_size);
  const std::vector<std::string> chatter_vocab = take_words(kChatterVocab);
  const std::vector<std::string> bg_vocab = take_words(background_vocab);

  Rng rng(spec.seed);

  // slot list: story index per sub-story tweet, -1 for background; shuffled
  // so sub-stories overlap in time
  std::vector<int> slots;
  slots.reserve(spec.n_substories * spec.tweets_per_story + spec.background_tweets);
  for (std::size_t s = 0; s < spec.n_substories; ++s) {
    for (std::size_t i = 0; i < spec.tweets_per_story; ++i) slots.push_back(static_cast<int>(s));
  }
  for (std::size_t i = 0; i < spec.background_tweets; ++i) slots.push_back(-1);
  rng.shuffle(slots);

  auto pick = [&](const std::vector<std::string>& pool) -> const std::string& {
    return pool[rng.uniform_index(pool.size())];
  };

  Corpus corpus;
  corpus.tweets.reserve(slots.size());
  std::vector<std::vector<std::size_t>> sources_of_story(spec.n_substories);

  for (std::size_t pos = 0; pos < slots.size(); ++pos) {
    Tweet tweet;
    tweet.id = format_id(pos);
    tweet.timestamp = static_cast<std::int64_t>(pos) * 60;
    const int story = slots[pos];
    const std::size_t n_tokens = 8 + rng.uniform_index(5);
    std::vector<std::string> tokens;
    tokens.reserve(n_tokens);

    if (story < 0) {
      for (std::size_t i = 0; i < n_tokens; ++i) {
        if (!shared_vocab.empty() && rng.uniform() < 0.2) {
          tokens.push_back(pick(shared_vocab));
        } else {
          tokens.push_back(pick(bg_vocab));
        }
      }
    } else {
      const auto s = static_cast<std::size_t>(story);
      tweet.gold_substory = "story-" + std::to_string(s);
      const bool is_reply =
          !sources_of_story[s].empty() && rng.uniform() < spec.reply_fraction;
      if (is_reply) {
        const std::size_t parent =
            sources_of_story[s][rng.uniform_index(sources_of_story[s].size())];
        tweet.reply_to = corpus.tweets[parent].id;
        // replies are mostly off-topic chatter, mirroring real threads
        for (std::size_t i = 0; i < n_tokens; ++i) {
          if (rng.uniform() < 0.75) {
            tokens.push_back(pick(chatter_vocab));
          } else {
            tokens.push_back(pick(story_vocab[s]));
          }
        }
      } else {
        sources_of_story[s].push_back(pos);
        for (std::size_t i = 0; i < n_tokens; ++i) {
          if (!shared_vocab.empty() && rng.uniform() < 0.3) {
            tokens.push_back(pick(shared_vocab));
          } else {
            tokens.push_back(pick(story_vocab[s]));
          }
        }
      }
    }

    std::string text;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i) text.push_back(' ');
      text += tokens[i];
    }
    tweet.text = std::move(text);
    corpus.tweets.push_back(std::move(tweet));
  }

  corpus.rebuild_index();
  return corpus;
}

}  // namespace substory
