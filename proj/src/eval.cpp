#include "substory/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace substory {

int Clustering::at(const std::string& tweet_id) const {
  auto it = assignment.find(tweet_id);
  if (it == assignment.end()) {
    throw std::out_of_range("clustering has no assignment for tweet `" + tweet_id + "`");
  }
  return it->second;
}

std::vector<int> Clustering::cluster_ids() const {
  std::set<int> ids;
  for (const auto& [tweet, cluster] : assignment) ids.insert(cluster);
  return {ids.begin(), ids.end()};
}

std::vector<std::string> Clustering::sorted_tweet_ids() const {
  std::vector<std::string> ids;
  ids.reserve(assignment.size());
  for (const auto& [tweet, cluster] : assignment) ids.push_back(tweet);
  std::sort(ids.begin(), ids.end());
  return ids;
}

Clustering gold_clustering(const Corpus& corpus) {
  std::set<std::string> labels;
  for (const Tweet& t : corpus.tweets) {
    if (t.gold_substory) labels.insert(*t.gold_substory);
  }
  std::unordered_map<std::string, int> label_id;
  Clustering gold;
  int next = 0;
  for (const std::string& label : labels) {
    label_id.emplace(label, next);
    gold.names.emplace(next, label);
    ++next;
  }
  for (const Tweet& t : corpus.tweets) {
    if (t.gold_substory) gold.assignment.emplace(t.id, label_id.at(*t.gold_substory));
  }
  return gold;
}

Clustering restrict_to(const Clustering& u, const Clustering& reference) {
  Clustering out;
  out.names = u.names;
  for (const auto& [tweet, cluster] : reference.assignment) {
    out.assignment.emplace(tweet, u.at(tweet));
  }
  return out;
}

namespace eval {

AlignmentReport align_max_overlap(const Clustering& gold, const Clustering& predicted) {
  if (gold.assignment.empty()) {
    throw std::invalid_argument("align_max_overlap: gold clustering is empty");
  }
  for (const auto& [tweet, cluster] : gold.assignment) {
    if (!predicted.assignment.count(tweet)) {
      throw std::invalid_argument(
          "align_max_overlap: predicted clustering misses labeled tweet `" + tweet + "`");
    }
  }

  // overlaps and predicted-cluster sizes, both over labeled tweets only
  std::map<int, std::map<int, std::int64_t>> overlap;  // gold -> predicted -> count
  std::map<int, std::int64_t> gold_size;
  std::map<int, std::int64_t> predicted_labeled_size;
  for (const auto& [tweet, g] : gold.assignment) {
    const int p = predicted.at(tweet);
    ++overlap[g][p];
    ++gold_size[g];
    ++predicted_labeled_size[p];
  }

  AlignmentReport report;
  for (const auto& [g, row] : overlap) {
    StoryAlignment sa;
    sa.story_id = g;
    if (auto it = gold.names.find(g); it != gold.names.end()) sa.label = it->second;
    std::int64_t best = -1;
    int best_cluster = 0;
    for (const auto& [p, count] : row) {  // ascending p: ties go to the lower id
      if (count > best) {
        best = count;
        best_cluster = p;
      }
    }
    sa.aligned_cluster = best_cluster;
    sa.tp = best;
    sa.fp = predicted_labeled_size.at(best_cluster) - best;
    sa.fn = gold_size.at(g) - best;
    report.stories.push_back(std::move(sa));
  }
  return report;
}

namespace {

double f_score(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace

Prf micro_prf(const AlignmentReport& report) {
  if (report.stories.empty()) throw std::invalid_argument("micro_prf: empty report");
  std::int64_t tp = 0, fp = 0, fn = 0;
  for (const StoryAlignment& s : report.stories) {
    tp += s.tp;
    fp += s.fp;
    fn += s.fn;
  }
  Prf out;
  out.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  out.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  out.f1 = f_score(out.precision, out.recall);
  return out;
}

Prf per_story_prf(const AlignmentReport& report, int story_id) {
  for (const StoryAlignment& s : report.stories) {
    if (s.story_id != story_id) continue;
    Prf out;
    out.precision =
        s.tp + s.fp > 0 ? static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp) : 0.0;
    out.recall =
        s.tp + s.fn > 0 ? static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fn) : 0.0;
    out.f1 = f_score(out.precision, out.recall);
    return out;
  }
  throw std::invalid_argument("per_story_prf: unknown story id " + std::to_string(story_id));
}

ContingencyTable contingency(const Clustering& u, const Clustering& v) {
  std::size_t missing = 0;
  for (const auto& [tweet, cluster] : u.assignment) {
    if (!v.assignment.count(tweet)) ++missing;
  }
  for (const auto& [tweet, cluster] : v.assignment) {
    if (!u.assignment.count(tweet)) ++missing;
  }
  if (missing > 0) {
    throw std::invalid_argument("contingency: clusterings cover different tweet universes (" +
                                std::to_string(missing) + " tweets in the symmetric difference)");
  }

  ContingencyTable table;
  table.row_ids = u.cluster_ids();
  table.col_ids = v.cluster_ids();
  std::unordered_map<int, std::size_t> row_of, col_of;
  for (std::size_t i = 0; i < table.row_ids.size(); ++i) row_of[table.row_ids[i]] = i;
  for (std::size_t j = 0; j < table.col_ids.size(); ++j) col_of[table.col_ids[j]] = j;
  table.counts.assign(table.row_ids.size(), std::vector<std::int64_t>(table.col_ids.size(), 0));
  table.row_marginals.assign(table.row_ids.size(), 0);
  table.col_marginals.assign(table.col_ids.size(), 0);
  for (const auto& [tweet, uc] : u.assignment) {
    const std::size_t i = row_of.at(uc);
    const std::size_t j = col_of.at(v.at(tweet));
    ++table.counts[i][j];
    ++table.row_marginals[i];
    ++table.col_marginals[j];
    ++table.total;
  }
  return table;
}

double mutual_information(const ContingencyTable& table) {
  if (table.total < 1) throw std::invalid_argument("mutual_information: empty table");
  const double n = static_cast<double>(table.total);
  double mi = 0.0;
  for (std::size_t i = 0; i < table.counts.size(); ++i) {
    const double a = static_cast<double>(table.row_marginals[i]);
    for (std::size_t j = 0; j < table.counts[i].size(); ++j) {
      const std::int64_t nij = table.counts[i][j];
      if (nij == 0) continue;
      const double b = static_cast<double>(table.col_marginals[j]);
      mi += (static_cast<double>(nij) / n) * std::log(n * static_cast<double>(nij) / (a * b));
    }
  }
  return std::max(mi, 0.0);
}

double entropy(const std::vector<std::int64_t>& marginals, std::int64_t n) {
  std::int64_t sum = 0;
  for (const std::int64_t a : marginals) sum += a;
  if (sum != n || n < 1) {
    throw std::invalid_argument("entropy: marginals must sum to n >= 1");
  }
  double h = 0.0;
  for (const std::int64_t a : marginals) {
    if (a == 0) continue;
    const double p = static_cast<double>(a) / static_cast<double>(n);
    h -= p * std::log(p);
  }
  return std::max(h, 0.0);
}

double expected_mi(const ContingencyTable& table) {
  const std::int64_t n = table.total;
  if (n < 1) throw std::invalid_argument("expected_mi: empty table");
  std::vector<double> lf(static_cast<std::size_t>(n) + 1, 0.0);
  for (std::size_t i = 2; i < lf.size(); ++i) {
    lf[i] = lf[i - 1] + std::log(static_cast<double>(i));
  }
  const double dn = static_cast<double>(n);
  double emi = 0.0;
  for (const std::int64_t a : table.row_marginals) {
    for (const std::int64_t b : table.col_marginals) {
      const std::int64_t lo = std::max<std::int64_t>(1, a + b - n);
      const std::int64_t hi = std::min(a, b);
      for (std::int64_t nij = lo; nij <= hi; ++nij) {
        const double term = (static_cast<double>(nij) / dn) *
                            std::log(dn * static_cast<double>(nij) /
                                     (static_cast<double>(a) * static_cast<double>(b)));
        const double log_p = lf[static_cast<std::size_t>(a)] +
                             lf[static_cast<std::size_t>(b)] +
                             lf[static_cast<std::size_t>(n - a)] +
                             lf[static_cast<std::size_t>(n - b)] -
                             lf[static_cast<std::size_t>(n)] -
                             lf[static_cast<std::size_t>(nij)] -
                             lf[static_cast<std::size_t>(a - nij)] -
                             lf[static_cast<std::size_t>(b - nij)] -
                             lf[static_cast<std::size_t>(n - a - b + nij)];
        emi += term * std::exp(log_p);
      }
    }
  }
  return emi;
}

double nmi(const Clustering& u, const Clustering& v) {
  const ContingencyTable table = contingency(u, v);
  const double hu = entropy(table.row_marginals, table.total);
  const double hv = entropy(table.col_marginals, table.total);
  const double h = std::max(hu, hv);
  if (h == 0.0) return 0.0;
  return mutual_information(table) / h;
}

double ami(const Clustering& u, const Clustering& v) {
  const ContingencyTable table = contingency(u, v);
  const double mi = mutual_information(table);
  const double emi = expected_mi(table);
  const double h = std::max(entropy(table.row_marginals, table.total),
                            entropy(table.col_marginals, table.total));
  const double denom = h - emi;
  if (std::abs(denom) < 1e-12) {
    // both clusterings are effectively a single cluster
    return 1.0;
  }
  return (mi - emi) / denom;
}

}  // namespace eval
}  // namespace substory
