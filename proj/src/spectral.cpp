#include "substory/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"
#include "substory/rng.hpp"

namespace substory::spectral {

double npmi(std::int64_t count_xy, std::int64_t count_x, std::int64_t count_y,
            std::int64_t n_docs) {
  if (count_xy < 0 || count_x < count_xy || count_y < count_xy) {
    throw std::invalid_argument("npmi: need count_x, count_y >= count_xy >= 0");
  }
  if (n_docs < std::max(count_x, count_y) || std::max(count_x, count_y) < 1) {
    throw std::invalid_argument("npmi: need n_docs >= max(count_x, count_y) >= 1");
  }
  if (count_xy == 0) return -1.0;
  if (count_xy == count_x && count_xy == count_y) {
    // p(x,y) = p(x) = p(y); the ratio is 1 even in the p = 1 limit
    return 1.0;
  }
  const double n = static_cast<double>(n_docs);
  const double pxy = static_cast<double>(count_xy) / n;
  const double px = static_cast<double>(count_x) / n;
  const double py = static_cast<double>(count_y) / n;
  return std::log(pxy / (px * py)) / (-std::log(pxy));
}

WordGraph build_graph(const Corpus& corpus, const SpectralConfig& config) {
  if (!corpus.is_processed()) throw std::runtime_error("build_graph: corpus is not processed");
  if (config.npmi_threshold < -1.0 || config.npmi_threshold > 1.0) {
    throw std::invalid_argument("SpectralConfig: npmi_threshold must lie in [-1, 1]");
  }
  if (config.k < 1 || config.min_word_freq < 1) {
    throw std::invalid_argument("SpectralConfig: k and min_word_freq must be >= 1");
  }

  WordGraph graph;
  const std::size_t v = corpus.vocabulary.size();
  std::vector<bool> retained(v, false);
  for (TermId t = 0; t < v; ++t) {
    if (corpus.vocabulary.document_frequency(t) >= config.min_word_freq) {
      retained[t] = true;
      graph.nodes.push_back(t);
    }
  }
  if (graph.nodes.empty()) {
    throw std::runtime_error("build_graph: no word meets the frequency threshold of " +
                             std::to_string(config.min_word_freq));
  }

  // pair co-occurrence, counted once per tweet
  std::map<std::pair<TermId, TermId>, std::int64_t> pair_counts;
  for (const ProcessedTweet& pt : corpus.processed) {
    std::vector<TermId> terms;
    for (const auto& [term, count] : pt.term_counts) {
      if (retained[term]) terms.push_back(term);
    }
    for (std::size_t i = 0; i < terms.size(); ++i) {
      for (std::size_t j = i + 1; j < terms.size(); ++j) {
        ++pair_counts[{terms[i], terms[j]}];
      }
    }
  }

  const auto n_docs = static_cast<std::int64_t>(corpus.tweets.size());
  for (const auto& [pair, count] : pair_counts) {
    const double w = npmi(count, corpus.vocabulary.document_frequency(pair.first),
                          corpus.vocabulary.document_frequency(pair.second), n_docs);
    if (w >= config.npmi_threshold) {
      graph.edges.push_back({pair.first, pair.second, w});
    }
  }
  return graph;
}

namespace {

std::unordered_map<TermId, std::vector<std::pair<TermId, double>>> adjacency(
    const WordGraph& graph) {
  std::unordered_map<TermId, std::vector<std::pair<TermId, double>>> adj;
  for (const TermId n : graph.nodes) adj[n];
  for (const auto& e : graph.edges) {
    adj[e.a].emplace_back(e.b, e.weight);
    adj[e.b].emplace_back(e.a, e.weight);
  }
  return adj;
}

}  // namespace

WordGraph largest_connected_component(const WordGraph& graph) {
  if (graph.nodes.empty()) {
    throw std::invalid_argument("largest_connected_component: empty graph");
  }
  const auto adj = adjacency(graph);

  std::unordered_map<TermId, int> component;
  std::vector<std::vector<TermId>> members;
  for (const TermId start : graph.nodes) {
    if (component.count(start)) continue;
    const int c = static_cast<int>(members.size());
    members.emplace_back();
    std::vector<TermId> stack{start};
    component[start] = c;
    while (!stack.empty()) {
      const TermId node = stack.back();
      stack.pop_back();
      members[c].push_back(node);
      for (const auto& [next, w] : adj.at(node)) {
        if (!component.count(next)) {
          component[next] = c;
          stack.push_back(next);
        }
      }
    }
  }

  std::vector<double> weight(members.size(), 0.0);
  for (const auto& e : graph.edges) weight[component.at(e.a)] += e.weight;
  std::vector<TermId> smallest(members.size());
  for (std::size_t c = 0; c < members.size(); ++c) {
    smallest[c] = *std::min_element(members[c].begin(), members[c].end());
  }

  int best = 0;
  for (int c = 1; c < static_cast<int>(members.size()); ++c) {
    const auto sz = members[c].size();
    const auto best_sz = members[best].size();
    if (sz > best_sz ||
        (sz == best_sz && (weight[c] > weight[best] ||
                           (weight[c] == weight[best] && smallest[c] < smallest[best])))) {
      best = c;
    }
  }

  WordGraph out;
  out.nodes = members[best];
  std::sort(out.nodes.begin(), out.nodes.end());
  for (const auto& e : graph.edges) {
    if (component.at(e.a) == best) out.edges.push_back(e);
  }
  return out;
}

Embedding laplacian_embedding(const WordGraph& graph, int dim) {
  const std::size_t n = graph.nodes.size();
  if (n == 0) throw std::invalid_argument("laplacian_embedding: empty graph");
  if (dim < 1 || static_cast<std::size_t>(dim) > n) {
    throw std::invalid_argument("laplacian_embedding: dim must lie in [1, node count]");
  }

  std::unordered_map<TermId, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[graph.nodes[i]] = i;

  {
    // exact connectivity check
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& e : graph.edges) {
      adj[index.at(e.a)].push_back(index.at(e.b));
      adj[index.at(e.b)].push_back(index.at(e.a));
    }
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t visited = 0;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      ++visited;
      for (const std::size_t next : adj[node]) {
        if (!seen[next]) {
          seen[next] = true;
          stack.push_back(next);
        }
      }
    }
    if (visited != n) {
      throw std::invalid_argument(
          "laplacian_embedding: graph is disconnected; extract the largest "
          "connected component first");
    }
  }

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));
  for (const auto& e : graph.edges) {
    const auto i = static_cast<Eigen::Index>(index.at(e.a));
    const auto j = static_cast<Eigen::Index>(index.at(e.b));
    w(i, j) += e.weight;
    w(j, i) += e.weight;
  }

  Eigen::VectorXd degree = w.rowwise().sum();
  for (Eigen::Index i = 0; i < degree.size(); ++i) {
    if (degree(i) <= 0.0) {
      if (n == 1) {
        // single isolated node: the embedding is the trivial constant
        Embedding e;
        e.nodes = graph.nodes;
        e.coords = {{1.0}};
        e.eigenvalues = {0.0};
        return e;
      }
      throw std::invalid_argument(
          "laplacian_embedding: node with nonpositive weighted degree; "
          "extract the largest connected component first");
    }
  }

  Eigen::VectorXd d_inv_sqrt = degree.array().rsqrt();
  Eigen::MatrixXd l_sym =
      Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) -
      d_inv_sqrt.asDiagonal() * w * d_inv_sqrt.asDiagonal();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(l_sym);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("laplacian_embedding: eigendecomposition failed");
  }

  Embedding out;
  out.nodes = graph.nodes;
  out.eigenvalues.resize(static_cast<std::size_t>(dim));
  Eigen::MatrixXd vectors(static_cast<Eigen::Index>(n), dim);
  for (int c = 0; c < dim; ++c) {
    out.eigenvalues[static_cast<std::size_t>(c)] = solver.eigenvalues()(c);
    Eigen::VectorXd v = solver.eigenvectors().col(c);
    // fix the sign: largest-magnitude entry positive
    Eigen::Index argmax = 0;
    v.cwiseAbs().maxCoeff(&argmax);
    if (v(argmax) < 0.0) v = -v;
    vectors.col(c) = v;
  }

  out.coords.assign(n, std::vector<double>(static_cast<std::size_t>(dim), 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double row_norm = vectors.row(static_cast<Eigen::Index>(i)).norm();
    for (int c = 0; c < dim; ++c) {
      const double value = vectors(static_cast<Eigen::Index>(i), c);
      out.coords[i][static_cast<std::size_t>(c)] = row_norm > 0.0 ? value / row_norm : 0.0;
    }
  }
  return out;
}

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

KmeansResult kmeans(const std::vector<std::vector<double>>& points, int k, int iters,
                    int restarts, std::uint64_t seed) {
  const std::size_t n = points.size();
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw std::invalid_argument("kmeans: k must lie in [1, number of points]");
  }
  const std::size_t dim = points[0].size();
  Rng rng(seed);

  KmeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();

  for (int restart = 0; restart < std::max(restarts, 1); ++restart) {
    // k-means++ seeding
    std::vector<std::vector<double>> centroids;
    centroids.reserve(static_cast<std::size_t>(k));
    centroids.push_back(points[rng.uniform_index(n)]);
    std::vector<double> dist2(n);
    while (centroids.size() < static_cast<std::size_t>(k)) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& c : centroids) d = std::min(d, squared_distance(points[i], c));
        dist2[i] = d;
        total += d;
      }
      std::size_t chosen;
      if (total <= 0.0) {
        chosen = rng.uniform_index(n);
      } else {
        const double target = rng.uniform() * total;
        double acc = 0.0;
        chosen = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
          acc += dist2[i];
          if (acc >= target) {
            chosen = i;
            break;
          }
        }
      }
      centroids.push_back(points[chosen]);
    }

    std::vector<int> assignment(n, -1);
    std::vector<double> history;
    for (int iter = 0; iter < std::max(iters, 1); ++iter) {
      bool changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        int nearest = 0;
        double nearest_d = squared_distance(points[i], centroids[0]);
        for (int c = 1; c < k; ++c) {
          const double d = squared_distance(points[i], centroids[static_cast<std::size_t>(c)]);
          if (d < nearest_d) {
            nearest_d = d;
            nearest = c;
          }
        }
        if (assignment[i] != nearest) {
          assignment[i] = nearest;
          changed = true;
        }
      }

      // recompute centroids; empty clusters move to the farthest point
      std::vector<std::vector<double>> sums(static_cast<std::size_t>(k),
                                            std::vector<double>(dim, 0.0));
      std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
      for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(assignment[i]);
        ++counts[c];
        for (std::size_t d = 0; d < dim; ++d) sums[c][d] += points[i][d];
      }
      for (int c = 0; c < k; ++c) {
        const auto cc = static_cast<std::size_t>(c);
        if (counts[cc] == 0) {
          std::size_t farthest = 0;
          double farthest_d = -1.0;
          for (std::size_t i = 0; i < n; ++i) {
            const double d = squared_distance(
                points[i], centroids[static_cast<std::size_t>(assignment[i])]);
            if (d > farthest_d) {
              farthest_d = d;
              farthest = i;
            }
          }
          centroids[cc] = points[farthest];
          assignment[farthest] = c;
          changed = true;
        } else {
          for (std::size_t d = 0; d < dim; ++d) {
            centroids[cc][d] = sums[cc][d] / static_cast<double>(counts[cc]);
          }
        }
      }
      double iter_wcss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        iter_wcss +=
            squared_distance(points[i], centroids[static_cast<std::size_t>(assignment[i])]);
      }
      history.push_back(iter_wcss);
      if (!changed) break;
    }

    const double wcss = history.back();
    if (wcss < best.wcss) {
      best.wcss = wcss;
      best.assignment = assignment;
      best.centroids = centroids;
      best.wcss_history = history;
    }
  }
  return best;
}

WordClusters cluster_words(const Corpus& corpus, const SpectralConfig& config) {
  const WordGraph full = build_graph(corpus, config);
  const WordGraph lcc = largest_connected_component(full);

  WordClusters out;
  std::set<TermId> in_lcc(lcc.nodes.begin(), lcc.nodes.end());
  for (const TermId t : full.nodes) {
    if (!in_lcc.count(t)) out.unclustered.push_back(t);
  }

  const int dim = std::min<int>(config.embedding_dim > 0 ? config.embedding_dim : config.k,
                                static_cast<int>(lcc.nodes.size()));
  const Embedding embedding = laplacian_embedding(lcc, dim);
  const KmeansResult km = kmeans(embedding.coords, config.k, config.kmeans_iters,
                                 config.kmeans_restarts, config.seed);

  std::unordered_map<TermId, int> cluster_of;
  for (std::size_t i = 0; i < lcc.nodes.size(); ++i) cluster_of[lcc.nodes[i]] = km.assignment[i];

  // importance: weighted degree within the cluster's induced subgraph,
  // normalized per cluster; uniform when a cluster has no internal edges
  std::unordered_map<TermId, double> degree;
  for (const TermId t : lcc.nodes) degree[t] = 0.0;
  for (const auto& e : lcc.edges) {
    if (cluster_of.at(e.a) == cluster_of.at(e.b)) {
      degree[e.a] += e.weight;
      degree[e.b] += e.weight;
    }
  }

  out.clusters.assign(static_cast<std::size_t>(config.k), {});
  for (const TermId t : lcc.nodes) {
    out.clusters[static_cast<std::size_t>(cluster_of.at(t))].push_back({t, degree.at(t)});
  }
  for (auto& cluster : out.clusters) {
    double total = 0.0;
    for (const auto& m : cluster) total += m.score;
    if (total > 0.0) {
      for (auto& m : cluster) m.score /= total;
    } else if (!cluster.empty()) {
      const double uniform = 1.0 / static_cast<double>(cluster.size());
      for (auto& m : cluster) m.score = uniform;
    }
    std::sort(cluster.begin(), cluster.end(), [](const auto& x, const auto& y) {
      return x.score != y.score ? x.score > y.score : x.term < y.term;
    });
  }
  return out;
}

Clustering assign_tweets(const Corpus& corpus, const WordClusters& clusters) {
  if (clusters.clusters.empty()) {
    throw std::invalid_argument("assign_tweets: no word clusters");
  }
  std::unordered_map<TermId, std::pair<int, double>> membership;  // term -> (cluster, score)
  for (std::size_t c = 0; c < clusters.clusters.size(); ++c) {
    for (const auto& m : clusters.clusters[c]) {
      membership[m.term] = {static_cast<int>(c), m.score};
    }
  }

  Clustering out;
  std::vector<double> scores(clusters.clusters.size());
  for (const ProcessedTweet& pt : corpus.processed) {
    std::fill(scores.begin(), scores.end(), 0.0);
    for (const auto& [term, count] : pt.term_counts) {
      auto it = membership.find(term);
      if (it == membership.end()) continue;
      scores[static_cast<std::size_t>(it->second.first)] +=
          it->second.second * static_cast<double>(count);
    }
    int best = kOutlierCluster;
    double best_score = 0.0;
    for (std::size_t c = 0; c < scores.size(); ++c) {
      if (scores[c] > best_score) {
        best_score = scores[c];
        best = static_cast<int>(c);
      }
    }
    out.assignment.emplace(pt.tweet_id, best);
  }
  return out;
}

std::string word_clusters_to_json(const WordClusters& clusters, const Vocabulary& vocabulary,
                                  const SpectralConfig& config) {
  nlohmann::json doc;
  doc["config"] = {{"k", config.k},
                   {"npmi_threshold", config.npmi_threshold},
                   {"min_word_freq", config.min_word_freq},
                   {"embedding_dim", config.embedding_dim > 0 ? config.embedding_dim : config.k},
                   {"kmeans_iters", config.kmeans_iters},
                   {"kmeans_restarts", config.kmeans_restarts},
                   {"seed", config.seed}};
  doc["clusters"] = nlohmann::json::array();
  for (std::size_t c = 0; c < clusters.clusters.size(); ++c) {
    nlohmann::json entry;
    entry["cluster_id"] = c;
    entry["words"] = nlohmann::json::array();
    for (const auto& m : clusters.clusters[c]) {
      entry["words"].push_back({vocabulary.term_of(m.term), m.score});
    }
    doc["clusters"].push_back(std::move(entry));
  }
  doc["unclustered"] = nlohmann::json::array();
  for (const TermId t : clusters.unclustered) {
    doc["unclustered"].push_back(vocabulary.term_of(t));
  }
  return doc.dump(2);
}

}  // namespace substory::spectral
