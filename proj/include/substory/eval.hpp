#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "substory/clustering.hpp"

namespace substory::eval {

// Overlap counts between two clusterings of the same tweets. Rows follow u's
// sorted cluster ids, columns v's.
struct ContingencyTable {
  std::vector<std::vector<std::int64_t>> counts;
  std::vector<std::int64_t> row_marginals;
  std::vector<std::int64_t> col_marginals;
  std::int64_t total = 0;
  std::vector<int> row_ids;
  std::vector<int> col_ids;
};

struct StoryAlignment {
  int story_id = 0;           // gold cluster id
  std::string label;          // gold label when known
  int aligned_cluster = 0;    // predicted cluster with maximum overlap
  std::int64_t tp = 0;
  std::int64_t fp = 0;        // labeled tweets only
  std::int64_t fn = 0;
};

struct AlignmentReport {
  std::vector<StoryAlignment> stories;  // sorted by story_id
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Max-overlap alignment of each gold sub-story to a predicted cluster
// (ties to the lower cluster id). Multiple stories may align to one cluster.
// Only tweets in the gold universe enter any count.
AlignmentReport align_max_overlap(const Clustering& gold, const Clustering& predicted);

Prf micro_prf(const AlignmentReport& report);
Prf per_story_prf(const AlignmentReport& report, int story_id);

ContingencyTable contingency(const Clustering& u, const Clustering& v);

// All information measures use natural logarithms.
double mutual_information(const ContingencyTable& table);
double entropy(const std::vector<std::int64_t>& marginals, std::int64_t n);

// Exact expectation of MI under the fixed-marginal permutation model,
// hypergeometric masses evaluated in log-factorial space.
double expected_mi(const ContingencyTable& table);

double nmi(const Clustering& u, const Clustering& v);
double ami(const Clustering& u, const Clustering& v);

}  // namespace substory::eval
