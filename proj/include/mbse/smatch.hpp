#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mbse/amr.hpp"

namespace mbse {

struct SearchConfig {
  int restarts = 4;
  std::uint64_t seed = 0;
  int max_iterations = 1000;
  // When set, every restart starts from a random alignment instead of the
  // concept-seeded one used for restart 0.
  bool random_init = false;
};

struct SmatchScore {
  std::size_t matched = 0;
  std::size_t total_pred = 0;
  std::size_t total_gold = 0;

  double precision() const { return total_pred ? double(matched) / double(total_pred) : 0.0; }
  double recall() const { return total_gold ? double(matched) / double(total_gold) : 0.0; }
  double f1() const {
    const double p = precision(), r = recall();
    return (p + r > 0.0) ? 2.0 * p * r / (p + r) : 0.0;
  }
};

// Partial injective map from variables of the first graph to variables of
// the second, by node index; -1 marks an unmapped variable.
struct Alignment {
  std::vector<std::ptrdiff_t> mapping;

  std::vector<std::pair<std::string, std::string>> pairs(const AmrGraph& g1,
                                                         const AmrGraph& g2) const;
};

struct PairResult {
  SmatchScore score;
  Alignment alignment;
};

// Hill-climbing Smatch. Per restart: initial alignment (concept matches
// paired greedily, rest random under the seed), then best single-move
// improvements (remap to an unused target, or swap two targets) accepted
// only on strictly positive gain, until a local optimum or max_iterations.
// The smaller variable set is always mapped into the larger. Deterministic
// given (pred, gold, cfg).
PairResult smatch_pair(const AmrGraph& pred, const AmrGraph& gold, const SearchConfig& cfg = {});

// Exhaustive enumeration of injective mappings from the smaller variable
// set into the larger; ground truth for the hill climber. Counts matches by
// direct triple comparison, independent of the search-path scorer.
// Throws std::invalid_argument when min(|vars|) exceeds var_limit.
SmatchScore exact_smatch(const AmrGraph& pred, const AmrGraph& gold, std::size_t var_limit = 8);

// Micro-average: matched and totals summed over pairs, P/R/F1 computed once.
// Pairs align by metadata id when both sides carry ids everywhere, else by
// position with equal counts. Throws std::invalid_argument on empty input or
// id/count mismatch.
SmatchScore corpus_smatch(const std::vector<AmrGraph>& pred, const std::vector<AmrGraph>& gold,
                          const SearchConfig& cfg = {}, int jobs = 1);

// Per-pair scores in input order, same alignment rules as corpus_smatch.
std::vector<SmatchScore> sentence_smatch(const std::vector<AmrGraph>& pred,
                                         const std::vector<AmrGraph>& gold,
                                         const SearchConfig& cfg = {}, int jobs = 1);

enum class TransformMode { Unlabeled, NoWsd };

// Unlabeled: every relation role replaced by a fixed label (instance and TOP
// untouched); collapsed duplicates may shrink the edge set.
// NoWsd: trailing PropBank sense suffixes ("-" + two digits) stripped from
// concept labels.
AmrGraph transform(const AmrGraph& g, TransformMode mode);

}  // namespace mbse
