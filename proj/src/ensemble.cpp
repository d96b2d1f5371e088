#include "mbse/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace mbse {

PairwiseMatrix::PairwiseMatrix(std::size_t n) : n_(n), cells_(n * n, 0.0) {
  for (std::size_t i = 0; i < n_; ++i) cells_[i * n_ + i] = 1.0;
}

PairwiseMatrix PairwiseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  PairwiseMatrix m(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) throw std::invalid_argument("matrix is not square");
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const double v = rows[i][j];
      if (v < 0.0 || v > 1.0) throw std::invalid_argument("matrix entry outside [0, 1]");
      if (std::abs(v - rows[j][i]) > 1e-9) throw std::invalid_argument("matrix is not symmetric");
      if (i != j) m.cells_[i * m.n_ + j] = v;
    }
  }
  return m;
}

double PairwiseMatrix::at(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) throw std::out_of_range("matrix index");
  return cells_[i * n_ + j];
}

void PairwiseMatrix::set(std::size_t i, std::size_t j, double value) {
  if (i >= n_ || j >= n_) throw std::out_of_range("matrix index");
  if (i == j) return;
  cells_[i * n_ + j] = value;
  cells_[j * n_ + i] = value;
}

double PairwiseMatrix::max_off_diagonal(std::size_t& best_i, std::size_t& best_j) const {
  if (n_ < 2) throw std::invalid_argument("matrix needs at least 2 rows");
  double best = -1.0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (at(i, j) > best) {
        best = at(i, j);
        best_i = i;
        best_j = j;
      }
    }
  }
  return best;
}

double PairwiseMatrix::row_mean(std::size_t i, const std::vector<std::size_t>& skip) const {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t j = 0; j < n_; ++j) {
    if (j == i || std::find(skip.begin(), skip.end(), j) != skip.end()) continue;
    sum += at(i, j);
    ++count;
  }
  return count ? sum / double(count) : 0.0;
}

const char* method_name(Method m) {
  switch (m) {
    case Method::Greedy:
      return "greedy";
    case Method::Average:
      return "average";
    case Method::Majority:
      return "majority";
  }
  return "unknown";
}

std::optional<Method> method_from_name(const std::string& name) {
  if (name == "greedy") return Method::Greedy;
  if (name == "average") return Method::Average;
  if (name == "majority") return Method::Majority;
  return std::nullopt;
}

PairwiseMatrix pairwise_matrix(const CandidateSet& cands, const SearchConfig& cfg) {
  const std::size_t n = cands.candidates.size();
  if (n < 2) throw std::invalid_argument("pairwise matrix needs at least 2 candidates");
  PairwiseMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      m.set(i, j, smatch_pair(cands.candidates[i].graph, cands.candidates[j].graph, cfg).score.f1());
    }
  }
  return m;
}

namespace {

void check_theta(const std::optional<double>& theta) {
  if (theta && (*theta < 0.0 || *theta > 1.0)) {
    throw std::invalid_argument("theta must lie in [0, 1]");
  }
}

EnsembleDecision base_decision(const CandidateSet& cands, Method method,
                               const PairwiseMatrix& matrix) {
  EnsembleDecision d;
  d.sentence_id = cands.sentence_id;
  d.method = method;
  d.matrix = matrix;
  std::size_t i = 0, j = 0;
  d.max_pair_score = matrix.max_off_diagonal(i, j);
  return d;
}

void choose(EnsembleDecision& d, const CandidateSet& cands, std::size_t index) {
  d.chosen_index = index;
  d.chosen_source = cands.candidates[index].source_parser_id;
}

}  // namespace

EnsembleDecision greedy_select(const CandidateSet& cands, const PairwiseMatrix& matrix,
                               std::optional<double> theta) {
  const std::size_t n = cands.candidates.size();
  if (n < 3) throw std::invalid_argument("greedy selection needs at least 3 candidates");
  if (matrix.size() != n) throw std::invalid_argument("matrix size does not match candidates");
  check_theta(theta);

  EnsembleDecision d = base_decision(cands, Method::Greedy, matrix);
  std::size_t best_i = 0, best_j = 0;
  const double best_pair = matrix.max_off_diagonal(best_i, best_j);
  if (theta && best_pair < *theta) {
    d.discarded_by_threshold = true;
    return d;
  }
  // Each pair member scored by its mean against the remaining n-2 candidates;
  // the tie goes to the earlier parse.
  const double mean_i = matrix.row_mean(best_i, {best_j});
  const double mean_j = matrix.row_mean(best_j, {best_i});
  d.tie = mean_i == mean_j;
  choose(d, cands, mean_j > mean_i ? best_j : best_i);
  return d;
}

EnsembleDecision average_select(const CandidateSet& cands, const PairwiseMatrix& matrix) {
  const std::size_t n = cands.candidates.size();
  if (n < 2) throw std::invalid_argument("average selection needs at least 2 candidates");
  if (matrix.size() != n) throw std::invalid_argument("matrix size does not match candidates");

  EnsembleDecision d = base_decision(cands, Method::Average, matrix);
  std::size_t best = 0;
  double best_mean = matrix.row_mean(0);
  bool tie = false;
  for (std::size_t i = 1; i < n; ++i) {
    const double mean = matrix.row_mean(i);
    if (mean > best_mean) {
      best_mean = mean;
      best = i;
      tie = false;
    } else if (mean == best_mean) {
      tie = true;
    }
  }
  d.tie = tie;
  choose(d, cands, best);
  return d;
}

EnsembleDecision majority_select(const CandidateSet& cands, const SearchConfig& cfg) {
  const std::size_t n = cands.candidates.size();
  if (n < 2) throw std::invalid_argument("majority selection needs at least 2 candidates");

  std::vector<std::size_t> triples(n);
  std::vector<std::size_t> vars(n);
  for (std::size_t i = 0; i < n; ++i) {
    const AmrGraph& g = cands.candidates[i].graph;
    g.check();
    triples[i] = g.nodes().size() + g.edges().size() + g.attributes().size() + 1;
    vars[i] = g.nodes().size();
  }

  // Equivalence = equal up to variable renaming: matched count reaches both
  // totals. Exact search for small graphs, hill climbing otherwise.
  constexpr std::size_t kExactVarLimit = 6;
  PairwiseMatrix matrix(n);
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      SmatchScore score;
      if (std::min(vars[i], vars[j]) <= kExactVarLimit) {
        score = exact_smatch(cands.candidates[i].graph, cands.candidates[j].graph, kExactVarLimit);
      } else {
        score = smatch_pair(cands.candidates[i].graph, cands.candidates[j].graph, cfg).score;
      }
      matrix.set(i, j, score.f1());
      if (score.matched == triples[i] && score.matched == triples[j]) {
        parent[find(j)] = find(i);
      }
    }
  }

  std::vector<std::size_t> class_size(n, 0);
  std::vector<std::size_t> class_min(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = find(i);
    ++class_size[root];
    class_min[root] = std::min(class_min[root], i);
  }
  std::size_t winner = find(0);
  bool tie = false;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = find(i);
    if (root == i && root != winner) {
      if (class_size[root] > class_size[winner]) {
        winner = root;
        tie = false;
      } else if (class_size[root] == class_size[winner]) {
        tie = true;
        if (class_min[root] < class_min[winner]) winner = root;
      }
    }
  }

  EnsembleDecision d = base_decision(cands, Method::Majority, matrix);
  d.tie = tie;
  choose(d, cands, class_min[winner]);
  return d;
}

EnsembleDecision run_selection(const CandidateSet& cands, Method method,
                               std::optional<double> theta, const SearchConfig& cfg) {
  check_theta(theta);
  EnsembleDecision d;
  switch (method) {
    case Method::Greedy:
      d = greedy_select(cands, pairwise_matrix(cands, cfg), theta);
      break;
    case Method::Average:
      d = average_select(cands, pairwise_matrix(cands, cfg));
      break;
    case Method::Majority:
      d = majority_select(cands, cfg);
      break;
  }
  // The threshold rule applies uniformly: a sentence whose best pair score
  // falls below theta contributes no silver record.
  if (theta && d.max_pair_score < *theta) {
    d.discarded_by_threshold = true;
    d.chosen_index.reset();
    d.chosen_source.clear();
  }
  return d;
}

}  // namespace mbse
