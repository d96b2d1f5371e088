#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mbse/amr.hpp"
#include "mbse/smatch.hpp"

namespace mbse {

struct Candidate {
  std::string source_parser_id;
  AmrGraph graph;
};

// Per-sentence candidate parses, in input-file order.
struct CandidateSet {
  std::string sentence_id;
  std::vector<Candidate> candidates;
};

// Symmetric matrix of sentence-level Smatch F1, diagonal fixed at 1.
class PairwiseMatrix {
 public:
  PairwiseMatrix() = default;
  explicit PairwiseMatrix(std::size_t n);
  static PairwiseMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const { return n_; }
  double at(std::size_t i, std::size_t j) const;
  void set(std::size_t i, std::size_t j, double value);  // mirrors into (j, i)

  // Highest off-diagonal entry; ties resolved to the lexicographically
  // smallest (i, j) with i < j.
  double max_off_diagonal(std::size_t& best_i, std::size_t& best_j) const;

  // Mean of row i excluding the diagonal and the indices in `skip`.
  double row_mean(std::size_t i, const std::vector<std::size_t>& skip = {}) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> cells_;
};

enum class Method { Greedy, Average, Majority };

const char* method_name(Method m);
std::optional<Method> method_from_name(const std::string& name);

struct EnsembleDecision {
  std::string sentence_id;
  Method method = Method::Greedy;
  std::optional<std::size_t> chosen_index;  // absent when discarded
  std::string chosen_source;
  PairwiseMatrix matrix;
  double max_pair_score = 0.0;
  bool tie = false;
  bool discarded_by_threshold = false;
};

// Scores each unordered candidate pair once and mirrors the result.
// Throws std::invalid_argument with fewer than 2 candidates.
PairwiseMatrix pairwise_matrix(const CandidateSet& cands, const SearchConfig& cfg = {});

// Greedy selection: take the highest-scoring pair (i, j), then keep the pair
// member with the higher mean score against the remaining n-2 candidates;
// ties go to the lower index. With theta set, the sentence is discarded when
// the best pair score falls below it. Requires n >= 3.
EnsembleDecision greedy_select(const CandidateSet& cands, const PairwiseMatrix& matrix,
                               std::optional<double> theta = {});

// Picks the candidate with the highest mean score against all others
// (self excluded); ties go to the lowest index. Requires n >= 2.
EnsembleDecision average_select(const CandidateSet& cands, const PairwiseMatrix& matrix);

// Groups candidates into classes of graphs equal up to variable renaming
// (exact search for small graphs, hill climbing otherwise) and picks the
// earliest member of the largest class. Requires n >= 2.
EnsembleDecision majority_select(const CandidateSet& cands, const SearchConfig& cfg = {});

// Runs the chosen method; theta applies the greedy discard rule (best pair
// score below theta) uniformly across methods.
EnsembleDecision run_selection(const CandidateSet& cands, Method method,
                               std::optional<double> theta, const SearchConfig& cfg = {});

}  // namespace mbse
