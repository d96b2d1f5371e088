#include "mbse/bleu.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "mbse/util.hpp"

namespace mbse {

const char* smoothing_name(BleuSmoothing s) {
  return s == BleuSmoothing::AddOne ? "add-one" : "none";
}

std::vector<std::string> bleu_tokenize(std::string_view text) {
  return split_whitespace(lowercase_ascii(text));
}

namespace {

std::unordered_map<std::string, int> ngram_counts(const std::vector<std::string>& tokens,
                                                  std::size_t n) {
  std::unordered_map<std::string, int> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string gram = tokens[i];
    for (std::size_t k = 1; k < n; ++k) {
      gram += '\x1f';
      gram += tokens[i + k];
    }
    ++counts[gram];
  }
  return counts;
}

}  // namespace

double sentence_bleu(const std::vector<std::string>& reference,
                     const std::vector<std::string>& hypothesis, BleuSmoothing smoothing) {
  if (reference.empty()) throw std::invalid_argument("empty reference");
  if (hypothesis.empty()) return 0.0;

  double log_sum = 0.0;
  int orders = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto hyp_counts = ngram_counts(hypothesis, n);
    if (hyp_counts.empty()) continue;  // hypothesis too short for this order
    const auto ref_counts = ngram_counts(reference, n);
    long clipped = 0;
    long total = 0;
    for (const auto& [gram, count] : hyp_counts) {
      total += count;
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) clipped += std::min(count, it->second);
    }
    double p;
    if (clipped == 0) {
      if (n == 1 || smoothing == BleuSmoothing::None) return 0.0;
      p = 1.0 / double(total + 1);
    } else {
      p = double(clipped) / double(total);
    }
    log_sum += std::log(p);
    ++orders;
  }
  const double bp = hypothesis.size() >= reference.size()
                        ? 1.0
                        : std::exp(1.0 - double(reference.size()) / double(hypothesis.size()));
  return bp * std::exp(log_sum / double(orders));
}

double sentence_bleu(std::string_view reference, std::string_view hypothesis,
                     BleuSmoothing smoothing) {
  return sentence_bleu(bleu_tokenize(reference), bleu_tokenize(hypothesis), smoothing);
}

GenPair make_gen_pair(std::string id, std::string original, std::string generated,
                      BleuSmoothing smoothing) {
  GenPair pair;
  pair.id = std::move(id);
  pair.original_text = std::move(original);
  pair.generated_text = std::move(generated);
  pair.bleu = sentence_bleu(pair.original_text, pair.generated_text, smoothing);
  return pair;
}

std::vector<GenPair> filter_generated(const std::vector<GenPair>& pairs, double low, double high) {
  if (!(low >= 0.0 && low < high && high <= 1.0)) {
    throw std::invalid_argument("thresholds must satisfy 0 <= low < high <= 1");
  }
  std::vector<GenPair> kept;
  for (const GenPair& p : pairs) {
    if (p.bleu >= low && p.bleu <= high) kept.push_back(p);
  }
  return kept;
}

}  // namespace mbse
