#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mbse {

enum class BleuSmoothing { AddOne, None };

const char* smoothing_name(BleuSmoothing s);

// Lowercased (ASCII) whitespace tokens.
std::vector<std::string> bleu_tokenize(std::string_view text);

// Sentence BLEU over n = 1..4: geometric mean of modified n-gram precisions,
// orders with no hypothesis n-grams skipped. AddOne replaces a zero
// numerator at n >= 2 with (0+1)/(count+1); a zero unigram numerator yields
// 0. Brevity penalty exp(1 - |ref|/|hyp|) when the hypothesis is shorter.
// Throws std::invalid_argument on an empty reference.
double sentence_bleu(const std::vector<std::string>& reference,
                     const std::vector<std::string>& hypothesis,
                     BleuSmoothing smoothing = BleuSmoothing::AddOne);

double sentence_bleu(std::string_view reference, std::string_view hypothesis,
                     BleuSmoothing smoothing = BleuSmoothing::AddOne);

struct GenPair {
  std::string id;
  std::string original_text;
  std::string generated_text;
  double bleu = 0.0;
};

GenPair make_gen_pair(std::string id, std::string original, std::string generated,
                      BleuSmoothing smoothing = BleuSmoothing::AddOne);

// Keeps pairs with low <= bleu <= high. Throws std::invalid_argument unless
// 0 <= low < high <= 1.
std::vector<GenPair> filter_generated(const std::vector<GenPair>& pairs, double low = 0.1,
                                      double high = 0.9);

}  // namespace mbse
