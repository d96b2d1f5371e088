#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mbse/amr.hpp"
#include "mbse/bleu.hpp"
#include "mbse/ensemble.hpp"
#include "mbse/smatch.hpp"

namespace mbse {

// One selected (sentence, AMR) training example with provenance.
struct SilverRecord {
  std::string sentence_id;
  std::string sentence_text;
  AmrGraph graph;
  std::string source_parser_id;
  Method method = Method::Greedy;
  double max_pair_score = 0.0;
};

struct SelectionStats {
  std::map<std::string, std::size_t> selected_by_parser;
  std::size_t discarded = 0;  // below-threshold sentences
  std::size_t dropped = 0;    // encoding/parse/alignment/validation losses
  std::size_t total = 0;
  std::vector<std::string> dropped_ids;

  std::size_t selected_total() const;
};

struct AlignResult {
  std::vector<CandidateSet> sets;
  std::vector<std::string> parser_ids;  // one per input file
  std::size_t total_sentences = 0;
  std::size_t dropped = 0;
  std::vector<std::string> dropped_ids;
};

// Aligns N parser-output files into per-sentence candidate sets. Records
// align by `::id` when every file carries ids on all surviving records, else
// by position with equal raw record counts. Records failing UTF-8 or parse
// are dropped and counted; a sentence missing any candidate is dropped
// whole. Throws std::invalid_argument on fewer than 2 files, duplicate ids
// within a file, or positional count mismatch.
AlignResult align_parser_outputs(const std::vector<std::string>& files,
                                 std::vector<std::string> parser_ids = {});

struct DistillOptions {
  Method method = Method::Greedy;
  std::optional<double> theta;
  SearchConfig search;
  int jobs = 1;
};

struct DistillResult {
  std::vector<SilverRecord> records;
  std::vector<EnsembleDecision> decisions;  // one per input sentence, input order
  SelectionStats stats;
};

// Runs the selector per sentence, drops selections whose graph fails
// validation, and reconciles stats over the given candidate sets
// (stats.total = cands.size()).
DistillResult distill(const std::vector<CandidateSet>& cands, const DistillOptions& opts);

// Folds alignment-time losses into distill stats so that
// selected + discarded + dropped = align.total_sentences.
void absorb_alignment_losses(SelectionStats& stats, const AlignResult& align);

struct MixSpec {
  enum class Mode { Concat, Ratio, RandomEqual };
  Mode mode = Mode::Concat;
  double ratio = 1.0;                    // Ratio: leading fraction of the second corpus kept
  std::uint64_t seed = 0;                // RandomEqual
  std::optional<std::size_t> per_source;  // RandomEqual: records drawn from each corpus
};

// Concat: first corpus then second. Ratio: first corpus plus the leading
// ceil(ratio * |second|) records of the second; ratio must lie in (0, 1].
// RandomEqual: equal seeded draws (without replacement, original order kept)
// from both corpora; per_source defaults to the smaller corpus size.
// Throws std::invalid_argument on a bad ratio or insufficient records.
std::vector<AmrGraph> mix_corpora(const std::vector<AmrGraph>& first,
                                  const std::vector<AmrGraph>& second, const MixSpec& spec);

struct OovReport {
  std::size_t test_occurrences = 0;
  std::size_t oov_occurrences = 0;
  std::vector<std::string> missing_types;  // sorted, unique

  bool defined() const { return test_occurrences > 0; }
  double ratio() const;  // throws std::domain_error when undefined
};

// Named-entity type = concept of any node with an outgoing :name edge.
// Occurrence-weighted: every test NE occurrence counts, and counts as OOV
// when its type concept never appears as an NE type in the training corpus.
OovReport ne_type_oov(const std::vector<AmrGraph>& train, const std::vector<AmrGraph>& test);

struct CorpusStats {
  std::size_t sentences = 0;
  std::size_t tokens = 0;  // whitespace tokens of ::tok when present, else ::snt
  std::size_t unparseable = 0;
};

CorpusStats corpus_stats(const std::vector<AmrGraph>& records);
CorpusStats corpus_stats_text(std::string_view corpus_text);

// TSV of (id, original_text, generated_text); BLEU computed on read.
std::vector<GenPair> read_gen_pairs_tsv(std::string_view text,
                                        BleuSmoothing smoothing = BleuSmoothing::AddOne);
std::string gen_pairs_to_tsv(const std::vector<GenPair>& pairs);

// Silver output record: exactly ::id, ::snt, ::mbse-source, ::mbse-score.
AmrGraph silver_to_record(const SilverRecord& r);
std::string silver_corpus_to_text(const std::vector<SilverRecord>& records);

// JSON stats report and JSONL decision log, byte-deterministic.
std::string stats_to_json(const SelectionStats& stats, const DistillOptions& opts);
std::string decisions_to_jsonl(const std::vector<EnsembleDecision>& decisions);

}  // namespace mbse
