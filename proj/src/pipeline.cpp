#include "mbse/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "mbse/util.hpp"

namespace mbse {

std::size_t SelectionStats::selected_total() const {
  std::size_t total = 0;
  for (const auto& [parser, count] : selected_by_parser) total += count;
  return total;
}

namespace {

std::string file_stem(const std::string& path) {
  std::size_t slash = path.find_last_of("/\\");
  std::string name = (slash == std::string::npos) ? path : path.substr(slash + 1);
  std::size_t dot = name.find_last_of('.');
  if (dot != std::string::npos && dot > 0) name = name.substr(0, dot);
  return name;
}

}  // namespace

AlignResult align_parser_outputs(const std::vector<std::string>& files,
                                 std::vector<std::string> parser_ids) {
  if (files.size() < 2) throw std::invalid_argument("need at least 2 parser output files");
  if (!parser_ids.empty() && parser_ids.size() != files.size()) {
    throw std::invalid_argument("parser id count does not match file count");
  }

  AlignResult result;
  if (parser_ids.empty()) {
    std::unordered_map<std::string, int> seen;
    for (const std::string& path : files) {
      std::string stem = file_stem(path);
      const int n = seen[stem]++;
      if (n > 0) stem += "-" + std::to_string(n + 1);
      result.parser_ids.push_back(stem);
    }
  } else {
    result.parser_ids = std::move(parser_ids);
  }

  std::vector<CorpusReadResult> corpora;
  corpora.reserve(files.size());
  for (const std::string& path : files) corpora.push_back(read_corpus_file(path));

  const bool use_ids = std::all_of(corpora.begin(), corpora.end(), [](const CorpusReadResult& c) {
    return std::all_of(c.records.begin(), c.records.end(),
                       [](const AmrGraph& g) { return !g.id().empty(); });
  });

  if (use_ids) {
    // Universe of sentence ids in first-seen order across files; a sentence
    // survives only when every file parsed a record for it.
    std::vector<std::unordered_map<std::string, std::size_t>> by_id(corpora.size());
    for (std::size_t f = 0; f < corpora.size(); ++f) {
      for (std::size_t r = 0; r < corpora[f].records.size(); ++r) {
        const std::string id = corpora[f].records[r].id();
        if (!by_id[f].emplace(id, r).second) {
          throw std::invalid_argument("duplicate id in " + files[f] + ": " + id);
        }
      }
    }
    std::vector<std::string> universe;
    std::unordered_set<std::string> in_universe;
    std::size_t anonymous = 0;
    auto admit = [&](const std::string& id) {
      if (id.empty()) {
        ++anonymous;
      } else if (in_universe.insert(id).second) {
        universe.push_back(id);
      }
    };
    for (const CorpusReadResult& corpus : corpora) {
      for (const AmrGraph& g : corpus.records) admit(g.id());
      for (const DroppedRecord& d : corpus.dropped) admit(d.id);
    }
    result.total_sentences = universe.size() + anonymous;
    result.dropped = anonymous;
    for (const std::string& id : universe) {
      bool everywhere = true;
      for (const auto& index : by_id) {
        if (!index.count(id)) {
          everywhere = false;
          break;
        }
      }
      if (!everywhere) {
        ++result.dropped;
        result.dropped_ids.push_back(id);
        continue;
      }
      CandidateSet set;
      set.sentence_id = id;
      for (std::size_t f = 0; f < corpora.size(); ++f) {
        set.candidates.push_back(
            Candidate{result.parser_ids[f], corpora[f].records[by_id[f].at(id)]});
      }
      result.sets.push_back(std::move(set));
    }
  } else {
    const std::size_t raw = corpora[0].raw_records;
    for (std::size_t f = 1; f < corpora.size(); ++f) {
      if (corpora[f].raw_records != raw) {
        throw std::invalid_argument("record counts differ without ids: " + files[0] + " has " +
                                    std::to_string(raw) + ", " + files[f] + " has " +
                                    std::to_string(corpora[f].raw_records));
      }
    }
    result.total_sentences = raw;
    // Map surviving records back to raw positions per file.
    std::vector<std::vector<const AmrGraph*>> at_position(corpora.size());
    for (std::size_t f = 0; f < corpora.size(); ++f) {
      at_position[f].assign(raw, nullptr);
      std::unordered_set<std::size_t> dropped_at;
      for (const DroppedRecord& d : corpora[f].dropped) dropped_at.insert(d.index);
      std::size_t record = 0;
      for (std::size_t pos = 1; pos <= raw; ++pos) {
        if (dropped_at.count(pos)) continue;
        at_position[f][pos - 1] = &corpora[f].records[record++];
      }
    }
    for (std::size_t pos = 0; pos < raw; ++pos) {
      bool everywhere = true;
      for (std::size_t f = 0; f < corpora.size(); ++f) {
        if (!at_position[f][pos]) {
          everywhere = false;
          break;
        }
      }
      std::string id;
      for (std::size_t f = 0; f < corpora.size() && id.empty(); ++f) {
        if (at_position[f][pos]) id = at_position[f][pos]->id();
      }
      if (id.empty()) id = std::to_string(pos + 1);
      if (!everywhere) {
        ++result.dropped;
        result.dropped_ids.push_back(id);
        continue;
      }
      CandidateSet set;
      set.sentence_id = id;
      for (std::size_t f = 0; f < corpora.size(); ++f) {
        set.candidates.push_back(Candidate{result.parser_ids[f], *at_position[f][pos]});
      }
      result.sets.push_back(std::move(set));
    }
  }
  return result;
}

DistillResult distill(const std::vector<CandidateSet>& cands, const DistillOptions& opts) {
  DistillResult result;
  result.decisions.resize(cands.size());
  parallel_for(cands.size(), opts.jobs, [&](std::size_t i) {
    result.decisions[i] = run_selection(cands[i], opts.method, opts.theta, opts.search);
  });

  result.stats.total = cands.size();
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const EnsembleDecision& d = result.decisions[i];
    if (d.discarded_by_threshold) {
      ++result.stats.discarded;
      continue;
    }
    const Candidate& chosen = cands[i].candidates[*d.chosen_index];
    const ValidationReport report = validate(chosen.graph);
    if (!report.connected) {
      ++result.stats.dropped;
      result.stats.dropped_ids.push_back(cands[i].sentence_id);
      continue;
    }
    SilverRecord record;
    record.sentence_id = cands[i].sentence_id;
    if (const std::string* snt = chosen.graph.metadata_value("snt")) {
      record.sentence_text = *snt;
    } else {
      for (const Candidate& c : cands[i].candidates) {
        if (const std::string* other = c.graph.metadata_value("snt")) {
          record.sentence_text = *other;
          break;
        }
      }
    }
    record.graph = chosen.graph;
    record.source_parser_id = chosen.source_parser_id;
    record.method = opts.method;
    record.max_pair_score = d.max_pair_score;
    ++result.stats.selected_by_parser[record.source_parser_id];
    result.records.push_back(std::move(record));
  }
  return result;
}

void absorb_alignment_losses(SelectionStats& stats, const AlignResult& align) {
  stats.total = align.total_sentences;
  stats.dropped += align.dropped;
  stats.dropped_ids.insert(stats.dropped_ids.end(), align.dropped_ids.begin(),
                           align.dropped_ids.end());
}

std::vector<AmrGraph> mix_corpora(const std::vector<AmrGraph>& first,
                                  const std::vector<AmrGraph>& second, const MixSpec& spec) {
  std::vector<AmrGraph> out;
  switch (spec.mode) {
    case MixSpec::Mode::Concat: {
      out = first;
      out.insert(out.end(), second.begin(), second.end());
      break;
    }
    case MixSpec::Mode::Ratio: {
      if (!(spec.ratio > 0.0 && spec.ratio <= 1.0)) {
        throw std::invalid_argument("ratio must lie in (0, 1]");
      }
      const auto keep = std::size_t(std::ceil(spec.ratio * double(second.size())));
      out = first;
      out.insert(out.end(), second.begin(), second.begin() + std::ptrdiff_t(keep));
      break;
    }
    case MixSpec::Mode::RandomEqual: {
      const std::size_t k = spec.per_source.value_or(std::min(first.size(), second.size()));
      if (k > first.size() || k > second.size()) {
        throw std::invalid_argument("requested " + std::to_string(k) +
                                    " records per source, but sources hold " +
                                    std::to_string(first.size()) + " and " +
                                    std::to_string(second.size()));
      }
      std::mt19937_64 rng(mix64(spec.seed));
      auto sample = [&rng, k](const std::vector<AmrGraph>& corpus) {
        std::vector<std::size_t> indices(corpus.size());
        for (std::size_t i = 0; i < corpus.size(); ++i) indices[i] = i;
        for (std::size_t i = indices.size(); i > 1; --i) {
          std::swap(indices[i - 1], indices[rng() % i]);
        }
        indices.resize(k);
        std::sort(indices.begin(), indices.end());
        return indices;
      };
      for (std::size_t i : sample(first)) out.push_back(first[i]);
      for (std::size_t i : sample(second)) out.push_back(second[i]);
      break;
    }
  }
  return out;
}

double OovReport::ratio() const {
  if (!defined()) throw std::domain_error("no named-entity occurrences in the test corpus");
  return double(oov_occurrences) / double(test_occurrences);
}

namespace {

// Concepts of nodes with an outgoing :name edge, one entry per node occurrence.
std::vector<std::string> ne_type_occurrences(const AmrGraph& g) {
  std::vector<std::string> out;
  std::unordered_set<std::string> counted;
  for (const Edge& e : g.edges()) {
    if (lowercase_ascii(e.role) == "name" && counted.insert(e.source).second) {
      out.push_back(g.concept_of(e.source));
    }
  }
  return out;
}

}  // namespace

OovReport ne_type_oov(const std::vector<AmrGraph>& train, const std::vector<AmrGraph>& test) {
  std::unordered_set<std::string> train_types;
  for (const AmrGraph& g : train) {
    for (std::string& type : ne_type_occurrences(g)) train_types.insert(std::move(type));
  }
  OovReport report;
  std::set<std::string> missing;
  for (const AmrGraph& g : test) {
    for (const std::string& type : ne_type_occurrences(g)) {
      ++report.test_occurrences;
      if (!train_types.count(type)) {
        ++report.oov_occurrences;
        missing.insert(type);
      }
    }
  }
  report.missing_types.assign(missing.begin(), missing.end());
  return report;
}

CorpusStats corpus_stats(const std::vector<AmrGraph>& records) {
  CorpusStats stats;
  stats.sentences = records.size();
  for (const AmrGraph& g : records) {
    const std::string* text = g.metadata_value("tok");
    if (!text) text = g.metadata_value("snt");
    if (text) stats.tokens += split_whitespace(*text).size();
  }
  return stats;
}

CorpusStats corpus_stats_text(std::string_view corpus_text) {
  const CorpusReadResult read = read_corpus_text(corpus_text);
  CorpusStats stats = corpus_stats(read.records);
  stats.unparseable = read.dropped.size();
  return stats;
}

std::vector<GenPair> read_gen_pairs_tsv(std::string_view text, BleuSmoothing smoothing) {
  std::vector<GenPair> pairs;
  std::size_t offset = 0;
  std::size_t line_no = 0;
  while (offset <= text.size()) {
    std::size_t eol = text.find('\n', offset);
    std::string_view line =
        text.substr(offset, eol == std::string_view::npos ? text.size() - offset : eol - offset);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    if (!line.empty()) {
      const std::size_t tab1 = line.find('\t');
      const std::size_t tab2 = tab1 == std::string_view::npos ? tab1 : line.find('\t', tab1 + 1);
      if (tab2 == std::string_view::npos) {
        throw std::invalid_argument("line " + std::to_string(line_no) +
                                    ": expected id<TAB>original<TAB>generated");
      }
      std::string_view rest = line.substr(tab2 + 1);
      const std::size_t tab3 = rest.find('\t');
      if (tab3 != std::string_view::npos) rest = rest.substr(0, tab3);
      pairs.push_back(make_gen_pair(std::string(line.substr(0, tab1)),
                                    std::string(line.substr(tab1 + 1, tab2 - tab1 - 1)),
                                    std::string(rest), smoothing));
    }
    if (eol == std::string_view::npos) break;
    offset = eol + 1;
  }
  return pairs;
}

std::string gen_pairs_to_tsv(const std::vector<GenPair>& pairs) {
  std::string out;
  for (const GenPair& p : pairs) {
    out += p.id;
    out += '\t';
    out += p.original_text;
    out += '\t';
    out += p.generated_text;
    out += '\n';
  }
  return out;
}

namespace {

std::string format_score(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.4f", value);
  return buffer;
}

}  // namespace

AmrGraph silver_to_record(const SilverRecord& r) {
  AmrGraph g = r.graph;
  g.clear_metadata();
  g.set_metadata("id", r.sentence_id);
  if (!r.sentence_text.empty()) g.set_metadata("snt", r.sentence_text);
  g.set_metadata("mbse-source", r.source_parser_id);
  g.set_metadata("mbse-score", format_score(r.max_pair_score));
  return g;
}

std::string silver_corpus_to_text(const std::vector<SilverRecord>& records) {
  std::string out;
  for (const SilverRecord& r : records) {
    out += write_record(silver_to_record(r));
    out += "\n";
  }
  return out;
}

std::string stats_to_json(const SelectionStats& stats, const DistillOptions& opts) {
  nlohmann::ordered_json j;
  j["total"] = stats.total;
  j["selected"] = nlohmann::ordered_json::object();
  for (const auto& [parser, count] : stats.selected_by_parser) j["selected"][parser] = count;
  j["selected_total"] = stats.selected_total();
  j["discarded"] = stats.discarded;
  j["dropped"] = stats.dropped;
  j["dropped_ids"] = stats.dropped_ids;
  nlohmann::ordered_json config;
  config["method"] = method_name(opts.method);
  if (opts.theta) {
    config["theta"] = *opts.theta;
  } else {
    config["theta"] = nullptr;
  }
  config["restarts"] = opts.search.restarts;
  config["seed"] = opts.search.seed;
  config["max_iterations"] = opts.search.max_iterations;
  j["config"] = std::move(config);
  return j.dump(2) + "\n";
}

std::string decisions_to_jsonl(const std::vector<EnsembleDecision>& decisions) {
  std::string out;
  for (const EnsembleDecision& d : decisions) {
    nlohmann::ordered_json j;
    j["sentence_id"] = d.sentence_id;
    j["method"] = method_name(d.method);
    if (d.chosen_index) {
      j["chosen_source"] = d.chosen_source;
      j["chosen_index"] = *d.chosen_index;
    } else {
      j["chosen_source"] = nullptr;
      j["chosen_index"] = nullptr;
    }
    j["max_pair_score"] = d.max_pair_score;
    j["discarded"] = d.discarded_by_threshold;
    j["tie"] = d.tie;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace mbse
