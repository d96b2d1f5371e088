#include "mbse/cli.hpp"

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mbse/amr.hpp"
#include "mbse/bleu.hpp"
#include "mbse/ensemble.hpp"
#include "mbse/pipeline.hpp"
#include "mbse/smatch.hpp"
#include "mbse/util.hpp"

namespace mbse::cli {

namespace {

constexpr const char* kUsage =
    "usage: mbse <command> [options]\n"
    "\n"
    "commands:\n"
    "  score       corpus Smatch between two AMR files\n"
    "  ensemble    per-sentence candidate selection over N parser outputs\n"
    "  distill     ensemble selection plus validation, stats and corpus output\n"
    "  filter-gen  BLEU-band filtering of generated sentence pairs\n"
    "  stats       corpus statistics or NE-type OOV diagnostics\n"
    "  validate    structural checks per record\n"
    "\n"
    "run `mbse <command> --help` for command options\n";

std::string fixed4(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.4f", v);
  return buffer;
}

std::vector<std::string> split_commas(const std::string& csv) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= csv.size() && !csv.empty()) {
    const std::size_t comma = csv.find(',', start);
    out.push_back(csv.substr(start, comma == std::string::npos ? csv.size() - start : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void run_header(const std::string& command, const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ostringstream ss;
  ss << "# mbse " << command;
  for (const auto& [key, value] : kv) ss << " " << key << "=" << value;
  std::cerr << ss.str() << "\n";
}

SearchConfig search_config(int restarts, std::uint64_t seed, int max_iterations) {
  SearchConfig cfg;
  cfg.restarts = restarts;
  cfg.seed = seed;
  cfg.max_iterations = max_iterations;
  return cfg;
}

std::vector<AmrGraph> read_records_or_die(const std::string& path) {
  const CorpusReadResult read = read_corpus_file(path);
  for (const DroppedRecord& d : read.dropped) {
    std::cerr << "warning: " << path << " record " << d.index
              << (d.id.empty() ? "" : " (id " + d.id + ")") << " dropped: " << d.reason << "\n";
  }
  return read.records;
}

int cmd_score(const std::string& gold_path, const std::string& pred_path, int restarts,
              std::uint64_t seed, int max_iterations, int jobs,
              const std::string& per_sentence_path) {
  run_header("score", {{"gold", gold_path},
                       {"pred", pred_path},
                       {"restarts", std::to_string(restarts)},
                       {"seed", std::to_string(seed)},
                       {"jobs", std::to_string(jobs)}});
  const std::vector<AmrGraph> gold = read_records_or_die(gold_path);
  const std::vector<AmrGraph> pred = read_records_or_die(pred_path);
  const SearchConfig cfg = search_config(restarts, seed, max_iterations);

  if (!per_sentence_path.empty()) {
    const std::vector<SmatchScore> scores = sentence_smatch(pred, gold, cfg, jobs);
    std::string out;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      std::string id = pred[i].id();
      if (id.empty()) id = std::to_string(i + 1);
      out += id + "\t" + fixed4(scores[i].f1()) + "\n";
    }
    atomic_write_file(per_sentence_path, out);
  }
  const SmatchScore total = corpus_smatch(pred, gold, cfg, jobs);
  std::cout << "Precision: " << fixed4(total.precision()) << "\n"
            << "Recall: " << fixed4(total.recall()) << "\n"
            << "F1: " << fixed4(total.f1()) << "\n";
  return 0;
}

int cmd_ensemble(const std::vector<std::string>& files, const std::string& method_name_arg,
                 std::optional<double> theta, int restarts, std::uint64_t seed,
                 int max_iterations, int jobs, const std::string& out_path,
                 const std::string& decisions_path, const std::vector<std::string>& parser_ids) {
  const std::optional<Method> method = method_from_name(method_name_arg);
  if (!method) throw std::invalid_argument("unknown method: " + method_name_arg);
  const std::size_t min_files = (*method == Method::Greedy) ? 3 : 2;
  if (files.size() < min_files) {
    throw std::invalid_argument(std::string("method ") + method_name_arg + " needs at least " +
                                std::to_string(min_files) + " input files, got " +
                                std::to_string(files.size()));
  }
  std::string file_list;
  for (const std::string& f : files) file_list += (file_list.empty() ? "" : ",") + f;
  run_header("ensemble", {{"method", method_name_arg},
                          {"theta", theta ? fixed4(*theta) : "none"},
                          {"restarts", std::to_string(restarts)},
                          {"seed", std::to_string(seed)},
                          {"jobs", std::to_string(jobs)},
                          {"files", file_list}});

  const AlignResult aligned = align_parser_outputs(files, parser_ids);
  for (const std::string& id : aligned.dropped_ids) {
    std::cerr << "warning: sentence " << id << " dropped during alignment\n";
  }
  DistillOptions opts;
  opts.method = *method;
  opts.theta = theta;
  opts.search = search_config(restarts, seed, max_iterations);
  opts.jobs = jobs;

  std::vector<EnsembleDecision> decisions(aligned.sets.size());
  parallel_for(aligned.sets.size(), jobs, [&](std::size_t i) {
    decisions[i] = run_selection(aligned.sets[i], opts.method, opts.theta, opts.search);
  });

  std::vector<SilverRecord> records;
  for (std::size_t i = 0; i < aligned.sets.size(); ++i) {
    const EnsembleDecision& d = decisions[i];
    if (d.discarded_by_threshold) {
      std::cerr << "note: sentence " << d.sentence_id << " discarded by threshold\n";
      continue;
    }
    const Candidate& chosen = aligned.sets[i].candidates[*d.chosen_index];
    SilverRecord record;
    record.sentence_id = aligned.sets[i].sentence_id;
    if (const std::string* snt = chosen.graph.metadata_value("snt")) record.sentence_text = *snt;
    record.graph = chosen.graph;
    record.source_parser_id = chosen.source_parser_id;
    record.method = opts.method;
    record.max_pair_score = d.max_pair_score;
    records.push_back(std::move(record));
  }
  atomic_write_file(out_path, silver_corpus_to_text(records));
  if (!decisions_path.empty()) atomic_write_file(decisions_path, decisions_to_jsonl(decisions));
  return 0;
}

int cmd_distill(const std::vector<std::string>& files, const std::string& method_name_arg,
                std::optional<double> theta, int restarts, std::uint64_t seed, int max_iterations,
                int jobs, const std::string& out_path, const std::string& stats_path,
                const std::string& decisions_path, const std::vector<std::string>& parser_ids,
                const std::string& mix_gold_path, const std::string& mix_mode_name,
                double mix_ratio, std::optional<std::size_t> mix_count, std::uint64_t mix_seed) {
  const std::optional<Method> method = method_from_name(method_name_arg);
  if (!method) throw std::invalid_argument("unknown method: " + method_name_arg);
  const std::size_t min_files = (*method == Method::Greedy) ? 3 : 2;
  if (files.size() < min_files) {
    throw std::invalid_argument(std::string("method ") + method_name_arg + " needs at least " +
                                std::to_string(min_files) + " input files, got " +
                                std::to_string(files.size()));
  }
  run_header("distill", {{"method", method_name_arg},
                         {"theta", theta ? fixed4(*theta) : "none"},
                         {"restarts", std::to_string(restarts)},
                         {"seed", std::to_string(seed)},
                         {"jobs", std::to_string(jobs)},
                         {"out", out_path}});

  const AlignResult aligned = align_parser_outputs(files, parser_ids);
  DistillOptions opts;
  opts.method = *method;
  opts.theta = theta;
  opts.search = search_config(restarts, seed, max_iterations);
  opts.jobs = jobs;
  DistillResult result = distill(aligned.sets, opts);
  absorb_alignment_losses(result.stats, aligned);

  for (const std::string& id : result.stats.dropped_ids) {
    std::cerr << "warning: sentence " << id << " dropped\n";
  }

  if (!mix_gold_path.empty()) {
    MixSpec spec;
    if (mix_mode_name == "concat") {
      spec.mode = MixSpec::Mode::Concat;
    } else if (mix_mode_name == "ratio") {
      spec.mode = MixSpec::Mode::Ratio;
      spec.ratio = mix_ratio;
    } else if (mix_mode_name == "random-equal") {
      spec.mode = MixSpec::Mode::RandomEqual;
      spec.seed = mix_seed;
      spec.per_source = mix_count;
    } else {
      throw std::invalid_argument("unknown mix mode: " + mix_mode_name);
    }
    const std::vector<AmrGraph> gold = read_records_or_die(mix_gold_path);
    std::vector<AmrGraph> silver;
    silver.reserve(result.records.size());
    for (const SilverRecord& r : result.records) silver.push_back(silver_to_record(r));
    atomic_write_file(out_path, corpus_to_text(mix_corpora(gold, silver, spec)));
  } else {
    atomic_write_file(out_path, silver_corpus_to_text(result.records));
  }

  if (!stats_path.empty()) atomic_write_file(stats_path, stats_to_json(result.stats, opts));
  if (!decisions_path.empty()) {
    atomic_write_file(decisions_path, decisions_to_jsonl(result.decisions));
  }

  std::cerr << "selected " << result.stats.selected_total() << " / " << result.stats.total
            << " sentences (" << result.stats.discarded << " discarded, " << result.stats.dropped
            << " dropped)\n";
  for (const auto& [parser, count] : result.stats.selected_by_parser) {
    std::cerr << "  " << parser << "\t" << count << "\n";
  }
  return 0;
}

int cmd_filter_gen(const std::string& in_path, const std::string& out_path, double low,
                   double high, const std::string& smoothing_arg, const std::string& report_path) {
  BleuSmoothing smoothing;
  if (smoothing_arg == "add-one") {
    smoothing = BleuSmoothing::AddOne;
  } else if (smoothing_arg == "none") {
    smoothing = BleuSmoothing::None;
  } else {
    throw std::invalid_argument("unknown smoothing: " + smoothing_arg);
  }
  run_header("filter-gen", {{"in", in_path},
                            {"out", out_path},
                            {"low", fixed4(low)},
                            {"high", fixed4(high)},
                            {"smoothing", smoothing_arg}});
  const std::vector<GenPair> pairs = read_gen_pairs_tsv(read_file(in_path), smoothing);
  const std::vector<GenPair> kept = filter_generated(pairs, low, high);
  atomic_write_file(out_path, gen_pairs_to_tsv(kept));
  if (!report_path.empty()) {
    nlohmann::ordered_json j;
    j["total"] = pairs.size();
    j["kept"] = kept.size();
    j["excluded"] = pairs.size() - kept.size();
    j["low"] = low;
    j["high"] = high;
    j["smoothing"] = smoothing_name(smoothing);
    atomic_write_file(report_path, j.dump(2) + "\n");
  }
  std::cerr << "kept " << kept.size() << " of " << pairs.size() << " pairs\n";
  return 0;
}

int cmd_stats(const std::string& corpus_path, const std::string& train_path,
              const std::string& test_path, bool as_json) {
  if (!train_path.empty() || !test_path.empty()) {
    if (train_path.empty() || test_path.empty()) {
      throw std::invalid_argument("NE OOV diagnostics need both --train and --test");
    }
    run_header("stats", {{"train", train_path}, {"test", test_path}});
    const OovReport report =
        ne_type_oov(read_records_or_die(train_path), read_records_or_die(test_path));
    if (as_json) {
      nlohmann::ordered_json j;
      j["ne_occurrences"] = report.test_occurrences;
      j["oov_occurrences"] = report.oov_occurrences;
      if (report.defined()) {
        j["oov_ratio"] = report.ratio();
      } else {
        j["oov_ratio"] = nullptr;
      }
      j["missing_types"] = report.missing_types;
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "ne_occurrences: " << report.test_occurrences << "\n"
                << "oov_occurrences: " << report.oov_occurrences << "\n";
      if (report.defined()) {
        std::cout << "oov_ratio: " << fixed4(report.ratio()) << "\n";
      } else {
        std::cout << "oov_ratio: undefined (no named-entity occurrences)\n";
      }
      std::cout << "missing_types:";
      for (const std::string& t : report.missing_types) std::cout << " " << t;
      std::cout << "\n";
    }
    return 0;
  }
  if (corpus_path.empty()) throw std::invalid_argument("stats needs a corpus file");
  run_header("stats", {{"corpus", corpus_path}});
  const CorpusStats stats = corpus_stats_text(read_file(corpus_path));
  if (as_json) {
    nlohmann::ordered_json j;
    j["sentences"] = stats.sentences;
    j["tokens"] = stats.tokens;
    j["unparseable"] = stats.unparseable;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "sentences: " << stats.sentences << "\n"
              << "tokens: " << stats.tokens << "\n"
              << "unparseable: " << stats.unparseable << "\n";
  }
  return 0;
}

int cmd_validate(const std::string& corpus_path, bool strict) {
  run_header("validate", {{"corpus", corpus_path}});
  const CorpusReadResult read = read_corpus_text(read_file(corpus_path));
  std::size_t bad = 0;
  for (const DroppedRecord& d : read.dropped) {
    ++bad;
    std::cout << (d.id.empty() ? "record " + std::to_string(d.index) : d.id) << ": " << d.reason
              << "\n";
  }
  for (std::size_t i = 0; i < read.records.size(); ++i) {
    const AmrGraph& g = read.records[i];
    const ValidationReport report = validate(g);
    std::string id = g.id();
    if (id.empty()) id = "record " + std::to_string(i + 1);
    if (report.connected) {
      std::cout << id << ": ok\n";
    } else {
      ++bad;
      for (const std::string& issue : report.issues) std::cout << id << ": " << issue << "\n";
    }
  }
  std::cout << read.records.size() << " parsed, " << read.dropped.size() << " unreadable, " << bad
            << " with findings\n";
  return (strict && bad > 0) ? 1 : 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
  static const std::vector<std::string> known = {"score",      "ensemble", "distill",
                                                 "filter-gen", "stats",    "validate"};
  if (args.empty() || args[0] == "-h" || args[0] == "--help" || args[0] == "help") {
    std::cout << kUsage;
    return args.empty() ? 2 : 0;
  }
  if (std::find(known.begin(), known.end(), args[0]) == known.end()) {
    std::cerr << "unknown command: " << args[0] << "\n\n" << kUsage;
    return 2;
  }

  CLI::App app{"Smatch scoring, ensemble selection and silver-data distillation for AMR"};
  app.require_subcommand(1);

  // score
  auto* score = app.add_subcommand("score", "corpus Smatch between two AMR files");
  std::string gold_path, pred_path, per_sentence;
  int restarts = 4;
  std::uint64_t seed = 0;
  int max_iterations = 1000;
  int jobs = 1;
  score->add_option("--gold", gold_path, "gold AMR file")->required();
  score->add_option("--pred", pred_path, "predicted AMR file")->required();
  score->add_option("--restarts", restarts, "hill-climb restarts");
  score->add_option("--seed", seed, "search seed");
  score->add_option("--max-iterations", max_iterations, "hill-climb iteration cap");
  score->add_option("--jobs", jobs, "worker threads");
  score->add_option("--per-sentence", per_sentence, "write per-sentence id<TAB>f1 lines");

  // ensemble
  auto* ensemble = app.add_subcommand("ensemble", "per-sentence candidate selection");
  std::vector<std::string> ens_files;
  std::string ens_method = "greedy", ens_out = "-", ens_decisions, ens_parser_ids;
  double ens_theta = -1.0;
  ensemble->add_option("files", ens_files, "parser output AMR files")->required();
  ensemble->add_option("--method", ens_method, "greedy | average | majority");
  ensemble->add_option("--theta", ens_theta, "discard threshold in [0, 1]");
  ensemble->add_option("--restarts", restarts, "hill-climb restarts");
  ensemble->add_option("--seed", seed, "search seed");
  ensemble->add_option("--max-iterations", max_iterations, "hill-climb iteration cap");
  ensemble->add_option("--jobs", jobs, "worker threads");
  ensemble->add_option("--out", ens_out, "selected records output ('-' for stdout)");
  ensemble->add_option("--decisions", ens_decisions, "JSONL decision log");
  ensemble->add_option("--parser-ids", ens_parser_ids, "comma-separated provenance ids, one per file");

  // distill
  auto* distill_cmd = app.add_subcommand("distill", "selection, validation and stats");
  std::vector<std::string> dist_files;
  std::string dist_method = "greedy", dist_out = "-", dist_stats, dist_decisions, dist_parser_ids;
  std::string mix_gold, mix_mode = "concat";
  double dist_theta = -1.0, mix_ratio = 1.0;
  std::int64_t mix_count = -1;
  std::uint64_t mix_seed = 0;
  distill_cmd->add_option("files", dist_files, "parser output AMR files")->required();
  distill_cmd->add_option("--method", dist_method, "greedy | average | majority");
  distill_cmd->add_option("--theta", dist_theta, "discard threshold in [0, 1]");
  distill_cmd->add_option("--restarts", restarts, "hill-climb restarts");
  distill_cmd->add_option("--seed", seed, "search seed");
  distill_cmd->add_option("--max-iterations", max_iterations, "hill-climb iteration cap");
  distill_cmd->add_option("--jobs", jobs, "worker threads");
  distill_cmd->add_option("--out", dist_out, "silver corpus output ('-' for stdout)");
  distill_cmd->add_option("--stats", dist_stats, "JSON stats report");
  distill_cmd->add_option("--decisions", dist_decisions, "JSONL decision log");
  distill_cmd->add_option("--parser-ids", dist_parser_ids, "comma-separated provenance ids, one per file");
  distill_cmd->add_option("--mix-gold", mix_gold, "gold corpus to mix with the silver output");
  distill_cmd->add_option("--mix-mode", mix_mode, "concat | ratio | random-equal");
  distill_cmd->add_option("--mix-ratio", mix_ratio, "leading fraction of silver kept (ratio mode)");
  distill_cmd->add_option("--mix-count", mix_count, "records per source (random-equal mode)");
  distill_cmd->add_option("--mix-seed", mix_seed, "sampling seed (random-equal mode)");

  // filter-gen
  auto* filter = app.add_subcommand("filter-gen", "BLEU-band filtering of generated pairs");
  std::string fg_in, fg_out = "-", fg_smoothing = "add-one", fg_report;
  double fg_low = 0.1, fg_high = 0.9;
  filter->add_option("--in", fg_in, "TSV of id<TAB>original<TAB>generated")->required();
  filter->add_option("--out", fg_out, "kept pairs TSV ('-' for stdout)");
  filter->add_option("--low", fg_low, "lower BLEU bound");
  filter->add_option("--high", fg_high, "upper BLEU bound");
  filter->add_option("--smoothing", fg_smoothing, "add-one | none");
  filter->add_option("--report", fg_report, "JSON filter report");

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "corpus statistics / NE-type OOV");
  std::string stats_corpus, stats_train, stats_test;
  bool stats_json = false;
  stats_cmd->add_option("corpus", stats_corpus, "AMR corpus file ('-' for stdin)");
  stats_cmd->add_option("--train", stats_train, "training corpus (OOV mode)");
  stats_cmd->add_option("--test", stats_test, "test corpus (OOV mode)");
  stats_cmd->add_flag("--json", stats_json, "emit JSON");

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "structural checks per record");
  std::string val_corpus;
  bool val_strict = false;
  validate_cmd->add_option("corpus", val_corpus, "AMR corpus file ('-' for stdin)")->required();
  validate_cmd->add_flag("--strict", val_strict, "exit nonzero when findings exist");

  std::vector<const char*> argv;
  argv.push_back("mbse");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*score) {
      return cmd_score(gold_path, pred_path, restarts, seed, max_iterations, jobs, per_sentence);
    }
    if (*ensemble) {
      std::optional<double> theta;
      if (ensemble->count("--theta")) theta = ens_theta;
      return cmd_ensemble(ens_files, ens_method, theta, restarts, seed, max_iterations, jobs,
                          ens_out, ens_decisions, split_commas(ens_parser_ids));
    }
    if (*distill_cmd) {
      std::optional<double> theta;
      if (distill_cmd->count("--theta")) theta = dist_theta;
      std::optional<std::size_t> count;
      if (distill_cmd->count("--mix-count")) {
        if (mix_count < 0) throw std::invalid_argument("--mix-count must be non-negative");
        count = std::size_t(mix_count);
      }
      return cmd_distill(dist_files, dist_method, theta, restarts, seed, max_iterations, jobs,
                         dist_out, dist_stats, dist_decisions, split_commas(dist_parser_ids), mix_gold, mix_mode,
                         mix_ratio, count, mix_seed);
    }
    if (*filter) return cmd_filter_gen(fg_in, fg_out, fg_low, fg_high, fg_smoothing, fg_report);
    if (*stats_cmd) return cmd_stats(stats_corpus, stats_train, stats_test, stats_json);
    if (*validate_cmd) return cmd_validate(val_corpus, val_strict);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args);
}

}  // namespace mbse::cli
