#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "mbse/pipeline.hpp"
#include "mbse/util.hpp"
#include "test_util.hpp"

using namespace mbse;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("mbse_test_" + tag + "_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) const {
    const fs::path p = path / name;
    std::ofstream(p, std::ios::binary) << content;
    return p.string();
  }
};

std::string record(const std::string& id, const std::string& snt, const std::string& penman) {
  return "# ::id " + id + "\n# ::snt " + snt + "\n" + penman + "\n\n";
}

}  // namespace

TEST_CASE("alignment by id") {
  TempDir dir("align_id");
  const std::string f1 = dir.file("p1.amr", record("s1", "one", "(a / alpha)") +
                                                record("s2", "two", "(b / beta)"));
  const std::string f2 = dir.file("p2.amr", record("s2", "two", "(b2 / beta)") +
                                                record("s1", "one", "(a2 / alpha)"));
  const std::string f3 = dir.file("p3.amr", record("s1", "one", "(a3 / alpha)") +
                                                record("s2", "two", "(b3 / gamma)"));
  const AlignResult r = align_parser_outputs({f1, f2, f3});
  CHECK(r.total_sentences == 2);
  CHECK(r.dropped == 0);
  REQUIRE(r.sets.size() == 2);
  CHECK(r.sets[0].sentence_id == "s1");
  CHECK(r.sets[0].candidates.size() == 3);
  CHECK(r.sets[0].candidates[1].graph.root() == "a2");  // id-matched across order
  CHECK(r.parser_ids == std::vector<std::string>{"p1", "p2", "p3"});
}

TEST_CASE("alignment errors") {
  TempDir dir("align_err");
  SUBCASE("fewer than two files") {
    const std::string f1 = dir.file("p1.amr", record("s1", "x", "(a / alpha)"));
    CHECK_THROWS_AS((void)align_parser_outputs({f1}), std::invalid_argument);
  }
  SUBCASE("duplicate ids within a file") {
    const std::string f1 = dir.file("p1.amr", record("s1", "x", "(a / alpha)") +
                                                  record("s1", "x", "(b / beta)"));
    const std::string f2 = dir.file("p2.amr", record("s1", "x", "(c / alpha)") +
                                                  record("s2", "y", "(d / beta)"));
    CHECK_THROWS_AS((void)align_parser_outputs({f1, f2}), std::invalid_argument);
  }
  SUBCASE("positional counts must match") {
    const std::string f1 = dir.file("p1.amr", "(a / alpha)\n\n(b / beta)\n\n");
    const std::string f2 = dir.file("p2.amr", "(c / alpha)\n\n");
    CHECK_THROWS_AS((void)align_parser_outputs({f1, f2}), std::invalid_argument);
  }
}

TEST_CASE("corrupt records drop the whole sentence and are counted") {
  TempDir dir("align_drop");
  const std::string f1 = dir.file("p1.amr", record("s1", "one", "(a / alpha)") +
                                                record("s2", "two", "(b / beta)") +
                                                record("s3", "three", "(c / gamma)"));
  // s2's record carries invalid utf8 in the penman body
  const std::string f2 =
      dir.file("p2.amr", record("s1", "one", "(a2 / alpha)") +
                             "# ::id s2\n(b2 / be\xff\xfeta)\n\n" +
                             record("s3", "three", "(c2 / gamma)"));
  const std::string f3 = dir.file("p3.amr", record("s1", "one", "(a3 / alpha)") +
                                                record("s2", "two", "(b3 / beta)") +
                                                record("s3", "three", "(c3 / gamma)"));
  const AlignResult r = align_parser_outputs({f1, f2, f3});
  CHECK(r.total_sentences == 3);
  CHECK(r.dropped == 1);
  REQUIRE(r.dropped_ids.size() == 1);
  CHECK(r.dropped_ids[0] == "s2");
  CHECK(r.sets.size() == 2);
}

TEST_CASE("positional alignment without ids") {
  TempDir dir("align_pos");
  const std::string f1 = dir.file("p1.amr", "(a / alpha)\n\n(b / beta)\n\n");
  const std::string f2 = dir.file("p2.amr", "(c / alpha)\n\n(d / beta)\n\n");
  const AlignResult r = align_parser_outputs({f1, f2}, {"x", "y"});
  CHECK(r.total_sentences == 2);
  REQUIRE(r.sets.size() == 2);
  CHECK(r.sets[0].sentence_id == "1");
  CHECK(r.sets[1].candidates[1].source_parser_id == "y");
}

TEST_CASE("distill reconciles selected, discarded and dropped") {
  auto cand = [](const std::string& parser, const std::string& text) {
    return Candidate{parser, parse_penman(text)};
  };

  SUBCASE("identical candidates select parser0 everywhere") {
    std::vector<CandidateSet> sets;
    for (int s = 0; s < 2; ++s) {
      CandidateSet cs;
      cs.sentence_id = "s" + std::to_string(s);
      cs.candidates = {cand("parser0", "(a / alpha)"), cand("parser1", "(b / alpha)"),
                       cand("parser2", "(c / alpha)")};
      sets.push_back(cs);
    }
    DistillOptions opts;
    const DistillResult r = distill(sets, opts);
    CHECK(r.stats.total == 2);
    CHECK(r.stats.selected_total() == 2);
    CHECK(r.stats.selected_by_parser.at("parser0") == 2);
    CHECK(r.stats.discarded == 0);
    CHECK(r.stats.dropped == 0);
    REQUIRE(r.records.size() == 2);
    CHECK(r.records[0].source_parser_id == "parser0");
    CHECK(r.records[0].max_pair_score == doctest::Approx(1.0));
  }

  SUBCASE("theta discards low-consensus sentences") {
    CandidateSet cs;
    cs.sentence_id = "s0";
    cs.candidates = {cand("p0", "(a / alpha)"), cand("p1", "(b / beta)"),
                     cand("p2", "(c / gamma)")};
    DistillOptions opts;
    opts.theta = 0.95;
    const DistillResult r = distill({cs}, opts);
    CHECK(r.stats.discarded == 1);
    CHECK(r.stats.selected_total() == 0);
    CHECK(r.records.empty());
    CHECK(r.stats.selected_total() + r.stats.discarded + r.stats.dropped == r.stats.total);
  }

  SUBCASE("disconnected chosen graphs are dropped") {
    const std::string fragmented = "(a / alpha)\n(z / zeta)";
    CandidateSet cs;
    cs.sentence_id = "s0";
    cs.candidates = {cand("p0", fragmented), cand("p1", fragmented), cand("p2", fragmented)};
    const DistillResult r = distill({cs}, DistillOptions{});
    CHECK(r.stats.dropped == 1);
    CHECK(r.stats.selected_total() == 0);
    REQUIRE(r.stats.dropped_ids.size() == 1);
    CHECK(r.stats.dropped_ids[0] == "s0");
  }
}

TEST_CASE("mix corpora") {
  auto mk = [](const std::string& id) {
    AmrGraph g = parse_penman("(a / alpha)");
    g.set_metadata("id", id);
    return g;
  };
  std::vector<AmrGraph> gold = {mk("g1"), mk("g2")};
  std::vector<AmrGraph> silver = {mk("s1"), mk("s2"), mk("s3")};

  SUBCASE("concat keeps gold first") {
    MixSpec spec;
    const std::vector<AmrGraph> out = mix_corpora(gold, silver, spec);
    REQUIRE(out.size() == 5);
    CHECK(out[0].id() == "g1");
    CHECK(out[2].id() == "s1");
    CHECK(out[4].id() == "s3");
  }
  SUBCASE("ratio keeps a leading fraction of the second corpus") {
    MixSpec spec;
    spec.mode = MixSpec::Mode::Ratio;
    spec.ratio = 0.5;
    const std::vector<AmrGraph> out = mix_corpora(gold, silver, spec);
    REQUIRE(out.size() == 4);  // 2 gold + ceil(0.5 * 3)
    CHECK(out[3].id() == "s2");
    spec.ratio = 0.0;
    CHECK_THROWS_AS((void)mix_corpora(gold, silver, spec), std::invalid_argument);
    spec.ratio = 1.5;
    CHECK_THROWS_AS((void)mix_corpora(gold, silver, spec), std::invalid_argument);
  }
  SUBCASE("random-equal draws per-source counts deterministically") {
    std::vector<AmrGraph> src1, src2;
    for (int i = 0; i < 10; ++i) src1.push_back(mk("a" + std::to_string(i)));
    for (int i = 0; i < 10; ++i) src2.push_back(mk("b" + std::to_string(i)));
    MixSpec spec;
    spec.mode = MixSpec::Mode::RandomEqual;
    spec.seed = 42;
    spec.per_source = 5;
    const std::vector<AmrGraph> first = mix_corpora(src1, src2, spec);
    const std::vector<AmrGraph> second = mix_corpora(src1, src2, spec);
    REQUIRE(first.size() == 10);
    for (std::size_t i = 0; i < first.size(); ++i) CHECK(first[i].id() == second[i].id());
    std::size_t from_first = 0;
    for (const AmrGraph& g : first) from_first += g.id()[0] == 'a';
    CHECK(from_first == 5);

    spec.per_source = 12;
    CHECK_THROWS_AS((void)mix_corpora(src1, src2, spec), std::invalid_argument);
  }
}

TEST_CASE("ne type oov") {
  auto with_ne = [](const std::string& type, const std::string& name) {
    return parse_penman("(x / " + type + " :name (n / name :op1 \"" + name + "\"))");
  };
  SUBCASE("hand-checked ratio") {
    const std::vector<AmrGraph> train = {with_ne("country", "France"), with_ne("person", "Ada")};
    const std::vector<AmrGraph> test = {with_ne("country", "Chad"), with_ne("city", "Rome"),
                                        with_ne("city", "Pisa")};
    const OovReport r = ne_type_oov(train, test);
    CHECK(r.test_occurrences == 3);
    CHECK(r.oov_occurrences == 2);
    CHECK(r.ratio() == doctest::Approx(2.0 / 3.0));
    CHECK(r.missing_types == std::vector<std::string>{"city"});
  }
  SUBCASE("covered types give zero") {
    const std::vector<AmrGraph> train = {with_ne("country", "France"), with_ne("city", "Rome")};
    const std::vector<AmrGraph> test = {with_ne("city", "Pisa")};
    CHECK(ne_type_oov(train, test).ratio() == 0.0);
  }
  SUBCASE("no occurrences is a distinct signal, not zero") {
    const std::vector<AmrGraph> train = {with_ne("country", "France")};
    const std::vector<AmrGraph> test = {parse_penman("(a / alpha)")};
    const OovReport r = ne_type_oov(train, test);
    CHECK_FALSE(r.defined());
    CHECK_THROWS_AS((void)r.ratio(), std::domain_error);
  }
  SUBCASE("growing the training corpus never raises the ratio") {
    std::mt19937_64 rng(661);
    const std::vector<std::string> types = {"country", "city", "person", "river"};
    std::vector<AmrGraph> test;
    for (int i = 0; i < 10; ++i) {
      test.push_back(with_ne(types[rng() % types.size()], "n" + std::to_string(i)));
    }
    std::vector<AmrGraph> train;
    double previous = 1.0;
    for (int i = 0; i < 8; ++i) {
      train.push_back(with_ne(types[rng() % types.size()], "t" + std::to_string(i)));
      const double ratio = ne_type_oov(train, test).ratio();
      CHECK(ratio <= previous);
      previous = ratio;
    }
  }
}

TEST_CASE("corpus stats") {
  SUBCASE("empty corpus") {
    const CorpusStats s = corpus_stats_text("");
    CHECK(s.sentences == 0);
    CHECK(s.tokens == 0);
  }
  SUBCASE("snt tokens") {
    const CorpusStats s =
        corpus_stats_text("# ::snt a b\n(x / alpha)\n\n# ::snt c\n(y / beta)\n");
    CHECK(s.sentences == 2);
    CHECK(s.tokens == 3);
  }
  SUBCASE("tok wins over snt") {
    const CorpusStats s = corpus_stats_text("# ::snt a b\n# ::tok a b .\n(x / alpha)\n");
    CHECK(s.tokens == 3);
  }
  SUBCASE("unparseable records are counted, not fatal") {
    const CorpusStats s = corpus_stats_text("# ::snt a b\n(x / alpha\n\n# ::snt c\n(y / beta)\n");
    CHECK(s.sentences == 1);
    CHECK(s.unparseable == 1);
  }
}

TEST_CASE("silver records serialize with provenance metadata") {
  SilverRecord r;
  r.sentence_id = "s1";
  r.sentence_text = "The boy wants to go.";
  r.graph = parse_penman("# ::id orig\n# ::extra dropme\n(w / want-01 :ARG0 (b / boy))");
  r.source_parser_id = "parserX";
  r.method = Method::Greedy;
  r.max_pair_score = 0.875;
  const std::string text = silver_corpus_to_text({r});
  CHECK(text.find("# ::id s1\n") == 0);
  CHECK(text.find("# ::snt The boy wants to go.\n") != std::string::npos);
  CHECK(text.find("# ::mbse-source parserX\n") != std::string::npos);
  CHECK(text.find("# ::mbse-score 0.8750\n") != std::string::npos);
  CHECK(text.find("dropme") == std::string::npos);
  // reparses into the same triples
  const CorpusReadResult back = read_corpus_text(text);
  REQUIRE(back.records.size() == 1);
  CHECK(testutil::sorted_triple_keys(back.records[0]) == testutil::sorted_triple_keys(r.graph));
}

TEST_CASE("stats reconciliation invariant over a randomized pipeline") {
  std::mt19937_64 rng(808);
  std::vector<CandidateSet> sets;
  for (int s = 0; s < 40; ++s) {
    CandidateSet cs;
    cs.sentence_id = "s" + std::to_string(s);
    const AmrGraph base = testutil::random_graph(rng, 5);
    for (int c = 0; c < 3; ++c) {
      AmrGraph g = (rng() % 4 == 0) ? testutil::random_graph(rng, 5)
                                    : testutil::perturb(base, rng, rng() % 2);
      if (s % 13 == 0) {
        g.add_node("island" + std::to_string(c), "orphan");
      }
      cs.candidates.push_back(Candidate{"p" + std::to_string(c), g});
    }
    sets.push_back(cs);
  }
  for (const Method method : {Method::Greedy, Method::Average, Method::Majority}) {
    DistillOptions opts;
    opts.method = method;
    opts.theta = 0.6;
    const DistillResult r = distill(sets, opts);
    CHECK(r.stats.total == 40);
    CHECK(r.stats.selected_total() + r.stats.discarded + r.stats.dropped == r.stats.total);
    CHECK(r.records.size() == r.stats.selected_total());
  }
}

TEST_CASE("decision log and stats report are well-formed and deterministic") {
  CandidateSet cs;
  cs.sentence_id = "s1";
  cs.candidates = {Candidate{"p0", parse_penman("(a / alpha)")},
                   Candidate{"p1", parse_penman("(b / alpha)")},
                   Candidate{"p2", parse_penman("(c / beta)")}};
  DistillOptions opts;
  const DistillResult r1 = distill({cs}, opts);
  const DistillResult r2 = distill({cs}, opts);
  CHECK(stats_to_json(r1.stats, opts) == stats_to_json(r2.stats, opts));
  CHECK(decisions_to_jsonl(r1.decisions) == decisions_to_jsonl(r2.decisions));
  const std::string line = decisions_to_jsonl(r1.decisions);
  CHECK(line.find("\"sentence_id\":\"s1\"") != std::string::npos);
  CHECK(line.find("\"method\":\"greedy\"") != std::string::npos);
  CHECK(line.find("\"chosen_source\":\"p0\"") != std::string::npos);
}
