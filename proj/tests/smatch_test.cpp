#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "mbse/amr.hpp"
#include "mbse/smatch.hpp"
#include "mbse/util.hpp"
#include "test_util.hpp"

using namespace mbse;

#ifndef MBSE_TEST_DATA_DIR
#define MBSE_TEST_DATA_DIR "tests/data"
#endif

TEST_CASE("identity scores 1.0") {
  const CorpusReadResult corpus =
      read_corpus_text(read_file(std::string(MBSE_TEST_DATA_DIR) + "/corpus_a.amr"));
  for (const AmrGraph& g : corpus.records) {
    const PairResult r = smatch_pair(g, g);
    CHECK(r.score.f1() == doctest::Approx(1.0));
    CHECK(r.score.matched == r.score.total_pred);
  }
}

TEST_CASE("hand-checked pair: shared structure, one concept differs") {
  const AmrGraph g1 = parse_penman("(w / want-01 :ARG0 (b / boy))");
  const AmrGraph g2 = parse_penman("(x / want-01 :ARG0 (y / girl))");
  const PairResult r = smatch_pair(g1, g2);
  CHECK(r.score.matched == 3);
  CHECK(r.score.total_pred == 4);
  CHECK(r.score.total_gold == 4);
  CHECK(r.score.precision() == doctest::Approx(0.75));
  CHECK(r.score.recall() == doctest::Approx(0.75));
  CHECK(r.score.f1() == doctest::Approx(0.75));
  CHECK(exact_smatch(g1, g2).matched == 3);
}

TEST_CASE("only the TOP triple matches across disjoint single nodes") {
  const AmrGraph g1 = parse_penman("(a / alpha)");
  const AmrGraph g2 = parse_penman("(b / beta)");
  const PairResult r = smatch_pair(g1, g2);
  CHECK(r.score.matched == 1);
  CHECK(r.score.f1() == doctest::Approx(0.5));
  CHECK(exact_smatch(g1, g2).matched == 1);
}

TEST_CASE("exact oracle on an identical pair reaches the full triple count") {
  const AmrGraph g = parse_penman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))");
  const SmatchScore s = exact_smatch(g, g);
  CHECK(s.matched == 7);
  CHECK(s.matched == s.total_pred);
  CHECK(s.f1() == doctest::Approx(1.0));
}

TEST_CASE("exact oracle refuses beyond the variable limit") {
  AmrGraph g;
  for (int i = 0; i < 9; ++i) g.add_node("v" + std::to_string(i), "thing");
  g.set_root("v0");
  for (int i = 1; i < 9; ++i) g.add_edge("v0", "mod", "v" + std::to_string(i));
  CHECK_THROWS_AS((void)exact_smatch(g, g, 8), std::invalid_argument);
  CHECK_NOTHROW((void)exact_smatch(g, g, 9));
}

TEST_CASE("exact oracle is symmetric in F1") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 100; ++i) {
    const AmrGraph g1 = testutil::random_graph(rng, 5);
    const AmrGraph g2 = testutil::random_graph(rng, 5);
    const double forward = exact_smatch(g1, g2).f1();
    const double backward = exact_smatch(g2, g1).f1();
    CHECK(std::abs(forward - backward) < 1e-12);
  }
}

TEST_CASE("hill climb never beats the oracle and usually matches it") {
  std::mt19937_64 rng(31);
  SearchConfig cfg;
  cfg.restarts = 8;
  cfg.seed = 5;
  int equal = 0;
  const int trials = 150;
  for (int i = 0; i < trials; ++i) {
    const AmrGraph g1 = testutil::random_graph(rng, 6, 1, 1);
    const AmrGraph g2 = testutil::random_graph(rng, 6, 1, 1);
    const std::size_t exact = exact_smatch(g1, g2).matched;
    const std::size_t climbed = smatch_pair(g1, g2, cfg).score.matched;
    CHECK(climbed <= exact);
    if (climbed == exact) ++equal;
  }
  CHECK(equal >= trials * 99 / 100);
}

TEST_CASE("determinism and restart monotonicity") {
  std::mt19937_64 rng(47);
  const AmrGraph g1 = testutil::random_graph(rng, 8);
  const AmrGraph g2 = testutil::random_graph(rng, 8);
  SearchConfig cfg;
  cfg.seed = 9;

  const PairResult first = smatch_pair(g1, g2, cfg);
  const PairResult second = smatch_pair(g1, g2, cfg);
  CHECK(first.score.matched == second.score.matched);
  CHECK(first.alignment.mapping == second.alignment.mapping);

  std::size_t previous = 0;
  for (int restarts = 1; restarts <= 8; ++restarts) {
    cfg.restarts = restarts;
    const std::size_t matched = smatch_pair(g1, g2, cfg).score.matched;
    CHECK(matched >= previous);
    previous = matched;
  }
}

TEST_CASE("pure-random initialization stays sound") {
  std::mt19937_64 rng(83);
  SearchConfig cfg;
  cfg.random_init = true;
  cfg.restarts = 8;
  for (int i = 0; i < 30; ++i) {
    const AmrGraph g1 = testutil::random_graph(rng, 5, 1, 1);
    const AmrGraph g2 = testutil::random_graph(rng, 5, 1, 1);
    CHECK(smatch_pair(g1, g2, cfg).score.matched <= exact_smatch(g1, g2).matched);
  }
  const AmrGraph g = parse_penman("(w / want-01 :ARG0 (b / boy))");
  CHECK(smatch_pair(g, g, cfg).score.f1() == doctest::Approx(1.0));
}

TEST_CASE("alignment is injective and bounded by the smaller side") {
  std::mt19937_64 rng(59);
  for (int i = 0; i < 50; ++i) {
    const AmrGraph g1 = testutil::random_graph(rng, 7);
    const AmrGraph g2 = testutil::random_graph(rng, 7);
    const Alignment a = smatch_pair(g1, g2).alignment;
    REQUIRE(a.mapping.size() == g1.nodes().size());
    std::vector<std::ptrdiff_t> targets;
    for (std::ptrdiff_t t : a.mapping) {
      if (t >= 0) {
        CHECK(std::size_t(t) < g2.nodes().size());
        targets.push_back(t);
      }
    }
    std::sort(targets.begin(), targets.end());
    CHECK(std::adjacent_find(targets.begin(), targets.end()) == targets.end());
    CHECK(targets.size() <= std::min(g1.nodes().size(), g2.nodes().size()));
  }
}

TEST_CASE("corpus micro-average") {
  const AmrGraph perfect = parse_penman("# ::id s.1\n(w / want-01 :ARG0 (b / boy))");
  const AmrGraph pred2 = parse_penman("# ::id s.2\n(w / want-01 :ARG0 (b / boy))");
  const AmrGraph gold2 = parse_penman("# ::id s.2\n(x / want-01 :ARG0 (y / girl))");

  SUBCASE("two identical pairs") {
    const SmatchScore s = corpus_smatch({perfect, pred2}, {perfect, pred2});
    CHECK(s.f1() == doctest::Approx(1.0));
  }
  SUBCASE("perfect pair plus 3-of-4 pair") {
    const SmatchScore s = corpus_smatch({perfect, pred2}, {perfect, gold2});
    CHECK(s.matched == 7);
    CHECK(s.total_pred == 8);
    CHECK(s.total_gold == 8);
    CHECK(s.f1() == doctest::Approx(0.875));
  }
  SUBCASE("empty input") {
    CHECK_THROWS_AS((void)corpus_smatch({}, {}), std::invalid_argument);
  }
  SUBCASE("id mismatch") {
    const AmrGraph other = parse_penman("# ::id s.9\n(a / alpha)");
    CHECK_THROWS_AS((void)corpus_smatch({perfect}, {other}), std::invalid_argument);
  }
  SUBCASE("ids align out-of-order corpora") {
    const SmatchScore in_order = corpus_smatch({perfect, pred2}, {perfect, gold2});
    const SmatchScore shuffled = corpus_smatch({pred2, perfect}, {perfect, gold2});
    CHECK(in_order.matched == shuffled.matched);
  }
  SUBCASE("jobs do not change the result") {
    const SmatchScore serial = corpus_smatch({perfect, pred2}, {perfect, gold2}, {}, 1);
    const SmatchScore parallel = corpus_smatch({perfect, pred2}, {perfect, gold2}, {}, 4);
    CHECK(serial.matched == parallel.matched);
  }
}

TEST_CASE("unlabeled transform erases relation role differences") {
  const AmrGraph g1 = parse_penman("(w / want-01 :ARG0 (b / boy) :ARG1 (d / dog))");
  const AmrGraph g2 = parse_penman("(w / want-01 :ARG2 (b / boy) :mod (d / dog))");
  CHECK(smatch_pair(g1, g2).score.f1() < 1.0);
  const AmrGraph t1 = transform(g1, TransformMode::Unlabeled);
  const AmrGraph t2 = transform(g2, TransformMode::Unlabeled);
  CHECK(exact_smatch(t1, t2).f1() == doctest::Approx(1.0));
  // instance triples untouched
  CHECK(t1.nodes() == g1.nodes());
}

TEST_CASE("nowsd strips sense suffixes only") {
  const AmrGraph g = parse_penman("(w / want-01 :ARG0 (b / boy) :ARG1 (h / have-rel-role-91))");
  const AmrGraph t = transform(g, TransformMode::NoWsd);
  CHECK(t.concept_of("w") == "want");
  CHECK(t.concept_of("b") == "boy");
  CHECK(t.concept_of("h") == "have-rel-role");
  // attributes and roles unchanged
  CHECK(t.edges().size() == g.edges().size());
  CHECK(t.edges()[0].role == "ARG0");
}

TEST_CASE("scores on invalid graphs are refused") {
  AmrGraph bad;
  bad.add_node("a", "alpha");
  bad.set_root("a");
  bad.add_edge("a", "ARG0", "missing");
  const AmrGraph ok = parse_penman("(b / beta)");
  CHECK_THROWS_AS((void)smatch_pair(bad, ok), GraphError);
  CHECK_THROWS_AS((void)exact_smatch(bad, ok), GraphError);
}
