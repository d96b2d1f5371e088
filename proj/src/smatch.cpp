#include "mbse/smatch.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "mbse/util.hpp"

namespace mbse {

std::vector<std::pair<std::string, std::string>> Alignment::pairs(const AmrGraph& g1,
                                                                  const AmrGraph& g2) const {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < mapping.size(); ++i) {
    if (mapping[i] >= 0) {
      out.emplace_back(g1.nodes()[i].first, g2.nodes()[std::size_t(mapping[i])].first);
    }
  }
  return out;
}

namespace {

void seeded_shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng() % i]);
  }
}

std::size_t intersection_size(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t count = 0, i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

// Incremental scorer for alignments from graph A (the smaller variable set)
// into graph B. Matches decompose into per-variable items (instance concept,
// attributes, the TOP marker, self-loop roles) and per-variable-pair
// relation groups, so move gains touch only the affected rows and groups.
class PairScorer {
 public:
  PairScorer(const AmrGraph& a, const AmrGraph& b) {
    na_ = a.nodes().size();
    nb_ = b.nodes().size();
    concepts_a_ = collect_concepts(a);
    concepts_b_ = collect_concepts(b);
    items_a_ = collect_items(a);
    items_b_ = collect_items(b);

    unary_.assign(na_, std::vector<int>(nb_, 0));
    for (std::size_t i = 0; i < na_; ++i) {
      for (std::size_t j = 0; j < nb_; ++j) {
        unary_[i][j] = int(concepts_a_[i] == concepts_b_[j]) +
                       int(intersection_size(items_a_[i], items_b_[j]));
      }
    }

    adj_.assign(na_, {});
    std::unordered_map<std::uint64_t, std::size_t> group_of;
    for (const Edge& e : a.edges()) {
      const std::size_t u = *a.node_index(e.source);
      const std::size_t v = *a.node_index(e.target);
      if (u == v) continue;  // folded into unary items
      const std::uint64_t key = u * na_ + v;
      auto [it, fresh] = group_of.emplace(key, groups_.size());
      if (fresh) {
        groups_.push_back(Group{u, v, {}});
        adj_[u].push_back(it->second);
        adj_[v].push_back(it->second);
      }
      groups_[it->second].roles.push_back(lowercase_ascii(e.role));
    }
    for (Group& g : groups_) std::sort(g.roles.begin(), g.roles.end());

    for (const Edge& e : b.edges()) {
      const std::size_t u = *b.node_index(e.source);
      const std::size_t v = *b.node_index(e.target);
      if (u == v) continue;
      b_groups_[u * nb_ + v].push_back(lowercase_ascii(e.role));
    }
    for (auto& [key, roles] : b_groups_) std::sort(roles.begin(), roles.end());
  }

  std::size_t na() const { return na_; }
  std::size_t nb() const { return nb_; }
  const std::string& concept_a(std::size_t i) const { return concepts_a_[i]; }
  const std::string& concept_b(std::size_t j) const { return concepts_b_[j]; }

  int score(const std::vector<std::size_t>& m) const {
    int total = 0;
    for (std::size_t i = 0; i < na_; ++i) total += unary_[i][m[i]];
    for (const Group& g : groups_) total += group_contribution(g, m[g.u], m[g.v]);
    return total;
  }

  int remap_gain(const std::vector<std::size_t>& m, std::size_t i, std::size_t target) const {
    int gain = unary_[i][target] - unary_[i][m[i]];
    for (std::size_t gid : adj_[i]) {
      const Group& g = groups_[gid];
      const std::size_t x_old = m[g.u], y_old = m[g.v];
      const std::size_t x_new = (g.u == i) ? target : x_old;
      const std::size_t y_new = (g.v == i) ? target : y_old;
      gain += group_contribution(g, x_new, y_new) - group_contribution(g, x_old, y_old);
    }
    return gain;
  }

  int swap_gain(const std::vector<std::size_t>& m, std::size_t i, std::size_t k) const {
    int gain = unary_[i][m[k]] + unary_[k][m[i]] - unary_[i][m[i]] - unary_[k][m[k]];
    scratch_.clear();
    scratch_.insert(scratch_.end(), adj_[i].begin(), adj_[i].end());
    scratch_.insert(scratch_.end(), adj_[k].begin(), adj_[k].end());
    std::sort(scratch_.begin(), scratch_.end());
    scratch_.erase(std::unique(scratch_.begin(), scratch_.end()), scratch_.end());
    for (std::size_t gid : scratch_) {
      const Group& g = groups_[gid];
      auto moved = [&](std::size_t var) {
        if (var == i) return m[k];
        if (var == k) return m[i];
        return m[var];
      };
      gain += group_contribution(g, moved(g.u), moved(g.v)) -
              group_contribution(g, m[g.u], m[g.v]);
    }
    return gain;
  }

 private:
  struct Group {
    std::size_t u, v;
    std::vector<std::string> roles;  // lowercased, sorted
  };

  int group_contribution(const Group& g, std::size_t x, std::size_t y) const {
    auto it = b_groups_.find(x * nb_ + y);
    if (it == b_groups_.end()) return 0;
    return int(intersection_size(g.roles, it->second));
  }

  static std::vector<std::string> collect_concepts(const AmrGraph& g) {
    std::vector<std::string> out;
    out.reserve(g.nodes().size());
    for (const auto& [var, concept_label] : g.nodes()) out.push_back(concept_label);
    return out;
  }

  // Per-variable match items: attributes, the TOP marker, self-loop roles.
  static std::vector<std::vector<std::string>> collect_items(const AmrGraph& g) {
    std::vector<std::vector<std::string>> out(g.nodes().size());
    for (const Attribute& a : g.attributes()) {
      out[*g.node_index(a.source)].push_back(lowercase_ascii(a.role) + '\x1f' + a.value.text);
    }
    out[*g.node_index(g.root())].push_back("top\x1ftop");
    for (const Edge& e : g.edges()) {
      if (e.source == e.target) {
        out[*g.node_index(e.source)].push_back('\x02' + lowercase_ascii(e.role));
      }
    }
    for (auto& items : out) {
      std::sort(items.begin(), items.end());
      items.erase(std::unique(items.begin(), items.end()), items.end());
    }
    return out;
  }

  std::size_t na_ = 0, nb_ = 0;
  std::vector<std::string> concepts_a_, concepts_b_;
  std::vector<std::vector<std::string>> items_a_, items_b_;
  std::vector<std::vector<int>> unary_;
  std::vector<Group> groups_;
  std::vector<std::vector<std::size_t>> adj_;
  std::unordered_map<std::uint64_t, std::vector<std::string>> b_groups_;
  mutable std::vector<std::size_t> scratch_;
};

// Concept-equal variables paired first (seeded tie-breaks), leftovers random.
std::vector<std::size_t> smart_initial(const PairScorer& scorer, std::mt19937_64& rng) {
  const std::size_t na = scorer.na(), nb = scorer.nb();
  std::unordered_map<std::string, std::vector<std::size_t>> by_concept;
  for (std::size_t j = 0; j < nb; ++j) by_concept[scorer.concept_b(j)].push_back(j);

  std::vector<std::size_t> order(na);
  for (std::size_t i = 0; i < na; ++i) order[i] = i;
  seeded_shuffle(order, rng);

  std::vector<std::size_t> mapping(na, nb);
  std::vector<bool> used(nb, false);
  std::vector<std::size_t> deferred;
  for (std::size_t i : order) {
    auto it = by_concept.find(scorer.concept_a(i));
    std::vector<std::size_t> free;
    if (it != by_concept.end()) {
      for (std::size_t j : it->second) {
        if (!used[j]) free.push_back(j);
      }
    }
    if (free.empty()) {
      deferred.push_back(i);
      continue;
    }
    const std::size_t pick = free[rng() % free.size()];
    mapping[i] = pick;
    used[pick] = true;
  }
  std::vector<std::size_t> leftovers;
  for (std::size_t j = 0; j < nb; ++j) {
    if (!used[j]) leftovers.push_back(j);
  }
  seeded_shuffle(leftovers, rng);
  for (std::size_t k = 0; k < deferred.size(); ++k) mapping[deferred[k]] = leftovers[k];
  return mapping;
}

std::vector<std::size_t> random_initial(const PairScorer& scorer, std::mt19937_64& rng) {
  const std::size_t na = scorer.na(), nb = scorer.nb();
  std::vector<std::size_t> targets(nb);
  for (std::size_t j = 0; j < nb; ++j) targets[j] = j;
  seeded_shuffle(targets, rng);
  targets.resize(na);
  return targets;
}

// Best single-move improvement until a local optimum or the iteration cap;
// only strictly positive gains are accepted.
void climb(const PairScorer& scorer, std::vector<std::size_t>& mapping, int max_iterations) {
  const std::size_t na = scorer.na(), nb = scorer.nb();
  std::vector<bool> used(nb, false);
  for (std::size_t j : mapping) used[j] = true;

  for (int iter = 0; iter < max_iterations; ++iter) {
    int best_gain = 0;
    bool is_swap = false;
    std::size_t best_i = 0, best_other = 0;
    for (std::size_t i = 0; i < na; ++i) {
      for (std::size_t t = 0; t < nb; ++t) {
        if (used[t]) continue;
        const int gain = scorer.remap_gain(mapping, i, t);
        if (gain > best_gain) {
          best_gain = gain;
          is_swap = false;
          best_i = i;
          best_other = t;
        }
      }
    }
    for (std::size_t i = 0; i < na; ++i) {
      for (std::size_t k = i + 1; k < na; ++k) {
        const int gain = scorer.swap_gain(mapping, i, k);
        if (gain > best_gain) {
          best_gain = gain;
          is_swap = true;
          best_i = i;
          best_other = k;
        }
      }
    }
    if (best_gain <= 0) return;
    if (is_swap) {
      std::swap(mapping[best_i], mapping[best_other]);
    } else {
      used[mapping[best_i]] = false;
      used[best_other] = true;
      mapping[best_i] = best_other;
    }
  }
}

std::size_t triple_count(const AmrGraph& g) {
  return g.nodes().size() + g.edges().size() + g.attributes().size() + 1;
}

}  // namespace

PairResult smatch_pair(const AmrGraph& pred, const AmrGraph& gold, const SearchConfig& cfg) {
  pred.check();
  gold.check();
  if (cfg.restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  if (cfg.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");

  // Always map the smaller variable set into the larger.
  const bool swapped = pred.nodes().size() > gold.nodes().size();
  const AmrGraph& small = swapped ? gold : pred;
  const AmrGraph& large = swapped ? pred : gold;
  PairScorer scorer(small, large);

  int best = -1;
  std::vector<std::size_t> best_mapping;
  for (int r = 0; r < cfg.restarts; ++r) {
    std::mt19937_64 rng(mix64(cfg.seed + 0x517cc1b727220a95ULL * std::uint64_t(r + 1)));
    std::vector<std::size_t> mapping = (r == 0 && !cfg.random_init)
                                           ? smart_initial(scorer, rng)
                                           : random_initial(scorer, rng);
    climb(scorer, mapping, cfg.max_iterations);
    const int score = scorer.score(mapping);
    if (score > best) {
      best = score;
      best_mapping = mapping;
    }
  }

  PairResult result;
  result.score.matched = std::size_t(best);
  result.score.total_pred = triple_count(pred);
  result.score.total_gold = triple_count(gold);
  result.alignment.mapping.assign(pred.nodes().size(), -1);
  if (!swapped) {
    for (std::size_t i = 0; i < best_mapping.size(); ++i) {
      result.alignment.mapping[i] = std::ptrdiff_t(best_mapping[i]);
    }
  } else {
    for (std::size_t i = 0; i < best_mapping.size(); ++i) {
      result.alignment.mapping[best_mapping[i]] = std::ptrdiff_t(i);
    }
  }
  return result;
}

namespace {

// Triple-level template for the exhaustive search: arguments are variable
// indices when >= 0, literal text otherwise.
struct TripleTemplate {
  std::ptrdiff_t var1;
  std::ptrdiff_t var2;
  std::string rel;   // lowercased
  std::string text;  // arg2 literal when var2 < 0
  int kind;
};

std::vector<TripleTemplate> templates_of(const AmrGraph& g) {
  std::vector<TripleTemplate> out;
  for (const Triple& t : extract_triples(g)) {
    TripleTemplate tmpl;
    tmpl.kind = int(t.kind);
    tmpl.rel = lowercase_ascii(t.rel);
    tmpl.var1 = std::ptrdiff_t(*g.node_index(t.arg1));
    if (t.kind == TripleKind::Relation) {
      tmpl.var2 = std::ptrdiff_t(*g.node_index(t.arg2));
    } else {
      tmpl.var2 = -1;
      tmpl.text = t.arg2;
    }
    out.push_back(std::move(tmpl));
  }
  return out;
}

std::string render(const TripleTemplate& t, const std::vector<std::size_t>& m) {
  std::string key;
  key += char('0' + t.kind);
  key += '\x1f';
  key += std::to_string(m[std::size_t(t.var1)]);
  key += '\x1f';
  key += t.rel;
  key += '\x1f';
  key += (t.var2 >= 0) ? std::to_string(m[std::size_t(t.var2)]) : t.text;
  return key;
}

std::string render_b(const TripleTemplate& t) {
  std::string key;
  key += char('0' + t.kind);
  key += '\x1f';
  key += std::to_string(std::size_t(t.var1));
  key += '\x1f';
  key += t.rel;
  key += '\x1f';
  key += (t.var2 >= 0) ? std::to_string(std::size_t(t.var2)) : t.text;
  return key;
}

void enumerate_mappings(std::size_t i, std::vector<std::size_t>& mapping, std::vector<bool>& used,
                        const std::vector<TripleTemplate>& ta,
                        const std::unordered_set<std::string>& tb, std::size_t& best) {
  if (i == mapping.size()) {
    std::size_t count = 0;
    for (const TripleTemplate& t : ta) {
      if (tb.count(render(t, mapping))) ++count;
    }
    best = std::max(best, count);
    return;
  }
  for (std::size_t j = 0; j < used.size(); ++j) {
    if (used[j]) continue;
    used[j] = true;
    mapping[i] = j;
    enumerate_mappings(i + 1, mapping, used, ta, tb, best);
    used[j] = false;
  }
}

}  // namespace

SmatchScore exact_smatch(const AmrGraph& pred, const AmrGraph& gold, std::size_t var_limit) {
  pred.check();
  gold.check();
  const std::size_t smaller = std::min(pred.nodes().size(), gold.nodes().size());
  if (smaller > var_limit) {
    throw std::invalid_argument("exact_smatch: " + std::to_string(smaller) +
                                " variables exceed the limit of " + std::to_string(var_limit));
  }
  const bool swapped = pred.nodes().size() > gold.nodes().size();
  const AmrGraph& a = swapped ? gold : pred;
  const AmrGraph& b = swapped ? pred : gold;

  const std::vector<TripleTemplate> ta = templates_of(a);
  std::unordered_set<std::string> tb;
  for (const TripleTemplate& t : templates_of(b)) tb.insert(render_b(t));

  std::vector<std::size_t> mapping(a.nodes().size(), 0);
  std::vector<bool> used(b.nodes().size(), false);
  std::size_t best = 0;
  enumerate_mappings(0, mapping, used, ta, tb, best);

  SmatchScore score;
  score.matched = best;
  score.total_pred = triple_count(pred);
  score.total_gold = triple_count(gold);
  return score;
}

namespace {

// Pairs pred/gold by metadata id when both sides carry ids everywhere,
// otherwise by position with equal counts.
std::vector<std::pair<std::size_t, std::size_t>> pair_indices(const std::vector<AmrGraph>& pred,
                                                              const std::vector<AmrGraph>& gold) {
  if (pred.empty() || gold.empty()) throw std::invalid_argument("empty corpus");
  auto all_ids = [](const std::vector<AmrGraph>& v) {
    for (const AmrGraph& g : v) {
      if (g.id().empty()) return false;
    }
    return true;
  };
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (all_ids(pred) && all_ids(gold)) {
    std::unordered_map<std::string, std::size_t> gold_by_id;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (!gold_by_id.emplace(gold[i].id(), i).second) {
        throw std::invalid_argument("duplicate id in gold corpus: " + gold[i].id());
      }
    }
    if (pred.size() != gold.size()) {
      throw std::invalid_argument("id mismatch: corpora have different sizes");
    }
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (!seen.insert(pred[i].id()).second) {
        throw std::invalid_argument("duplicate id in pred corpus: " + pred[i].id());
      }
      auto it = gold_by_id.find(pred[i].id());
      if (it == gold_by_id.end()) {
        throw std::invalid_argument("id mismatch: " + pred[i].id() + " missing from gold");
      }
      pairs.emplace_back(i, it->second);
    }
  } else {
    if (pred.size() != gold.size()) {
      throw std::invalid_argument("corpora differ in size and lack ids: " +
                                  std::to_string(pred.size()) + " vs " +
                                  std::to_string(gold.size()));
    }
    for (std::size_t i = 0; i < pred.size(); ++i) pairs.emplace_back(i, i);
  }
  return pairs;
}

}  // namespace

std::vector<SmatchScore> sentence_smatch(const std::vector<AmrGraph>& pred,
                                         const std::vector<AmrGraph>& gold,
                                         const SearchConfig& cfg, int jobs) {
  const auto pairs = pair_indices(pred, gold);
  std::vector<SmatchScore> scores(pairs.size());
  parallel_for(pairs.size(), jobs, [&](std::size_t k) {
    scores[k] = smatch_pair(pred[pairs[k].first], gold[pairs[k].second], cfg).score;
  });
  return scores;
}

SmatchScore corpus_smatch(const std::vector<AmrGraph>& pred, const std::vector<AmrGraph>& gold,
                          const SearchConfig& cfg, int jobs) {
  SmatchScore total;
  for (const SmatchScore& s : sentence_smatch(pred, gold, cfg, jobs)) {
    total.matched += s.matched;
    total.total_pred += s.total_pred;
    total.total_gold += s.total_gold;
  }
  return total;
}

namespace {

std::string strip_sense(const std::string& concept_label) {
  const std::size_t n = concept_label.size();
  if (n >= 4 && concept_label[n - 3] == '-' && std::isdigit(static_cast<unsigned char>(concept_label[n - 2])) &&
      std::isdigit(static_cast<unsigned char>(concept_label[n - 1]))) {
    return concept_label.substr(0, n - 3);
  }
  return concept_label;
}

}  // namespace

AmrGraph transform(const AmrGraph& g, TransformMode mode) {
  g.check();
  AmrGraph out;
  for (const auto& [var, concept_label] : g.nodes()) {
    out.add_node(var, mode == TransformMode::NoWsd ? strip_sense(concept_label) : concept_label);
  }
  out.set_root(g.root());
  for (const Edge& e : g.edges()) {
    out.add_edge(e.source, mode == TransformMode::Unlabeled ? "rel" : e.role, e.target);
  }
  for (const Attribute& a : g.attributes()) out.add_attribute(a.source, a.role, a.value);
  for (const auto& [key, value] : g.metadata()) out.set_metadata(key, value);
  return out;
}

}  // namespace mbse
