#include "mbse/amr.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <sstream>

#include "mbse/util.hpp"

namespace mbse {

namespace {

std::string parse_error_text(ParseError::Kind kind, int line, int column,
                             const std::string& what) {
  std::ostringstream ss;
  ss << what << " at line " << line << ", column " << column;
  (void)kind;
  return ss.str();
}

}  // namespace

ParseError::ParseError(Kind kind, int line, int column, const std::string& what)
    : std::runtime_error(parse_error_text(kind, line, column, what)),
      kind(kind),
      line(line),
      column(column) {}

void AmrGraph::set_root(std::string var) { root_ = std::move(var); }

bool AmrGraph::add_node(const std::string& var, const std::string& concept_label) {
  if (concept_label.empty()) throw GraphError("empty concept for variable " + var);
  auto it = node_index_.find(var);
  if (it != node_index_.end()) {
    if (nodes_[it->second].second != concept_label) {
      throw GraphError("variable " + var + " redefined with conflicting concept: " +
                       nodes_[it->second].second + " vs " + concept_label);
    }
    return false;
  }
  node_index_.emplace(var, nodes_.size());
  nodes_.emplace_back(var, concept_label);
  return true;
}

bool AmrGraph::add_edge(const std::string& source, const std::string& role,
                        const std::string& target) {
  const std::string key = lowercase_ascii(role);
  for (const Edge& e : edges_) {
    if (e.source == source && e.target == target && lowercase_ascii(e.role) == key) return false;
  }
  edges_.push_back(Edge{source, role, target});
  return true;
}

bool AmrGraph::add_attribute(const std::string& source, const std::string& role,
                             AttrValue value) {
  const std::string key = lowercase_ascii(role);
  for (const Attribute& a : attributes_) {
    if (a.source == source && a.value.text == value.text && lowercase_ascii(a.role) == key) {
      return false;
    }
  }
  attributes_.push_back(Attribute{source, role, std::move(value)});
  return true;
}

void AmrGraph::set_metadata(const std::string& key, std::string value) {
  for (auto& kv : metadata_) {
    if (kv.first == key) {
      kv.second = std::move(value);
      return;
    }
  }
  metadata_.emplace_back(key, std::move(value));
}

bool AmrGraph::has_node(const std::string& var) const { return node_index_.count(var) > 0; }

std::optional<std::size_t> AmrGraph::node_index(const std::string& var) const {
  auto it = node_index_.find(var);
  if (it == node_index_.end()) return std::nullopt;
  return it->second;
}

const std::string& AmrGraph::concept_of(const std::string& var) const {
  auto it = node_index_.find(var);
  if (it == node_index_.end()) throw GraphError("unknown variable: " + var);
  return nodes_[it->second].second;
}

const std::string* AmrGraph::metadata_value(const std::string& key) const {
  for (const auto& kv : metadata_) {
    if (kv.first == key) return &kv.second;
  }
  return nullptr;
}

std::string AmrGraph::id() const {
  const std::string* v = metadata_value("id");
  return v ? *v : std::string();
}

void AmrGraph::check() const {
  if (nodes_.empty()) throw GraphError("graph has no nodes");
  if (root_.empty()) throw GraphError("graph has no root");
  if (!has_node(root_)) throw GraphError("root is not a declared variable: " + root_);
  for (const Edge& e : edges_) {
    if (!has_node(e.source)) throw GraphError("edge source never declared: " + e.source);
    if (!has_node(e.target)) throw GraphError("edge target never declared: " + e.target);
  }
  for (const Attribute& a : attributes_) {
    if (!has_node(a.source)) throw GraphError("attribute source never declared: " + a.source);
  }
}

std::string triple_key(const Triple& t) {
  std::string key;
  key.reserve(t.arg1.size() + t.rel.size() + t.arg2.size() + 6);
  key += char('0' + int(t.kind));
  key += '\x1f';
  key += t.arg1;
  key += '\x1f';
  key += lowercase_ascii(t.rel);
  key += '\x1f';
  key += t.arg2;
  return key;
}

std::vector<Triple> extract_triples(const AmrGraph& g) {
  g.check();
  std::vector<Triple> out;
  out.reserve(g.nodes().size() + g.edges().size() + g.attributes().size() + 1);
  for (const auto& [var, concept_label] : g.nodes()) {
    out.push_back(Triple{TripleKind::Instance, var, "instance", concept_label});
  }
  out.push_back(Triple{TripleKind::Attribute, g.root(), "TOP", "top"});
  for (const Attribute& a : g.attributes()) {
    out.push_back(Triple{TripleKind::Attribute, a.source, a.role, a.value.text});
  }
  for (const Edge& e : g.edges()) {
    out.push_back(Triple{TripleKind::Relation, e.source, e.role, e.target});
  }
  return out;
}

ValidationReport validate(const AmrGraph& g) {
  ValidationReport report;
  report.well_formed = true;
  try {
    g.check();
  } catch (const GraphError& err) {
    report.well_formed = false;
    report.issues.push_back(err.what());
  }
  if (!report.well_formed) {
    report.connected = false;
    return report;
  }

  // Undirected reachability from the root over edges.
  std::unordered_map<std::string, std::vector<std::string>> adjacency;
  for (const Edge& e : g.edges()) {
    adjacency[e.source].push_back(e.target);
    adjacency[e.target].push_back(e.source);
  }
  std::unordered_map<std::string, bool> seen;
  std::deque<std::string> queue{g.root()};
  seen[g.root()] = true;
  while (!queue.empty()) {
    const std::string var = queue.front();
    queue.pop_front();
    for (const std::string& next : adjacency[var]) {
      if (!seen[next]) {
        seen[next] = true;
        queue.push_back(next);
      }
    }
  }
  report.connected = true;
  for (const auto& [var, concept_label] : g.nodes()) {
    if (!seen[var]) {
      report.connected = false;
      report.issues.push_back("unreachable variable: " + var);
    }
  }
  return report;
}

namespace {

// ---------------------------------------------------------------------------
// Penman reader

struct Token {
  enum class Type { LParen, RParen, Slash, Role, Atom, Str, End };
  Type type = Type::End;
  std::string text;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  Lexer(std::string_view src, int first_line) : src_(src), line_(first_line) {}

  Token next() {
    skip_space();
    Token tok;
    tok.line = line_;
    tok.column = column_;
    if (pos_ >= src_.size()) {
      tok.type = Token::Type::End;
      return tok;
    }
    const char c = src_[pos_];
    if (c == '(') {
      advance();
      tok.type = Token::Type::LParen;
      return tok;
    }
    if (c == ')') {
      advance();
      tok.type = Token::Type::RParen;
      return tok;
    }
    if (c == '/') {
      advance();
      tok.type = Token::Type::Slash;
      return tok;
    }
    if (c == '"') {
      advance();
      std::string text;
      while (pos_ < src_.size() && src_[pos_] != '"') {
        if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) {
          advance();
          text.push_back(src_[pos_]);
        } else {
          text.push_back(src_[pos_]);
        }
        advance();
      }
      if (pos_ >= src_.size()) {
        throw ParseError(ParseError::Kind::BadToken, tok.line, tok.column,
                         "unterminated string literal");
      }
      advance();  // closing quote
      tok.type = Token::Type::Str;
      tok.text = std::move(text);
      return tok;
    }
    if (c == ':') {
      advance();
      std::string text;
      while (pos_ < src_.size() && !is_delimiter(src_[pos_])) {
        text.push_back(src_[pos_]);
        advance();
      }
      if (text.empty()) {
        throw ParseError(ParseError::Kind::BadToken, tok.line, tok.column, "empty role label");
      }
      tok.type = Token::Type::Role;
      tok.text = std::move(text);
      return tok;
    }
    std::string text;
    while (pos_ < src_.size() && !is_delimiter(src_[pos_])) {
      text.push_back(src_[pos_]);
      advance();
    }
    if (text.empty()) {
      throw ParseError(ParseError::Kind::BadToken, tok.line, tok.column,
                       std::string("unexpected character '") + c + "'");
    }
    tok.type = Token::Type::Atom;
    tok.text = std::move(text);
    return tok;
  }

 private:
  static bool is_delimiter(char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '/' ||
           c == ':' || c == '"';
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

// Relations are collected in surface order and resolved once all variable
// declarations are known: a bare target naming a declared variable is an
// edge, anything else a symbol constant.
struct PendingRelation {
  std::string source;
  std::string role;
  std::string target;
  bool quoted = false;
  bool is_subtree = false;  // target declared by a nested expression
};

class Parser {
 public:
  Parser(std::string_view penman, int first_line) : lexer_(penman, first_line) {}

  void run(AmrGraph& graph) {
    look_ = lexer_.next();
    if (look_.type == Token::Type::End) {
      throw ParseError(ParseError::Kind::EmptyInput, look_.line, look_.column,
                       "empty input: no Penman expression");
    }
    bool first = true;
    while (look_.type != Token::Type::End) {
      if (look_.type != Token::Type::LParen) {
        if (look_.type == Token::Type::RParen) {
          throw ParseError(ParseError::Kind::UnbalancedParens, look_.line, look_.column,
                           "unbalanced parentheses: stray ')'");
        }
        throw ParseError(ParseError::Kind::TrailingContent, look_.line, look_.column,
                         "unexpected trailing content after expression");
      }
      const std::string fragment_root = parse_expr(graph);
      if (first) {
        graph.set_root(fragment_root);
        first = false;
      }
    }
    resolve(graph);
  }

 private:
  Token expect(Token::Type type, const char* what) {
    if (look_.type != type) {
      if (look_.type == Token::Type::End) {
        throw ParseError(ParseError::Kind::UnbalancedParens, look_.line, look_.column,
                         "unbalanced parentheses: unexpected end of input");
      }
      throw ParseError(ParseError::Kind::BadToken, look_.line, look_.column,
                       std::string("expected ") + what);
    }
    Token tok = look_;
    look_ = lexer_.next();
    return tok;
  }

  // '(' var '/' concept ( role value )* ')'
  std::string parse_expr(AmrGraph& graph) {
    expect(Token::Type::LParen, "'('");
    const Token var_tok = expect(Token::Type::Atom, "variable name");
    const std::string var = var_tok.text;

    if (look_.type != Token::Type::Slash) {
      throw ParseError(ParseError::Kind::MissingConcept, look_.line, look_.column,
                       "variable " + var + " declared without '/ concept'");
    }
    expect(Token::Type::Slash, "'/'");
    const Token concept_tok = expect(Token::Type::Atom, "concept label");

    try {
      graph.add_node(var, concept_tok.text);
    } catch (const GraphError& err) {
      throw ParseError(ParseError::Kind::DuplicateVariable, var_tok.line, var_tok.column,
                       err.what());
    }

    while (look_.type == Token::Type::Role) {
      const Token role_tok = expect(Token::Type::Role, "role");
      switch (look_.type) {
        case Token::Type::LParen: {
          const std::string child = parse_expr(graph);
          relations_.push_back(PendingRelation{var, role_tok.text, child, false, true});
          break;
        }
        case Token::Type::Str: {
          const Token value = expect(Token::Type::Str, "string");
          relations_.push_back(PendingRelation{var, role_tok.text, value.text, true, false});
          break;
        }
        case Token::Type::Atom: {
          const Token value = expect(Token::Type::Atom, "value");
          relations_.push_back(PendingRelation{var, role_tok.text, value.text, false, false});
          break;
        }
        default:
          throw ParseError(
              look_.type == Token::Type::End ? ParseError::Kind::UnbalancedParens
                                             : ParseError::Kind::BadToken,
              look_.line, look_.column,
              look_.type == Token::Type::End
                  ? "unbalanced parentheses: unexpected end of input"
                  : "expected a value after :" + role_tok.text);
      }
    }
    expect(Token::Type::RParen, "')'");
    return var;
  }

  void resolve(AmrGraph& graph) {
    for (const PendingRelation& rel : relations_) {
      if (rel.is_subtree || (!rel.quoted && graph.has_node(rel.target))) {
        graph.add_edge(rel.source, rel.role, rel.target);
      } else {
        graph.add_attribute(rel.source, rel.role, AttrValue{rel.target, rel.quoted});
      }
    }
  }

  Lexer lexer_;
  Token look_;
  std::vector<PendingRelation> relations_;
};

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

// `# ::key value ::key value` lines; plain `#` comments yield nothing.
void parse_metadata_line(std::string_view line, AmrGraph& graph) {
  std::size_t pos = line.find("::");
  while (pos != std::string_view::npos) {
    std::size_t key_end = pos + 2;
    while (key_end < line.size() &&
           !std::isspace(static_cast<unsigned char>(line[key_end]))) {
      ++key_end;
    }
    const std::string key(line.substr(pos + 2, key_end - pos - 2));
    std::size_t value_start = key_end;
    if (value_start < line.size()) ++value_start;  // one separating space
    std::size_t next = line.find(" ::", key_end);
    std::size_t value_end = (next == std::string_view::npos) ? line.size() : next;
    std::string value(line.substr(value_start, value_end > value_start ? value_end - value_start : 0));
    while (!value.empty() && (value.back() == ' ' || value.back() == '\t')) value.pop_back();
    if (!key.empty()) graph.set_metadata(key, value);
    pos = (next == std::string_view::npos) ? next : line.find("::", next + 1);
  }
}

}  // namespace

AmrGraph parse_penman(std::string_view text) {
  AmrGraph graph;
  // Leading '#' lines are metadata or comments; the Penman source starts at
  // the first line whose first non-blank character is not '#'.
  std::size_t offset = 0;
  int line_no = 1;
  int penman_first_line = 1;
  std::string_view penman;
  bool found = false;
  while (offset <= text.size()) {
    std::size_t eol = text.find('\n', offset);
    std::string_view line = strip_cr(
        text.substr(offset, eol == std::string_view::npos ? text.size() - offset : eol - offset));
    std::size_t first = line.find_first_not_of(" \t");
    if (first != std::string_view::npos && line[first] == '#') {
      parse_metadata_line(line, graph);
    } else if (first != std::string_view::npos) {
      penman = text.substr(offset);
      penman_first_line = line_no;
      found = true;
      break;
    }
    if (eol == std::string_view::npos) break;
    offset = eol + 1;
    ++line_no;
  }
  if (!found) {
    throw ParseError(ParseError::Kind::EmptyInput, line_no, 1,
                     "empty input: no Penman expression");
  }
  Parser parser(penman, penman_first_line);
  parser.run(graph);
  return graph;
}

namespace {

std::string quote(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

class Writer {
 public:
  explicit Writer(const AmrGraph& g) : g_(g) {
    for (std::size_t i = 0; i < g.edges().size(); ++i) {
      edges_by_source_[g.edges()[i].source].push_back(i);
    }
    for (std::size_t i = 0; i < g.attributes().size(); ++i) {
      attrs_by_source_[g.attributes()[i].source].push_back(i);
    }
    visited_.assign(g.nodes().size(), false);
  }

  std::string run() {
    std::string out;
    emit_node(g_.root(), 0, out);
    // Remaining variables are islands; each becomes its own fragment rooted
    // at the earliest-declared unvisited variable.
    for (std::size_t i = 0; i < g_.nodes().size(); ++i) {
      if (!visited_[i]) {
        out += "\n";
        emit_node(g_.nodes()[i].first, 0, out);
      }
    }
    return out;
  }

 private:
  void emit_node(const std::string& var, int depth, std::string& out) {
    const std::size_t index = *g_.node_index(var);
    visited_[index] = true;
    out += "(" + var + " / " + g_.nodes()[index].second;
    const std::string indent = "\n" + std::string(4 * (depth + 1), ' ');
    if (auto it = attrs_by_source_.find(var); it != attrs_by_source_.end()) {
      for (std::size_t i : it->second) {
        const Attribute& a = g_.attributes()[i];
        out += indent + ":" + a.role + " " + (a.value.quoted ? quote(a.value.text) : a.value.text);
      }
    }
    if (auto it = edges_by_source_.find(var); it != edges_by_source_.end()) {
      for (std::size_t i : it->second) {
        const Edge& e = g_.edges()[i];
        out += indent + ":" + e.role + " ";
        if (visited_[*g_.node_index(e.target)]) {
          out += e.target;
        } else {
          emit_node(e.target, depth + 1, out);
        }
      }
    }
    out += ")";
  }

  const AmrGraph& g_;
  std::unordered_map<std::string, std::vector<std::size_t>> edges_by_source_;
  std::unordered_map<std::string, std::vector<std::size_t>> attrs_by_source_;
  std::vector<bool> visited_;
};

}  // namespace

std::string serialize_penman(const AmrGraph& g) {
  g.check();
  Writer writer(g);
  return writer.run();
}

std::string write_record(const AmrGraph& g) {
  std::string out;
  auto emit = [&out](const std::string& key, const std::string& value) {
    out += "# ::" + key + (value.empty() ? "" : " " + value) + "\n";
  };
  if (const std::string* id = g.metadata_value("id")) emit("id", *id);
  if (const std::string* snt = g.metadata_value("snt")) emit("snt", *snt);
  for (const auto& [key, value] : g.metadata()) {
    if (key != "id" && key != "snt") emit(key, value);
  }
  out += serialize_penman(g);
  out += "\n";
  return out;
}

namespace {

std::string sniff_id(std::string_view record) {
  std::size_t pos = record.find("::id");
  if (pos == std::string_view::npos) return {};
  pos += 4;
  while (pos < record.size() && (record[pos] == ' ' || record[pos] == '\t')) ++pos;
  std::size_t end = pos;
  while (end < record.size() && !std::isspace(static_cast<unsigned char>(record[end]))) ++end;
  return std::string(record.substr(pos, end - pos));
}

}  // namespace

CorpusReadResult read_corpus_text(std::string_view text) {
  CorpusReadResult result;
  std::size_t offset = 0;
  std::string block;
  std::size_t record_index = 0;

  auto flush = [&]() {
    if (block.find_first_not_of(" \t\r\n") == std::string::npos) {
      block.clear();
      return;
    }
    ++record_index;
    ++result.raw_records;
    if (!is_valid_utf8(block)) {
      result.dropped.push_back(DroppedRecord{record_index, sniff_id(block), "invalid utf8"});
    } else {
      try {
        result.records.push_back(parse_penman(block));
      } catch (const ParseError& err) {
        result.dropped.push_back(
            DroppedRecord{record_index, sniff_id(block), std::string("parse error: ") + err.what()});
      }
    }
    block.clear();
  };

  while (offset <= text.size()) {
    std::size_t eol = text.find('\n', offset);
    std::string_view line =
        text.substr(offset, eol == std::string_view::npos ? text.size() - offset : eol - offset);
    if (is_blank(line)) {
      flush();
    } else {
      block.append(line);
      block.push_back('\n');
    }
    if (eol == std::string_view::npos) break;
    offset = eol + 1;
  }
  flush();
  return result;
}

CorpusReadResult read_corpus_file(const std::string& path) {
  return read_corpus_text(read_file(path));
}

std::string corpus_to_text(const std::vector<AmrGraph>& records) {
  std::string out;
  for (const AmrGraph& g : records) {
    out += write_record(g);
    out += "\n";
  }
  return out;
}

void write_corpus_file(const std::string& path, const std::vector<AmrGraph>& records) {
  atomic_write_file(path, corpus_to_text(records));
}

}  // namespace mbse
