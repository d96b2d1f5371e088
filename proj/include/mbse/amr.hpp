#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mbse {

// Constant operand of an attribute. `quoted` records whether the surface
// form was a string literal so the writer can re-quote it; matching always
// uses the bare text.
struct AttrValue {
  std::string text;
  bool quoted = false;

  bool operator==(const AttrValue&) const = default;
};

struct Edge {
  std::string source;
  std::string role;  // as written, without the leading ':'
  std::string target;
};

struct Attribute {
  std::string source;
  std::string role;
  AttrValue value;
};

class ParseError : public std::runtime_error {
 public:
  enum class Kind {
    EmptyInput,
    UnbalancedParens,
    DuplicateVariable,
    UndefinedVariable,
    MissingConcept,
    BadToken,
    TrailingContent,
  };

  ParseError(Kind kind, int line, int column, const std::string& what);

  Kind kind;
  int line;
  int column;
};

class GraphError : public std::runtime_error {
 public:
  explicit GraphError(const std::string& what) : std::runtime_error(what) {}
};

// Rooted directed labeled graph. Nodes bind a variable to a concept label;
// edges relate variables; attributes relate a variable to a constant.
// Declaration order of nodes, edges and attributes is preserved and drives
// deterministic serialization. Exact duplicate edges/attributes (role
// compared case-insensitively) are collapsed on insertion.
class AmrGraph {
 public:
  void set_root(std::string var);
  // Returns false if the variable already exists with the same concept.
  // Throws GraphError on a conflicting concept or an empty concept.
  bool add_node(const std::string& var, const std::string& concept_label);
  bool add_edge(const std::string& source, const std::string& role, const std::string& target);
  bool add_attribute(const std::string& source, const std::string& role, AttrValue value);
  void set_metadata(const std::string& key, std::string value);
  void clear_metadata() { metadata_.clear(); }

  const std::string& root() const { return root_; }
  const std::vector<std::pair<std::string, std::string>>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Attribute>& attributes() const { return attributes_; }
  const std::vector<std::pair<std::string, std::string>>& metadata() const { return metadata_; }

  bool has_node(const std::string& var) const;
  std::optional<std::size_t> node_index(const std::string& var) const;
  const std::string& concept_of(const std::string& var) const;
  const std::string* metadata_value(const std::string& key) const;
  std::string id() const;  // metadata "id", empty when absent

  // Throws GraphError when a structural invariant is violated: missing or
  // undeclared root, edge/attribute endpoint never declared.
  void check() const;

 private:
  std::string root_;
  std::vector<std::pair<std::string, std::string>> nodes_;
  std::unordered_map<std::string, std::size_t> node_index_;
  std::vector<Edge> edges_;
  std::vector<Attribute> attributes_;
  std::vector<std::pair<std::string, std::string>> metadata_;
};

enum class TripleKind { Instance, Attribute, Relation };

struct Triple {
  TripleKind kind;
  std::string arg1;  // variable
  std::string rel;   // "instance" for instance triples, "TOP" for the root marker
  std::string arg2;  // variable (relation) or concept/constant text

  bool operator==(const Triple&) const = default;
};

// Normalized comparison key; role labels compare case-insensitively,
// concepts and constants case-sensitively.
std::string triple_key(const Triple& t);

// One instance triple per node, the synthetic TOP attribute for the root,
// one triple per edge and per attribute: exactly V + E + A + 1 triples.
std::vector<Triple> extract_triples(const AmrGraph& g);

struct ValidationReport {
  bool well_formed = false;
  bool connected = false;
  std::vector<std::string> issues;
};

// Structural findings as data. `connected` is undirected reachability of
// every variable from the root over edges; attribute links do not connect.
ValidationReport validate(const AmrGraph& g);

// Parses one record: optional `# ::key value` metadata lines followed by a
// Penman expression. Additional top-level expressions in the same record are
// folded into the graph as island fragments sharing the variable namespace;
// this is how upstream parsers' disconnected outputs appear on disk.
AmrGraph parse_penman(std::string_view text);

// Penman text for the graph, no metadata lines. Deterministic: children in
// insertion order, variables defined at first visit, islands emitted as
// separate fragments. Re-parsing yields an equal triple set.
std::string serialize_penman(const AmrGraph& g);

// Full record: `# ::id`, `# ::snt` first when present, remaining metadata
// in insertion order, then the Penman block.
std::string write_record(const AmrGraph& g);

struct DroppedRecord {
  std::size_t index = 0;  // 1-based position in the file
  std::string id;         // best-effort, may be empty
  std::string reason;
};

struct CorpusReadResult {
  std::vector<AmrGraph> records;
  std::vector<DroppedRecord> dropped;
  std::size_t raw_records = 0;
};

// Records are separated by blank lines. Records with invalid UTF-8 or a
// failing parse are dropped and reported, not fatal.
CorpusReadResult read_corpus_text(std::string_view text);
CorpusReadResult read_corpus_file(const std::string& path);

std::string corpus_to_text(const std::vector<AmrGraph>& records);
void write_corpus_file(const std::string& path, const std::vector<AmrGraph>& records);

}  // namespace mbse
