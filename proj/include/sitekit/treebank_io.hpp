#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sitekit {

/// Ordered labeled rooted tree. Internal nodes carry non-terminal labels,
/// leaves carry terminal labels; a node is a leaf iff it has no children.
struct Tree {
  std::string label;
  std::vector<Tree> children;

  Tree() = default;
  explicit Tree(std::string l) : label(std::move(l)) {}
  Tree(std::string l, std::vector<Tree> c) : label(std::move(l)), children(std::move(c)) {}

  bool is_leaf() const noexcept { return children.empty(); }
  /// True for an internal node whose children are all leaves.
  bool is_preterminal() const noexcept;

  std::vector<std::string> frontier() const;
  std::size_t frontier_size() const noexcept;
  std::size_t node_count() const noexcept;
  std::size_t depth() const noexcept;

  friend bool operator==(const Tree&, const Tree&) = default;
};

struct DepToken {
  std::string form;
  std::string pos;
  friend bool operator==(const DepToken&, const DepToken&) = default;
};

/// One dependency-annotated sentence. Token i (0-based) has head heads[i],
/// a 1-based token index or 0 for the artificial root, and relation labels[i].
/// The root token keeps whatever relation the source assigned (usually "root").
struct DepGraph {
  std::vector<DepToken> tokens;
  std::vector<int> heads;
  std::vector<std::string> labels;
  std::string sent_id;

  std::size_t size() const noexcept { return tokens.size(); }
  /// 1-based index of the token attached to the artificial root.
  int root() const;
};

/// Throws StructuralError unless there is exactly one root and every token
/// reaches it without a cycle.
void validate_dep_graph(const DepGraph& g);

struct Corpus {
  std::vector<Tree> sentences;
  std::string source_id;
  bool preterminalized = false;

  std::size_t sentence_count() const noexcept { return sentences.size(); }
  bool empty() const noexcept { return sentences.empty(); }
};

/// Reads whitespace-separated balanced S-expressions. A top-level bracket
/// without a label that wraps exactly one tree, as in "( (S ...) )", is
/// unwrapped.
std::vector<Tree> parse_bracketed(std::string_view text);

/// Inverse of parse_bracketed for a single tree.
std::string to_bracketed(const Tree& t);

std::vector<DepGraph> parse_conllu(std::string_view text);

/// Replaces every pre-terminal by a leaf carrying the pre-terminal's label.
Tree preterminalize(const Tree& t);

/// Corpus-level pre-terminalization; a no-op on corpora already flagged.
Corpus preterminalize(const Corpus& c);

/// Removes subtrees whose pre-terminal label is in `drop`, then prunes any
/// internal node left without children. Returns nullopt if nothing remains.
std::optional<Tree> strip_empty_elements(const Tree& t, const std::vector<std::string>& drop);

/// "NP-SBJ-1" -> "NP", "NP=2" -> "NP". Labels wrapped in dashes ("-NONE-",
/// "-LRB-") are left alone.
std::string strip_function_tag(std::string_view label);
Tree strip_function_tags(const Tree& t);

double corpus_mlu(const Corpus& c);

}  // namespace sitekit
