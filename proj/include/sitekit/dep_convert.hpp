#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sitekit/errors.hpp"
#include "sitekit/treebank_io.hpp"

namespace sitekit {

struct ConversionConfig {
  /// Insert a `<headLabel>/<REL>` node above every dependent.
  bool labeled = true;
  /// Label nodes by part of speech rather than by word form.
  bool use_pos = true;
};

/// Label of the synthetic node the dependency root hangs from.
inline constexpr const char* kDepRootLabel = "ROOT";

/// An arc as (head, dependent), both 1-based; head 0 is the artificial root.
using Arc = std::pair<int, int>;

class NonProjectiveError : public InputError {
 public:
  NonProjectiveError(const std::string& what, std::vector<std::pair<Arc, Arc>> crossings)
      : InputError(what), crossings_(std::move(crossings)) {}
  const std::vector<std::pair<Arc, Arc>>& crossings() const noexcept { return crossings_; }

 private:
  std::vector<std::pair<Arc, Arc>> crossings_;
};

bool is_projective(const DepGraph& g);

/// Pairs of arcs that cross when drawn above the sentence, counting the arc
/// from the artificial root at position 0. Empty iff the graph is projective.
std::vector<std::pair<Arc, Arc>> crossing_arcs(const DepGraph& g);

/// Builds the context-free derivation tree of a projective dependency graph.
/// Each head node expands to its left dependents, its own leaf `<label>*`,
/// then its right dependents, all in surface order.
Tree dep_to_tree(const DepGraph& g, const ConversionConfig& config = {});

/// Inverse of dep_to_tree for the labeled variant. Forms and POS tags of the
/// result both carry the node label; the root relation is "root".
DepGraph tree_to_dep(const Tree& t);

struct ConversionReport {
  Corpus corpus;
  std::size_t skipped_nonprojective = 0;
  std::vector<std::string> skipped_ids;
};

/// Converts every projective graph and counts the rest.
ConversionReport convert_treebank(const std::vector<DepGraph>& graphs, const ConversionConfig& config = {});

}  // namespace sitekit
