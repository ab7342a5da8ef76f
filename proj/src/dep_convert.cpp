#include "sitekit/dep_convert.hpp"

#include <algorithm>

namespace sitekit {

namespace {

// Dependents of each token (index 0 = artificial root), in surface order.
std::vector<std::vector<int>> dependents_of(const DepGraph& g) {
  std::vector<std::vector<int>> deps(g.size() + 1);
  for (std::size_t i = 0; i < g.size(); ++i) deps[g.heads[i]].push_back(static_cast<int>(i) + 1);
  return deps;
}

std::string arc_string(const Arc& a) { return std::to_string(a.first) + "->" + std::to_string(a.second); }

}  // namespace

std::vector<std::pair<Arc, Arc>> crossing_arcs(const DepGraph& g) {
  std::vector<Arc> arcs;
  arcs.reserve(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) arcs.emplace_back(g.heads[i], static_cast<int>(i) + 1);
  std::vector<std::pair<Arc, Arc>> out;
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    const int l1 = std::min(arcs[a].first, arcs[a].second);
    const int r1 = std::max(arcs[a].first, arcs[a].second);
    for (std::size_t b = a + 1; b < arcs.size(); ++b) {
      const int l2 = std::min(arcs[b].first, arcs[b].second);
      const int r2 = std::max(arcs[b].first, arcs[b].second);
      if ((l1 < l2 && l2 < r1 && r1 < r2) || (l2 < l1 && l1 < r2 && r2 < r1)) out.emplace_back(arcs[a], arcs[b]);
    }
  }
  return out;
}

bool is_projective(const DepGraph& g) {
  const int n = static_cast<int>(g.size());
  // Arc (h, d) is projective iff every token strictly between h and d is
  // dominated by h.
  auto dominated_by = [&](int node, int h) {
    while (node != 0) {
      if (node == h) return true;
      node = g.heads[node - 1];
    }
    return h == 0;
  };
  for (int d = 1; d <= n; ++d) {
    const int h = g.heads[d - 1];
    const int lo = std::min(h, d), hi = std::max(h, d);
    for (int k = lo + 1; k < hi; ++k)
      if (!dominated_by(k, h)) return false;
  }
  return true;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const DepGraph& g, const ConversionConfig& cfg) : g_(g), cfg_(cfg), deps_(dependents_of(g)) {}

  Tree build() {
    Tree root(kDepRootLabel);
    root.children.push_back(expand(g_.root()));
    return root;
  }

 private:
  const std::string& label_of(int tok) const {
    const auto& t = g_.tokens[tok - 1];
    return cfg_.use_pos ? t.pos : t.form;
  }

  Tree expand(int tok) {
    const std::string& label = label_of(tok);
    Tree node(label);
    const auto& deps = deps_[tok];
    auto add_dependent = [&](int d) {
      Tree sub = expand(d);
      if (cfg_.labeled) {
        Tree rel(label + "/" + g_.labels[d - 1]);
        rel.children.push_back(std::move(sub));
        node.children.push_back(std::move(rel));
      } else {
        node.children.push_back(std::move(sub));
      }
    };
    auto it = deps.begin();
    for (; it != deps.end() && *it < tok; ++it) add_dependent(*it);
    node.children.emplace_back(label + "*");
    for (; it != deps.end(); ++it) add_dependent(*it);
    return node;
  }

  const DepGraph& g_;
  const ConversionConfig& cfg_;
  std::vector<std::vector<int>> deps_;
};

bool ends_with_star(const std::string& s) { return !s.empty() && s.back() == '*'; }

class DepReader {
 public:
  DepGraph read(const Tree& t) {
    if (t.label != kDepRootLabel || t.children.size() != 1 || t.children.front().is_leaf())
      throw StructuralError("expected a single dependency node under " + std::string(kDepRootLabel));
    visit(t.children.front());
    DepGraph g;
    g.tokens.resize(nodes_.size());
    g.heads.resize(nodes_.size());
    g.labels.resize(nodes_.size());
    // nodes_ are recorded when their leaf is met, i.e. in surface order.
    std::vector<int> position(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) position[nodes_[i].visit_id] = static_cast<int>(i) + 1;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const auto& n = nodes_[i];
      g.tokens[i] = {n.label, n.label};
      g.heads[i] = n.head_visit_id < 0 ? 0 : position[n.head_visit_id];
      g.labels[i] = n.relation;
    }
    return g;
  }

 private:
  struct Node {
    std::string label;
    std::string relation;
    int visit_id;
    int head_visit_id;
  };

  void visit(const Tree& t, int head_visit = -1, std::string relation = "root") {
    if (t.is_leaf()) throw StructuralError("dependency node '" + t.label + "' has no children");
    const int my_id = next_id_++;
    bool seen_leaf = false;
    for (const auto& c : t.children) {
      if (c.is_leaf()) {
        if (seen_leaf || c.label != t.label + "*")
          throw StructuralError("unexpected leaf '" + c.label + "' under '" + t.label + "'");
        seen_leaf = true;
        nodes_.push_back({t.label, relation, my_id, head_visit});
        continue;
      }
      const std::string prefix = t.label + "/";
      if (c.label.size() <= prefix.size() || c.label.compare(0, prefix.size(), prefix) != 0 ||
          ends_with_star(c.label))
        throw StructuralError("expected a relation node '" + prefix + "<REL>' under '" + t.label + "', found '" +
                              c.label + "'");
      if (c.children.size() != 1 || c.children.front().is_leaf())
        throw StructuralError("relation node '" + c.label + "' must have exactly one dependency child");
      visit(c.children.front(), my_id, c.label.substr(prefix.size()));
    }
    if (!seen_leaf) throw StructuralError("dependency node '" + t.label + "' lacks its head leaf");
  }

  std::vector<Node> nodes_;
  int next_id_ = 0;
};

}  // namespace

Tree dep_to_tree(const DepGraph& g, const ConversionConfig& config) {
  validate_dep_graph(g);
  if (!is_projective(g)) {
    auto crossings = crossing_arcs(g);
    std::string msg = "non-projective sentence " + g.sent_id;
    for (const auto& [a, b] : crossings) msg += "; " + arc_string(a) + " crosses " + arc_string(b);
    throw NonProjectiveError(msg, std::move(crossings));
  }
  return TreeBuilder(g, config).build();
}

DepGraph tree_to_dep(const Tree& t) { return DepReader().read(t); }

ConversionReport convert_treebank(const std::vector<DepGraph>& graphs, const ConversionConfig& config) {
  ConversionReport report;
  report.corpus.preterminalized = true;
  for (const auto& g : graphs) {
    try {
      report.corpus.sentences.push_back(dep_to_tree(g, config));
    } catch (const NonProjectiveError&) {
      ++report.skipped_nonprojective;
      report.skipped_ids.push_back(g.sent_id);
    }
  }
  return report;
}

}  // namespace sitekit
