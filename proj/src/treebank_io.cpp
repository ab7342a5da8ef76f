#include "sitekit/treebank_io.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "sitekit/errors.hpp"

namespace sitekit {

bool Tree::is_preterminal() const noexcept {
  return !children.empty() &&
         std::all_of(children.begin(), children.end(), [](const Tree& c) { return c.is_leaf(); });
}

namespace {

void collect_frontier(const Tree& t, std::vector<std::string>& out) {
  if (t.is_leaf()) {
    out.push_back(t.label);
    return;
  }
  for (const auto& c : t.children) collect_frontier(c, out);
}

}  // namespace

std::vector<std::string> Tree::frontier() const {
  std::vector<std::string> out;
  collect_frontier(*this, out);
  return out;
}

std::size_t Tree::frontier_size() const noexcept {
  if (is_leaf()) return 1;
  std::size_t n = 0;
  for (const auto& c : children) n += c.frontier_size();
  return n;
}

std::size_t Tree::node_count() const noexcept {
  std::size_t n = 1;
  for (const auto& c : children) n += c.node_count();
  return n;
}

std::size_t Tree::depth() const noexcept {
  std::size_t d = 0;
  for (const auto& c : children) d = std::max(d, c.depth());
  return is_leaf() ? 0 : d + 1;
}

// ---------------------------------------------------------------------------
// Bracketed trees

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

class BracketReader {
 public:
  explicit BracketReader(std::string_view text) : text_(text) {}

  std::vector<Tree> read_all() {
    std::vector<Tree> trees;
    skip_space();
    while (pos_ < text_.size()) {
      if (text_[pos_] == ')') throw ParseError("unbalanced ')'", pos_);
      if (text_[pos_] != '(') throw StructuralError("bare atom outside brackets at offset " + std::to_string(pos_));
      const std::size_t start = pos_;
      Node n = read_node();
      if (n.label.empty()) {
        if (n.children.size() != 1 || n.children.front().is_leaf())
          throw StructuralError("unlabeled node at offset " + std::to_string(start));
        trees.push_back(std::move(n.children.front()));
      } else {
        trees.push_back(Tree(std::move(n.label), std::move(n.children)));
      }
      skip_space();
    }
    return trees;
  }

 private:
  struct Node {
    std::string label;
    std::vector<Tree> children;
  };

  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  std::string read_atom() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_]) && text_[pos_] != '(' && text_[pos_] != ')') ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  // Precondition: text_[pos_] == '('.
  Node read_node() {
    const std::size_t open = pos_;
    ++pos_;
    skip_space();
    Node n;
    if (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')') n.label = read_atom();
    for (;;) {
      skip_space();
      if (pos_ >= text_.size()) throw ParseError("unbalanced '('", pos_);
      const char c = text_[pos_];
      if (c == ')') {
        ++pos_;
        break;
      }
      if (c == '(') {
        const std::size_t child_start = pos_;
        Node child = read_node();
        if (child.label.empty())
          throw StructuralError("unlabeled node at offset " + std::to_string(child_start));
        n.children.emplace_back(std::move(child.label), std::move(child.children));
      } else {
        n.children.emplace_back(read_atom());
      }
    }
    if (!n.label.empty() && n.children.empty())
      throw StructuralError("node '" + n.label + "' without children at offset " + std::to_string(open));
    if (n.label.empty() && n.children.empty())
      throw StructuralError("empty node at offset " + std::to_string(open));
    return n;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void write_bracketed(const Tree& t, std::string& out) {
  if (t.is_leaf()) {
    out += t.label;
    return;
  }
  out += '(';
  out += t.label;
  for (const auto& c : t.children) {
    out += ' ';
    write_bracketed(c, out);
  }
  out += ')';
}

}  // namespace

std::vector<Tree> parse_bracketed(std::string_view text) { return BracketReader(text).read_all(); }

std::string to_bracketed(const Tree& t) {
  std::string out;
  write_bracketed(t, out);
  return out;
}

// ---------------------------------------------------------------------------
// CoNLL-U

int DepGraph::root() const {
  for (std::size_t i = 0; i < heads.size(); ++i)
    if (heads[i] == 0) return static_cast<int>(i) + 1;
  return 0;
}

void validate_dep_graph(const DepGraph& g) {
  const auto n = static_cast<int>(g.size());
  const std::string where = g.sent_id.empty() ? std::string("sentence") : "sentence " + g.sent_id;
  if (g.heads.size() != g.tokens.size() || g.labels.size() != g.tokens.size())
    throw StructuralError(where + ": token, head and label counts differ");
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const int h = g.heads[i];
    if (h < 0 || h > n) throw StructuralError(where + ": head index " + std::to_string(h) + " out of range");
    if (h == i + 1) throw StructuralError(where + ": token " + std::to_string(i + 1) + " heads itself");
    if (h == 0) ++roots;
  }
  if (roots != 1) throw StructuralError(where + ": expected exactly one root, found " + std::to_string(roots));
  // 0 = unvisited, 1 = on current path, 2 = reaches the root
  std::vector<char> state(n + 1, 0);
  state[0] = 2;
  for (int start = 1; start <= n; ++start) {
    std::vector<int> path;
    int v = start;
    while (state[v] == 0) {
      state[v] = 1;
      path.push_back(v);
      v = g.heads[v - 1];
    }
    if (state[v] == 1) throw StructuralError(where + ": cycle through token " + std::to_string(v));
    for (int p : path) state[p] = 2;
  }
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(start));
      return cols;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::optional<int> to_int(std::string_view s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

std::vector<DepGraph> parse_conllu(std::string_view text) {
  std::vector<DepGraph> out;
  DepGraph cur;
  bool has_lines = false;
  std::size_t offset = 0;

  auto flush = [&] {
    if (!cur.tokens.empty()) {
      if (cur.sent_id.empty()) cur.sent_id = std::to_string(out.size() + 1);
      validate_dep_graph(cur);
      out.push_back(std::move(cur));
    }
    cur = DepGraph{};
    has_lines = false;
  };

  while (offset <= text.size()) {
    auto nl = text.find('\n', offset);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(offset, nl - offset);
    const std::size_t line_offset = offset;
    offset = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (line.empty()) {
      flush();
      continue;
    }
    has_lines = true;
    if (line.front() == '#') {
      constexpr std::string_view key = "# sent_id";
      if (line.starts_with(key)) {
        auto rest = line.substr(key.size());
        const auto eq = rest.find('=');
        if (eq != std::string_view::npos) rest = rest.substr(eq + 1);
        while (!rest.empty() && is_space(rest.front())) rest.remove_prefix(1);
        while (!rest.empty() && is_space(rest.back())) rest.remove_suffix(1);
        cur.sent_id = std::string(rest);
      }
      continue;
    }
    const auto cols = split_tabs(line);
    if (cols.size() != 10)
      throw ParseError("expected 10 tab-separated columns, found " + std::to_string(cols.size()), line_offset);
    const std::string_view id = cols[0];
    if (id.find('-') != std::string_view::npos || id.find('.') != std::string_view::npos) continue;
    const auto idv = to_int(id);
    if (!idv) throw ParseError("non-integer ID '" + std::string(id) + "'", line_offset);
    if (*idv != static_cast<int>(cur.tokens.size()) + 1)
      throw ParseError("token ID " + std::string(id) + " out of sequence", line_offset);
    const auto head = to_int(cols[6]);
    if (!head) throw ParseError("non-integer HEAD '" + std::string(cols[6]) + "'", line_offset);
    // language-specific tag when present, universal tag otherwise
    const std::string_view tag = cols[4] != "_" ? cols[4] : cols[3];
    cur.tokens.push_back({std::string(cols[1]), std::string(tag)});
    cur.heads.push_back(*head);
    cur.labels.emplace_back(cols[7]);
  }
  if (has_lines) flush();
  return out;
}

// ---------------------------------------------------------------------------
// Tree transforms

Tree preterminalize(const Tree& t) {
  if (t.is_leaf()) return t;
  if (t.is_preterminal()) return Tree(t.label);
  const bool any_leaf = std::any_of(t.children.begin(), t.children.end(), [](const Tree& c) { return c.is_leaf(); });
  if (any_leaf) throw StructuralError("mixed node '" + t.label + "' has both leaf and internal children");
  Tree out(t.label);
  out.children.reserve(t.children.size());
  for (const auto& c : t.children) out.children.push_back(preterminalize(c));
  return out;
}

Corpus preterminalize(const Corpus& c) {
  if (c.preterminalized) return c;
  Corpus out;
  out.source_id = c.source_id;
  out.preterminalized = true;
  out.sentences.reserve(c.sentences.size());
  for (const auto& t : c.sentences) out.sentences.push_back(preterminalize(t));
  return out;
}

std::optional<Tree> strip_empty_elements(const Tree& t, const std::vector<std::string>& drop) {
  if (t.is_leaf()) return t;
  if (t.is_preterminal() && std::find(drop.begin(), drop.end(), t.label) != drop.end()) return std::nullopt;
  Tree out(t.label);
  for (const auto& c : t.children) {
    if (auto kept = strip_empty_elements(c, drop)) out.children.push_back(std::move(*kept));
  }
  if (out.children.empty()) return std::nullopt;
  return out;
}

std::string strip_function_tag(std::string_view label) {
  if (label.size() >= 2 && label.front() == '-' && label.back() == '-') return std::string(label);
  const auto cut = label.find_first_of("-=", 1);
  return std::string(label.substr(0, cut));
}

Tree strip_function_tags(const Tree& t) {
  if (t.is_leaf()) return t;
  Tree out(strip_function_tag(t.label));
  out.children.reserve(t.children.size());
  for (const auto& c : t.children) out.children.push_back(strip_function_tags(c));
  return out;
}

double corpus_mlu(const Corpus& c) {
  if (c.empty()) throw InputError("MLU of an empty corpus is undefined");
  const std::size_t total = std::accumulate(c.sentences.begin(), c.sentences.end(), std::size_t{0},
                                            [](std::size_t acc, const Tree& t) { return acc + t.frontier_size(); });
  return static_cast<double>(total) / static_cast<double>(c.sentence_count());
}

}  // namespace sitekit
