#include "sitekit/pcfg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "sitekit/errors.hpp"

namespace sitekit {

namespace {

constexpr char kSep = '\x1f';
constexpr char kTerminalTag = '\x01';
constexpr char kNonterminalTag = '\x02';

std::string rule_key(std::uint32_t lhs, std::span<const SymbolRef> rhs) {
  std::string key = std::to_string(lhs);
  for (const auto& s : rhs) {
    key += kSep;
    key += s.terminal ? 't' : 'n';
    key += std::to_string(s.index);
  }
  return key;
}

// Key built from labels, used when matching tree nodes against a grammar.
std::string label_key(const Tree& node) {
  std::string key = node.label;
  for (const auto& c : node.children) {
    key += kSep;
    key += c.is_leaf() ? kTerminalTag : kNonterminalTag;
    key += c.label;
  }
  return key;
}

std::string label_key(const Pcfg& g, const Rule& r) {
  std::string key = g.nonterminals()[r.lhs];
  for (const auto& s : r.rhs) {
    key += kSep;
    key += s.terminal ? kTerminalTag : kNonterminalTag;
    key += g.label(s);
  }
  return key;
}

}  // namespace

std::size_t Rule::terminal_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(rhs.begin(), rhs.end(), [](const SymbolRef& s) { return s.terminal; }));
}

FreqTable::FreqTable(std::vector<std::uint64_t> c) : counts(std::move(c)) {
  for (auto v : counts) {
    if (v == 0) throw InputError("frequency table counts must be positive");
    n_ += v;
  }
  if (n_ == 0) throw InputError("frequency table is empty");
}

std::uint64_t FreqTable::types_with_count(std::uint64_t k) const noexcept {
  return static_cast<std::uint64_t>(std::count(counts.begin(), counts.end(), k));
}

// ---------------------------------------------------------------------------
// Pcfg

void Pcfg::index_rules() {
  nt_index_.clear();
  for (std::uint32_t i = 0; i < nonterminals_.size(); ++i) nt_index_.emplace(nonterminals_[i], i);
  by_lhs_.assign(nonterminals_.size(), {});
  rule_index_.clear();
  for (std::size_t r = 0; r < rules_.size(); ++r) {
    by_lhs_[rules_[r].lhs].push_back(r);
    if (!rule_index_.emplace(label_key(*this, rules_[r]), r).second)
      throw InputError("duplicate rule " + rule_string(r));
  }
}

void Pcfg::validate() const {
  if (nonterminals_.empty()) throw InputError("grammar has no non-terminals");
  if (root_ >= nonterminals_.size()) throw InputError("root is not a non-terminal");
  for (std::uint32_t a = 0; a < nonterminals_.size(); ++a) {
    if (by_lhs_[a].empty()) throw InputError("non-terminal '" + nonterminals_[a] + "' has no rules");
    double total = 0.0;
    for (auto r : by_lhs_[a]) {
      const double p = rules_[r].prob;
      if (!(p >= 0.0 && p <= 1.0)) throw InputError("probability out of range in rule " + rule_string(r));
      total += p;
    }
    if (std::abs(total - 1.0) > kPropernessTolerance)
      throw InputError("rules of '" + nonterminals_[a] + "' sum to " + std::to_string(total) + ", not 1");
  }
  for (const auto& t : terminals_)
    if (nt_index_.count(t)) throw InputError("symbol '" + t + "' is both terminal and non-terminal");
}

Pcfg Pcfg::from_rules(std::string_view root, const std::vector<RuleSpec>& specs) {
  Pcfg g;
  for (const auto& s : specs) {
    if (!g.nt_index_.count(s.lhs)) {
      g.nt_index_.emplace(s.lhs, static_cast<std::uint32_t>(g.nonterminals_.size()));
      g.nonterminals_.push_back(s.lhs);
    }
  }
  std::unordered_map<std::string, std::uint32_t> t_index;
  for (const auto& s : specs) {
    if (s.rhs.empty()) throw InputError("rule for '" + s.lhs + "' has an empty right-hand side");
    Rule r;
    r.lhs = g.nt_index_.at(s.lhs);
    r.prob = s.prob;
    r.freq = s.freq;
    for (const auto& sym : s.rhs) {
      if (auto it = g.nt_index_.find(sym); it != g.nt_index_.end()) {
        r.rhs.push_back({it->second, false});
      } else {
        auto [tit, fresh] = t_index.emplace(sym, static_cast<std::uint32_t>(g.terminals_.size()));
        if (fresh) g.terminals_.push_back(sym);
        r.rhs.push_back({tit->second, true});
      }
    }
    g.rules_.push_back(std::move(r));
  }
  const auto rit = g.nt_index_.find(std::string(root));
  if (rit == g.nt_index_.end()) throw InputError("root '" + std::string(root) + "' has no rules");
  g.root_ = rit->second;
  g.index_rules();
  g.validate();
  return g;
}

Pcfg Pcfg::from_rule_counts(const Pcfg& base, std::span<const std::uint64_t> counts) {
  if (counts.size() != base.rules_.size()) throw InputError("rule count vector does not match the grammar");
  constexpr std::uint32_t kAbsent = ~std::uint32_t{0};
  std::vector<std::uint64_t> lhs_total(base.nonterminals_.size(), 0);
  for (std::size_t r = 0; r < counts.size(); ++r) lhs_total[base.rules_[r].lhs] += counts[r];
  if (lhs_total[base.root_] == 0) throw InputError("no derivations counted");

  Pcfg g;
  std::vector<std::uint32_t> nt_map(base.nonterminals_.size(), kAbsent);
  for (std::uint32_t a = 0; a < base.nonterminals_.size(); ++a) {
    if (lhs_total[a] == 0) continue;
    nt_map[a] = static_cast<std::uint32_t>(g.nonterminals_.size());
    g.nonterminals_.push_back(base.nonterminals_[a]);
  }
  std::vector<std::uint32_t> t_map(base.terminals_.size(), kAbsent);
  for (std::size_t r = 0; r < counts.size(); ++r) {
    if (counts[r] == 0) continue;
    const Rule& src = base.rules_[r];
    Rule out;
    out.lhs = nt_map[src.lhs];
    out.freq = counts[r];
    out.prob = static_cast<double>(counts[r]) / static_cast<double>(lhs_total[src.lhs]);
    out.rhs.reserve(src.rhs.size());
    for (const auto& s : src.rhs) {
      if (s.terminal) {
        if (t_map[s.index] == kAbsent) {
          t_map[s.index] = static_cast<std::uint32_t>(g.terminals_.size());
          g.terminals_.push_back(base.terminals_[s.index]);
        }
        out.rhs.push_back({t_map[s.index], true});
      } else {
        if (nt_map[s.index] == kAbsent) throw InputError("counts are not closed under derivation");
        out.rhs.push_back({nt_map[s.index], false});
      }
    }
    g.rules_.push_back(std::move(out));
  }
  g.root_ = nt_map[base.root_];
  g.index_rules();
  return g;
}

std::optional<std::uint32_t> Pcfg::nonterminal_index(std::string_view label) const {
  const auto it = nt_index_.find(std::string(label));
  if (it == nt_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Pcfg::find_rule(const Tree& node) const {
  const auto it = rule_index_.find(label_key(node));
  if (it == rule_index_.end()) return std::nullopt;
  return it->second;
}

std::string Pcfg::rule_string(std::size_t r) const {
  const Rule& rule = rules_.at(r);
  std::string s = nonterminals_.at(rule.lhs) + " ->";
  for (const auto& sym : rule.rhs) {
    s += ' ';
    s += label(sym);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Induction

void TreebankCounter::check_disjoint(const std::string& label, bool as_terminal) const {
  const bool clash = as_terminal ? nt_index_.count(label) > 0 : t_index_.count(label) > 0;
  if (clash) throw InputError("alphabet clash: '" + label + "' is used both as a leaf and as an internal node");
}

std::uint32_t TreebankCounter::intern_nonterminal(const std::string& label) {
  if (auto it = nt_index_.find(label); it != nt_index_.end()) return it->second;
  check_disjoint(label, false);
  const auto id = static_cast<std::uint32_t>(nonterminals_.size());
  nt_index_.emplace(label, id);
  nonterminals_.push_back(label);
  return id;
}

std::uint32_t TreebankCounter::intern_terminal(const std::string& label) {
  if (auto it = t_index_.find(label); it != t_index_.end()) return it->second;
  check_disjoint(label, true);
  const auto id = static_cast<std::uint32_t>(terminals_.size());
  t_index_.emplace(label, id);
  terminals_.push_back(label);
  return id;
}

std::size_t TreebankCounter::count_node(const Tree& node) {
  Rule r;
  r.lhs = intern_nonterminal(node.label);
  r.rhs.reserve(node.children.size());
  for (const auto& c : node.children) {
    if (c.is_leaf()) {
      r.rhs.push_back({intern_terminal(c.label), true});
    } else {
      r.rhs.push_back({intern_nonterminal(c.label), false});
    }
  }
  const std::string key = rule_key(r.lhs, r.rhs);
  auto [it, fresh] = rule_index_.emplace(key, rules_.size());
  if (fresh) rules_.push_back(std::move(r));
  rules_[it->second].freq += 1;
  for (const auto& c : node.children)
    if (!c.is_leaf()) count_node(c);
  return it->second;
}

void TreebankCounter::add(const Tree& t) {
  if (t.is_leaf()) throw StructuralError("tree '" + t.label + "' has no internal nodes");
  // Validate the whole tree before touching any count so a failure leaves the
  // counter unchanged.
  TreebankCounter probe;
  probe.nt_index_ = nt_index_;
  probe.t_index_ = t_index_;
  std::vector<const Tree*> stack{&t};
  while (!stack.empty()) {
    const Tree* n = stack.back();
    stack.pop_back();
    if (n->is_leaf()) {
      probe.check_disjoint(n->label, true);
      probe.t_index_.emplace(n->label, 0);
    } else {
      probe.check_disjoint(n->label, false);
      probe.nt_index_.emplace(n->label, 0);
      for (const auto& c : n->children) stack.push_back(&c);
    }
  }
  count_node(t);
  const std::uint32_t root = nt_index_.at(t.label);
  auto it = std::find_if(root_counts_.begin(), root_counts_.end(), [&](const auto& p) { return p.first == root; });
  if (it == root_counts_.end()) {
    root_counts_.emplace_back(root, 1);
  } else {
    ++it->second;
  }
  ++sentences_;
}

void TreebankCounter::add(const Corpus& c) {
  for (const auto& t : c.sentences) add(t);
}

void TreebankCounter::merge(const TreebankCounter& other) {
  std::vector<std::uint32_t> nt_map(other.nonterminals_.size());
  std::vector<std::uint32_t> t_map(other.terminals_.size());
  for (std::size_t i = 0; i < other.nonterminals_.size(); ++i) check_disjoint(other.nonterminals_[i], false);
  for (std::size_t i = 0; i < other.terminals_.size(); ++i) check_disjoint(other.terminals_[i], true);
  for (std::size_t i = 0; i < other.nonterminals_.size(); ++i) nt_map[i] = intern_nonterminal(other.nonterminals_[i]);
  for (std::size_t i = 0; i < other.terminals_.size(); ++i) t_map[i] = intern_terminal(other.terminals_[i]);
  for (const auto& src : other.rules_) {
    Rule r;
    r.lhs = nt_map[src.lhs];
    for (const auto& s : src.rhs) r.rhs.push_back({s.terminal ? t_map[s.index] : nt_map[s.index], s.terminal});
    const std::string key = rule_key(r.lhs, r.rhs);
    auto [it, fresh] = rule_index_.emplace(key, rules_.size());
    if (fresh) rules_.push_back(std::move(r));
    rules_[it->second].freq += src.freq;
  }
  for (const auto& [root, n] : other.root_counts_) {
    const std::uint32_t mapped = nt_map[root];
    auto it = std::find_if(root_counts_.begin(), root_counts_.end(), [&](const auto& p) { return p.first == mapped; });
    if (it == root_counts_.end()) {
      root_counts_.emplace_back(mapped, n);
    } else {
      it->second += n;
    }
  }
  sentences_ += other.sentences_;
}

Pcfg TreebankCounter::grammar() const {
  if (sentences_ == 0) throw InputError("cannot induce a grammar from an empty treebank");
  Pcfg g;
  const bool synthetic = root_counts_.size() > 1;
  const std::uint32_t shift = synthetic ? 1 : 0;
  if (synthetic) {
    if (nt_index_.count(std::string(kSyntheticRoot)) || t_index_.count(std::string(kSyntheticRoot)))
      throw InputError("reserved symbol " + std::string(kSyntheticRoot) + " occurs in a treebank with mixed roots");
    g.nonterminals_.emplace_back(kSyntheticRoot);
  }
  g.nonterminals_.insert(g.nonterminals_.end(), nonterminals_.begin(), nonterminals_.end());
  g.terminals_ = terminals_;

  std::vector<std::uint64_t> lhs_total(nonterminals_.size(), 0);
  for (const auto& r : rules_) lhs_total[r.lhs] += r.freq;
  if (synthetic) {
    for (const auto& [root, n] : root_counts_) {
      Rule r;
      r.lhs = 0;
      r.rhs.push_back({root + shift, false});
      r.freq = n;
      r.prob = static_cast<double>(n) / static_cast<double>(sentences_);
      g.rules_.push_back(std::move(r));
    }
  }
  for (const auto& src : rules_) {
    Rule r = src;
    r.lhs += shift;
    for (auto& s : r.rhs)
      if (!s.terminal) s.index += shift;
    r.prob = static_cast<double>(src.freq) / static_cast<double>(lhs_total[src.lhs]);
    g.rules_.push_back(std::move(r));
  }
  g.root_ = synthetic ? 0 : root_counts_.front().first;
  g.index_rules();
  return g;
}

Pcfg induce(const Corpus& c) {
  if (c.empty()) throw InputError("cannot induce a grammar from an empty corpus");
  TreebankCounter counter;
  counter.add(c);
  return counter.grammar();
}

// ---------------------------------------------------------------------------
// Tree probability

namespace {

void accumulate_rules(const Pcfg& g, const Tree& node, std::vector<std::uint64_t>* counts, double& log2p,
                      std::vector<std::string>& missing) {
  if (node.is_leaf()) return;
  if (auto r = g.find_rule(node)) {
    if (counts) ++(*counts)[*r];
    log2p += std::log2(g.rules()[*r].prob);
  } else {
    std::string s = node.label + " ->";
    for (const auto& c : node.children) s += " " + c.label;
    if (std::find(missing.begin(), missing.end(), s) == missing.end()) missing.push_back(std::move(s));
  }
  for (const auto& c : node.children) accumulate_rules(g, c, counts, log2p, missing);
}

[[noreturn]] void throw_missing(std::vector<std::string> missing) {
  std::string msg = "rules not in grammar:";
  for (const auto& m : missing) msg += " [" + m + "]";
  throw OutOfGrammarError(msg, std::move(missing));
}

}  // namespace

TreeProbability tree_probability(const Pcfg& g, const Tree& t) {
  double log2p = 0.0;
  std::vector<std::string> missing;
  accumulate_rules(g, t, nullptr, log2p, missing);
  if (!missing.empty()) throw_missing(std::move(missing));
  return {std::exp2(log2p), log2p};
}

void count_rules(const Pcfg& g, const Tree& t, std::vector<std::uint64_t>& counts) {
  counts.resize(g.rules().size(), 0);
  double unused = 0.0;
  std::vector<std::string> missing;
  accumulate_rules(g, t, &counts, unused, missing);
  if (!missing.empty()) throw_missing(std::move(missing));
}

std::vector<FreqTable> rule_freq_tables(const Pcfg& g) {
  std::vector<FreqTable> tables;
  tables.reserve(g.nonterminals().size());
  for (std::uint32_t a = 0; a < g.nonterminals().size(); ++a) {
    std::vector<std::uint64_t> counts;
    for (auto r : g.rules_of(a))
      if (g.rules()[r].freq > 0) counts.push_back(g.rules()[r].freq);
    if (counts.empty()) throw InputError("non-terminal '" + g.nonterminals()[a] + "' has no observed frequencies");
    tables.emplace_back(std::move(counts));
  }
  return tables;
}

// ---------------------------------------------------------------------------
// Sampling

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Sampler::Sampler(const Pcfg& g, std::size_t max_nodes) : g_(g), max_nodes_(max_nodes) {
  cumulative_.resize(g.nonterminals().size());
  for (std::uint32_t a = 0; a < g.nonterminals().size(); ++a) {
    double acc = 0.0;
    for (auto r : g.rules_of(a)) {
      acc += g.rules()[r].prob;
      cumulative_[a].push_back(acc);
    }
  }
}

bool Sampler::try_draw(Rng& rng, std::vector<std::size_t>& out, std::vector<std::uint32_t>& stack) const {
  out.clear();
  stack.assign(1, g_.root());
  std::size_t nodes = 1;
  while (!stack.empty()) {
    const std::uint32_t a = stack.back();
    stack.pop_back();
    const auto& cum = cumulative_[a];
    const double u = uniform01(rng) * cum.back();
    auto k = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
    if (k == cum.size()) k = cum.size() - 1;
    const std::size_t r = g_.rules_of(a)[k];
    out.push_back(r);
    const auto& rhs = g_.rules()[r].rhs;
    nodes += rhs.size();
    if (nodes > max_nodes_) return false;
    for (auto it = rhs.rbegin(); it != rhs.rend(); ++it)
      if (!it->terminal) stack.push_back(it->index);
  }
  return true;
}

std::vector<std::size_t> Sampler::derivation(Rng& rng, std::size_t* retries) const {
  std::vector<std::size_t> out;
  std::vector<std::uint32_t> stack;
  for (std::size_t attempt = 0; attempt < kMaxSampleRetries; ++attempt) {
    if (try_draw(rng, out, stack)) return out;
    if (retries) ++*retries;
  }
  throw DivergenceError("sampling exceeded " + std::to_string(max_nodes_) + " nodes on " +
                        std::to_string(kMaxSampleRetries) + " consecutive draws");
}

Tree Sampler::build(std::span<const std::size_t> derivation, std::size_t& pos, std::uint32_t nt) const {
  const Rule& r = g_.rules()[derivation[pos++]];
  if (r.lhs != nt) throw InputError("derivation does not match the grammar");
  Tree node(g_.nonterminals()[nt]);
  node.children.reserve(r.rhs.size());
  for (const auto& s : r.rhs) {
    if (s.terminal) {
      node.children.emplace_back(g_.terminals()[s.index]);
    } else {
      node.children.push_back(build(derivation, pos, s.index));
    }
  }
  return node;
}

Tree Sampler::tree(std::span<const std::size_t> derivation) const {
  std::size_t pos = 0;
  Tree t = build(derivation, pos, g_.root());
  if (pos != derivation.size()) throw InputError("derivation has trailing rules");
  return t;
}

SampleResult sample(const Pcfg& g, std::uint64_t seed, std::size_t max_nodes) {
  Sampler sampler(g, max_nodes);
  Rng rng(seed);
  SampleResult res;
  const auto d = sampler.derivation(rng, &res.retries);
  res.tree = sampler.tree(d);
  return res;
}

Corpus sample_corpus(const Pcfg& g, std::size_t n, std::uint64_t seed, std::size_t max_nodes) {
  Sampler sampler(g, max_nodes);
  Rng rng(seed);
  Corpus c;
  c.preterminalized = true;
  c.source_id = "sample:" + std::to_string(seed);
  c.sentences.reserve(n);
  for (std::size_t i = 0; i < n; ++i) c.sentences.push_back(sampler.tree(sampler.derivation(rng)));
  return c;
}

// ---------------------------------------------------------------------------
// Serialization

void write_grammar(std::ostream& os, const Pcfg& g) {
  auto check = [](const std::string& s) {
    if (s.empty() || s.find_first_of(" \t\n\r") != std::string::npos || s == "->")
      throw InputError("symbol '" + s + "' cannot be serialized");
  };
  check(g.root_label());
  os << "#root " << g.root_label() << '\n';
  char buf[64];
  for (std::uint32_t a = 0; a < g.nonterminals().size(); ++a) {
    check(g.nonterminals()[a]);
    for (auto r : g.rules_of(a)) {
      const Rule& rule = g.rules()[r];
      std::snprintf(buf, sizeof buf, "%.17g", rule.prob);
      os << buf << '\t' << rule.freq << '\t' << g.nonterminals()[a] << " ->";
      for (const auto& s : rule.rhs) {
        check(g.label(s));
        os << ' ' << g.label(s);
      }
      os << '\n';
    }
  }
}

std::string write_grammar(const Pcfg& g) {
  std::ostringstream os;
  write_grammar(os, g);
  return os.str();
}

Pcfg read_grammar(std::string_view text) {
  std::string root;
  std::vector<Pcfg::RuleSpec> specs;
  std::size_t offset = 0;
  while (offset < text.size()) {
    auto nl = text.find('\n', offset);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(offset, nl - offset);
    const std::size_t line_offset = offset;
    offset = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line.starts_with("#root ")) {
        std::istringstream is{std::string(line.substr(6))};
        is >> root;
      }
      continue;
    }
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos) throw ParseError("expected prob<TAB>freq<TAB>rule", line_offset);
    Pcfg::RuleSpec spec;
    const auto prob_s = line.substr(0, t1);
    const auto freq_s = line.substr(t1 + 1, t2 - t1 - 1);
    auto [pp, pe] = std::from_chars(prob_s.data(), prob_s.data() + prob_s.size(), spec.prob);
    if (pe != std::errc() || pp != prob_s.data() + prob_s.size())
      throw ParseError("bad probability '" + std::string(prob_s) + "'", line_offset);
    auto [fp, fe] = std::from_chars(freq_s.data(), freq_s.data() + freq_s.size(), spec.freq);
    if (fe != std::errc() || fp != freq_s.data() + freq_s.size())
      throw ParseError("bad frequency '" + std::string(freq_s) + "'", line_offset);
    std::istringstream is{std::string(line.substr(t2 + 1))};
    std::string arrow;
    if (!(is >> spec.lhs >> arrow) || arrow != "->") throw ParseError("expected 'lhs -> rhs'", line_offset);
    for (std::string sym; is >> sym;) spec.rhs.push_back(sym);
    if (spec.rhs.empty()) throw ParseError("empty right-hand side", line_offset);
    specs.push_back(std::move(spec));
  }
  if (root.empty()) throw ParseError("missing #root header", 0);
  return Pcfg::from_rules(root, specs);
}

}  // namespace sitekit
