#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sitekit/treebank_io.hpp"

namespace sitekit {

/// Start symbol added when the trees of a treebank have different roots.
inline constexpr std::string_view kSyntheticRoot = "\xE2\x8A\xA4ROOT\xE2\x8A\xA4";  // ⊤ROOT⊤

/// Maximum deviation from 1 allowed in a non-terminal's rule probabilities.
inline constexpr double kPropernessTolerance = 1e-9;

struct SymbolRef {
  std::uint32_t index = 0;
  bool terminal = false;
  friend bool operator==(const SymbolRef&, const SymbolRef&) = default;
};

struct Rule {
  std::uint32_t lhs = 0;
  std::vector<SymbolRef> rhs;
  double prob = 0.0;
  std::uint64_t freq = 0;

  std::size_t terminal_count() const noexcept;
};

/// Observed frequencies of the outcomes of one discrete variable.
struct FreqTable {
  std::vector<std::uint64_t> counts;

  FreqTable() = default;
  explicit FreqTable(std::vector<std::uint64_t> c);
  std::uint64_t n() const noexcept { return n_; }
  /// Number of outcome types observed exactly k times.
  std::uint64_t types_with_count(std::uint64_t k) const noexcept;

 private:
  std::uint64_t n_ = 0;
};

/// A probabilistic context-free grammar. Non-terminals are indexed in the
/// order they were first encountered; rule probabilities of every
/// non-terminal sum to one. Immutable once built.
class Pcfg {
 public:
  struct RuleSpec {
    std::string lhs;
    std::vector<std::string> rhs;
    double prob = 0.0;
    std::uint64_t freq = 0;
  };

  Pcfg() = default;

  /// Symbols occurring on a left-hand side are non-terminals (ordered by
  /// first occurrence as lhs); every other symbol is a terminal. Throws
  /// InputError on improper probabilities, duplicate rules, empty right-hand
  /// sides or an unknown root.
  static Pcfg from_rules(std::string_view root, const std::vector<RuleSpec>& rules);

  /// The ML grammar of a sample of derivations of `base`: keeps the rules with
  /// non-zero count and sets each probability to its relative frequency.
  static Pcfg from_rule_counts(const Pcfg& base, std::span<const std::uint64_t> counts);

  const std::vector<std::string>& nonterminals() const noexcept { return nonterminals_; }
  const std::vector<std::string>& terminals() const noexcept { return terminals_; }
  const std::vector<Rule>& rules() const noexcept { return rules_; }
  const std::vector<std::size_t>& rules_of(std::uint32_t nt) const { return by_lhs_.at(nt); }
  std::uint32_t root() const noexcept { return root_; }
  const std::string& root_label() const { return nonterminals_.at(root_); }

  std::optional<std::uint32_t> nonterminal_index(std::string_view label) const;
  const std::string& label(SymbolRef s) const { return s.terminal ? terminals_.at(s.index) : nonterminals_.at(s.index); }

  /// Looks up the rule expanding an internal node with the given children.
  std::optional<std::size_t> find_rule(const Tree& node) const;
  std::string rule_string(std::size_t rule) const;

 private:
  friend class TreebankCounter;

  void index_rules();
  void validate() const;

  std::vector<std::string> nonterminals_;
  std::vector<std::string> terminals_;
  std::uint32_t root_ = 0;
  std::vector<Rule> rules_;
  std::vector<std::vector<std::size_t>> by_lhs_;
  std::unordered_map<std::string, std::uint32_t> nt_index_;
  std::unordered_map<std::string, std::size_t> rule_index_;
};

/// Rule and root counts of a treebank. Trees can be added one at a time and
/// counters over disjoint shards merged; grammar() gives the ML grammar of
/// everything added so far.
class TreebankCounter {
 public:
  void add(const Tree& t);
  void add(const Corpus& c);
  void merge(const TreebankCounter& other);
  std::size_t sentences() const noexcept { return sentences_; }
  Pcfg grammar() const;

 private:
  std::uint32_t intern_nonterminal(const std::string& label);
  std::uint32_t intern_terminal(const std::string& label);
  std::size_t count_node(const Tree& node);
  void check_disjoint(const std::string& label, bool as_terminal) const;

  std::vector<std::string> nonterminals_;
  std::vector<std::string> terminals_;
  std::unordered_map<std::string, std::uint32_t> nt_index_;
  std::unordered_map<std::string, std::uint32_t> t_index_;
  std::vector<Rule> rules_;
  std::unordered_map<std::string, std::size_t> rule_index_;
  std::vector<std::pair<std::uint32_t, std::uint64_t>> root_counts_;
  std::size_t sentences_ = 0;
};

/// Maximum-likelihood grammar of a treebank.
Pcfg induce(const Corpus& c);

struct TreeProbability {
  double probability = 0.0;
  double log2_probability = 0.0;
};

/// Product of the probabilities of the rules used by `t`, accumulated in log
/// space. Throws OutOfGrammarError listing every rule missing from `g`.
TreeProbability tree_probability(const Pcfg& g, const Tree& t);

/// Counts of every rule of `g` used by `t` (indexed like g.rules()).
void count_rules(const Pcfg& g, const Tree& t, std::vector<std::uint64_t>& counts);

/// Frequency table of every non-terminal's observed expansions, indexed by
/// non-terminal. Rules with zero frequency are left out.
std::vector<FreqTable> rule_freq_tables(const Pcfg& g);

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// SplitMix64 finaliser; derives independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

inline constexpr std::size_t kDefaultMaxNodes = 10000;
inline constexpr std::size_t kMaxSampleRetries = 1000;

/// Draws derivations top-down, expanding the leftmost non-terminal first.
/// Draws with more than max_nodes nodes are rejected and redrawn.
class Sampler {
 public:
  explicit Sampler(const Pcfg& g, std::size_t max_nodes = kDefaultMaxNodes);

  /// Rule indices of one derivation in pre-order. `retries` is incremented
  /// once per rejected draw; throws DivergenceError after kMaxSampleRetries.
  std::vector<std::size_t> derivation(Rng& rng, std::size_t* retries = nullptr) const;
  Tree tree(std::span<const std::size_t> derivation) const;

  const Pcfg& grammar() const noexcept { return g_; }

 private:
  bool try_draw(Rng& rng, std::vector<std::size_t>& out, std::vector<std::uint32_t>& stack) const;
  Tree build(std::span<const std::size_t> derivation, std::size_t& pos, std::uint32_t nt) const;

  const Pcfg& g_;
  std::size_t max_nodes_;
  std::vector<std::vector<double>> cumulative_;
};

struct SampleResult {
  Tree tree;
  std::size_t retries = 0;
};

SampleResult sample(const Pcfg& g, std::uint64_t seed, std::size_t max_nodes = kDefaultMaxNodes);

/// `n` trees drawn from one generator seeded with `seed`.
Corpus sample_corpus(const Pcfg& g, std::size_t n, std::uint64_t seed, std::size_t max_nodes = kDefaultMaxNodes);

/// Text format: a `#root <symbol>` header, then one rule per line as
/// `prob<TAB>freq<TAB>lhs -> rhs1 rhs2 ...` with probabilities printed to 17
/// significant digits. Other `#` lines are comments.
void write_grammar(std::ostream& os, const Pcfg& g);
std::string write_grammar(const Pcfg& g);
Pcfg read_grammar(std::string_view text);

}  // namespace sitekit
