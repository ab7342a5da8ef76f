#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sitekit/dep_convert.hpp"
#include "sitekit/treebank_io.hpp"

namespace sitekit {

enum class TreebankFormat { Ptb, Conllu };

TreebankFormat parse_format(std::string_view name);

/// Preprocessing applied when a treebank file is turned into a corpus of
/// derivation trees ready for induction.
struct LoadOptions {
  TreebankFormat format = TreebankFormat::Ptb;
  /// Replace word leaves by their POS tags (bracketed input only).
  bool preterminalize = true;
  bool strip_function_tags = false;
  /// Pre-terminal labels whose subtrees are removed before anything else.
  std::vector<std::string> drop_labels{"-NONE-"};
  ConversionConfig conversion;
};

struct LoadedCorpus {
  Corpus corpus;
  std::size_t skipped_nonprojective = 0;
  std::vector<std::string> skipped_ids;
  /// Sentences that became empty after dropping empty elements.
  std::size_t dropped_empty = 0;
};

LoadedCorpus load_corpus_text(std::string_view text, std::string source_id, const LoadOptions& opts);
LoadedCorpus load_corpus_file(const std::filesystem::path& path, const LoadOptions& opts);

/// Whole file as a string; InputError if it cannot be read.
std::string read_file(const std::filesystem::path& path);

}  // namespace sitekit
