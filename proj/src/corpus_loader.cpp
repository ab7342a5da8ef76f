#include "sitekit/corpus_loader.hpp"

#include <fstream>
#include <sstream>

#include "sitekit/errors.hpp"

namespace sitekit {

TreebankFormat parse_format(std::string_view name) {
  if (name == "ptb") return TreebankFormat::Ptb;
  if (name == "conllu") return TreebankFormat::Conllu;
  throw InputError("unknown treebank format '" + std::string(name) + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

LoadedCorpus load_corpus_text(std::string_view text, std::string source_id, const LoadOptions& opts) {
  LoadedCorpus out;
  out.corpus.source_id = std::move(source_id);
  if (opts.format == TreebankFormat::Conllu) {
    auto report = convert_treebank(parse_conllu(text), opts.conversion);
    out.corpus.sentences = std::move(report.corpus.sentences);
    out.corpus.preterminalized = true;
    out.skipped_nonprojective = report.skipped_nonprojective;
    out.skipped_ids = std::move(report.skipped_ids);
    return out;
  }
  for (auto& t : parse_bracketed(text)) {
    auto kept = opts.drop_labels.empty() ? std::optional<Tree>(std::move(t)) : strip_empty_elements(t, opts.drop_labels);
    if (!kept) {
      ++out.dropped_empty;
      continue;
    }
    Tree tree = opts.strip_function_tags ? strip_function_tags(*kept) : std::move(*kept);
    out.corpus.sentences.push_back(opts.preterminalize ? preterminalize(tree) : std::move(tree));
  }
  out.corpus.preterminalized = true;
  return out;
}

LoadedCorpus load_corpus_file(const std::filesystem::path& path, const LoadOptions& opts) {
  return load_corpus_text(read_file(path), path.filename().string(), opts);
}

}  // namespace sitekit
