#pragma once

#include <cema/charter.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace cema {

/// Records read from one source, in input order.
struct CorpusBatch {
    std::string source;
    std::vector<Charter> charters;
    std::vector<Rejection> rejects;
};

enum class InputFormat { jsonl, tsv };

/// Removes square-bracket editorial insertions (nested ones included, stray
/// brackets dropped), deletes control characters and invalid UTF-8, and
/// collapses whitespace runs to a single space. Idempotent.
std::string clean_text(std::string_view raw);

/// Reads a JSON Lines stream. Malformed lines become rejects.
CorpusBatch read_jsonl(std::istream& in, std::string source);

/// Reads a TSV metadata table; texts come from `<text_dir>/<id>.txt`.
CorpusBatch read_tsv(std::istream& in, std::string source,
                     const std::filesystem::path& text_dir);

/// Dispatches on format. The batch source is the file stem. For tsv, the
/// text directory defaults to a `texts/` directory next to the table.
/// Throws DataError if the file cannot be opened.
CorpusBatch read_corpus(const std::filesystem::path& path, InputFormat format,
                        std::optional<std::filesystem::path> text_dir = {});

/// Batches are processed in source-name order. Exact duplicates (cleaned
/// text + date interval) collapse into the first record, which accumulates
/// provenance; ids that still collide across sources get a "source:" prefix.
Corpus merge_corpora(std::vector<CorpusBatch> batches);

nlohmann::json charter_to_json(const Charter& c);
Validated charter_from_json(const nlohmann::json& j);

void write_corpus_jsonl(std::ostream& out, const Corpus& corpus);

/// Reads a merged corpus file. Any invalid record is a DataError.
Corpus load_corpus(const std::filesystem::path& path);

} // namespace cema
