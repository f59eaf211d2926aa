#pragma once

#include <cli.hpp>

#include <cema/synth.hpp>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

namespace cema::test {

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

inline CliResult run_cli(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    const int code = cli::dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

/// A synthetic corpus ingested and indexed through the CLI.
struct Workspace {
    std::filesystem::path root;
    std::filesystem::path raw;    // charters.jsonl, lexicon.tsv, centroids.csv
    std::filesystem::path corpus; // merged corpus.jsonl
    std::filesystem::path index;  // index.bin
};

/// Returns an empty root path when a step fails.
inline Workspace prepare_workspace(const std::filesystem::path& root, const SynthParams& params)
{
    Workspace w{root, root / "raw", root / "ingest" / "corpus.jsonl", root / "index" / "index.bin"};
    write_synthetic(generate_synthetic(params), w.raw);
    if (run_cli({"ingest", (w.raw / "charters.jsonl").string(), "--out", (root / "ingest").string()}).code != 0)
        return {};
    if (run_cli({"index", "--corpus", w.corpus.string(), "--lexicon", (w.raw / "lexicon.tsv").string(), "--out",
                 (root / "index").string()})
            .code != 0)
        return {};
    return w;
}

} // namespace cema::test
