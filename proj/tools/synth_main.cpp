// Writes the planted-signal synthetic corpus.

#include <cema/error.hpp>
#include <cema/synth.hpp>

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Generate a synthetic charter corpus", "cema-synth"};
    cema::SynthParams p;
    std::string out = "data/synthetic";
    app.add_option("--out", out, "Output directory");
    app.add_option("--charters", p.charters, "Number of charters");
    app.add_option("--min-tokens", p.min_tokens, "Shortest charter");
    app.add_option("--max-tokens", p.max_tokens, "Longest charter");
    app.add_option("--class-rate", p.class_rate, "Share of class-specific tokens");
    app.add_option("--region-rate", p.region_rate, "Share of regional tokens");
    app.add_option("--seed", p.seed, "Seed");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    try {
        const auto corpus = cema::generate_synthetic(p);
        cema::write_synthetic(corpus, out);
        std::cout << corpus.corpus.charters.size() << " charters written to " << out << '\n';
    } catch (const cema::UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
