#include "cli.hpp"
#include "manifest.hpp"

#include <cema/chronogeo.hpp>
#include <cema/classify.hpp>
#include <cema/contingency.hpp>
#include <cema/cooc.hpp>
#include <cema/csv.hpp>
#include <cema/dsm.hpp>
#include <cema/error.hpp>
#include <cema/factor.hpp>
#include <cema/index.hpp>
#include <cema/ingest.hpp>
#include <cema/richness.hpp>
#include <cema/svg.hpp>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <omp.h>

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace cema::cli {

namespace {

namespace fs = std::filesystem;

struct Global {
    int threads = 0;
    std::string format = "csv";
    bool svg = false;
};

class Run {
public:
    Run(fs::path dir, OutputFormat format, bool svg, std::ostream& out, std::ostream& err)
        : dir(std::move(dir)), format(format), svg(svg), out(out), err(err)
    {
    }

    fs::path dir;
    OutputFormat format;
    bool svg;
    std::ostream& out;
    std::ostream& err;
    RunManifest manifest;

    void input(const fs::path& p)
    {
        if (!fs::is_regular_file(p))
            throw DataError("input not found: " + p.string());
        manifest.inputs.push_back(digest(p));
    }

    void table(const Table& t, const std::string& stem) { write_table(t, dir, stem, format); }

    void file(const std::string& name, const std::string& content)
    {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f || !(f << content))
            throw DataError("cannot write " + (dir / name).string());
    }

    void seed(std::uint64_t s) { manifest.seed = s; }
    void warn(const std::string& msg) { err << "warning: " << msg << '\n'; }
};

std::vector<std::string> split_list(const std::string& s, char sep = ',')
{
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(s);
    while (std::getline(ss, item, sep))
        if (!item.empty())
            out.push_back(item);
    return out;
}

std::vector<std::uint64_t> parse_counts(const std::string& s)
{
    std::vector<std::uint64_t> out;
    for (const auto& item : split_list(s)) {
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(item, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != item.size() || item[0] == '-')
            throw UsageError("not a non-negative integer: " + item);
        out.push_back(v);
    }
    return out;
}

Index open_index(Run& run, const std::string& path)
{
    run.input(path);
    return load_index(path);
}

LemmaId require_lemma(const Index& index, const std::string& name)
{
    auto id = index.lemmas().find(name);
    if (!id)
        throw DataError("lemma not in vocabulary: " + name);
    return *id;
}

std::vector<std::string> read_word_list(Run& run, const std::string& path)
{
    run.input(path);
    std::ifstream in(path);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (!line.empty() && line[0] != '#')
            out.push_back(line);
    }
    return out;
}

std::string axis_name(Eigen::Index k)
{
    return fmt::format("axis{}", k + 1);
}

// ---------------------------------------------------------------------------
// Shared option groups

struct FilterArgs {
    std::string doc_type;
    std::string region;
    std::string institution;
    std::string source;
    int from = 0;
    int to = 0;
    bool dateable = false;
    CLI::Option* from_opt = nullptr;
    CLI::Option* to_opt = nullptr;

    void add(CLI::App* app)
    {
        app->add_option("--doc-type", doc_type, "Keep charters of this typology");
        app->add_option("--region", region, "Keep charters of this region");
        app->add_option("--institution", institution, "Keep charters of this institution");
        app->add_option("--source", source, "Keep charters of this source corpus");
        from_opt = app->add_option("--from", from, "Earliest midpoint year (inclusive)");
        to_opt = app->add_option("--to", to, "Latest midpoint year (inclusive)");
        app->add_flag("--dateable-only", dateable, "Keep dateable charters only");
    }

    CharterFilter filter() const
    {
        CharterFilter f;
        if (!doc_type.empty())
            f.doc_type = doc_type;
        if (!region.empty())
            f.region = region;
        if (!institution.empty())
            f.institution = institution;
        if (!source.empty())
            f.source_corpus = source;
        if (from_opt && from_opt->count())
            f.year_lo = from;
        if (to_opt && to_opt->count())
            f.year_hi = to;
        f.dateable_only = dateable;
        return f;
    }
};

struct SliceArgs {
    std::string slicing = "halfcentury";
    std::string span;
    int k = 5;

    void add(CLI::App* app)
    {
        app->add_option("--slicing", slicing, "halfcentury or equal")->check(CLI::IsMember({"halfcentury", "equal"}));
        app->add_option("--span", span, "Half-century range LO:HI (multiples of 50), default from the data");
        app->add_option("--slices", k, "Number of equal-token slices");
    }

    std::pair<Year, Year> range(const Index& index, const CharterFilter& filter) const
    {
        if (!span.empty()) {
            auto parts = split_list(span, ':');
            if (parts.size() != 2)
                throw UsageError("--span expects LO:HI");
            try {
                return {std::stoi(parts[0]), std::stoi(parts[1])};
            } catch (const std::exception&) {
                throw UsageError("--span expects integer years");
            }
        }
        std::optional<Year> lo;
        std::optional<Year> hi;
        for (const auto& c : index.charters()) {
            if (!c.date || !filter.matches(c))
                continue;
            const Year m = c.date->midpoint();
            lo = lo ? std::min(*lo, m) : m;
            hi = hi ? std::max(*hi, m) : m;
        }
        if (!lo)
            throw DataError("no dateable charter to slice");
        auto floor50 = [](Year y) { return static_cast<Year>((y >= 0 ? y : y - 49) / 50 * 50); };
        return {floor50(*lo), floor50(*hi) + 50};
    }

    SlicePlan plan(const Index& index, const CharterFilter& filter) const
    {
        if (slicing == "equal")
            return slice_equal_tokens(index, k, filter);
        const auto [lo, hi] = range(index, filter);
        return slice_by_halfcentury(index, lo, hi, filter);
    }
};

struct TrainArgs {
    std::string label_field = "doc_type";
    std::string kind = "logistic";
    TrainParams params;
    std::uint64_t seed = 1;

    void add(CLI::App* app)
    {
        app->add_option("--label-field", label_field, "Metadata field holding the class label");
        app->add_option("--kind", kind, "logistic or bayes")->check(CLI::IsMember({"logistic", "bayes"}));
        app->add_option("--top-lemmas", params.top_lemmas, "Lemma features");
        app->add_option("--top-bilemmas", params.top_bilemmas, "Adjacent lemma-pair features");
        app->add_option("--lambda", params.lambda, "L2 strength (logistic)");
        app->add_option("--epochs", params.epochs, "Gradient steps (logistic)");
        app->add_option("--rate", params.rate, "Initial step size (logistic)");
        app->add_option("--seed", seed, "Seed");
    }

    TrainParams resolved() const
    {
        auto p = params;
        p.kind = parse_model_kind(kind);
        if (p.epochs < 0 || !(p.lambda >= 0.0) || !(p.rate > 0.0))
            throw UsageError("epochs, lambda and rate must be non-negative (rate positive)");
        return p;
    }

    std::vector<LabeledDoc> docs(const Index& index, const CharterFilter& filter) const
    {
        std::vector<LabeledDoc> out;
        for (auto& d : labeled_charters(index, label_field))
            if (filter.matches(index.charter(d.charter)) && index.token_count(d.charter) > 0)
                out.push_back(std::move(d));
        return out;
    }
};

// ---------------------------------------------------------------------------
// Subcommands

using Handler = std::function<void(Run&)>;

struct Registry {
    std::vector<std::pair<CLI::App*, Handler>> commands;
    std::map<CLI::App*, std::string*> outs;

    CLI::App* add(CLI::App& app, const std::string& name, const std::string& help, std::string& out_dir)
    {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--out", out_dir, "Output directory")->required();
        outs[sub] = &out_dir;
        return sub;
    }
};

struct IngestCmd {
    std::string out;
    std::vector<std::string> inputs;
    std::string text_dir;
    std::string input_format = "auto";

    void add(CLI::App& app, Registry& reg)
    {
        auto* sub = reg.add(app, "ingest", "Validate, clean and merge charter files", out);
        sub->add_option("inputs", inputs, "JSONL or TSV files")->required();
        sub->add_option("--text-dir", text_dir, "Directory of <id>.txt files for TSV input");
        sub->add_option("--input-format", input_format, "auto, jsonl or tsv")
            ->check(CLI::IsMember({"auto", "jsonl", "tsv"}));
        reg.commands.emplace_back(sub, [this](Run& run) { this->run(run); });
    }

    void run(Run& run)
    {
        for (const auto& p : inputs)
            run.input(p);
        std::vector<CorpusBatch> batches(inputs.size());
        std::vector<std::string> errors(inputs.size());
        const auto n = static_cast<std::int64_t>(inputs.size());
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t i = 0; i < n; ++i) {
            const auto& path = inputs[static_cast<std::size_t>(i)];
            auto fmt_ = input_format;
            if (fmt_ == "auto")
                fmt_ = fs::path(path).extension() == ".tsv" ? "tsv" : "jsonl";
            try {
                std::optional<fs::path> dir;
                if (!text_dir.empty())
                    dir = text_dir;
                batches[static_cast<std::size_t>(i)] =
                    read_corpus(path, fmt_ == "tsv" ? InputFormat::tsv : InputFormat::jsonl, dir);
            } catch (const std::exception& e) {
                errors[static_cast<std::size_t>(i)] = e.what();
            }
        }
        for (const auto& e : errors)
            if (!e.empty())
                throw DataError(e);

        Table rejects({"source", "record", "field", "reason"});
        std::size_t read = 0;
        for (const auto& b : batches) {
            read += b.charters.size();
            for (const auto& r : b.rejects)
                rejects.add({b.source, r.record, r.field, r.reason});
        }
        const auto corpus = merge_corpora(std::move(batches));
        if (corpus.charters.empty())
            throw DataError("no valid charter in the input");
        {
            std::ofstream f(run.dir / "corpus.jsonl", std::ios::binary);
            write_corpus_jsonl(f, corpus);
        }
        run.table(rejects, "rejects");
        Table summary({"metric", "value"});
        summary.add({std::string("records_accepted"), std::uint64_t{read}});
        summary.add({std::string("records_rejected"), std::uint64_t{rejects.rows().size()}});
        summary.add({std::string("charters_merged"), std::uint64_t{corpus.charters.size()}});
        run.table(summary, "ingest_summary");
        if (!rejects.rows().empty())
            run.warn(fmt::format("{} record(s) rejected, see rejects", rejects.rows().size()));
        run.out << fmt::format("{} charters written ({} accepted, {} rejected)\n", corpus.charters.size(), read,
                               rejects.rows().size());
    }
};

struct LemmatizeCmd {
    std::string out;
    std::string corpus;
    std::string lexicon;
    std::string report = "unknown_forms";
    bool tokens = false;

    void add(CLI::App& app, Registry& reg)
    {
        auto* sub = reg.add(app, "lemmatize", "Lemmatize a corpus and report unknown forms", out);
        sub->add_option("--corpus", corpus, "Merged corpus JSONL")->required();
        sub->add_option("--lexicon", lexicon, "Lexicon TSV")->required();
        sub->add_option("--unknown-report", report, "Name of the unknown-form report");
        sub->add_flag("--tokens", tokens, "Also write every token with its lemma");
        reg.commands.emplace_back(sub, [this](Run& run) { this->run(run); });
    }

    void run(Run& run)
    {
        run.input(corpus);
        run.input(lexicon);
        const auto c = load_corpus(corpus);
        std::vector<std::string> warnings;
        const auto lex = Lexicon::load(lexicon, &warnings);
        for (const auto& w : warnings)
            run.warn(w);

        std::vector<std::vector<LemmatizedToken>> per(c.charters.size());
        const auto n = static_cast<std::int64_t>(c.charters.size());
#pragma omp parallel for schedule(dynamic, 16)
        for (std::int64_t i = 0; i < n; ++i) {
            const auto forms = tokenize(c.charters[static_cast<std::size_t>(i)].text);
            per[static_cast<std::size_t>(i)] = lemmatize(forms, lex);
        }
        std::map<std::string, std::uint64_t> unknown;
        std::uint64_t total = 0;
        std::uint64_t missing = 0;
        Table toks({"charter_id", "position", "form", "lemma", "known"});
        for (std::size_t i = 0; i < per.size(); ++i) {
            for (std::size_t k = 0; k < per[i].size(); ++k) {
                const auto& t = per[i][k];
                ++total;
                if (!t.known) {
                    ++missing;
                    ++unknown[normalize_form(t.form)];
                }
                if (tokens)
                    toks.add({c.charters[i].id, std::uint64_t{k}, t.form, t.lemma, std::uint64_t{t.known ? 1u : 0u}});
            }
        }
        std::vector<std::pair<std::string, std::uint64_t>> ranked(unknown.begin(), unknown.end());
        std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        Table rep({"form", "frequency"});
        for (const auto& [f, k] : ranked)
            rep.add({f, k});
        run.table(rep, report);
        if (tokens)
            run.table(toks, "tokens");
        Table summary({"metric", "value"});
        summary.add({std::string("tokens"), total});
        summary.add({std::string("unknown_tokens"), missing});
        summary.add({std::string("unknown_forms"), std::uint64_t{unknown.size()}});
        summary.add({std::string("unknown_rate"), total ? static_cast<double>(missing) / static_cast<double>(total) : 0.0});
        run.table(summary, "lemmatize_summary");
        run.out << fmt::format("{} tokens, {} unknown ({} distinct forms)\n", total, missing, unknown.size());
    }
};

Table stats_table(const IndexStats& s)
{
    Table t({"metric", "value"});
    t.add({std::string("charters"), std::uint64_t{s.charters}});
    t.add({std::string("dateable"), std::uint64_t{s.dateable}});
    t.add({std::string("located"), std::uint64_t{s.located}});
    t.add({std::string("tokens"), s.tokens});
    t.add({std::string("lemmas"), std::uint64_t{s.lemmas}});
    t.add({std::string("forms"), std::uint64_t{s.forms}});
    t.add({std::string("unknown_tokens"), s.unknown_tokens});
    t.add({std::string("unknown_rate"), s.unknown_rate});
    return t;
}

void print_stats(std::ostream& out, const IndexStats& s)
{
    out << fmt::format("charters {}\ndateable {}\nlocated {}\ntokens {}\nlemmas {}\nforms {}\nunknown_rate {}\n",
                       s.charters, s.dateable, s.located, s.tokens, s.lemmas, s.forms, format_number(s.unknown_rate));
}

struct IndexCmd {
    std::string out;
    std::string corpus;
    std::string lexicon;

    void add(CLI::App& app, Registry& reg)
    {
        auto* sub = reg.add(app, "index", "Build and persist the corpus index", out);
        sub->add_option("--corpus", corpus, "Merged corpus JSONL")->required();
        sub->add_option("--lexicon", lexicon, "Lexicon TSV")->required();
        reg.commands.emplace_back(sub, [this](Run& run) { this->run(run); });
    }

    void run(Run& run)
    {
        run.input(corpus);
        run.input(lexicon);
        std::vector<std::string> warnings;
        const auto lex = Lexicon::load(lexicon, &warnings);
        for (const auto& w : warnings)
            run.warn(w);
        const auto index = build_index(load_corpus(corpus), lex);
        save_index(index, run.dir / "index.bin");
        const auto s = index.stats();
        run.table(stats_table(s), "stats");
        print_stats(run.out, s);
    }
};

struct StatsCmd {
    std::string out;
    std::string index;

    void add(CLI::App& app, Registry& reg)
    {
        auto* sub = reg.add(app, "stats", "Charter, token and vocabulary counts of an index", out);
        sub->add_option("--index", index, "Index file")->required();
        reg.commands.emplace_back(sub, [this](Run& run) { this->run(run); });
    }

    void run(Run& run)
    {
        const auto idx = open_index(run, index);
        const auto s = idx.stats();
        run.table(stats_table(s), "stats");
        print_stats(run.out, s);
    }
};

struct RichnessCmd {
    std::string out;
    std::string index;
    std::string by = "source_corpus";
    std::string packages = "500,1000,10000";
    int replicates = 10;
    std::uint64_t seed = 1;
    std::uint64_t curve_step = 0;
    FilterArgs filter;

    void add(CLI::App& app, Registry& reg)
    {
        auto* sub = reg.add(app, "richness", "Vocabulary growth per corpus at fixed token packages", out);
        sub->add_option("--index", index, "Index file")->required();
        sub->add_option("--by", by, "Metadata field defining the corpora");
        sub->add_option("--packages", packages, "Comma-separated token counts");
        sub->add_option("--replicates", replicates, "Shuffled replicates (0: document order)");
        sub->add_option("--seed", seed, "Seed");
        sub->add_option("--curve-step", curve_step, "Also write the full growth curve at this step");
        filter.add(sub);
        reg.commands.emplace_back(sub, [this](Run& run) { this->run(run); });
    }

    void run(Run& run)
    {
        const auto idx = open_index(run, index);
        run.seed(seed);
        if (replicates < 0)
            throw UsageError("--replicates must be >= 0");
        const auto pk = parse_counts(packages);
        if (pk.empty())
            throw UsageError("--packages is empty");
        const auto corpora = corpora_by_field(idx, by, filter.filter());
        if (corpora.empty())
            throw DataError("no charter carries field " + by);
        Table t({"corpus", "package", "V_mean", "V_min", "V_max", "R", "seed"});
        for (const auto& r : richness_compare(corpora, pk, replicates, seed)) {
            t.add({r.corpus, r.package, r.v_mean ? Cell{*r.v_mean} : Cell{}, r.v_min ? Cell{*r.v_min} : Cell{},
                   r.v_max ? Cell{*r.v_max} : Cell{}, std::int64_t{r.replicates}, r.seed});
            if (!r.v_mean)
                run.warn(fmt::format("corpus {} has fewer than {} tokens", r.corpus, r.package));
        }
        run.table(t, "richness");
        if (curve_step == 0)
            return;
        Table curve({"corpus", "N", "V_mean", "V_min", "V_max"});
        std::vector<LineSeries> series;
        for (const auto& c : corpora) {
            std::uint64_t total = 0;
            for (const auto& d : c.docs)
                total += d.size();
            std::vector<std::uint64_t> cps;
            for (std::uint64_t n = curve_step; n <= total; n += curve_step)
                cps.push_back(n);
            if (cps.empty())
                continue;
            GrowthCurve g;
            if (replicates == 0) {
                std::vector<LemmaId> stream;
                for (const auto& d : c.docs)
                    stream.insert(stream.end(), d.begin(), d.end());
                g = growth_curve(stream, cps);
            } else {
                g = mean_growth_curve(c.docs, cps, replicates, seed);
            }
            for (std::size_t i = 0; i < cps.size(); ++i)
                curve.add({c.name, cps[i], g.v_mean[i], g.v_min[i], g.v_max[i]});
            series.push_back({c.name, g.v_mean});
        }
        run.table(curve, "growth_curve");
        if (run.svg && !series.empty()) {
            std::size_t longest = 0;
            for (const auto& s : series)
                longest = std::max(longest, s.values.size());
            std::vector<std::string> xs;
            for (std::size_t i = 1; i <= longest; ++i)
                xs.push_back(std::to_string(i * curve_step));
            run.file("growth_curve.svg", svg_lines(xs, series, "Vocabulary growth"));
        }
    }
};

struct TimelineCmd {
    std::string out;
    std::string index;
    std::string lemmas;
    std::string mode = "per_million";
    bool by_region = false;
    FilterArgs filter;
    SliceArgs slices;

    void add(CLI::App& app, Registry& reg)
    {
        auto* sub = reg.add(app, "timeline", "Occurrences of a lemma set per time slice", out);
        sub->add_option("--index", index, "Index file")->required();
        sub->add_option("--lemma", lemmas, "Comma-separated lemma set")->required();
        sub->add_option("--mode", mode, "Plotted series: raw, per_million or cumulative");
        sub->add_flag("--by-region", by_region, "One timeline per region, plus peak slices");
        filter.add(sub);
        slices.add(sub);
        reg.commands.emplace_back(sub, [this](Run& run) { this->run(run); });
    }

    void run(Run& run)
    {
        const auto idx = open_index(run, index);
        const auto plot = parse_timeline_mode(mode);
        const auto names = split_list(lemmas);
        if (names.empty())
            throw UsageError("--lemma is empty");
        const auto base = filter.filter();
        const auto plan = slices.plan(idx, base);
        const auto t = timeline(idx, names, plan);
        for (const auto& a : t.absent)
            run.warn("lemma not in vocabulary: " + a);
        Table tab({"slice", "count", "tokens", "per_million", "cumulative"});
        for (std::size_t s = 0; s < t.labels.size(); ++s)
            tab.add({t.labels[s], t.counts[s], t.tokens[s], t.per_million[s], t.cumulative[s]});
        run.table(tab, "timeline");
        if (run.svg)
            run.file("timeline.svg", svg_lines(t.labels, {{lemmas, t.series(plot)}}, lemmas + " (" + mode + ")"));
        if (!by_region)
            return;

        std::set<std::string> regions;
        for (const auto& c : idx.charters())
            if (c.region && base.matches(c))
                regions.insert(*c.region);
        if (regions.empty())
            throw DataError("no charter carries a region");
        // Regional half-century plans share the global range so labels align.
        auto regional = slices;
        if (regional.slicing == "halfcentury" && regional.span.empty()) {
            const auto [lo, hi] = slices.range(idx, base);
            regional.span = fmt::format("{}:{}", lo, hi);
        }
        std::map<std::string, Timeline> per_region;
        Table rt({"region", "slice", "count", "tokens", "per_million", "cumulative"});
        std::vector<LineSeries> series;
        for (const auto& r : regions) {
            auto f = base;
            f.region = r;
            const auto rtl = timeline(idx, names, regional.plan(idx, f));
            for (std::size_t s = 0; s < rtl.labels.size(); ++s)
                rt.add({r, rtl.labels[s], rtl.counts[s], rtl.tokens[s], rtl.per_million[s], rtl.cumulative[s]});
            series.push_back({r, rtl.series(plot)});
            per_region.emplace(r, rtl);
        }
        run.table(rt, "timeline_by_region");
        Table peaks({"region", "peak_slice", "per_million"});
        for (const auto& [r, label] : peak_slice(per_region)) {
            const auto& tl = per_region.at(r);
            const auto at = static_cast<std::size_t>(std::find(tl.labels.begin(), tl.labels.end(), label) -
                                                     tl.labels.begin());
            peaks.add({r, label, tl.per_million[at]});
        }
        run.table(peaks, "peaks");
        if (run.svg && regional.slicing == "halfcentury")
            run.file("timeline_by_region.svg", svg_lines(per_region.begin()->second.labels, series, lemmas));
    }
};

struct GeoCmd {
    std::string out;
    std::string index;
    std::string lemmas;
    double cell = 0.5;
    double bandwidth = 0.0;
    std::string bbox;
    std::string centroids;
    FilterArgs filter;

    void add(CLI::App& app, Registry& reg)
    {
        auto* sub = reg.add(app, "geo", "Gridded geographic density of lemma occurrences", out);
        sub->add_option("--index", index, "Index file")->required();
        sub->add_option("--lemma", lemmas, "Comma-separated lemma set")->required();
        sub->add_option("--cell", cell, "Cell size in degrees");
        sub->add_option("--bandwidth", bandwidth, "Gaussian bandwidth in degrees (0: histogram)");
        sub->add_option("--bbox", bbox, "lon_min,lat_min,lon_max,lat_max");
        sub->add_option("--centroids", centroids, "region,lon,lat table for charters without coordinates");
        filter.add(sub);
        reg.commands.emplace_back(sub, [this](Run& run) { this->run(run); });
    }

    void run(Run& run)
    {
        const auto idx = open_index(run, index);
        GeoOptions opt;
        opt.cell = cell;
        opt.bandwidth = bandwidth;
        opt.filter = filter.filter();
        if (!bbox.empty()) {
            const auto parts = split_list(bbox);
            if (parts.size() != 4)
                throw UsageError("--bbox expects four comma-separated numbers");
            try {
                opt.bbox = BoundingBox{std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2]),
                                       std::stod(parts[3])};
            } catch (const std::exception&) {
                throw UsageError("--bbox expects numbers");
            }
        }
        if (!centroids.empty()) {
            run.input(centroids);
            opt.region_centroids = read_region_centroids(centroids);
        }
        std::vector<std::string> absent;
        const auto grid = geo_density(idx, split_list(lemmas), opt, &absent);
        for (const auto& a : absent)
            run.warn("lemma not in vocabulary: " + a);
        Table t({"lon", "lat", "value"});
        for (std::size_t r = 0; r < grid.rows; ++r)
            for (std::size_t c = 0; c < grid.cols; ++c) {
                const auto ctr = grid.center(r, c);
                t.add({ctr.lon, ctr.lat, grid.at(r, c)});
            }
        run.table(t, "grid");
        Table s({"metric", "value"});
        s.add({std::string("occurrences"), grid.occurrences});
        s.add({std::string("unlocated"), grid.unlocated});
        s.add({std::string("outside_bbox"), grid.outside});
        s.add({std::string("grid_total"), grid.total()});
        s.add({std::string("cols"), std::uint64_t{grid.cols}});
        s.add({std::string("rows"), std::uint64_t{grid.rows}});
        run.table(s, "geo_summary");
        if (grid.unlocated)
            run.warn(fmt::format("{} occurrence(s) without coordinates excluded", grid.unlocated));
    }
};

struct CoocArgs {
    std::string measure = "dice";
    int window = default_window;
    std::uint64_t min_freq = 1;

    void add(CLI::App* app)
    {
        app->add_option("--measure", measure, "dice or llr")->check(CLI::IsMember({"dice", "llr"}));
        app->add_option("--window", window, "Token window");
        app->add_option("--min-freq", min_freq, "Minimum co-occurrence marginal of a ranked lemma");
    }
};

Table ranking_table(const Index& idx, const std::vector<AssociationScore>& scores)
{
    Table t({"pivot", "target", "measure", "value", "f_xy", "f_x", "f_y"});
    for (const auto& s : scores)
        t.add({idx.lemmas()[s.pivot], idx.lemmas()[s.target], to_string(s.measure), s.value, s.f_xy, s.f_x, s.f_y});
    return t;
}

struct CoocCmd {
    std::string out;
    std::string index;
    std::string pivots;
    std::size_t k = 50;
    std::string stoplist;
    CoocArgs args;
    FilterArgs filter;

    void add(CLI::App& app, Registry& reg)
    {
        auto* sub = reg.add(app, "cooc", "Ranked window co-occurrents of pivot lemmas", out);
        sub->add_option("--index", index, "Index file")->required();
        sub->add_option("--pivot", pivots, "Comma-separated pivot lemmas")->required();
        sub->add_option("--k", k, "Co-occurrents per pivot");
        sub->add_option("--stoplist", stoplist, "File of lemmas never ranked");
        args.add(sub);
        filter.add(sub);
        reg.commands.emplace_back(sub, [this](Run& run) { this->run(run); });
    }

    void run(Run& run)
    {
        const auto idx = open_index(run, index);
        std::vector<LemmaId> ids;
        for (const auto& p : split_list(pivots))
            ids.push_back(require_lemma(idx, p));
        if (ids.empty())
            throw UsageError("--pivot is empty");
        RankingOptions ro;
        ro.k = k;
        ro.measure = parse_measure(args.measure);
        ro.min_freq = args.min_freq;
        if (!stoplist.empty()) {
            std::vector<std::string> missing;
            ro.stoplist = idx.resolve(read_word_list(run, stoplist), &missing);
        }
        PairTableOptions po;
        po.window = args.window;
        po.filter = filter.filter();
        po.focus = ids;
        const auto table = pair_table(idx, po);
        std::vector<AssociationScore> all;
        for (auto p : ids) {
            auto top = top_cooccurrents(table, idx, p, ro);
            all.insert(all.end(), top.begin(), top.end());
        }
        run.table(ranking_table(idx, all), "cooc");
    }
};

struct CoocTimelineCmd {
    std::string out;
    std::string index;
    std::string pivot;
    std::string target;
    CoocArgs args;
    FilterArgs filter;
    SliceArgs slices;

    void add(CLI::App& app, Registry& reg)
    {
        auto* sub = reg.add(app, "cooc-timeline", "Association of a pivot and a target per time slice", out);
        sub->add_option("--index", index, "Index file")->required();
        sub->add_option("--pivot", pivot, "Pivot lemma")->required();
        sub->add_option("--target", target, "Target lemma")->required();
        args.add(sub);
        filter.add(sub);
        slices.add(sub);
        reg.commands.emplace_back(sub, [this](Run& run) { this->run(run); });
    }

    void run(Run& run)
    {
        const auto idx = open_index(run, index);
        const auto x = require_lemma(idx, pivot);
        const auto y = require_lemma(idx, target);
        const auto plan = slices.plan(idx, filter.filter());
        const auto m = parse_measure(args.measure);
        const auto scores = association_timeline(idx, x, y, plan, m, args.window);
        Table t({"slice_label", "value"});
        std::vector<double> values;
        std::vector<std::string> labels;
        for (std::size_t s = 0; s < scores.size(); ++s) {
            labels.push_back(plan.slices[s].label);
            t.add({plan.slices[s].label, scores[s] ? Cell{scores[s]->value} : Cell{}});
            values.push_back(scores[s] ? scores[s]->value : 0.0);
        }
        run.table(t, "cooc_timeline");
        if (run.svg)
            run.file("cooc_timeline.svg",
                     svg_lines(labels, {{pivot + " / " + target, values}}, to_string(m) + " " + pivot + " / " + target));
    }
};

Table field_table(const SemanticField& field, bool with_pivot, bool with_cosine)
{
    std::vector<std::string> cols;
    if (with_pivot)
        cols.push_back("pivot");
    for (const char* c : {"term", "group", "x", "y"})
        cols.emplace_back(c);
    if (with_cosine)
        cols.push_back("cosine");
    Table t(cols);
    for (const auto& m : field.members) {
        std::vector<Cell> row;
        if (with_pivot)
            row.emplace_back(field.pivot);
        row.insert(row.end(), {m.term, std::int64_t{m.group}, m.x, m.y});
        if (with_cosine)
            row.emplace_back(m.cosine);
        t.add(std::move(row));
    }
    return t;
}

std::string field_svg(const SemanticField& field)
{
    std::vector<ScatterPoint> pts;
    if (!field.pivot.empty())
        pts.push_back({field.pivot_x, field.pivot_y, field.pivot, 7});
    for (const auto& m : field.members)
        pts.push_back({m.x, m.y, m.term, m.group});
    return svg_scatter(pts, "Semantic field " + field.pivot, "dimension 1", "dimension 2");
}

struct SecondOrderCmd {
    std::string out;
    std::string index;
    std::string pivot;
    std::size_t k = 20;
    int groups = 3;
    std::uint64_t seed = 1;
    CoocArgs args;
    FilterArgs filter;

    void add(CLI::App& app, Registry& reg)
    {
        auto* sub = reg.add(app, "second-order", "Association structure among a pivot's co-occurrents", out);
        sub->add_option("--index", index, "Index file")->required();
        sub->add_option("--pivot", pivot, "Pivot lemma")->required();
        sub->add_option("--k", k, "Co-occurrents kept");
        sub->add_option("--groups", groups, "k-means groups for the semantic field (0: none)");
        sub->add_option("--seed", seed, "Seed");
        args.add(sub);
        filter.add(sub);
        reg.commands.emplace_back(sub, [this](Run& run) { this->run(run); });
    }

    void run(Run& run)
    {
        const auto idx = open_index(run, index);
        run.seed(seed);
        const auto p = require_lemma(idx, pivot);
        RankingOptions ro;
        ro.k = k;
        ro.measure = parse_measure(args.measure);
        ro.min_freq = args.min_freq;
        PairTableOptions po;
        po.window = args.window;
        po.filter = filter.filter();
        const auto m = second_order(idx, p, ro, po);
        const auto n = m.terms.size();
        if (n == 0)
            throw DataError("pivot has no co-occurrent");
        Table t({"term_a", "term_b", "value"});
        std::vector<std::string> labels;
        Eigen::MatrixXd dense(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            labels.push_back(idx.lemmas()[m.terms[i]]);
            for (std::size_t j = 0; j < n; ++j) {
                dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
                t.add({idx.lemmas()[m.terms[i]], idx.lemmas()[m.terms[j]], m(i, j)});
            }
        }
        run.table(t, "second_order");
        if (groups > 0 && n >= 2) {
            auto field = semantic_field(labels, dense, std::min<int>(groups, static_cast<int>(n)), seed);
            field.pivot = pivot;
            run.table(field_table(field, false, false), "field");
            if (run.svg)
                run.file("field.svg", field_svg(field));
        }
    }
};

struct DsmCmd {
    std::string out;
    std::string index;
    std::uint64_t min_freq = 50;
    std::size_t contexts = 5000;
    int window = 10;
    int dim = 100;
    double alpha = 1.0;
    FilterArgs filter;

    void add(CLI::App& app, Registry& reg)
    {
        auto* sub = reg.add(app, "dsm", "PPMI + truncated SVD lemma vectors", out);
        sub->add_option("--index", index, "Index file")->required();
        sub->add_option("--min-freq", min_freq, "Minimum frequency of a target lemma");
        sub->add_option("--contexts", contexts, "Number of context lemmas (most frequent)");
        sub->add_option("--window", window, "Context window");
        sub->add_option("--dim", dim, "Vector dimensions");
        sub->add_option("--alpha", alpha, "Context distribution smoothing exponent");
        filter.add(sub);
        reg.commands.emplace_back(sub, [this](Run& run) { this->run(run); });
    }

    void run(Run& run)
    {
        const auto idx = open_index(run, index);
        const auto targets = select_targets(idx, min_freq);
        const auto ctx = select_contexts(idx, contexts);
        if (targets.empty() || ctx.empty())
            throw DataError("no target or context lemma passes the thresholds");
        const auto counts = term_context_matrix(idx, targets, ctx, window, filter.filter());
        const auto weights = ppmi(counts, alpha);
        std::vector<std::string> terms(counts.row_labels().begin(), counts.row_labels().end());
        std::vector<std::string> cnames(counts.col_labels().begin(), counts.col_labels().end());
        const auto space = truncated_svd(weights, dim, std::move(terms), std::move(cnames));
        {
            std::ofstream f(run.dir / "vectors.txt", std::ios::binary);
            write_vectors(f, space);
        }
        Table sv({"dimension", "singular_value"});
        for (Eigen::Index i = 0; i < space.singular_values.size(); ++i)
            sv.add({std::int64_t{i + 1}, space.singular_values(i)});
        run.table(sv, "singular_values");
        run.out << fmt::format("{} terms x {} dimensions\n", space.terms.size(), space.dim());
    }
};

struct NeighborsCmd {
    std::string out;
    std::string vectors;
    std::string terms;
    std::size_t k = 20;
    int groups = 0;
    std::uint64_t seed = 1;

    void add(CLI::App& app, Registry& reg)
    {
        auto* sub = reg.add(app, "neighbors", "Cosine nearest neighbours in a vector space", out);
        sub->add_option("--vectors", vectors, "Vector file written by dsm")->required();
        sub->add_option("--term", terms, "Comma-separated pivot terms")->required();
        sub->add_option("--k", k, "Neighbours per term");
        sub->add_option("--groups", groups, "k-means groups for a semantic field (0: none)");
        sub->add_option("--seed", seed, "Seed");
        reg.commands.emplace_back(sub, [this](Run& run) { this->run(run); });
    }

    void run(Run& run)
    {
        run.input(vectors);
        run.seed(seed);
        std::ifstream in(vectors);
        const auto space = read_vectors(in);
        Table t({"pivot", "neighbor", "cosine", "rank"});
        Table ft({"pivot", "term", "group", "x", "y", "cosine"});
        for (const auto& term : split_list(terms)) {
            const auto nl = cosine_neighbors(space, term, k);
            for (std::size_t r = 0; r < nl.neighbors.size(); ++r)
                t.add({term, nl.neighbors[r].term, nl.neighbors[r].cosine, std::uint64_t{r + 1}});
            if (groups > 0) {
                const auto field = semantic_field(space, term, k, groups, seed);
                const auto rows = field_table(field, true, true);
                for (const auto& row : rows.rows())
                    ft.add(row);
                if (run.svg)
                    run.file("field_" + term + ".svg", field_svg(field));
            }
        }
        run.table(t, "neighbors");
        if (groups > 0)
            run.table(ft, "field");
    }
};

struct CaCmd {
    std::string out;
    std::string index;
    std::string rows = "doc_type";
    std::string features = "lemmas";
    std::string lemmas;
    std::size_t max_features = 200;
    std::uint64_t min_freq = 1;
    int dim = 2;
    FilterArgs filter;
    SliceArgs slices;

    void add(CLI::App& app, Registry& reg)
    {
        auto* sub = reg.add(app, "ca", "Correspondence analysis of a lexical contingency table", out);
        sub->add_option("--index", index, "Index file")->required();
        sub->add_option("--rows", rows, "charter, slice, or a metadata field (doc_type, region, ...)");
        sub->add_option("--features", features, "lemmas or bilemmas")->check(CLI::IsMember({"lemmas", "bilemmas"}));
        sub->add_option("--lemma", lemmas, "Explicit comma-separated lemma columns (slice rows only)");
        sub->add_option("--max-features", max_features, "Most frequent features kept (0: all)");
        sub->add_option("--min-freq", min_freq, "Minimum feature frequency");
        sub->add_option("--dim", dim, "Axes reported");
        filter.add(sub);
        slices.add(sub);
        reg.commands.emplace_back(sub, [this](Run& run) { this->run(run); });
    }

    void run(Run& run)
    {
        const auto idx = open_index(run, index);
        FeatureSpec spec;
        spec.kind = features == "bilemmas" ? FeatureKind::bilemmas : FeatureKind::lemmas;
        spec.min_freq = min_freq;
        spec.max_features = max_features;
        const auto f = filter.filter();
        ContingencyTable table;
        if (rows == "slice") {
            const auto plan = slices.plan(idx, f);
            if (!lemmas.empty()) {
                std::vector<std::string> missing;
                const auto ids = idx.resolve(split_list(lemmas), &missing);
                for (const auto& m : missing)
                    run.warn("lemma not in vocabulary: " + m);
                table = contingency_lemma_slice(idx, plan, ids);
            } else {
                table = contingency_slice_feature(idx, plan, spec);
            }
        } else if (rows == "charter") {
            table = contingency_charter_feature(idx, f, spec);
        } else {
            table = contingency_group_feature(idx, rows, f, spec);
        }
        const auto ca = correspondence_analysis(table, dim);
        for (const auto& r : ca.dropped_rows)
            run.warn("empty row dropped: " + r);
        for (const auto& c : ca.dropped_cols)
            run.warn("empty column dropped: " + c);

        auto coords = [&](const std::vector<std::string>& labels, const Eigen::MatrixXd& x,
                          const Eigen::VectorXd& mass, const Eigen::MatrixXd& contrib) {
            std::vector<std::string> cols{"entity"};
            for (Eigen::Index k = 0; k < ca.dim(); ++k)
                cols.push_back(axis_name(k));
            cols.push_back("mass");
            for (Eigen::Index k = 0; k < ca.dim(); ++k)
                cols.push_back("contrib" + std::to_string(k + 1));
            Table t(cols);
            for (std::size_t i = 0; i < labels.size(); ++i) {
                const auto r = static_cast<Eigen::Index>(i);
                std::vector<Cell> row{labels[i]};
                for (Eigen::Index k = 0; k < ca.dim(); ++k)
                    row.emplace_back(x(r, k));
                row.emplace_back(mass(r));
                for (Eigen::Index k = 0; k < ca.dim(); ++k)
                    row.emplace_back(contrib(r, k));
                t.add(std::move(row));
            }
            return t;
        };
        run.table(coords(ca.row_labels, ca.row_coords, ca.row_masses, ca.row_contrib), "ca_rows");
        run.table(coords(ca.col_labels, ca.col_coords, ca.col_masses, ca.col_contrib), "ca_cols");
        Table in({"axis", "singular_value", "inertia", "share"});
        for (Eigen::Index k = 0; k < ca.singular_values.size(); ++k)
            in.add({std::int64_t{k + 1}, ca.singular_values(k), ca.axis_inertia(k), ca.axis_share(k)});
        run.table(in, "ca_inertia");
        run.out << fmt::format("total inertia {}\n", format_number(ca.total_inertia));
        if (run.svg && ca.dim() >= 2 && ca.row_labels.size() <= 5000) {
            std::vector<ScatterPoint> pts;
            for (std::size_t i = 0; i < ca.row_labels.size(); ++i)
                pts.push_back({ca.row_coords(static_cast<Eigen::Index>(i), 0),
                               ca.row_coords(static_cast<Eigen::Index>(i), 1), ca.row_labels[i], 0});
            if (ca.col_labels.size() <= 5000)
                for (std::size_t i = 0; i < ca.col_labels.size(); ++i)
                    pts.push_back({ca.col_coords(static_cast<Eigen::Index>(i), 0),
                                   ca.col_coords(static_cast<Eigen::Index>(i), 1), ca.col_labels[i], 1});
            run.file("ca.svg", svg_scatter(pts, "Correspondence analysis",
                                           fmt::format("axis 1 ({:.1f}%)", 100 * ca.axis_share(0)),
                                           fmt::format("axis 2 ({:.1f}%)", 100 * ca.axis_share(1))));
        }
    }
};

struct ClusterCmd {
    std::string out;
    std::string coords;
    std::string vectors;
    std::string method = "kmeans";
    int k = 3;
    int axes = 0;
    std::uint64_t seed = 1;

    void add(CLI::App& app, Registry& reg)
    {
        auto* sub = reg.add(app, "cluster", "k-means or Ward clustering of coordinates", out);
        sub->add_option("--coords", coords, "CSV with an entity column and numeric axis columns");
        sub->add_option("--vectors", vectors, "Vector file written by dsm");
        sub->add_option("--method", method, "kmeans or ward")->check(CLI::IsMember({"kmeans", "ward"}));
        sub->add_option("--k", k, "Number of clusters");
        sub->add_option("--axes", axes, "Use the first N coordinates (0: all)");
        sub->add_option("--seed", seed, "Seed");
        reg.commands.emplace_back(sub, [this](Run& run) { this->run(run); });
    }

    void run(Run& run)
    {
        if (coords.empty() == vectors.empty())
            throw UsageError("give exactly one of --coords and --vectors");
        run.seed(seed);
        std::vector<std::string> labels;
        Eigen::MatrixXd points;
        if (!vectors.empty()) {
            run.input(vectors);
            std::ifstream in(vectors);
            auto space = read_vectors(in);
            labels = std::move(space.terms);
            points = std::move(space.vectors);
        } else {
            run.input(coords);
            std::ifstream in(coords, std::ios::binary);
            std::stringstream buf;
            buf << in.rdbuf();
            const auto rows = parse_csv(buf.str());
            if (rows.size() < 2)
                throw DataError("coordinate file has no rows");
            std::vector<std::size_t> use;
            for (std::size_t c = 0; c < rows[0].size(); ++c)
                if (rows[0][c].rfind("axis", 0) == 0)
                    use.push_back(c);
            if (use.empty())
                throw DataError("coordinate file has no axis columns");
            points.resize(static_cast<Eigen::Index>(rows.size() - 1), static_cast<Eigen::Index>(use.size()));
            for (std::size_t r = 1; r < rows.size(); ++r) {
                if (rows[r].size() != rows[0].size())
                    throw DataError(fmt::format("coordinate file row {} has {} fields", r + 1, rows[r].size()));
                labels.push_back(rows[r][0]);
                for (std::size_t j = 0; j < use.size(); ++j) {
                    try {
                        points(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(j)) =
                            std::stod(rows[r][use[j]]);
                    } catch (const std::exception&) {
                        throw DataError(fmt::format("coordinate file row {}: not a number", r + 1));
                    }
                }
            }
        }
        if (axes > 0 && axes < points.cols())
            points = points.leftCols(axes).eval();
        if (k < 1 || static_cast<std::size_t>(k) > labels.size())
            throw UsageError("--k must be between 1 and the number of points");

        const auto cl = method == "ward" ? ward_cluster(points, k) : kmeans(points, k, seed);
        Table t({"entity", "cluster"});
        for (std::size_t i = 0; i < labels.size(); ++i)
            t.add({labels[i], std::int64_t{cl.assignments[i]}});
        run.table(t, "clusters");
        if (method == "ward") {
            Table m({"step", "left", "right", "height", "size"});
            for (std::size_t i = 0; i < cl.merges.size(); ++i)
                m.add({std::uint64_t{i + 1}, std::uint64_t{cl.merges[i].left}, std::uint64_t{cl.merges[i].right},
                       cl.merges[i].height, std::uint64_t{cl.merges[i].size}});
            run.table(m, "merges");
        } else {
            Table o({"iteration", "sse"});
            for (std::size_t i = 0; i < cl.objective_history.size(); ++i)
                o.add({std::uint64_t{i + 1}, cl.objective_history[i]});
            run.table(o, "objective");
        }
        if (run.svg && points.cols() >= 2) {
            std::vector<ScatterPoint> pts;
            for (std::size_t i = 0; i < labels.size(); ++i)
                pts.push_back({points(static_cast<Eigen::Index>(i), 0), points(static_cast<Eigen::Index>(i), 1),
                               labels.size() <= 500 ? labels[i] : "", cl.assignments[i]});
            run.file("clusters.svg", svg_scatter(pts, "Clusters (" + method + ")", "dimension 1", "dimension 2"));
        }
    }
};

struct TrainCmd {
    std::string out;
    std::string index;
    TrainArgs args;
    FilterArgs filter;

    void add(CLI::App& app, Registry& reg)
    {
        auto* sub = reg.add(app, "train", "Train a typology classifier", out);
        sub->add_option("--index", index, "Index file")->required();
        args.add(sub);
        filter.add(sub);
        reg.commands.emplace_back(sub, [this](Run& run) { this->run(run); });
    }

    void run(Run& run)
    {
        const auto idx = open_index(run, index);
        run.seed(args.seed);
        const auto docs = args.docs(idx, filter.filter());
        const auto model = train(idx, docs, args.resolved(), args.seed);
        run.file("model.json", model.to_json().dump(1) + "\n");
        if (!model.loss_history.empty()) {
            Table t({"step", "loss"});
            for (std::size_t i = 0; i < model.loss_history.size(); ++i)
                t.add({std::uint64_t{i}, model.loss_history[i]});
            run.table(t, "training_loss");
        }
        run.out << fmt::format("{} model on {} charters, {} classes, {} features\n", to_string(model.kind),
                               docs.size(), model.labels.size(), model.space.size());
    }
};

struct EvaluateCmd {
    std::string out;
    std::string index;
    int folds = 5;
    TrainArgs args;
    FilterArgs filter;

    void add(CLI::App& app, Registry& reg)
    {
        auto* sub = reg.add(app, "evaluate", "Stratified cross-validation of a classifier", out);
        sub->add_option("--index", index, "Index file")->required();
        sub->add_option("--folds", folds, "Number of folds");
        args.add(sub);
        filter.add(sub);
        reg.commands.emplace_back(sub, [this](Run& run) { this->run(run); });
    }

    void run(Run& run)
    {
        const auto idx = open_index(run, index);
        run.seed(args.seed);
        const auto docs = args.docs(idx, filter.filter());
        const auto rep = evaluate_model(idx, docs, args.resolved(), folds, args.seed);
        for (const auto& w : rep.warnings)
            run.warn(w);
        run.file("report.json", rep.to_json().dump(1) + "\n");
        Table m({"label", "precision", "recall", "f1", "support"});
        for (const auto& c : rep.classes)
            m.add({c.label, c.precision, c.recall, c.f1, c.support});
        run.table(m, "metrics");
        std::vector<std::string> cols{"true"};
        cols.insert(cols.end(), rep.labels.begin(), rep.labels.end());
        Table cm(cols);
        for (std::size_t i = 0; i < rep.labels.size(); ++i) {
            std::vector<Cell> row{rep.labels[i]};
            for (auto v : rep.confusion[i])
                row.emplace_back(v);
            cm.add(std::move(row));
        }
        run.table(cm, "confusion");
        Table s({"metric", "value"});
        s.add({std::string("macro_f1"), rep.macro_f1});
        s.add({std::string("accuracy"), rep.accuracy});
        s.add({std::string("folds"), std::int64_t{rep.folds}});
        s.add({std::string("seed"), rep.seed});
        run.table(s, "summary");
        run.out << fmt::format("macro-F1 {} accuracy {}\n", format_number(rep.macro_f1), format_number(rep.accuracy));
    }
};

struct ScreenCmd {
    std::string out;
    std::string index;
    std::string model;
    std::string target;
    double threshold = 0.5;
    std::string label_field = "doc_type";

    void add(CLI::App& app, Registry& reg)
    {
        auto* sub = reg.add(app, "screen", "Rank unlabelled charters by probability of a target class", out);
        sub->add_option("--index", index, "Index file")->required();
        sub->add_option("--model", model, "Model JSON written by train")->required();
        sub->add_option("--target", target, "Target class")->required();
        sub->add_option("--threshold", threshold, "Minimum p(target)");
        sub->add_option("--label-field", label_field, "Charters lacking this field are screened");
        reg.commands.emplace_back(sub, [this](Run& run) { this->run(run); });
    }

    void run(Run& run)
    {
        const auto idx = open_index(run, index);
        run.input(model);
        std::ifstream in(model);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw DataError(std::string("malformed model file: ") + e.what());
        }
        const auto m = Model::from_json(j);
        const auto hits = screen(m, idx, target, threshold, label_field);
        Table t({"charter_id", "p_target", "predicted_label"});
        for (const auto& h : hits)
            t.add({h.charter_id, h.p_target, h.predicted});
        run.table(t, "screen");
        run.out << fmt::format("{} candidate(s) at p >= {}\n", hits.size(), format_number(threshold));
    }
};

struct ExportCmd {
    std::string out;
    std::string index;
    std::string what = "lemmas";

    void add(CLI::App& app, Registry& reg)
    {
        auto* sub = reg.add(app, "export", "Export corpus, vocabularies or tokens from an index", out);
        sub->add_option("--index", index, "Index file")->required();
        sub->add_option("--what", what, "corpus, lemmas, forms or tokens")
            ->check(CLI::IsMember({"corpus", "lemmas", "forms", "tokens"}));
        reg.commands.emplace_back(sub, [this](Run& run) { this->run(run); });
    }

    void run(Run& run)
    {
        const auto idx = open_index(run, index);
        if (what == "corpus") {
            Corpus c{{idx.charters().begin(), idx.charters().end()}};
            std::ofstream f(run.dir / "corpus.jsonl", std::ios::binary);
            write_corpus_jsonl(f, c);
        } else if (what == "lemmas") {
            Table t({"lemma", "frequency"});
            for (LemmaId l = 0; l < idx.lemmas().size(); ++l)
                t.add({idx.lemmas()[l], idx.frequency(l)});
            run.table(t, "lemmas");
        } else if (what == "forms") {
            std::vector<std::uint64_t> freq(idx.forms().size(), 0);
            for (auto f : idx.tokens().forms)
                ++freq[f];
            Table t({"form", "frequency", "known"});
            for (FormId f = 0; f < idx.forms().size(); ++f)
                t.add({idx.forms()[f], freq[f], std::uint64_t{idx.form_known(f) ? 1u : 0u}});
            run.table(t, "forms");
        } else {
            Table t({"charter_id", "position", "form", "lemma"});
            for (CharterIdx c = 0; c < idx.charter_count(); ++c) {
                const auto ls = idx.lemmas_of(c);
                const auto fs_ = idx.forms_of(c);
                for (std::size_t i = 0; i < ls.size(); ++i)
                    t.add({idx.charter(c).id, std::uint64_t{i}, idx.forms()[fs_[i]], idx.lemmas()[ls[i]]});
            }
            run.table(t, "tokens");
        }
    }
};

nlohmann::json collect_params(const CLI::App* sub, const CLI::App& app)
{
    nlohmann::json params = nlohmann::json::object();
    auto take = [&](const CLI::App* a) {
        for (const CLI::Option* o : a->get_options()) {
            if (o->get_name() == "--help" || o->get_name() == "-h")
                continue;
            const auto name = o->get_name(false, true);
            if (o->count() > 0) {
                const auto& r = o->results();
                params[name] = r.size() == 1 ? nlohmann::json(r[0]) : nlohmann::json(r);
            } else if (!o->get_default_str().empty()) {
                params[name] = o->get_default_str();
            }
        }
    };
    take(&app);
    take(sub);
    return params;
}

int replay(const std::string& manifest_path, const std::string& out_override, int threads, std::ostream& out,
           std::ostream& err)
{
    const auto m = read_manifest(manifest_path);
    if (m.version != tool_version)
        err << fmt::format("warning: manifest written by version {}, replaying with {}\n", m.version, tool_version);
    for (const auto& in : m.inputs)
        if (sha256_file(in.path) != in.sha256)
            throw DataError("input changed since the recorded run: " + in.path);
    std::vector<std::string> args;
    bool saw_threads = false;
    for (std::size_t i = 0; i < m.argv.size(); ++i) {
        const auto& a = m.argv[i];
        auto replace = [&](const std::string& flag, const std::string& value, bool active) {
            if (!active)
                return false;
            if (a == flag && i + 1 < m.argv.size()) {
                args.push_back(flag);
                args.push_back(value);
                ++i;
                return true;
            }
            if (a.rfind(flag + "=", 0) == 0) {
                args.push_back(flag + "=" + value);
                return true;
            }
            return false;
        };
        if (replace("--out", out_override, !out_override.empty()))
            continue;
        if (replace("--threads", std::to_string(threads), threads > 0)) {
            saw_threads = true;
            continue;
        }
        args.push_back(a);
    }
    if (threads > 0 && !saw_threads) {
        args.insert(args.begin(), std::to_string(threads));
        args.insert(args.begin(), "--threads");
    }
    return dispatch(args, out, err);
}

} // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Corpus analytics for medieval charters", "cema"};
    app.require_subcommand(1);
    app.fallthrough();
    app.option_defaults()->always_capture_default();
    Global g;
    app.add_option("--threads", g.threads, "Worker threads (default: all cores)");
    app.add_option("--format", g.format, "Tabular output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--svg", g.svg, "Also write SVG figures");

    Registry reg;
    IngestCmd ingest_cmd;
    LemmatizeCmd lemmatize_cmd;
    IndexCmd index_cmd;
    StatsCmd stats_cmd;
    RichnessCmd richness_cmd;
    TimelineCmd timeline_cmd;
    GeoCmd geo_cmd;
    CoocCmd cooc_cmd;
    CoocTimelineCmd cooc_timeline_cmd;
    SecondOrderCmd second_order_cmd;
    DsmCmd dsm_cmd;
    NeighborsCmd neighbors_cmd;
    CaCmd ca_cmd;
    ClusterCmd cluster_cmd;
    TrainCmd train_cmd;
    EvaluateCmd evaluate_cmd;
    ScreenCmd screen_cmd;
    ExportCmd export_cmd;
    ingest_cmd.add(app, reg);
    lemmatize_cmd.add(app, reg);
    index_cmd.add(app, reg);
    stats_cmd.add(app, reg);
    richness_cmd.add(app, reg);
    timeline_cmd.add(app, reg);
    geo_cmd.add(app, reg);
    cooc_cmd.add(app, reg);
    cooc_timeline_cmd.add(app, reg);
    second_order_cmd.add(app, reg);
    dsm_cmd.add(app, reg);
    neighbors_cmd.add(app, reg);
    ca_cmd.add(app, reg);
    cluster_cmd.add(app, reg);
    train_cmd.add(app, reg);
    evaluate_cmd.add(app, reg);
    screen_cmd.add(app, reg);
    export_cmd.add(app, reg);

    std::string manifest_path;
    std::string replay_out;
    auto* replay_cmd = app.add_subcommand("replay", "Re-run the subcommand recorded in a manifest");
    replay_cmd->add_option("manifest", manifest_path, "manifest.json of an earlier run")->required();
    replay_cmd->add_option("--out", replay_out, "Output directory (default: the recorded one)");

    if (args.empty()) {
        err << app.help();
        return 1;
    }
    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    const int threads = g.threads > 0 ? g.threads : omp_get_num_procs();
    omp_set_num_threads(threads);

    try {
        if (app.got_subcommand(replay_cmd))
            return replay(manifest_path, replay_out, g.threads, out, err);
        for (auto& [sub, handler] : reg.commands) {
            if (!app.got_subcommand(sub))
                continue;
            const fs::path dir = *reg.outs.at(sub);
            fs::create_directories(dir);
            Run run(dir, parse_output_format(g.format), g.svg, out, err);
            run.manifest.subcommand = sub->get_name();
            run.manifest.argv = args;
            run.manifest.params = collect_params(sub, app);
            handler(run);
            run.manifest.timestamp = utc_timestamp();
            write_manifest(run.manifest, dir);
            return 0;
        }
        return 1;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

} // namespace cema::cli
