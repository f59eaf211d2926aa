#include <cema/synth.hpp>
#include <cema/error.hpp>
#include <cema/ingest.hpp>
#include <cema/random.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace cema {

namespace synth {

const std::vector<std::string>& class_lemmas(const std::string& type)
{
    static const std::map<std::string, std::vector<std::string>> lists{
        {"bull",
         {"apostolicus", "pontifex", "benedictio", "papa", "lateranum", "seruus", "auctoritas", "priuilegium",
          "interdictum", "anathema", "sedes", "romanus", "tuitio", "confirmatio", "excommunicatio", "petrus",
          "paulus", "indignatio", "apostolus", "decretum"}},
        {"episcopal",
         {"episcopus", "diocesis", "clerus", "canonicus", "archidiaconus", "synodus", "decima", "presbyter",
          "capitulum", "praebenda", "ordinatio", "cathedra", "sigillum", "parrochia", "altare", "consecratio",
          "uisitatio", "decanus", "officialis", "chrisma"}},
        {"royal",
         {"rex", "regnum", "fiscus", "comes", "palatium", "cancellarius", "praeceptum", "immunitas", "miles",
          "uassallus", "bannus", "teloneum", "regalis", "dux", "fidelis", "coronatio", "exercitus", "marchio",
          "uilla", "curtis"}},
    };
    return lists.at(type);
}

const std::vector<std::string>& regional_lemmas(const std::string& region)
{
    static const std::map<std::string, std::vector<std::string>> lists{
        {"north", {"finagium", "brolium", "mansura", "hostagium"}},
        {"south", {"podium", "condamina", "affarium", "bastida"}},
    };
    return lists.at(region);
}

} // namespace synth

namespace {

const std::vector<std::string> core_lemmas{
    "et",     "in",      "de",    "ad",       "cum",      "qui",     "terra",  "ecclesia", "sanctus",
    "deus",   "donare",  "aqua",  "uinea",    "pratum",   "silua",   "dominus", "frater",  "abbas",
    "monasterium", "pro", "anima", "salus",   "omnis",    "habere",  "esse",   "dare",     "locus",
    "ego",    "noster",  "uester", "ut",      "quod",     "per",     "sub",    "sine",     "heres",
    "mansus", "campus",  "molendinum", "census", "signum", "testis", "actum",  "carta",    "donatio",
    "uendere", "pretium", "solidus", "denarius", "iustitia"};

const std::vector<std::string> invariant{"et", "in", "de", "ad", "cum", "pro", "ut", "quod", "per", "sub", "sine"};

const std::vector<std::string> names{"adalbertus", "rotbertus", "gislebertus", "hildegardis", "odilo",
                                     "wichardus", "bernardus",  "ermengardis", "landricus",   "warnerius",
                                     "gauzfredus", "ingelrannus"};

std::vector<std::string> paradigm(const std::string& lemma)
{
    static const std::map<std::string, std::vector<std::string>> irregular{
        {"tempus", {"tempus", "temporis", "tempore", "tempora", "temporibus"}},
        {"rex", {"rex", "regis", "regi", "regem", "rege", "reges"}},
        {"dux", {"dux", "ducis", "duci", "ducem"}},
        {"comes", {"comes", "comitis", "comiti", "comitem"}},
        {"miles", {"miles", "militis", "militem", "milites"}},
        {"esse", {"esse", "est", "sunt", "fuit", "sit"}},
        {"ego", {"ego", "me", "mihi"}},
        {"qui", {"qui", "quae", "cuius", "cui", "quem"}},
        {"omnis", {"omnis", "omne", "omnes", "omnium", "omnibus"}},
        {"heres", {"heres", "heredis", "heredes", "heredibus"}},
        {"testis", {"testis", "testes", "testibus"}},
        {"sedes", {"sedes", "sedis", "sede"}},
        {"salus", {"salus", "salutis", "saluti", "salutem"}},
        {"deus", {"deus", "dei", "deo", "deum"}},
        {"abbas", {"abbas", "abbatis", "abbati", "abbatem"}},
        {"frater", {"frater", "fratris", "fratres", "fratribus"}},
        {"anima", {"anima", "animae", "animam", "animabus"}},
        {"presbyter", {"presbyter", "presbyteri", "presbytero"}},
        {"pontifex", {"pontifex", "pontificis", "pontifici"}},
        {"anathema", {"anathema", "anathematis"}},
        {"altare", {"altare", "altaris", "altari", "altaria"}},
        {"chrisma", {"chrisma", "chrismatis"}},
        {"regalis", {"regalis", "regale", "regales", "regalibus"}},
        {"fidelis", {"fidelis", "fideles", "fidelium", "fidelibus"}},
        {"officialis", {"officialis", "officiales"}},
        {"diocesis", {"diocesis", "diocesim", "diocesi"}},
        {"noster", {"noster", "nostri", "nostro", "nostra", "nostram"}},
        {"uester", {"uester", "uestri", "uestro", "uestra"}},
        {"marchio", {"marchio", "marchionis", "marchionem"}},
        {"tuitio", {"tuitio", "tuitionis", "tuitionem"}},
    };
    if (auto it = irregular.find(lemma); it != irregular.end())
        return it->second;
    if (std::find(invariant.begin(), invariant.end(), lemma) != invariant.end())
        return {lemma};
    auto ends = [&](std::string_view suf) { return lemma.size() > suf.size() && lemma.ends_with(suf); };
    auto stem = [&](std::size_t cut) { return lemma.substr(0, lemma.size() - cut); };
    if (ends("are")) {
        const auto s = stem(3);
        return {lemma, s + "at", s + "auit", s + "atum", s + "auerunt"};
    }
    if (ends("ere")) {
        const auto s = stem(3);
        return {lemma, s + "it", s + "idit", s + "itum"};
    }
    if (ends("io")) {
        return {lemma, lemma + "nis", lemma + "nem", lemma + "ne"};
    }
    if (ends("us")) {
        const auto s = stem(2);
        return {lemma, s + "i", s + "o", s + "um", s + "os", s + "orum"};
    }
    if (ends("um")) {
        const auto s = stem(2);
        return {lemma, s + "i", s + "o", s + "a", s + "orum", s + "is"};
    }
    if (ends("a")) {
        const auto s = stem(1);
        return {lemma, s + "ae", s + "am", s + "as", s + "arum", s + "is"};
    }
    return {lemma, lemma + "is", lemma + "i", lemma + "em"};
}

std::string pseudo_word(Rng& rng)
{
    static const std::vector<std::string> onsets{"b", "c", "d", "f", "g", "l", "m", "n", "p", "r",
                                                 "s", "t", "br", "cl", "gr", "st", "tr", "sc"};
    static const std::vector<std::string> vowels{"a", "e", "i", "o", "u", "au", "ae"};
    static const std::vector<std::string> endings{"us", "um", "a", "are", "io", "ere"};
    std::string w;
    const auto syllables = 2 + rng.below(2);
    for (std::uint64_t s = 0; s < syllables; ++s)
        w += onsets[rng.below(onsets.size())] + vowels[rng.below(vowels.size())];
    w += (w.back() == 'a' || w.back() == 'e' ? "r" : "") + endings[rng.below(endings.size())];
    return w;
}

// Surface spelling variants folded back by normalize_form.
std::string respell(const std::string& form, Rng& rng)
{
    std::string out = form;
    if (out.size() > 1 && (out[0] == 'u' || out[0] == 'i') && std::string_view("aeiou").find(out[1]) != std::string_view::npos &&
        rng.uniform() < 0.3)
        out[0] = out[0] == 'u' ? 'v' : 'j';
    return out;
}

class Vocab {
public:
    void add(const std::string& lemma)
    {
        for (const auto& f : paradigm(lemma))
            rows_.push_back({f, lemma, 1.0});
        forms_[lemma] = paradigm(lemma);
    }
    const std::vector<std::string>& forms(const std::string& lemma) const { return forms_.at(lemma); }
    bool clashes(const std::string& lemma, const std::set<std::string>& taken) const
    {
        for (const auto& f : paradigm(lemma))
            if (taken.count(f))
                return true;
        return false;
    }
    std::vector<Lexicon::Row> rows_;

private:
    std::map<std::string, std::vector<std::string>> forms_;
};

double gaussian(Rng& rng)
{
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

} // namespace

SynthCorpus generate_synthetic(const SynthParams& p)
{
    if (p.year_hi < p.year_lo || p.min_tokens == 0 || p.max_tokens < p.min_tokens)
        throw UsageError("inconsistent generator parameters");

    Vocab vocab;
    std::set<std::string> taken;
    auto claim = [&](const std::string& lemma) {
        vocab.add(lemma);
        for (const auto& f : paradigm(lemma))
            taken.insert(f);
    };
    std::vector<std::string> fixed(core_lemmas);
    for (const auto& t : synth::types)
        fixed.insert(fixed.end(), synth::class_lemmas(t).begin(), synth::class_lemmas(t).end());
    for (const auto& r : synth::regions)
        fixed.insert(fixed.end(), synth::regional_lemmas(r).begin(), synth::regional_lemmas(r).end());
    fixed.insert(fixed.end(), {synth::pivot, synth::target, synth::peak_lemma});
    for (const auto& l : fixed)
        claim(l);
    // One genuinely ambiguous form: "uenit" may come from either verb.
    vocab.rows_.push_back({"uenit", "uenire", 3.0});
    vocab.rows_.push_back({"uenit", "uenare", 1.0});

    std::vector<std::string> background(core_lemmas);
    Rng lex_rng(derive_seed(p.seed, 0xffff));
    while (background.size() < core_lemmas.size() + p.background_lemmas) {
        auto w = pseudo_word(lex_rng);
        if (vocab.clashes(w, taken))
            continue;
        claim(w);
        background.push_back(w);
    }
    std::vector<double> zipf_cdf;
    double acc = 0.0;
    for (std::size_t r = 0; r < background.size(); ++r)
        zipf_cdf.push_back(acc += 1.0 / static_cast<double>(r + 1));
    for (auto& c : zipf_cdf)
        c /= acc;

    static const std::map<std::string, std::pair<double, double>> centres{{"north", {4.0, 49.0}},
                                                                          {"south", {4.0, 44.0}}};

    SynthCorpus out;
    const double span = std::max(1, p.year_hi - p.year_lo);
    for (std::size_t i = 0; i < p.charters; ++i) {
        Rng rng(derive_seed(p.seed, i));
        const auto& type = synth::types[rng.below(synth::types.size())];
        const auto& region = synth::regions[rng.below(synth::regions.size())];
        const Year year = p.year_lo + static_cast<Year>(rng.below(static_cast<std::uint64_t>(p.year_hi - p.year_lo + 1)));
        const double t = (year - p.year_lo) / span;
        const auto len = p.min_tokens + rng.below(p.max_tokens - p.min_tokens + 1);
        const double peak_rate = 0.001 + 0.004 * (region == "north" ? 1.0 - t : t);

        std::vector<std::string> lemmas;
        lemmas.reserve(len + 4);
        const auto& cls = synth::class_lemmas(type);
        const auto& reg = synth::regional_lemmas(region);
        for (std::size_t k = 0; k < len; ++k) {
            double u = rng.uniform();
            if ((u -= p.class_rate) < 0)
                lemmas.push_back(cls[rng.below(cls.size())]);
            else if ((u -= p.region_rate) < 0)
                lemmas.push_back(reg[rng.below(reg.size())]);
            else if ((u -= p.name_rate) < 0)
                lemmas.push_back("#" + names[rng.below(names.size())]);
            else if ((u -= peak_rate) < 0)
                lemmas.push_back(synth::peak_lemma);
            else
                lemmas.push_back(background[static_cast<std::size_t>(
                    std::lower_bound(zipf_cdf.begin(), zipf_cdf.end(), rng.uniform()) - zipf_cdf.begin())]);
        }
        const double pair_rate = p.pair_rate_lo + (p.pair_rate_hi - p.pair_rate_lo) * t;
        for (int k = 0; k < 2; ++k) {
            const auto pos = static_cast<std::ptrdiff_t>(rng.below(lemmas.size() + 1));
            if (rng.uniform() < pair_rate) {
                lemmas.insert(lemmas.begin() + pos, {synth::pivot, synth::target});
            } else {
                lemmas.insert(lemmas.begin() + pos, synth::pivot);
                const auto other = static_cast<std::ptrdiff_t>(rng.below(lemmas.size() + 1));
                lemmas.insert(lemmas.begin() + other, synth::target);
            }
        }

        std::string text;
        for (std::size_t k = 0; k < lemmas.size(); ++k) {
            std::string form;
            if (lemmas[k][0] == '#') {
                form = lemmas[k].substr(1);
                form[0] = static_cast<char>(form[0] - 'a' + 'A');
            } else {
                const auto& forms = vocab.forms(lemmas[k]);
                form = respell(forms[rng.below(forms.size())], rng);
            }
            if (k == 0)
                form[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(form[0])));
            if (k)
                text += (rng.below(12) == 0) ? ", " : " ";
            text += form;
            if (rng.below(400) == 0)
                text += " [sic]";
        }
        text += '.';

        RawRecord rec;
        rec["id"] = fmt::format("syn-{:05d}", i + 1);
        rec["source_corpus"] = "synthetic";
        rec["text"] = text;
        rec["region"] = region;
        rec["institution"] = fmt::format("{}-{}", region, 1 + rng.below(4));
        rec["language"] = "lat";
        const bool labeled = rng.uniform() >= p.unlabeled_share;
        if (labeled)
            rec["doc_type"] = type;
        else
            rec["true_type"] = nlohmann::json(type).dump();
        if (rng.uniform() >= p.undated_share) {
            const Year d = rng.uniform() < 0.6 ? 0 : static_cast<Year>(1 + rng.below(15));
            rec["not_before"] = std::to_string(year - d);
            rec["not_after"] = std::to_string(year + d);
        }
        const auto [clon, clat] = centres.at(region);
        const double lon = clon + p.coord_sd * gaussian(rng);
        const double lat = clat + p.coord_sd * gaussian(rng);
        if (rng.uniform() >= p.unlocated_share) {
            rec["lat"] = fmt::format("{:.4f}", lat);
            rec["lon"] = fmt::format("{:.4f}", lon);
        }
        auto v = validate_charter(rec);
        if (auto* rej = std::get_if<Rejection>(&v))
            throw std::logic_error("generator produced an invalid charter: " + rej->reason);
        out.truth.push_back({rec["id"], type, region, year});
        out.corpus.charters.push_back(std::get<Charter>(std::move(v)));
    }
    out.lexicon = std::move(vocab.rows_);
    return out;
}

void write_synthetic(const SynthCorpus& corpus, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f)
            throw DataError("cannot write " + (dir / name).string());
        return f;
    };
    {
        auto f = open("charters.jsonl");
        write_corpus_jsonl(f, corpus.corpus);
    }
    {
        auto f = open("lexicon.tsv");
        f << "form\tlemma\tweight\n";
        for (const auto& r : corpus.lexicon)
            f << r.form << '\t' << r.lemma << '\t' << r.weight << '\n';
    }
    {
        auto f = open("centroids.csv");
        f << "region,lon,lat\nnorth,4,49\nsouth,4,44\n";
    }
    {
        auto f = open("truth.csv");
        f << "id,type,region,year\n";
        for (const auto& t : corpus.truth)
            f << t.id << ',' << t.type << ',' << t.region << ',' << t.year << '\n';
    }
}

} // namespace cema
