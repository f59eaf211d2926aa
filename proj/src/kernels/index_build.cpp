#include <cema/kernels.hpp>

#include <omp.h>

#include <unordered_map>

namespace cema {

namespace {

constexpr std::size_t chunk_charters = 256;

// Tokens of a run of charters, with ids local to the chunk.
struct Chunk {
    std::vector<std::string> lemma_strings;
    std::vector<std::string> form_strings;
    std::vector<std::uint32_t> lemmas;
    std::vector<std::uint32_t> forms;
    std::vector<std::uint64_t> counts;
};

void process_chunk(std::span<const Charter> charters, const Lexicon& lexicon, Chunk& out)
{
    std::unordered_map<std::string, std::uint32_t> form_ids;
    std::unordered_map<std::string, std::uint32_t> lemma_ids;
    std::vector<std::uint32_t> lemma_of_form;

    out.counts.reserve(charters.size());
    for (const auto& c : charters) {
        std::uint64_t count = 0;
        for_each_token(c.text, [&](std::string&& form) {
            auto [it, inserted] = form_ids.try_emplace(form, static_cast<std::uint32_t>(out.form_strings.size()));
            if (inserted) {
                auto key = normalize_form(form);
                const std::string* best = lexicon.best(key);
                const std::string& lemma = best ? *best : key;
                auto [lit, lnew] = lemma_ids.try_emplace(lemma, static_cast<std::uint32_t>(out.lemma_strings.size()));
                if (lnew)
                    out.lemma_strings.push_back(lemma);
                lemma_of_form.push_back(lit->second);
                out.form_strings.push_back(std::move(form));
            }
            out.forms.push_back(it->second);
            out.lemmas.push_back(lemma_of_form[it->second]);
            ++count;
        });
        out.counts.push_back(count);
    }
}

} // namespace

TokenizedCorpus kernels::tokenize_corpus(std::span<const Charter> charters, const Lexicon& lexicon)
{
    const std::size_t n = charters.size();
    const std::size_t nchunks = (n + chunk_charters - 1) / chunk_charters;
    std::vector<Chunk> chunks(nchunks);

#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < nchunks; ++i) {
        const auto begin = i * chunk_charters;
        const auto len = std::min(chunk_charters, n - begin);
        process_chunk(charters.subspan(begin, len), lexicon, chunks[i]);
    }

    TokenizedCorpus out;
    {
        std::vector<std::string> all_lemmas;
        std::vector<std::string> all_forms;
        for (const auto& ch : chunks) {
            all_lemmas.insert(all_lemmas.end(), ch.lemma_strings.begin(), ch.lemma_strings.end());
            all_forms.insert(all_forms.end(), ch.form_strings.begin(), ch.form_strings.end());
        }
        out.lemmas = Vocabulary(std::move(all_lemmas));
        out.forms = Vocabulary(std::move(all_forms));
    }
    out.form_known.assign(out.forms.size(), 0);
    const auto nforms = static_cast<std::int64_t>(out.forms.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t f = 0; f < nforms; ++f)
        out.form_known[f] = lexicon.best(normalize_form(out.forms[static_cast<FormId>(f)])) ? 1 : 0;

    std::vector<std::uint64_t> chunk_start(nchunks + 1, 0);
    auto& offsets = out.tokens.offsets;
    offsets.assign(n + 1, 0);
    {
        std::size_t c = 0;
        for (std::size_t i = 0; i < nchunks; ++i) {
            chunk_start[i + 1] = chunk_start[i] + chunks[i].lemmas.size();
            for (auto cnt : chunks[i].counts) {
                offsets[c + 1] = offsets[c] + cnt;
                ++c;
            }
        }
    }
    out.tokens.lemmas.resize(chunk_start[nchunks]);
    out.tokens.forms.resize(chunk_start[nchunks]);

#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < nchunks; ++i) {
        auto& ch = chunks[i];
        std::vector<LemmaId> lemma_map(ch.lemma_strings.size());
        std::vector<FormId> form_map(ch.form_strings.size());
        for (std::size_t l = 0; l < lemma_map.size(); ++l)
            lemma_map[l] = *out.lemmas.find(ch.lemma_strings[l]);
        for (std::size_t f = 0; f < form_map.size(); ++f)
            form_map[f] = *out.forms.find(ch.form_strings[f]);
        auto dst = chunk_start[i];
        for (std::size_t t = 0; t < ch.lemmas.size(); ++t, ++dst) {
            out.tokens.lemmas[dst] = lemma_map[ch.lemmas[t]];
            out.tokens.forms[dst] = form_map[ch.forms[t]];
        }
        Chunk{}.lemmas.swap(ch.lemmas);
        Chunk{}.forms.swap(ch.forms);
    }
    return out;
}

TokenizedCorpus reference::tokenize_corpus(std::span<const Charter> charters, const Lexicon& lexicon)
{
    std::vector<std::vector<LemmatizedToken>> per_charter;
    per_charter.reserve(charters.size());
    std::vector<std::string> lemma_strings;
    std::vector<std::string> form_strings;
    for (const auto& c : charters) {
        auto forms = tokenize(c.text);
        per_charter.push_back(lemmatize(forms, lexicon));
        for (const auto& t : per_charter.back()) {
            lemma_strings.push_back(t.lemma);
            form_strings.push_back(t.form);
        }
    }

    TokenizedCorpus out;
    out.lemmas = Vocabulary(std::move(lemma_strings));
    out.forms = Vocabulary(std::move(form_strings));
    out.form_known.assign(out.forms.size(), 0);
    for (const auto& tokens : per_charter) {
        for (const auto& t : tokens) {
            const auto f = *out.forms.find(t.form);
            out.tokens.lemmas.push_back(*out.lemmas.find(t.lemma));
            out.tokens.forms.push_back(f);
            out.form_known[f] = t.known ? 1 : 0;
        }
        out.tokens.offsets.push_back(out.tokens.lemmas.size());
    }
    return out;
}

} // namespace cema
