#include <cema/error.hpp>
#include <cema/lemma.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace cema {

namespace detail {

int next_code_point(std::string_view s, std::size_t& i) noexcept
{
    const auto* p = reinterpret_cast<const uint8_t*>(s.data());
    auto idx = static_cast<std::int32_t>(i);
    UChar32 c;
    U8_NEXT(p, idx, static_cast<std::int32_t>(s.size()), c);
    i = static_cast<std::size_t>(idx);
    return c;
}

bool is_letter(int cp) noexcept
{
    return u_isalpha(cp);
}

void append_lower(std::string& out, int cp)
{
    const UChar32 lower = u_tolower(cp);
    if (lower < 0x80) {
        out.push_back(static_cast<char>(lower));
        return;
    }
    uint8_t buf[4];
    std::int32_t len = 0;
    UBool err = false;
    U8_APPEND(buf, len, 4, lower, err);
    if (!err)
        out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(len));
}

} // namespace detail

std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> out;
    for_each_token(text, [&](std::string&& t) { out.push_back(std::move(t)); });
    return out;
}

std::string normalize_form(std::string_view form)
{
    std::string out;
    out.reserve(form.size());
    for (std::size_t i = 0; i < form.size(); ++i) {
        const char ch = form[i];
        if (ch == 'v') {
            out.push_back('u');
        } else if (ch == 'j') {
            out.push_back('i');
        } else if (ch == '\xC3' && i + 1 < form.size() && form[i + 1] == '\xA6') { // æ
            out += "ae";
            ++i;
        } else if (ch == '\xC5' && i + 1 < form.size() && form[i + 1] == '\x93') { // œ
            out += "oe";
            ++i;
        } else {
            out.push_back(ch);
        }
    }
    return out;
}

namespace {

std::string lower_normalized(std::string_view s)
{
    std::string lower;
    std::size_t i = 0;
    while (i < s.size()) {
        const int cp = detail::next_code_point(s, i);
        if (cp >= 0)
            detail::append_lower(lower, cp);
    }
    return normalize_form(lower);
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

} // namespace

Lexicon Lexicon::from_rows(std::span<const Row> rows)
{
    std::map<std::string, std::map<std::string, double>> merged;
    for (const auto& row : rows) {
        auto form = lower_normalized(row.form);
        if (form.empty() || row.lemma.empty())
            continue;
        merged[form][row.lemma] += row.weight;
    }
    if (merged.empty())
        throw DataError("empty lexicon");

    Lexicon lex;
    lex.entries_.reserve(merged.size());
    for (auto& [form, lemmas] : merged) {
        Entry e;
        for (auto& [lemma, w] : lemmas)
            e.candidates.push_back({lemma, w});
        // candidates are lemma-sorted, so the first maximum wins ties
        for (std::size_t i = 1; i < e.candidates.size(); ++i)
            if (e.candidates[i].weight > e.candidates[e.best].weight)
                e.best = i;
        lex.entries_.emplace(form, std::move(e));
    }
    return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path, std::vector<std::string>* warnings)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot read lexicon " + path.string());

    auto warn = [&](std::size_t lineno, const std::string& msg) {
        if (warnings)
            warnings->push_back(path.filename().string() + ":" + std::to_string(lineno) + ": " + msg);
    };

    std::vector<Row> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view body = trim(line);
        if (body.empty() || body.front() == '#')
            continue;
        std::vector<std::string_view> cols;
        std::size_t start = 0;
        while (true) {
            auto pos = body.find('\t', start);
            cols.push_back(body.substr(start, pos == std::string_view::npos ? pos : pos - start));
            if (pos == std::string_view::npos)
                break;
            start = pos + 1;
        }
        if (lineno == 1 && cols.size() == 3 && cols[0] == "form" && cols[1] == "lemma")
            continue;
        if (cols.size() != 3) {
            warn(lineno, "expected 3 columns");
            continue;
        }
        auto form = trim(cols[0]);
        auto lemma = trim(cols[1]);
        auto wtxt = trim(cols[2]);
        double w{};
        auto [p, ec] = std::from_chars(wtxt.data(), wtxt.data() + wtxt.size(), w);
        if (ec != std::errc{} || p != wtxt.data() + wtxt.size() || !std::isfinite(w) || w < 0.0) {
            warn(lineno, "invalid weight '" + std::string(wtxt) + "'");
            continue;
        }
        if (form.empty() || lemma.empty()) {
            warn(lineno, "empty form or lemma");
            continue;
        }
        rows.push_back({std::string(form), std::string(lemma), w});
    }
    return from_rows(rows);
}

const std::vector<LemmaCandidate>* Lexicon::candidates(const std::string& normalized) const
{
    auto it = entries_.find(normalized);
    return it == entries_.end() ? nullptr : &it->second.candidates;
}

const std::string* Lexicon::best(const std::string& normalized) const
{
    auto it = entries_.find(normalized);
    return it == entries_.end() ? nullptr : &it->second.candidates[it->second.best].lemma;
}

std::vector<LemmatizedToken> lemmatize(std::span<const std::string> forms, const Lexicon& lexicon)
{
    std::vector<LemmatizedToken> out;
    out.reserve(forms.size());
    for (const auto& form : forms) {
        auto key = normalize_form(form);
        if (const auto* lemma = lexicon.best(key))
            out.push_back({form, *lemma, true});
        else
            out.push_back({form, std::move(key), false});
    }
    return out;
}

} // namespace cema
