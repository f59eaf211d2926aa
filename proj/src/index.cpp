#include <cema/error.hpp>
#include <cema/index.hpp>
#include <cema/kernels.hpp>

#include <algorithm>
#include <limits>
#include <numeric>

namespace cema {

Vocabulary::Vocabulary(std::vector<std::string> strings) : strings_(std::move(strings))
{
    std::sort(strings_.begin(), strings_.end());
    strings_.erase(std::unique(strings_.begin(), strings_.end()), strings_.end());
    ids_.reserve(strings_.size());
    for (std::uint32_t i = 0; i < strings_.size(); ++i)
        ids_.emplace(strings_[i], i);
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view s) const
{
    auto it = ids_.find(std::string(s));
    if (it == ids_.end())
        return std::nullopt;
    return it->second;
}

Index::Index(std::vector<Charter> charters, Vocabulary lemmas, Vocabulary forms,
             std::vector<std::uint8_t> form_known, TokenStore tokens)
    : charters_(std::move(charters)), lemmas_(std::move(lemmas)), forms_(std::move(forms)),
      form_known_(std::move(form_known)), tokens_(std::move(tokens))
{
    const auto& off = tokens_.offsets;
    if (off.size() != charters_.size() + 1 || off.front() != 0)
        throw DataError("index: offsets do not match the charter list");
    if (off.back() != tokens_.lemmas.size() || tokens_.forms.size() != tokens_.lemmas.size())
        throw DataError("index: token arrays inconsistent");
    if (form_known_.size() != forms_.size())
        throw DataError("index: known-form flags inconsistent");
    for (std::size_t i = 0; i + 1 < off.size(); ++i) {
        if (off[i + 1] < off[i])
            throw DataError("index: offsets not monotone");
        if (off[i + 1] - off[i] > 0xFFFFFFFFULL)
            throw DataError("index: charter too long");
    }

    charter_ids_.reserve(charters_.size());
    for (CharterIdx i = 0; i < charters_.size(); ++i)
        if (!charter_ids_.emplace(charters_[i].id, i).second)
            throw DataError("index: duplicate charter id " + charters_[i].id);

    lemma_freq_.assign(lemmas_.size(), 0);
    for (auto l : tokens_.lemmas) {
        if (l >= lemmas_.size())
            throw DataError("index: lemma id out of range");
        ++lemma_freq_[l];
    }
    for (auto f : tokens_.forms)
        if (f >= forms_.size())
            throw DataError("index: form id out of range");

    posting_offsets_.assign(lemmas_.size() + 1, 0);
    for (std::size_t l = 0; l < lemmas_.size(); ++l)
        posting_offsets_[l + 1] = posting_offsets_[l] + lemma_freq_[l];
    postings_.resize(tokens_.lemmas.size());
    std::vector<std::uint64_t> cursor(posting_offsets_.begin(), posting_offsets_.end() - 1);
    for (CharterIdx c = 0; c < charters_.size(); ++c) {
        for (auto t = off[c]; t < off[c + 1]; ++t) {
            auto l = tokens_.lemmas[t];
            postings_[cursor[l]++] = Posting{c, static_cast<std::uint32_t>(t - off[c])};
        }
    }
}

std::optional<CharterIdx> Index::find_charter(std::string_view id) const
{
    auto it = charter_ids_.find(std::string(id));
    if (it == charter_ids_.end())
        return std::nullopt;
    return it->second;
}

std::span<const LemmaId> Index::lemmas_of(CharterIdx c) const
{
    const auto b = tokens_.offsets[c];
    return std::span<const LemmaId>(tokens_.lemmas).subspan(b, tokens_.offsets[c + 1] - b);
}

std::span<const FormId> Index::forms_of(CharterIdx c) const
{
    const auto b = tokens_.offsets[c];
    return std::span<const FormId>(tokens_.forms).subspan(b, tokens_.offsets[c + 1] - b);
}

std::uint64_t Index::token_count(CharterIdx c) const
{
    return tokens_.offsets[c + 1] - tokens_.offsets[c];
}

std::span<const Posting> Index::postings(LemmaId l) const
{
    const auto b = posting_offsets_[l];
    return std::span<const Posting>(postings_).subspan(b, posting_offsets_[l + 1] - b);
}

std::vector<LemmaId> Index::resolve(std::span<const std::string> names,
                                    std::vector<std::string>* missing) const
{
    std::vector<LemmaId> ids;
    for (const auto& n : names) {
        if (auto id = lemmas_.find(n))
            ids.push_back(*id);
        else if (missing)
            missing->push_back(n);
    }
    return ids;
}

IndexStats Index::stats() const
{
    IndexStats s;
    s.charters = charters_.size();
    for (const auto& c : charters_) {
        s.dateable += c.dateable() ? 1 : 0;
        s.located += c.located() ? 1 : 0;
    }
    s.tokens = total_tokens();
    s.lemmas = lemmas_.size();
    s.forms = forms_.size();
    for (auto f : tokens_.forms)
        s.unknown_tokens += form_known_[f] ? 0 : 1;
    s.unknown_rate = s.tokens ? static_cast<double>(s.unknown_tokens) / static_cast<double>(s.tokens) : 0.0;
    return s;
}

Index build_index(const Corpus& corpus, const Lexicon& lexicon)
{
    std::vector<Charter> charters = corpus.charters;
    std::sort(charters.begin(), charters.end(),
              [](const Charter& a, const Charter& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < charters.size(); ++i)
        if (charters[i].id == charters[i - 1].id)
            throw DataError("duplicate charter id " + charters[i].id);

    auto tc = kernels::tokenize_corpus(charters, lexicon);
    return Index(std::move(charters), std::move(tc.lemmas), std::move(tc.forms),
                 std::move(tc.form_known), std::move(tc.tokens));
}

// ---------------------------------------------------------------------------

bool CharterFilter::matches(const Charter& c) const
{
    auto eq = [](const std::optional<std::string>& want, const std::optional<std::string>& have) {
        return !want || (have && *have == *want);
    };
    if (!eq(doc_type, c.doc_type) || !eq(region, c.region) || !eq(institution, c.institution))
        return false;
    if (source_corpus && c.source_corpus != *source_corpus)
        return false;
    if (dateable_only || year_lo || year_hi) {
        if (!c.date)
            return false;
        const Year y = c.date->midpoint();
        if ((year_lo && y < *year_lo) || (year_hi && y > *year_hi))
            return false;
    }
    return true;
}

bool CharterFilter::empty() const
{
    return !doc_type && !region && !institution && !source_corpus && !year_lo && !year_hi &&
           !dateable_only;
}

std::vector<CharterIdx> select_charters(const Index& index, const CharterFilter& filter)
{
    std::vector<CharterIdx> out;
    for (CharterIdx i = 0; i < index.charter_count(); ++i)
        if (filter.matches(index.charter(i)))
            out.push_back(i);
    return out;
}

std::uint64_t SlicePlan::total_tokens() const
{
    std::uint64_t n = 0;
    for (const auto& s : slices)
        n += s.tokens;
    return n;
}

namespace {

Year floor_to(Year y, Year step)
{
    Year q = y / step;
    if (y % step != 0 && y < 0)
        --q;
    return q * step;
}

} // namespace

std::string halfcentury_label(Year year)
{
    const Year lo = floor_to(year, 50);
    return std::to_string(lo) + "–" + std::to_string(lo + 49);
}

SlicePlan slice_by_halfcentury(const Index& index, Year year_lo, Year year_hi, const CharterFilter& filter)
{
    if (year_lo % 50 != 0 || year_hi % 50 != 0 || year_hi <= year_lo)
        throw UsageError("half-century range bounds must be increasing multiples of 50");

    SlicePlan plan;
    plan.kind = SliceKind::halfcentury;
    plan.slice_of.assign(index.charter_count(), -1);
    for (Year y = year_lo; y < year_hi; y += 50)
        plan.slices.push_back(Slice{halfcentury_label(y), {}, 0});

    std::size_t assigned = 0;
    for (CharterIdx i = 0; i < index.charter_count(); ++i) {
        const auto& c = index.charter(i);
        if (!filter.matches(c))
            continue;
        if (!c.date) {
            ++plan.undateable;
            continue;
        }
        const Year y = c.date->midpoint();
        if (y < year_lo || y >= year_hi) {
            ++plan.out_of_range;
            continue;
        }
        const auto s = static_cast<std::size_t>((floor_to(y, 50) - year_lo) / 50);
        plan.slices[s].charters.push_back(i);
        plan.slices[s].tokens += index.token_count(i);
        plan.slice_of[i] = static_cast<std::int32_t>(s);
        ++assigned;
    }
    if (assigned == 0)
        throw DataError("no dateable charter in the requested range");
    return plan;
}

namespace {

// Slice end positions from the greedy fill: each slice takes charters until it
// reaches ceil(remaining / slices left), leaving one charter per later slice.
std::vector<std::size_t> greedy_ends(std::span<const std::uint64_t> lengths, std::size_t k)
{
    std::uint64_t remaining = std::accumulate(lengths.begin(), lengths.end(), std::uint64_t{0});
    std::vector<std::size_t> ends;
    std::size_t pos = 0;
    for (std::size_t s = 0; s < k; ++s) {
        const auto left = k - s;
        const std::uint64_t target = (remaining + left - 1) / left;
        std::uint64_t tokens = 0;
        do {
            tokens += lengths[pos++];
        } while (pos < lengths.size() && (left == 1 || (tokens < target && lengths.size() - pos > left - 1)));
        remaining -= tokens;
        ends.push_back(pos);
    }
    return ends;
}

// Slice end positions such that every slice holds between lo and hi tokens,
// earliest cuts first; empty when no such partition exists.
std::vector<std::size_t> banded_ends(std::span<const std::uint64_t> prefix, std::size_t k, std::uint64_t lo,
                                     std::uint64_t hi)
{
    const std::size_t n = prefix.size() - 1;
    // can[j][p]: positions p..n split into j admissible slices.
    std::vector<std::vector<std::uint8_t>> can(k + 1, std::vector<std::uint8_t>(n + 1, 0));
    can[0][n] = 1;
    auto range = [&](std::size_t p) {
        auto first = std::lower_bound(prefix.begin() + static_cast<std::ptrdiff_t>(p) + 1, prefix.end(),
                                      prefix[p] + lo);
        auto last = std::upper_bound(prefix.begin() + static_cast<std::ptrdiff_t>(p) + 1, prefix.end(),
                                     prefix[p] + hi);
        return std::pair<std::size_t, std::size_t>(static_cast<std::size_t>(first - prefix.begin()),
                                                   static_cast<std::size_t>(last - prefix.begin()));
    };
    std::vector<std::size_t> reach(n + 2, 0);
    for (std::size_t j = 1; j <= k; ++j) {
        for (std::size_t q = 0; q <= n; ++q)
            reach[q + 1] = reach[q] + can[j - 1][q];
        for (std::size_t p = 0; p < n; ++p) {
            const auto [a, b] = range(p);
            can[j][p] = a < b && reach[b] > reach[a];
        }
    }
    if (!can[k][0])
        return {};
    std::vector<std::size_t> ends;
    std::size_t p = 0;
    for (std::size_t j = k; j > 0; --j) {
        const auto [a, b] = range(p);
        std::size_t q = a;
        while (!can[j - 1][q])
            ++q;
        ends.push_back(q);
        p = q;
    }
    return ends;
}

std::uint64_t spread(std::span<const std::uint64_t> prefix, const std::vector<std::size_t>& ends)
{
    std::uint64_t lo = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t hi = 0;
    std::size_t start = 0;
    for (auto e : ends) {
        const auto t = prefix[e] - prefix[start];
        lo = std::min(lo, t);
        hi = std::max(hi, t);
        start = e;
    }
    return hi - lo;
}

} // namespace

SlicePlan slice_equal_tokens(const Index& index, int k, const CharterFilter& filter)
{
    if (k <= 0)
        throw UsageError("slice count must be positive");

    SlicePlan plan;
    plan.kind = SliceKind::equal_tokens;
    plan.slice_of.assign(index.charter_count(), -1);

    std::vector<std::pair<Year, CharterIdx>> dated;
    for (CharterIdx i = 0; i < index.charter_count(); ++i) {
        const auto& c = index.charter(i);
        if (!filter.matches(c))
            continue;
        if (!c.date) {
            ++plan.undateable;
            continue;
        }
        dated.emplace_back(c.date->midpoint(), i);
    }
    if (dated.empty())
        throw DataError("no dateable charter to slice");
    const auto slices = static_cast<std::size_t>(k);
    if (slices > dated.size())
        throw UsageError("more slices requested than dateable charters");
    // charters are id-ordered, so a stable sort on the year breaks ties by id
    std::stable_sort(dated.begin(), dated.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<std::uint64_t> lengths(dated.size());
    std::vector<std::uint64_t> prefix(dated.size() + 1, 0);
    std::uint64_t longest = 0;
    for (std::size_t i = 0; i < dated.size(); ++i) {
        lengths[i] = index.token_count(dated[i].second);
        prefix[i + 1] = prefix[i] + lengths[i];
        longest = std::max(longest, lengths[i]);
    }

    auto ends = greedy_ends(lengths, slices);
    if (spread(prefix, ends) > longest) {
        // The greedy fill can drift by more than one charter; search the
        // admissible band [lo, lo + longest] around the mean instead.
        const std::uint64_t total = prefix.back();
        const std::uint64_t mean_floor = total / slices;
        const std::uint64_t mean_ceil = (total + slices - 1) / slices;
        const std::uint64_t lowest = mean_ceil > longest ? mean_ceil - longest : 0;
        for (std::uint64_t lo = mean_floor + 1; lo-- > lowest;) {
            auto banded = banded_ends(prefix, slices, lo, lo + longest);
            if (!banded.empty()) {
                ends = std::move(banded);
                break;
            }
        }
    }

    std::size_t start = 0;
    for (std::size_t s = 0; s < slices; ++s) {
        Slice slice{"P" + std::to_string(s + 1), {}, prefix[ends[s]] - prefix[start]};
        for (std::size_t i = start; i < ends[s]; ++i)
            slice.charters.push_back(dated[i].second);
        std::sort(slice.charters.begin(), slice.charters.end());
        for (auto c : slice.charters)
            plan.slice_of[c] = static_cast<std::int32_t>(s);
        plan.slices.push_back(std::move(slice));
        start = ends[s];
    }
    return plan;
}

} // namespace cema
