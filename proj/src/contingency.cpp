#include <cema/contingency.hpp>
#include <cema/error.hpp>

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>

namespace cema {

ContingencyTable::ContingencyTable(std::vector<std::string> row_labels, std::vector<std::string> col_labels,
                                   std::vector<std::uint64_t> counts)
    : row_labels_(std::move(row_labels)), col_labels_(std::move(col_labels)), counts_(std::move(counts))
{
    if (counts_.size() != row_labels_.size() * col_labels_.size())
        throw UsageError("contingency table: cell count does not match labels");
    row_totals_.assign(rows(), 0);
    col_totals_.assign(cols(), 0);
    for (std::size_t r = 0; r < rows(); ++r)
        for (std::size_t c = 0; c < cols(); ++c) {
            const auto v = counts_[r * cols() + c];
            row_totals_[r] += v;
            col_totals_[c] += v;
            total_ += v;
        }
}

ContingencyTable ContingencyTable::drop_empty(std::vector<std::string>* dropped_rows,
                                              std::vector<std::string>* dropped_cols) const
{
    std::vector<std::size_t> keep_r;
    std::vector<std::size_t> keep_c;
    for (std::size_t r = 0; r < rows(); ++r) {
        if (row_totals_[r] > 0)
            keep_r.push_back(r);
        else if (dropped_rows)
            dropped_rows->push_back(row_labels_[r]);
    }
    for (std::size_t c = 0; c < cols(); ++c) {
        if (col_totals_[c] > 0)
            keep_c.push_back(c);
        else if (dropped_cols)
            dropped_cols->push_back(col_labels_[c]);
    }
    std::vector<std::string> rl;
    std::vector<std::string> cl;
    std::vector<std::uint64_t> cells;
    cells.reserve(keep_r.size() * keep_c.size());
    for (auto r : keep_r) {
        rl.push_back(row_labels_[r]);
        for (auto c : keep_c)
            cells.push_back((*this)(r, c));
    }
    for (auto c : keep_c)
        cl.push_back(col_labels_[c]);
    return ContingencyTable(std::move(rl), std::move(cl), std::move(cells));
}

std::string bilemma_label(std::string_view first, std::string_view second)
{
    std::string s;
    s.reserve(first.size() + second.size() + 1);
    s.append(first).push_back(' ');
    s.append(second);
    return s;
}

namespace {

using Key = std::uint64_t;

Key pair_key(LemmaId a, LemmaId b) { return (static_cast<Key>(a) << 32) | b; }

// Feature occurrences of one charter, as (feature key, count).
void charter_features(const Index& index, CharterIdx c, FeatureKind kind,
                      std::unordered_map<Key, std::uint64_t>& out)
{
    auto lemmas = index.lemmas_of(c);
    if (kind == FeatureKind::lemmas) {
        for (auto l : lemmas)
            ++out[l];
    } else {
        for (std::size_t i = 1; i < lemmas.size(); ++i)
            ++out[pair_key(lemmas[i - 1], lemmas[i])];
    }
}

std::string feature_label(const Index& index, FeatureKind kind, Key k)
{
    if (kind == FeatureKind::lemmas)
        return index.lemmas()[static_cast<LemmaId>(k)];
    return bilemma_label(index.lemmas()[static_cast<LemmaId>(k >> 32)],
                         index.lemmas()[static_cast<LemmaId>(k & 0xFFFFFFFFu)]);
}

// Rows are groups of charters; columns chosen from the group totals.
ContingencyTable grouped_table(const Index& index, std::vector<std::string> row_labels,
                               const std::vector<std::vector<CharterIdx>>& groups, const FeatureSpec& spec)
{
    if (row_labels.empty())
        throw DataError("contingency table has no rows after filtering");

    std::vector<std::unordered_map<Key, std::uint64_t>> row_counts(groups.size());
    std::unordered_map<Key, std::uint64_t> totals;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (auto c : groups[g])
            charter_features(index, c, spec.kind, row_counts[g]);
        for (const auto& [k, v] : row_counts[g])
            totals[k] += v;
    }

    std::vector<std::pair<std::string, Key>> columns;
    for (const auto& [k, v] : totals)
        if (v >= spec.min_freq && v > 0)
            columns.emplace_back(feature_label(index, spec.kind, k), k);
    std::sort(columns.begin(), columns.end());
    if (spec.max_features > 0 && columns.size() > spec.max_features) {
        std::stable_sort(columns.begin(), columns.end(),
                         [&](const auto& a, const auto& b) { return totals[a.second] > totals[b.second]; });
        columns.resize(spec.max_features);
        std::sort(columns.begin(), columns.end());
    }
    if (columns.empty())
        throw DataError("contingency table has no columns after filtering");

    std::vector<std::string> col_labels;
    col_labels.reserve(columns.size());
    for (auto& c : columns)
        col_labels.push_back(c.first);
    std::vector<std::uint64_t> cells(row_labels.size() * columns.size(), 0);
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (std::size_t j = 0; j < columns.size(); ++j)
            if (auto it = row_counts[g].find(columns[j].second); it != row_counts[g].end())
                cells[g * columns.size() + j] = it->second;

    ContingencyTable table(std::move(row_labels), std::move(col_labels), std::move(cells));
    if (table.total() == 0)
        throw DataError("contingency table is empty after filtering");
    return table;
}

} // namespace

ContingencyTable contingency_lemma_slice(const Index& index, const SlicePlan& plan, std::span<const LemmaId> lemmas)
{
    if (lemmas.empty() || plan.slices.empty())
        throw DataError("lemma x slice table needs lemmas and slices");
    std::vector<std::string> rows;
    std::vector<std::string> cols;
    for (auto l : lemmas)
        rows.push_back(index.lemmas()[l]);
    for (const auto& s : plan.slices)
        cols.push_back(s.label);
    std::vector<std::uint64_t> cells(rows.size() * cols.size(), 0);
    for (std::size_t r = 0; r < lemmas.size(); ++r)
        for (const auto& p : index.postings(lemmas[r]))
            if (auto s = plan.slice_of[p.charter]; s >= 0)
                ++cells[r * cols.size() + static_cast<std::size_t>(s)];
    ContingencyTable table(std::move(rows), std::move(cols), std::move(cells));
    if (table.total() == 0)
        throw DataError("lemma x slice table is empty");
    return table;
}

ContingencyTable contingency_charter_feature(const Index& index, const CharterFilter& filter,
                                             const FeatureSpec& features)
{
    std::vector<std::string> labels;
    std::vector<std::vector<CharterIdx>> groups;
    for (auto c : select_charters(index, filter)) {
        labels.push_back(index.charter(c).id);
        groups.push_back({c});
    }
    return grouped_table(index, std::move(labels), groups, features);
}

ContingencyTable contingency_group_feature(const Index& index, const std::string& field,
                                           const CharterFilter& filter, const FeatureSpec& features)
{
    std::map<std::string, std::vector<CharterIdx>> by_value;
    for (auto c : select_charters(index, filter))
        if (auto v = charter_field(index.charter(c), field))
            by_value[std::string(*v)].push_back(c);
    std::vector<std::string> labels;
    std::vector<std::vector<CharterIdx>> groups;
    for (auto& [k, v] : by_value) {
        labels.push_back(k);
        groups.push_back(std::move(v));
    }
    return grouped_table(index, std::move(labels), groups, features);
}

ContingencyTable contingency_slice_feature(const Index& index, const SlicePlan& plan, const FeatureSpec& features)
{
    std::vector<std::string> labels;
    std::vector<std::vector<CharterIdx>> groups;
    for (const auto& s : plan.slices) {
        labels.push_back(s.label);
        groups.push_back(s.charters);
    }
    return grouped_table(index, std::move(labels), groups, features);
}

} // namespace cema
