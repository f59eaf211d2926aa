#pragma once

#include <cema/index.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cema {

/// Dense row-major table of non-negative integer counts with exact marginals.
class ContingencyTable {
public:
    ContingencyTable() = default;
    /// Throws UsageError if `counts` does not have rows*cols cells.
    ContingencyTable(std::vector<std::string> row_labels, std::vector<std::string> col_labels,
                     std::vector<std::uint64_t> counts);

    std::size_t rows() const noexcept { return row_labels_.size(); }
    std::size_t cols() const noexcept { return col_labels_.size(); }
    std::uint64_t operator()(std::size_t r, std::size_t c) const { return counts_[r * cols() + c]; }

    std::span<const std::string> row_labels() const noexcept { return row_labels_; }
    std::span<const std::string> col_labels() const noexcept { return col_labels_; }
    std::span<const std::uint64_t> counts() const noexcept { return counts_; }
    std::span<const std::uint64_t> row_totals() const noexcept { return row_totals_; }
    std::span<const std::uint64_t> col_totals() const noexcept { return col_totals_; }
    std::uint64_t total() const noexcept { return total_; }

    /// Copy without all-zero rows and columns; dropped labels are reported.
    ContingencyTable drop_empty(std::vector<std::string>* dropped_rows = nullptr,
                                std::vector<std::string>* dropped_cols = nullptr) const;

private:
    std::vector<std::string> row_labels_;
    std::vector<std::string> col_labels_;
    std::vector<std::uint64_t> counts_;
    std::vector<std::uint64_t> row_totals_;
    std::vector<std::uint64_t> col_totals_;
    std::uint64_t total_ = 0;
};

enum class FeatureKind { lemmas, bilemmas };

/// Column space for document tables: lemmas or adjacent ordered lemma pairs
/// whose frequency over the selected rows is at least `min_freq`; when
/// `max_features` is non-zero only the most frequent are kept (ties by label).
struct FeatureSpec {
    FeatureKind kind = FeatureKind::lemmas;
    std::uint64_t min_freq = 1;
    std::size_t max_features = 0;
};

/// Label of a bi-lemma column: "first second".
std::string bilemma_label(std::string_view first, std::string_view second);

/// Rows = lemmas, columns = slices, cell = occurrences of the lemma in the
/// slice. Throws DataError if the table would be empty.
ContingencyTable contingency_lemma_slice(const Index& index, const SlicePlan& plan,
                                         std::span<const LemmaId> lemmas);

/// Rows = individual charters passing `filter` (labelled by id).
ContingencyTable contingency_charter_feature(const Index& index, const CharterFilter& filter,
                                             const FeatureSpec& features);

/// Rows = values of a metadata field (`doc_type`, `region`, ...), sorted;
/// charters lacking the field are skipped.
ContingencyTable contingency_group_feature(const Index& index, const std::string& field,
                                           const CharterFilter& filter, const FeatureSpec& features);

/// Rows = slices of the plan, in plan order.
ContingencyTable contingency_slice_feature(const Index& index, const SlicePlan& plan,
                                           const FeatureSpec& features);

} // namespace cema
