#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cema {

using Year = std::int32_t;

/// Closed Julian-year interval during which a charter was issued.
struct DateRange {
    Year not_before = 0;
    Year not_after = 0;

    /// floor((not_before + not_after) / 2), also for negative years.
    Year midpoint() const noexcept;

    friend bool operator==(const DateRange&, const DateRange&) = default;
    friend auto operator<=>(const DateRange&, const DateRange&) = default;
};

/// One diplomatic document. Immutable once validated.
struct Charter {
    std::string id;
    std::string source_corpus;
    std::string text;
    std::optional<DateRange> date; // absent: undateable
    std::optional<double> lat;
    std::optional<double> lon;
    std::optional<std::string> region;
    std::optional<std::string> institution;
    std::optional<std::string> doc_type; // absent: unknown typology
    std::optional<std::string> language;
    // "source:original_id" for every record collapsed into this one.
    std::vector<std::string> provenance;
    // Unrecognized input fields, values kept as JSON text.
    std::map<std::string, std::string> extra;

    bool dateable() const noexcept { return date.has_value(); }
    bool located() const noexcept { return lat.has_value() && lon.has_value(); }

    friend bool operator==(const Charter&, const Charter&) = default;
};

/// Why a record could not become a Charter.
struct Rejection {
    std::string record;   // id if known, else "line N" / "row N"
    std::string field;    // offending field, empty for whole-record problems
    std::string reason;

    friend bool operator==(const Rejection&, const Rejection&) = default;
};

/// Field name -> textual value as read from an input format. Keys outside the
/// Charter field set are carried into Charter::extra unchanged, so readers
/// store them JSON-encoded.
using RawRecord = std::map<std::string, std::string, std::less<>>;

using Validated = std::variant<Charter, Rejection>;

/// Applies text cleaning and checks every Charter invariant. Total and
/// deterministic.
Validated validate_charter(const RawRecord& record);

/// Field names understood by validate_charter, in canonical order.
const std::vector<std::string>& charter_fields();

/// Metadata lookup by field name ("doc_type", "region", "institution",
/// "source_corpus", "language", "id"). Unknown names throw UsageError.
std::optional<std::string_view> charter_field(const Charter& c, std::string_view field);

struct Corpus {
    std::vector<Charter> charters;
};

} // namespace cema
