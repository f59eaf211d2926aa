#include <cema/charter.hpp>
#include <cema/error.hpp>
#include <cema/ingest.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>

namespace cema {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

const std::string* lookup(const RawRecord& r, std::string_view key)
{
    auto it = r.find(key);
    if (it == r.end())
        return nullptr;
    if (trim(it->second).empty())
        return nullptr;
    return &it->second;
}

std::optional<Year> parse_year(std::string_view s)
{
    s = trim(s);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    Year y{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), y);
    if (ec != std::errc{} || p != s.data() + s.size())
        return std::nullopt;
    return y;
}

std::optional<double> parse_degrees(std::string_view s)
{
    s = trim(s);
    double v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v))
        return std::nullopt;
    return v;
}

Rejection reject(const RawRecord& r, std::string field, std::string reason)
{
    std::string ref;
    if (auto* id = lookup(r, "id"))
        ref = std::string(trim(*id));
    return Rejection{std::move(ref), std::move(field), std::move(reason)};
}

} // namespace

Year DateRange::midpoint() const noexcept
{
    auto sum = static_cast<std::int64_t>(not_before) + not_after;
    auto q = sum / 2;
    if (sum % 2 != 0 && sum < 0)
        --q;
    return static_cast<Year>(q);
}

const std::vector<std::string>& charter_fields()
{
    static const std::vector<std::string> fields = {
        "id", "source_corpus", "text", "not_before", "not_after", "lat", "lon",
        "region", "institution", "doc_type", "language"};
    return fields;
}

std::optional<std::string_view> charter_field(const Charter& c, std::string_view field)
{
    auto opt = [](const std::optional<std::string>& s) -> std::optional<std::string_view> {
        if (s)
            return std::string_view(*s);
        return std::nullopt;
    };
    if (field == "id")
        return std::string_view(c.id);
    if (field == "source_corpus" || field == "source")
        return std::string_view(c.source_corpus);
    if (field == "region")
        return opt(c.region);
    if (field == "institution")
        return opt(c.institution);
    if (field == "doc_type")
        return opt(c.doc_type);
    if (field == "language")
        return opt(c.language);
    throw UsageError("unknown charter field: " + std::string(field));
}

Validated validate_charter(const RawRecord& r)
{
    Charter c;

    auto* id = lookup(r, "id");
    if (!id)
        return reject(r, "id", "empty id");
    c.id = std::string(trim(*id));

    if (auto* text = lookup(r, "text"))
        c.text = clean_text(*text);
    if (c.text.empty())
        return reject(r, "text", "empty text");

    auto* nb = lookup(r, "not_before");
    auto* na = lookup(r, "not_after");
    if (nb || na) {
        std::optional<Year> lo = nb ? parse_year(*nb) : std::nullopt;
        std::optional<Year> hi = na ? parse_year(*na) : std::nullopt;
        if (nb && !lo)
            return reject(r, "not_before", "not an integer year");
        if (na && !hi)
            return reject(r, "not_after", "not an integer year");
        // A single bound is read as a single-year date.
        if (!lo)
            lo = hi;
        if (!hi)
            hi = lo;
        if (*lo > *hi)
            return reject(r, "not_before", "date interval inverted");
        c.date = DateRange{*lo, *hi};
    }

    auto* lat = lookup(r, "lat");
    auto* lon = lookup(r, "lon");
    if (lat) {
        c.lat = parse_degrees(*lat);
        if (!c.lat)
            return reject(r, "lat", "not a number");
        if (*c.lat < -90.0 || *c.lat > 90.0)
            return reject(r, "lat", "latitude out of range");
    }
    if (lon) {
        c.lon = parse_degrees(*lon);
        if (!c.lon)
            return reject(r, "lon", "not a number");
        if (*c.lon < -180.0 || *c.lon > 180.0)
            return reject(r, "lon", "longitude out of range");
    }
    if (c.lat.has_value() != c.lon.has_value())
        return reject(r, lat ? "lon" : "lat", "coordinate pair incomplete");

    auto text_field = [&](std::string_view key) -> std::optional<std::string> {
        if (auto* v = lookup(r, key))
            return std::string(trim(*v));
        return std::nullopt;
    };
    if (auto s = text_field("source_corpus"))
        c.source_corpus = *s;
    c.region = text_field("region");
    c.institution = text_field("institution");
    c.doc_type = text_field("doc_type");
    c.language = text_field("language");

    const auto& known = charter_fields();
    for (const auto& [key, value] : r) {
        if (std::find(known.begin(), known.end(), key) == known.end())
            c.extra.emplace(key, value);
    }
    return c;
}

} // namespace cema
