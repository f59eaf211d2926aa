#include <cema/error.hpp>
#include <cema/ingest.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace cema {

namespace {

void append_utf8(std::string& out, UChar32 cp)
{
    char buf[4];
    std::int32_t len = 0;
    UBool err = false;
    U8_APPEND(reinterpret_cast<uint8_t*>(buf), len, 4, cp, err);
    if (!err)
        out.append(buf, static_cast<std::size_t>(len));
}

bool is_space(UChar32 cp)
{
    return cp == '\t' || cp == '\n' || cp == '\r' || cp == '\v' || cp == '\f' ||
           u_isUWhiteSpace(cp);
}

bool is_control(UChar32 cp)
{
    return u_charType(cp) == U_CONTROL_CHAR;
}

std::vector<UChar32> decode(std::string_view s)
{
    std::vector<UChar32> cps;
    cps.reserve(s.size());
    const auto* p = reinterpret_cast<const uint8_t*>(s.data());
    std::int32_t i = 0;
    const auto n = static_cast<std::int32_t>(s.size());
    while (i < n) {
        UChar32 c;
        U8_NEXT(p, i, n, c);
        if (c >= 0)
            cps.push_back(c);
    }
    return cps;
}

std::string_view strip_cr(std::string_view line)
{
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    return line;
}

std::vector<std::string_view> split_tabs(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find('\t', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

bool is_known_field(const std::string& key)
{
    const auto& f = charter_fields();
    return std::find(f.begin(), f.end(), key) != f.end();
}

// Converts a JSON object to a RawRecord. Returns the offending key on type
// errors.
std::optional<std::string> to_raw(const nlohmann::json& j, RawRecord& raw)
{
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& key = it.key();
        const auto& v = it.value();
        if (key == "provenance")
            continue;
        if (!is_known_field(key)) {
            raw.emplace(key, v.dump());
            continue;
        }
        if (v.is_null())
            continue;
        if (v.is_string())
            raw.emplace(key, v.get<std::string>());
        else if (v.is_number())
            raw.emplace(key, v.dump());
        else
            return key;
    }
    return std::nullopt;
}

void add_to_batch(CorpusBatch& batch, std::unordered_set<std::string>& seen,
                  Validated v, const std::string& where)
{
    if (auto* rej = std::get_if<Rejection>(&v)) {
        if (rej->record.empty())
            rej->record = where;
        batch.rejects.push_back(std::move(*rej));
        return;
    }
    auto& c = std::get<Charter>(v);
    if (!seen.insert(c.id).second) {
        batch.rejects.push_back({c.id, "id", "duplicate id within batch"});
        return;
    }
    if (c.source_corpus.empty())
        c.source_corpus = batch.source;
    batch.charters.push_back(std::move(c));
}

} // namespace

std::string clean_text(std::string_view raw)
{
    auto cps = decode(raw);

    // Bracket matching: matched [..] spans are removed whole, stray brackets
    // alone.
    std::vector<char> drop(cps.size(), 0);
    std::vector<std::size_t> open;
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (cps[i] == '[') {
            open.push_back(i);
        } else if (cps[i] == ']') {
            if (open.empty()) {
                drop[i] = 1;
            } else {
                spans.emplace_back(open.back(), i);
                open.pop_back();
            }
        }
    }
    for (auto i : open)
        drop[i] = 1;
    for (auto [a, b] : spans)
        std::fill(drop.begin() + static_cast<std::ptrdiff_t>(a),
                  drop.begin() + static_cast<std::ptrdiff_t>(b) + 1, 1);

    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (drop[i])
            continue;
        UChar32 c = cps[i];
        if (is_space(c)) {
            pending_space = true;
            continue;
        }
        if (is_control(c))
            continue;
        if (pending_space && !out.empty())
            out.push_back(' ');
        pending_space = false;
        append_utf8(out, c);
    }
    return out;
}

CorpusBatch read_jsonl(std::istream& in, std::string source)
{
    CorpusBatch batch;
    batch.source = std::move(source);
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto body = strip_cr(line);
        if (body.find_first_not_of(" \t") == std::string_view::npos)
            continue;
        const auto where = "line " + std::to_string(lineno);
        auto j = nlohmann::json::parse(body, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            batch.rejects.push_back({where, "", "malformed JSON record"});
            continue;
        }
        RawRecord raw;
        if (auto bad = to_raw(j, raw)) {
            std::string ref = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>() : where;
            batch.rejects.push_back({ref, *bad, "wrong value type"});
            continue;
        }
        auto v = validate_charter(raw);
        if (auto* c = std::get_if<Charter>(&v)) {
            if (auto p = j.find("provenance"); p != j.end() && p->is_array()) {
                for (const auto& e : *p)
                    if (e.is_string())
                        c->provenance.push_back(e.get<std::string>());
            }
        }
        add_to_batch(batch, seen, std::move(v), where);
    }
    return batch;
}

CorpusBatch read_tsv(std::istream& in, std::string source, const std::filesystem::path& text_dir)
{
    CorpusBatch batch;
    batch.source = std::move(source);
    std::unordered_set<std::string> seen;

    std::string line;
    if (!std::getline(in, line))
        return batch;
    std::vector<std::string> header;
    for (auto f : split_tabs(strip_cr(line)))
        header.emplace_back(f);
    if (std::find(header.begin(), header.end(), "id") == header.end())
        throw DataError("TSV header lacks an id column");

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        auto body = strip_cr(line);
        if (body.empty())
            continue;
        const auto where = "row " + std::to_string(lineno);
        auto cols = split_tabs(body);
        if (cols.size() != header.size()) {
            batch.rejects.push_back({where, "", "malformed row: expected " +
                                                    std::to_string(header.size()) + " columns"});
            continue;
        }
        RawRecord raw;
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (header[i] == "text")
                continue;
            if (is_known_field(header[i]))
                raw.emplace(header[i], std::string(cols[i]));
            else
                raw.emplace(header[i], nlohmann::json(std::string(cols[i])).dump());
        }
        auto id_it = raw.find("id");
        std::string id = id_it == raw.end() ? std::string() : id_it->second;
        if (!id.empty()) {
            if (id.find('/') != std::string::npos || id.find('\\') != std::string::npos ||
                id == "." || id == "..") {
                batch.rejects.push_back({id, "id", "id not usable as a file name"});
                continue;
            }
            std::ifstream text_file(text_dir / (id + ".txt"), std::ios::binary);
            if (!text_file) {
                batch.rejects.push_back({id, "text", "text file absent"});
                continue;
            }
            std::ostringstream ss;
            ss << text_file.rdbuf();
            raw.emplace("text", ss.str());
        }
        add_to_batch(batch, seen, validate_charter(raw), where);
    }
    return batch;
}

CorpusBatch read_corpus(const std::filesystem::path& path, InputFormat format,
                        std::optional<std::filesystem::path> text_dir)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot read " + path.string());
    auto source = path.stem().string();
    if (format == InputFormat::jsonl)
        return read_jsonl(in, std::move(source));
    auto dir = text_dir ? *text_dir : path.parent_path() / "texts";
    return read_tsv(in, std::move(source), dir);
}

Corpus merge_corpora(std::vector<CorpusBatch> batches)
{
    std::stable_sort(batches.begin(), batches.end(),
                     [](const CorpusBatch& a, const CorpusBatch& b) { return a.source < b.source; });

    struct Entry {
        Charter charter;
        std::string batch_source;
    };
    std::vector<Entry> kept;
    using Key = std::tuple<std::string, std::optional<DateRange>>;
    std::map<Key, std::size_t> by_content;

    for (auto& batch : batches) {
        for (auto& c : batch.charters) {
            auto origin = batch.source + ":" + c.id;
            Key key{c.text, c.date};
            if (auto it = by_content.find(key); it != by_content.end()) {
                auto& prov = kept[it->second].charter.provenance;
                prov.push_back(origin);
                continue;
            }
            if (c.provenance.empty())
                c.provenance.push_back(origin);
            kept.push_back({std::move(c), batch.source});
            by_content.emplace(std::move(key), kept.size() - 1);
        }
    }

    std::unordered_map<std::string, std::size_t> id_count;
    for (const auto& e : kept)
        ++id_count[e.charter.id];

    Corpus corpus;
    corpus.charters.reserve(kept.size());
    std::unordered_set<std::string> taken;
    for (const auto& e : kept)
        if (id_count[e.charter.id] == 1)
            taken.insert(e.charter.id);
    for (auto& e : kept) {
        if (id_count[e.charter.id] > 1) {
            auto id = e.batch_source + ":" + e.charter.id;
            auto candidate = id;
            for (int n = 2; taken.count(candidate); ++n)
                candidate = id + "#" + std::to_string(n);
            e.charter.id = candidate;
            taken.insert(candidate);
        }
        corpus.charters.push_back(std::move(e.charter));
    }
    return corpus;
}

nlohmann::json charter_to_json(const Charter& c)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : c.extra) {
        auto parsed = nlohmann::json::parse(v, nullptr, false);
        j[k] = parsed.is_discarded() ? nlohmann::json(v) : parsed;
    }
    j["id"] = c.id;
    j["source_corpus"] = c.source_corpus;
    j["text"] = c.text;
    if (c.date) {
        j["not_before"] = c.date->not_before;
        j["not_after"] = c.date->not_after;
    }
    if (c.lat)
        j["lat"] = *c.lat;
    if (c.lon)
        j["lon"] = *c.lon;
    auto put = [&](const char* key, const std::optional<std::string>& v) {
        if (v)
            j[key] = *v;
    };
    put("region", c.region);
    put("institution", c.institution);
    put("doc_type", c.doc_type);
    put("language", c.language);
    if (!c.provenance.empty())
        j["provenance"] = c.provenance;
    return j;
}

Validated charter_from_json(const nlohmann::json& j)
{
    if (!j.is_object())
        return Rejection{"", "", "malformed JSON record"};
    RawRecord raw;
    if (auto bad = to_raw(j, raw))
        return Rejection{"", *bad, "wrong value type"};
    auto v = validate_charter(raw);
    if (auto* c = std::get_if<Charter>(&v)) {
        if (auto p = j.find("provenance"); p != j.end() && p->is_array())
            for (const auto& e : *p)
                if (e.is_string())
                    c->provenance.push_back(e.get<std::string>());
    }
    return v;
}

void write_corpus_jsonl(std::ostream& out, const Corpus& corpus)
{
    for (const auto& c : corpus.charters)
        out << charter_to_json(c).dump() << '\n';
}

Corpus load_corpus(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot read " + path.string());
    auto batch = read_jsonl(in, path.stem().string());
    if (!batch.rejects.empty()) {
        const auto& r = batch.rejects.front();
        throw DataError("invalid corpus record " + r.record + ": " + r.reason);
    }
    return Corpus{std::move(batch.charters)};
}

} // namespace cema
