#include <cema/error.hpp>
#include <cema/index.hpp>
#include <cema/ingest.hpp>

#include <bit>
#include <cstring>
#include <fstream>

namespace cema {

namespace {

static_assert(std::endian::native == std::endian::little, "index files are little-endian");

constexpr char magic[8] = {'C', 'E', 'M', 'A', 'I', 'D', 'X', '\0'};

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    template <class T>
    void pod(const T& v) { out_.write(reinterpret_cast<const char*>(&v), sizeof(T)); }

    void str(std::string_view s)
    {
        pod<std::uint64_t>(s.size());
        out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }

    template <class T>
    void array(const std::vector<T>& v)
    {
        pod<std::uint64_t>(v.size());
        out_.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
    }

private:
    std::ostream& out_;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    template <class T>
    T pod()
    {
        T v{};
        read(reinterpret_cast<char*>(&v), sizeof(T));
        return v;
    }

    std::size_t count() { return length(16); }

    std::string str()
    {
        const auto n = length(1);
        std::string s(n, '\0');
        read(s.data(), n);
        return s;
    }

    template <class T>
    std::vector<T> array()
    {
        const auto n = length(sizeof(T));
        std::vector<T> v(n);
        read(reinterpret_cast<char*>(v.data()), n * sizeof(T));
        return v;
    }

private:
    std::size_t length(std::size_t elem)
    {
        const auto n = pod<std::uint64_t>();
        if (n > (std::uint64_t{1} << 40) / elem)
            throw DataError("index file corrupt: implausible length");
        return static_cast<std::size_t>(n);
    }

    void read(char* dst, std::size_t n)
    {
        if (!in_.read(dst, static_cast<std::streamsize>(n)))
            throw DataError("index file truncated");
    }

    std::istream& in_;
};

} // namespace

void save_index(const Index& index, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw DataError("cannot write " + path.string());
    Writer w(out);
    out.write(magic, sizeof(magic));
    w.pod(index_format_version);

    w.pod<std::uint64_t>(index.charter_count());
    for (const auto& c : index.charters())
        w.str(charter_to_json(c).dump());
    w.pod<std::uint64_t>(index.lemmas().size());
    for (const auto& s : index.lemmas().strings())
        w.str(s);
    w.pod<std::uint64_t>(index.forms().size());
    for (const auto& s : index.forms().strings())
        w.str(s);
    w.array(std::vector<std::uint8_t>(index.form_known_flags().begin(), index.form_known_flags().end()));
    w.array(index.tokens().offsets);
    w.array(index.tokens().lemmas);
    w.array(index.tokens().forms);
    if (!out)
        throw DataError("write failed: " + path.string());
}

Index load_index(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot read " + path.string());
    char head[sizeof(magic)];
    if (!in.read(head, sizeof(head)) || std::memcmp(head, magic, sizeof(magic)) != 0)
        throw DataError(path.string() + " is not an index file");
    Reader r(in);
    const auto version = r.pod<std::uint32_t>();
    if (version != index_format_version)
        throw DataError("index format version " + std::to_string(version) + " unsupported (expected " +
                        std::to_string(index_format_version) + ")");

    std::vector<Charter> charters(r.count());
    for (auto& c : charters) {
        auto j = nlohmann::json::parse(r.str(), nullptr, false);
        auto v = charter_from_json(j);
        if (!std::holds_alternative<Charter>(v))
            throw DataError("index file corrupt: bad charter record");
        c = std::get<Charter>(std::move(v));
    }
    auto read_strings = [&r] {
        std::vector<std::string> v(r.count());
        for (auto& s : v)
            s = r.str();
        return v;
    };
    auto lemma_strings = read_strings();
    auto form_strings = read_strings();
    auto known = r.array<std::uint8_t>();
    TokenStore tokens;
    tokens.offsets = r.array<std::uint64_t>();
    tokens.lemmas = r.array<LemmaId>();
    tokens.forms = r.array<FormId>();

    const auto nl = lemma_strings.size();
    const auto nf = form_strings.size();
    Vocabulary lemmas(std::move(lemma_strings));
    Vocabulary forms(std::move(form_strings));
    if (lemmas.size() != nl || forms.size() != nf)
        throw DataError("index file corrupt: vocabulary not unique");
    return Index(std::move(charters), std::move(lemmas), std::move(forms), std::move(known), std::move(tokens));
}

} // namespace cema
