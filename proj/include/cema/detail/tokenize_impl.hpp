#pragma once

#include <string>
#include <string_view>
#include <utility>

namespace cema::detail {

// Decodes one UTF-8 code point at `i`, advancing it. Returns -1 for an
// invalid sequence.
int next_code_point(std::string_view s, std::size_t& i) noexcept;
bool is_letter(int cp) noexcept;
void append_lower(std::string& out, int cp);

} // namespace cema::detail

namespace cema {

template <class Fn>
void for_each_token(std::string_view text, Fn&& fn)
{
    std::string current;
    std::size_t i = 0;
    while (i < text.size()) {
        const int cp = detail::next_code_point(text, i);
        if (cp >= 0 && detail::is_letter(cp)) {
            detail::append_lower(current, cp);
        } else if (!current.empty()) {
            fn(std::move(current));
            current.clear();
        }
    }
    if (!current.empty())
        fn(std::move(current));
}

} // namespace cema
