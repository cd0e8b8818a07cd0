#include "vpm/version.hpp"

#include "vpm/errors.hpp"

#include <algorithm>

namespace vpm {

// Components stay below 2^31 so they survive any 32-bit signed consumer.
static constexpr std::uint64_t component_limit = 1ull << 31;

Version Version::parse(std::string_view text) {
    if (text.empty())
        fail(Errc::empty_version, "version string is empty");

    Version v;
    v.text_.assign(text);

    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i < text.size() && text[i] != '.' && text[i] != '-')
            continue;
        std::string_view part = text.substr(start, i - start);
        if (part.empty())
            fail(Errc::dangling_separator,
                 "empty component in '" + std::string(text) + "'");
        std::uint64_t value = 0;
        for (char c : part) {
            if (c < '0' || c > '9')
                fail(Errc::non_numeric_component,
                     "non-numeric component '" + std::string(part) + "' in '" +
                         std::string(text) + "'");
            value = value * 10 + static_cast<std::uint64_t>(c - '0');
            if (value >= component_limit)
                fail(Errc::component_out_of_range,
                     "component '" + std::string(part) + "' exceeds limit in '" +
                         std::string(text) + "'");
        }
        v.components_.push_back(value);
        if (v.components_.size() > max_components)
            fail(Errc::too_many_components,
                 "more than " + std::to_string(max_components) + " components in '" +
                     std::string(text) + "'");
        start = i + 1;
    }
    return v;
}

Version Version::of(std::vector<std::uint64_t> components) {
    if (components.empty())
        fail(Errc::empty_version, "no components");
    Version v;
    for (std::size_t i = 0; i < components.size(); ++i) {
        if (i)
            v.text_.push_back('.');
        v.text_ += std::to_string(components[i]);
    }
    v.components_ = std::move(components);
    return v;
}

std::strong_ordering Version::operator<=>(const Version& other) const noexcept {
    return std::lexicographical_compare_three_way(
        components_.begin(), components_.end(),
        other.components_.begin(), other.components_.end());
}

} // namespace vpm
