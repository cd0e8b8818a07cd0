#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace vpm {

// Ordered numeric version. '.' and '-' are interchangeable separators, so
// "7.3-22" and "7.3.22" denote the same value. Ordering is lexicographic over
// the numeric components and a proper prefix sorts first: 1.2 < 1.2.0.
class Version {
public:
    static constexpr std::size_t max_components = 8;

    Version() = default;

    // Parses "2.10.3", "7.3-22", ... Throws Error on malformed input.
    static Version parse(std::string_view text);

    // Builds a version from raw components; the text form is dot-joined.
    static Version of(std::vector<std::uint64_t> components);

    const std::vector<std::uint64_t>& components() const noexcept { return components_; }
    const std::string& text() const noexcept { return text_; }

    std::strong_ordering operator<=>(const Version& other) const noexcept;
    bool operator==(const Version& other) const noexcept {
        return components_ == other.components_;
    }

private:
    std::vector<std::uint64_t> components_;
    std::string text_;
};

inline std::strong_ordering compare(const Version& a, const Version& b) noexcept {
    return a <=> b;
}

inline std::string to_string(const Version& v) { return v.text(); }

} // namespace vpm
