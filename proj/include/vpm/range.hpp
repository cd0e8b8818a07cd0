#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vpm/version.hpp"

namespace vpm {

enum class CompareOp { lt, le, gt, ge, eq };

std::string_view to_symbol(CompareOp op) noexcept;

struct Comparator {
    CompareOp op;
    Version version;
    bool operator==(const Comparator&) const = default;
};

// "lo - hi", both ends inclusive.
struct HyphenRange {
    Version lo;
    Version hi;
    bool operator==(const HyphenRange&) const = default;
};

// "~1.2", "~1.2.3": at least two components.
struct Tilde {
    Version base;
    bool operator==(const Tilde&) const = default;
};

// "2.x", "3.3.x", "7.3-x": numeric prefix, final component x.
struct XRange {
    std::vector<std::uint64_t> prefix;
    bool operator==(const XRange&) const = default;
};

// Bare version: "2.0.1".
struct Exact {
    Version version;
    bool operator==(const Exact&) const = default;
};

struct Wildcard {
    bool operator==(const Wildcard&) const = default;
};

using Primitive = std::variant<Comparator, HyphenRange, Tilde, XRange, Exact, Wildcard>;

struct Conjunction {
    std::vector<Primitive> primitives;
    bool operator==(const Conjunction&) const = default;
};

// Disjunction of conjunctions of primitive constraints, e.g.
// "<1.0.0 || >=2.3.1 <2.4.5". Structural equality ignores the source text.
class RangeDescriptor {
public:
    static RangeDescriptor parse(std::string_view text);
    static RangeDescriptor wildcard();

    const std::vector<Conjunction>& alternatives() const noexcept { return alternatives_; }
    const std::string& text() const noexcept { return text_; }

    bool operator==(const RangeDescriptor& other) const {
        return alternatives_ == other.alternatives_;
    }

private:
    std::vector<Conjunction> alternatives_;
    std::string text_;
};

// Rewrites a primitive as plain comparators. Precondition: not Wildcard.
std::vector<Comparator> desugar(const Primitive& p);

bool holds(const Version& v, const Comparator& c) noexcept;
bool satisfies(const Version& v, const RangeDescriptor& r);
std::optional<Version> max_satisfying(std::span<const Version> candidates,
                                      const RangeDescriptor& r);

} // namespace vpm
