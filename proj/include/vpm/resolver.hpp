#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "vpm/range.hpp"
#include "vpm/version.hpp"
#include "vpm/view.hpp"

namespace vpm {

struct ResolveRequest {
    std::string name;
    RangeDescriptor range;
};

struct ResolveOptions {
    bool include_optional = false;
};

// One node per dependency edge; the same package may appear several times at
// different (or equal) versions.
struct ResolutionTree {
    std::string name;
    Version version;
    std::vector<ResolutionTree> children;

    bool operator==(const ResolutionTree&) const = default;
};

struct NestedResolution {
    std::vector<ResolutionTree> trees; // one per request, in request order
    std::vector<std::string> warnings;
};

// Flat resolution holds one version per name, like a traditional R library.
struct InstallPlan {
    std::map<std::string, Version> pins;
    std::vector<std::string> roots;
};

struct Demand {
    std::string requirer; // "(request)" for roots
    std::string range_text;

    bool operator==(const Demand&) const = default;
};

// Not an error: a truthful report that no single version can serve everyone.
struct ConflictReport {
    std::string package;
    std::vector<Demand> demands;
    std::string explanation;
};

struct FlatResolution {
    std::optional<InstallPlan> plan;
    std::optional<ConflictReport> conflict;
    std::vector<std::string> warnings;

    bool ok() const noexcept { return plan.has_value(); }
};

NestedResolution resolve_nested(const ResolutionView& view,
                                std::span<const ResolveRequest> requests,
                                const ResolveOptions& options = {});

FlatResolution resolve_flat(const ResolutionView& view,
                            std::span<const ResolveRequest> requests,
                            const ResolveOptions& options = {});

// Box-drawing rendering, one line per node:
//   └─┬ d3@2.10.3
//     └── sizzle@1.1.0
std::string render_tree(std::span<const ResolutionTree> trees);

nlohmann::ordered_json tree_to_json(const ResolutionTree& tree);
ResolutionTree tree_from_json(const nlohmann::ordered_json& j);

std::string conflict_to_text(const ConflictReport& report);

} // namespace vpm
