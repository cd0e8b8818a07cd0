#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "vpm/range.hpp"
#include "vpm/version.hpp"

namespace vpm {

enum class DepKind { required, optional };

// Where a declaration came from. Enhancement-style declarations stay optional
// and are never auto-resolved, even when optionals are requested.
enum class DepOrigin { depends, imports, suggests, enhances, native };

struct DependencyDecl {
    std::string name;
    RangeDescriptor range;
    DepKind kind = DepKind::required;
    DepOrigin origin = DepOrigin::native;

    bool auto_resolvable() const noexcept { return origin != DepOrigin::enhances; }

    // Equality is structural and ignores the origin, so the same dependency
    // expressed in either manifest format compares equal.
    bool operator==(const DependencyDecl& other) const {
        return name == other.name && kind == other.kind && range == other.range;
    }
};

struct PackageManifest {
    std::string name;
    Version version;
    std::vector<DependencyDecl> dependencies; // declaration order
    std::string description;

    bool operator==(const PackageManifest& other) const {
        return name == other.name && version == other.version &&
               dependencies == other.dependencies;
    }
};

bool is_valid_package_name(std::string_view name);

// Debian-control-style manifest: "Package:", "Version:", dependency fields
// Depends/Imports (required) and Suggests/Enhances (optional).
PackageManifest parse_dcf_manifest(std::string_view text);

// JSON manifest: name, version, dependencies, optionalDependencies, description.
PackageManifest parse_native_manifest(std::string_view text);

// Dispatches on the leading byte: '{' means native, anything else DCF.
PackageManifest parse_manifest(std::string_view text);

std::string to_native_text(const PackageManifest& manifest);

} // namespace vpm
