#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vpm/repository.hpp"
#include "vpm/resolver.hpp"
#include "vpm/store.hpp"

namespace vpm {

// Branch and revision the resolution was taken from, when it was taken from a
// frozen branch.
struct SnapshotBinding {
    std::string branch_id;
    std::uint64_t revision = 0;

    bool operator==(const SnapshotBinding&) const = default;
};

struct RootSpec {
    std::string name;
    std::string range_text;

    bool operator==(const RootSpec&) const = default;
};

// Complete description of a resolved environment. Serializes to canonical
// bytes: equal lockfiles produce identical files.
struct Lockfile {
    std::string tool_version;
    std::string hash_algorithm;
    std::uint64_t created_sequence = 0;
    std::optional<std::string> platform;
    std::optional<SnapshotBinding> snapshot;
    std::vector<RootSpec> roots;
    bool nested = true;
    std::vector<ResolutionTree> trees;            // nested, one per root
    std::map<std::string, std::string> flat_pins; // flat: name -> version text
    std::map<std::string, std::string> hashes;    // "name@version" -> sha256 hex
};

Lockfile make_lock(const NestedResolution& resolution,
                   std::span<const ResolveRequest> requests, const Repository& repo,
                   std::optional<SnapshotBinding> snapshot = {},
                   std::optional<std::string> platform = {});

Lockfile make_lock(const InstallPlan& plan, std::span<const ResolveRequest> requests,
                   const Repository& repo, std::optional<SnapshotBinding> snapshot = {},
                   std::optional<std::string> platform = {});

// Canonical serialization. Refuses lockfiles that do not describe a complete
// resolution (no roots, no resolved versions, or missing digests).
std::string write_lock(const Lockfile& lock);

Lockfile parse_lock(std::string_view text);

// Builds a fresh versioned store at store_root from the archive, verifying
// every payload against the lockfile digest. All-or-nothing: on any failure
// the existing store_root is left untouched.
LibraryStore restore_lock(const Lockfile& lock, const Repository& repo,
                          const std::filesystem::path& store_root);

// Rebuilds a lockfile from a store's resolution records and installed
// packages. A store written by restore_lock reproduces the original lockfile
// byte for byte; for other stores the defaults fill the header fields.
Lockfile lock_from_store(const LibraryStore& store,
                         std::optional<std::uint64_t> default_sequence = {},
                         std::optional<SnapshotBinding> default_snapshot = {});

} // namespace vpm
