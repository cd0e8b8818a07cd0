#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "vpm/repository.hpp"
#include "vpm/resolver.hpp"
#include "vpm/version.hpp"

namespace vpm {

// versioned: one directory per (name, version), side-by-side.
// legacy_flat: one directory per name, later installs overwrite.
enum class StoreMode { versioned, legacy_flat };

std::string_view to_string(StoreMode mode) noexcept;

struct InstalledPackage {
    std::string name;
    Version version;
    std::string payload_hash;
    bool unstable = false;
    std::string manifest_raw;
};

// Per-root record of how an environment was resolved, kept under .trees/.
struct TreeRecord {
    std::string root;
    std::string version_text;
    std::string range_text;
    bool nested = true;
    std::optional<ResolutionTree> tree;            // nested
    std::map<std::string, std::string> flat_pins;  // flat: name -> version text
};

// On-disk library of installed packages.
//   <root>/<name>_<version>/payload.bin + .meta   (versioned)
//   <root>/<name>/payload.bin + .meta             (legacy_flat)
//   <root>/.trees/<root>@<version>.json           resolution records
//   <root>/.events.log                            append-only event lines
class LibraryStore {
public:
    static LibraryStore create(const std::filesystem::path& root, StoreMode mode);
    static LibraryStore open(const std::filesystem::path& root);
    static bool exists(const std::filesystem::path& root);

    StoreMode mode() const noexcept { return mode_; }
    const std::filesystem::path& root() const noexcept { return root_; }

    std::vector<Version> installed_versions(const std::string& name) const;
    std::optional<InstalledPackage> find_installed(const std::string& name,
                                                   const Version& version) const;
    std::vector<InstalledPackage> installed() const;

    void install_tree(const ResolutionTree& tree, const std::string& range_text,
                      const Repository& repo, bool unstable_flag = false);
    void install_plan(const InstallPlan& plan, std::span<const ResolveRequest> requests,
                      const Repository& repo, bool unstable_flag = false);

    // Low-level single-package install (versioned stores only). Returns true
    // when a new directory appeared.
    bool install_one(const std::string& name, const Version& version, const Repository& repo,
                     bool unstable_flag = false);

    std::vector<TreeRecord> tree_records() const; // sorted by record file name
    void write_record(const TreeRecord& record);
    std::vector<std::string> events() const;

    // Provenance written by a lockfile restore so the lock can be rebuilt
    // byte-for-byte from the store alone.
    void write_provenance(const nlohmann::ordered_json& snapshot);
    std::optional<nlohmann::ordered_json> provenance() const;

private:
    LibraryStore(std::filesystem::path root, StoreMode mode)
        : root_(std::move(root)), mode_(mode) {}

    // Returns true when a new directory appeared.
    bool place_versioned(const std::string& name, const Version& version,
                         const Repository& repo, bool unstable_flag,
                         std::vector<std::string>& event_lines);
    std::filesystem::path dir_for(const std::string& name, const std::string& vtext) const;

    std::filesystem::path root_;
    StoreMode mode_;
};

} // namespace vpm
