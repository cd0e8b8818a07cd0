#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vpm/manifest.hpp"
#include "vpm/version.hpp"
#include "vpm/view.hpp"

namespace vpm {

enum class BranchKind { unstable, testing, stable };

std::string_view to_string(BranchKind kind) noexcept;

struct AuditEntry {
    std::uint64_t seq = 0;
    std::string action; // publish | freeze | promote | backport
    std::string package;
    std::string version;
    std::string previous_version; // backport only
    std::string reason;
};

struct BranchInfo {
    std::string id;
    BranchKind kind = BranchKind::unstable;
    std::uint64_t revision = 0; // number of backports applied
    std::uint64_t created_sequence = 0;
    std::map<std::string, Version> pins; // empty for unstable
    std::vector<AuditEntry> audit;
};

struct ArchiveEntry {
    PackageManifest manifest;
    std::string payload_hash; // sha256 hex
    std::uint64_t sequence = 0;
    std::string manifest_raw;
};

struct RevDeps {
    std::set<std::string> required;
    std::set<std::string> optional;

    bool empty() const noexcept { return required.empty() && optional.empty(); }
};

enum class ImpactStatus { unaffected, newly_selected, broken };

std::string_view to_string(ImpactStatus status) noexcept;

struct ImpactEntry {
    std::string dependent;
    Version dependent_version;
    DepKind kind = DepKind::required;
    std::string range_text;
    ImpactStatus status = ImpactStatus::unaffected;
    std::optional<Version> selected_before;
    std::optional<Version> selected_after;
};

struct ImpactReport {
    std::string package;
    Version candidate;
    Version old_latest;
    std::vector<ImpactEntry> entries;

    std::size_t count(ImpactStatus status) const noexcept {
        std::size_t n = 0;
        for (const ImpactEntry& entry : entries)
            if (entry.status == status)
                ++n;
        return n;
    }
};

// Immutable archive of published package versions plus named branches.
// Everything lives under one directory:
//   archive/<name>/<name>_<version>.pkg       payload bytes
//   archive/<name>/<name>_<version>.manifest  manifest, verbatim
//   branches/<id>.json                        pins, revision, audit
//   index.json                                hashes and sequence numbers
// Files are written to a temporary name and renamed, and mutating calls are
// serialized, so readers always see a committed state.
class Repository {
public:
    explicit Repository(std::filesystem::path root);

    Repository(const Repository&) = delete;
    Repository& operator=(const Repository&) = delete;

    const std::filesystem::path& root() const noexcept { return root_; }

    void publish(const PackageManifest& manifest, std::string_view payload,
                 std::string_view manifest_text = {},
                 const std::optional<std::string>& declared_hash = {});

    // Snapshots the current unstable view into a new testing branch.
    const BranchInfo& freeze(const std::string& id);

    // Copies a testing branch's pins into a new stable branch.
    const BranchInfo& promote(const std::string& testing_id, const std::string& stable_id);

    // Repins one package on a frozen branch; the only way its pins change.
    void backport(const std::string& branch_id, const std::string& package,
                  const Version& version, const std::string& reason);

    std::map<std::string, Version> branch_view(
        const std::string& branch_id, std::optional<std::uint64_t> revision = {}) const;

    RevDeps revdep(const std::string& branch_id, const std::string& package) const;

    ImpactReport update_impact(const std::string& branch_id,
                               const PackageManifest& candidate) const;

    // Resolver-facing view. Unstable exposes every archived version; frozen
    // branches expose exactly their pins, so later publishes cannot leak in.
    std::unique_ptr<ResolutionView> view(const std::string& branch_id,
                                         std::optional<std::uint64_t> revision = {}) const;

    const BranchInfo& branch(const std::string& id) const;
    std::vector<std::string> branch_ids() const;
    std::optional<std::string> newest_stable() const;

    const ArchiveEntry* find_entry(const std::string& name, const Version& version) const;
    std::vector<Version> versions(const std::string& name) const;
    std::vector<std::string> package_names() const;

    // Payload bytes, verified against the archived hash.
    std::string payload(const std::string& name, const Version& version) const;

    std::uint64_t next_sequence() const noexcept { return next_sequence_; }

private:
    void load();
    void persist_index() const;
    void persist_branch(const BranchInfo& branch) const;
    std::filesystem::path payload_path(const std::string& name, const std::string& vtext) const;
    std::filesystem::path manifest_path(const std::string& name, const std::string& vtext) const;
    BranchInfo& branch_mut(const std::string& id);
    std::map<std::string, Version> pins_at(const BranchInfo& branch,
                                           std::uint64_t revision) const;
    std::map<std::string, Version> unstable_view() const;

    std::filesystem::path root_;
    std::map<std::string, std::map<Version, ArchiveEntry>> entries_;
    std::map<std::string, BranchInfo> branches_;
    std::uint64_t next_sequence_ = 1;
    mutable std::mutex write_mutex_;
};

} // namespace vpm
