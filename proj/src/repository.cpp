#include "vpm/repository.hpp"

#include "vpm/errors.hpp"
#include "vpm/fsio.hpp"
#include "vpm/hash.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>

namespace vpm {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string_view to_string(BranchKind kind) noexcept {
    switch (kind) {
    case BranchKind::unstable: return "unstable";
    case BranchKind::testing: return "testing";
    case BranchKind::stable: return "stable";
    }
    return "?";
}

std::string_view to_string(ImpactStatus status) noexcept {
    switch (status) {
    case ImpactStatus::unaffected: return "unaffected";
    case ImpactStatus::newly_selected: return "newly-selected";
    case ImpactStatus::broken: return "broken";
    }
    return "?";
}

namespace {

BranchKind kind_from_string(const std::string& s, const fs::path& origin) {
    if (s == "unstable")
        return BranchKind::unstable;
    if (s == "testing")
        return BranchKind::testing;
    if (s == "stable")
        return BranchKind::stable;
    fail(Errc::io_error, "repository corrupt: bad branch kind in '" + origin.string() + "'");
}

bool valid_branch_id(std::string_view id) {
    if (id.empty())
        return false;
    char first = id.front();
    if (!std::isalnum(static_cast<unsigned char>(first)))
        return false;
    for (char c : id) {
        bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' ||
                  c == '-';
        if (!ok)
            return false;
    }
    return true;
}

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

class ArchiveView final : public ResolutionView {
public:
    explicit ArchiveView(const Repository* repo) : repo_(repo) {}

    std::vector<Version> available(const std::string& name) const override {
        return repo_->versions(name);
    }
    const PackageManifest* find_manifest(const std::string& name,
                                         const Version& version) const override {
        const ArchiveEntry* entry = repo_->find_entry(name, version);
        return entry ? &entry->manifest : nullptr;
    }

private:
    const Repository* repo_;
};

class PinnedView final : public ResolutionView {
public:
    PinnedView(const Repository* repo, std::map<std::string, Version> pins)
        : repo_(repo), pins_(std::move(pins)) {}

    std::vector<Version> available(const std::string& name) const override {
        auto it = pins_.find(name);
        if (it == pins_.end())
            return {};
        return {it->second};
    }
    const PackageManifest* find_manifest(const std::string& name,
                                         const Version& version) const override {
        const ArchiveEntry* entry = repo_->find_entry(name, version);
        return entry ? &entry->manifest : nullptr;
    }

private:
    const Repository* repo_;
    std::map<std::string, Version> pins_;
};

ojson audit_to_json(const std::vector<AuditEntry>& audit) {
    ojson out = ojson::array();
    for (const AuditEntry& entry : audit) {
        ojson j = ojson::object();
        j["seq"] = entry.seq;
        j["action"] = entry.action;
        j["package"] = entry.package;
        j["version"] = entry.version;
        j["previous_version"] = entry.previous_version;
        j["reason"] = entry.reason;
        out.push_back(std::move(j));
    }
    return out;
}

std::vector<AuditEntry> audit_from_json(const ojson& j, const fs::path& origin) {
    std::vector<AuditEntry> out;
    if (!j.is_array())
        fail(Errc::io_error, "repository corrupt: bad audit in '" + origin.string() + "'");
    for (const auto& item : j) {
        AuditEntry entry;
        entry.seq = item.at("seq").get<std::uint64_t>();
        entry.action = item.at("action").get<std::string>();
        entry.package = item.at("package").get<std::string>();
        entry.version = item.at("version").get<std::string>();
        entry.previous_version = item.at("previous_version").get<std::string>();
        entry.reason = item.at("reason").get<std::string>();
        out.push_back(std::move(entry));
    }
    return out;
}

} // namespace

Repository::Repository(fs::path root) : root_(std::move(root)) { load(); }

fs::path Repository::payload_path(const std::string& name, const std::string& vtext) const {
    return root_ / "archive" / name / (name + "_" + vtext + ".pkg");
}

fs::path Repository::manifest_path(const std::string& name, const std::string& vtext) const {
    return root_ / "archive" / name / (name + "_" + vtext + ".manifest");
}

void Repository::load() {
    fsio::ensure_dir(root_ / "archive");
    fsio::ensure_dir(root_ / "branches");

    auto index_text = fsio::read_file_if_exists(root_ / "index.json");
    if (!index_text) {
        BranchInfo unstable;
        unstable.id = "unstable";
        unstable.kind = BranchKind::unstable;
        branches_.emplace("unstable", std::move(unstable));
        persist_index();
        persist_branch(branches_.at("unstable"));
        return;
    }

    ojson index;
    try {
        index = ojson::parse(*index_text);
        next_sequence_ = index.at("next_sequence").get<std::uint64_t>();
        for (const auto& item : index.at("entries")) {
            std::string name = item.at("name").get<std::string>();
            std::string vtext = item.at("version").get<std::string>();
            ArchiveEntry entry;
            entry.payload_hash = item.at("hash").get<std::string>();
            entry.sequence = item.at("sequence").get<std::uint64_t>();
            entry.manifest_raw = fsio::read_file(manifest_path(name, vtext));
            entry.manifest = parse_manifest(entry.manifest_raw);
            Version version = Version::parse(vtext);
            entries_[name].emplace(std::move(version), std::move(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::io_error, "repository corrupt: " + std::string(e.what()));
    }

    std::vector<fs::path> branch_files;
    for (const auto& dir_entry : fs::directory_iterator(root_ / "branches"))
        if (dir_entry.path().extension() == ".json")
            branch_files.push_back(dir_entry.path());
    std::sort(branch_files.begin(), branch_files.end());

    for (const fs::path& file : branch_files) {
        ojson j;
        try {
            j = ojson::parse(fsio::read_file(file));
            BranchInfo branch;
            branch.id = j.at("id").get<std::string>();
            branch.kind = kind_from_string(j.at("kind").get<std::string>(), file);
            branch.revision = j.at("revision").get<std::uint64_t>();
            branch.created_sequence = j.at("created_sequence").get<std::uint64_t>();
            if (j.contains("pins"))
                for (const auto& [name, vtext] : j.at("pins").items())
                    branch.pins.emplace(name, Version::parse(vtext.get<std::string>()));
            branch.audit = audit_from_json(j.at("audit"), file);
            branches_.emplace(branch.id, std::move(branch));
        } catch (const nlohmann::json::exception& e) {
            fail(Errc::io_error, "repository corrupt: " + std::string(e.what()));
        }
    }
    if (!branches_.count("unstable"))
        fail(Errc::io_error, "repository corrupt: missing unstable branch record");
}

void Repository::persist_index() const {
    ojson entries = ojson::array();
    struct Row {
        std::uint64_t seq;
        std::string name;
        std::string vtext;
        const ArchiveEntry* entry;
    };
    std::vector<Row> rows;
    for (const auto& [name, by_version] : entries_)
        for (const auto& [version, entry] : by_version)
            rows.push_back({entry.sequence, name, entry.manifest.version.text(), &entry});
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.seq < b.seq; });
    for (const Row& row : rows) {
        ojson j = ojson::object();
        j["name"] = row.name;
        j["version"] = row.vtext;
        j["hash"] = row.entry->payload_hash;
        j["sequence"] = row.seq;
        entries.push_back(std::move(j));
    }
    ojson index = ojson::object();
    index["format"] = 1;
    index["next_sequence"] = next_sequence_;
    index["entries"] = std::move(entries);
    fsio::write_file_atomic(root_ / "index.json", index.dump(2) + "\n");
}

void Repository::persist_branch(const BranchInfo& branch) const {
    ojson j = ojson::object();
    j["id"] = branch.id;
    j["kind"] = std::string(to_string(branch.kind));
    j["revision"] = branch.revision;
    j["created_sequence"] = branch.created_sequence;
    if (branch.kind != BranchKind::unstable) {
        ojson pins = ojson::object();
        for (const auto& [name, version] : branch.pins)
            pins[name] = version.text();
        j["pins"] = std::move(pins);
    }
    j["audit"] = audit_to_json(branch.audit);
    fsio::write_file_atomic(root_ / "branches" / (branch.id + ".json"), j.dump(2) + "\n");
}

BranchInfo& Repository::branch_mut(const std::string& id) {
    auto it = branches_.find(id);
    if (it == branches_.end())
        fail(Errc::unknown_branch, "unknown branch '" + id + "'");
    return it->second;
}

const BranchInfo& Repository::branch(const std::string& id) const {
    auto it = branches_.find(id);
    if (it == branches_.end())
        fail(Errc::unknown_branch, "unknown branch '" + id + "'");
    return it->second;
}

std::vector<std::string> Repository::branch_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, branch] : branches_)
        out.push_back(id);
    return out;
}

std::optional<std::string> Repository::newest_stable() const {
    const BranchInfo* best = nullptr;
    for (const auto& [id, branch] : branches_) {
        if (branch.kind != BranchKind::stable)
            continue;
        if (!best || branch.created_sequence > best->created_sequence)
            best = &branch;
    }
    if (!best)
        return std::nullopt;
    return best->id;
}

void Repository::publish(const PackageManifest& manifest, std::string_view payload,
                         std::string_view manifest_text,
                         const std::optional<std::string>& declared_hash) {
    std::scoped_lock guard(write_mutex_);
    fsio::FileLock lock(root_ / ".lock");

    const std::string& name = manifest.name;
    const std::string vtext = manifest.version.text();
    if (!is_valid_package_name(name))
        fail(Errc::bad_package_name, "invalid package name '" + name + "'");
    if (find_entry(name, manifest.version))
        fail(Errc::duplicate_version, name + " " + vtext + " is already archived");

    std::string hash = sha256_hex(payload);
    if (declared_hash && *declared_hash != hash)
        fail(Errc::payload_hash_mismatch,
             "declared hash does not match payload for " + name + " " + vtext);

    ArchiveEntry entry;
    entry.manifest = manifest;
    entry.payload_hash = std::move(hash);
    entry.sequence = next_sequence_++;
    entry.manifest_raw =
        manifest_text.empty() ? to_native_text(manifest) : std::string(manifest_text);

    fsio::write_file_atomic(payload_path(name, vtext), payload);
    fsio::write_file_atomic(manifest_path(name, vtext), entry.manifest_raw);
    entries_[name].emplace(manifest.version, std::move(entry));
    persist_index();

    BranchInfo& unstable = branch_mut("unstable");
    AuditEntry audit;
    audit.seq = unstable.audit.size() + 1;
    audit.action = "publish";
    audit.package = name;
    audit.version = vtext;
    unstable.audit.push_back(std::move(audit));
    persist_branch(unstable);
}

const BranchInfo& Repository::freeze(const std::string& id) {
    std::scoped_lock guard(write_mutex_);
    fsio::FileLock lock(root_ / ".lock");

    if (!valid_branch_id(id))
        fail(Errc::syntax_error, "invalid branch id '" + id + "'");
    if (branches_.count(id))
        fail(Errc::branch_id_taken, "branch '" + id + "' already exists");

    BranchInfo branch;
    branch.id = id;
    branch.kind = BranchKind::testing;
    branch.created_sequence = next_sequence_++;
    branch.pins = unstable_view();
    auto it = branches_.emplace(id, std::move(branch)).first;
    persist_index();
    persist_branch(it->second);

    BranchInfo& unstable = branch_mut("unstable");
    AuditEntry audit;
    audit.seq = unstable.audit.size() + 1;
    audit.action = "freeze";
    audit.reason = "frozen into '" + id + "'";
    unstable.audit.push_back(std::move(audit));
    persist_branch(unstable);
    return it->second;
}

const BranchInfo& Repository::promote(const std::string& testing_id,
                                      const std::string& stable_id) {
    std::scoped_lock guard(write_mutex_);
    fsio::FileLock lock(root_ / ".lock");

    const BranchInfo& testing = branch(testing_id);
    if (testing.kind != BranchKind::testing)
        fail(Errc::unknown_branch, "'" + testing_id + "' is not a testing branch");
    if (!valid_branch_id(stable_id))
        fail(Errc::syntax_error, "invalid branch id '" + stable_id + "'");
    if (branches_.count(stable_id))
        fail(Errc::branch_id_taken, "branch '" + stable_id + "' already exists");

    BranchInfo branch;
    branch.id = stable_id;
    branch.kind = BranchKind::stable;
    branch.created_sequence = next_sequence_++;
    branch.pins = testing.pins;
    auto it = branches_.emplace(stable_id, std::move(branch)).first;
    persist_index();
    persist_branch(it->second);

    BranchInfo& source = branch_mut(testing_id);
    AuditEntry audit;
    audit.seq = source.audit.size() + 1;
    audit.action = "promote";
    audit.reason = "promoted into '" + stable_id + "'";
    source.audit.push_back(std::move(audit));
    persist_branch(source);
    return it->second;
}

void Repository::backport(const std::string& branch_id, const std::string& package,
                          const Version& version, const std::string& reason) {
    std::scoped_lock guard(write_mutex_);
    fsio::FileLock lock(root_ / ".lock");

    BranchInfo& branch = branch_mut(branch_id);
    if (branch.kind == BranchKind::unstable)
        fail(Errc::not_pinned, "the unstable branch has no pins to backport onto");
    if (blank(reason))
        fail(Errc::empty_reason, "backport requires a non-empty reason");
    const ArchiveEntry* entry = find_entry(package, version);
    if (!entry)
        fail(Errc::unknown_version,
             package + " " + version.text() + " is not in the archive");
    auto it = branch.pins.find(package);
    if (it == branch.pins.end())
        fail(Errc::not_pinned, "'" + package + "' is not pinned on '" + branch_id + "'");

    AuditEntry audit;
    audit.seq = branch.audit.size() + 1;
    audit.action = "backport";
    audit.package = package;
    audit.version = entry->manifest.version.text();
    audit.previous_version = it->second.text();
    audit.reason = reason;

    it->second = entry->manifest.version;
    branch.revision += 1;
    branch.audit.push_back(std::move(audit));
    persist_branch(branch);
}

std::map<std::string, Version> Repository::unstable_view() const {
    std::map<std::string, Version> out;
    for (const auto& [name, by_version] : entries_)
        if (!by_version.empty())
            out.emplace(name, by_version.rbegin()->first);
    return out;
}

std::map<std::string, Version> Repository::pins_at(const BranchInfo& branch,
                                                   std::uint64_t revision) const {
    if (revision > branch.revision)
        fail(Errc::unknown_revision,
             "branch '" + branch.id + "' has no revision " + std::to_string(revision));
    std::map<std::string, Version> pins = branch.pins;
    std::uint64_t current = branch.revision;
    for (auto it = branch.audit.rbegin(); it != branch.audit.rend() && current > revision;
         ++it) {
        if (it->action != "backport")
            continue;
        pins[it->package] = Version::parse(it->previous_version);
        --current;
    }
    return pins;
}

std::map<std::string, Version> Repository::branch_view(
    const std::string& branch_id, std::optional<std::uint64_t> revision) const {
    const BranchInfo& info = branch(branch_id);
    if (info.kind == BranchKind::unstable) {
        if (revision && *revision != 0)
            fail(Errc::unknown_revision, "the unstable branch has no stored revisions");
        return unstable_view();
    }
    return pins_at(info, revision.value_or(info.revision));
}

RevDeps Repository::revdep(const std::string& branch_id, const std::string& package) const {
    RevDeps out;
    for (const auto& [name, version] : branch_view(branch_id)) {
        const ArchiveEntry* entry = find_entry(name, version);
        if (!entry)
            continue;
        for (const DependencyDecl& dep : entry->manifest.dependencies) {
            if (dep.name != package)
                continue;
            (dep.kind == DepKind::required ? out.required : out.optional).insert(name);
        }
    }
    return out;
}

ImpactReport Repository::update_impact(const std::string& branch_id,
                                       const PackageManifest& candidate) const {
    auto view = branch_view(branch_id);
    auto it = view.find(candidate.name);
    if (it == view.end())
        fail(Errc::unknown_package,
             "'" + candidate.name + "' is not present on branch '" + branch_id + "'");

    ImpactReport report;
    report.package = candidate.name;
    report.candidate = candidate.version;
    report.old_latest = it->second;
    const Version& after_version =
        candidate.version < report.old_latest ? report.old_latest : candidate.version;

    for (const auto& [name, version] : view) {
        const ArchiveEntry* entry = find_entry(name, version);
        if (!entry)
            continue;
        for (const DependencyDecl& dep : entry->manifest.dependencies) {
            if (dep.name != candidate.name)
                continue;
            ImpactEntry impact;
            impact.dependent = name;
            impact.dependent_version = version;
            impact.kind = dep.kind;
            impact.range_text = dep.range.text();
            if (satisfies(report.old_latest, dep.range))
                impact.selected_before = report.old_latest;
            if (satisfies(after_version, dep.range))
                impact.selected_after = after_version;
            if (impact.selected_after && *impact.selected_after == candidate.version &&
                (!impact.selected_before ||
                 !(*impact.selected_before == *impact.selected_after)))
                impact.status = ImpactStatus::newly_selected;
            else if (impact.selected_before && !impact.selected_after)
                impact.status = ImpactStatus::broken;
            else
                impact.status = ImpactStatus::unaffected;
            report.entries.push_back(std::move(impact));
        }
    }
    return report;
}

std::unique_ptr<ResolutionView> Repository::view(const std::string& branch_id,
                                                 std::optional<std::uint64_t> revision) const {
    const BranchInfo& info = branch(branch_id);
    if (info.kind == BranchKind::unstable) {
        if (revision && *revision != 0)
            fail(Errc::unknown_revision, "the unstable branch has no stored revisions");
        return std::make_unique<ArchiveView>(this);
    }
    return std::make_unique<PinnedView>(this, pins_at(info, revision.value_or(info.revision)));
}

const ArchiveEntry* Repository::find_entry(const std::string& name,
                                           const Version& version) const {
    auto it = entries_.find(name);
    if (it == entries_.end())
        return nullptr;
    auto vit = it->second.find(version);
    return vit == it->second.end() ? nullptr : &vit->second;
}

std::vector<Version> Repository::versions(const std::string& name) const {
    std::vector<Version> out;
    auto it = entries_.find(name);
    if (it == entries_.end())
        return out;
    for (const auto& [version, entry] : it->second)
        out.push_back(version);
    return out;
}

std::vector<std::string> Repository::package_names() const {
    std::vector<std::string> out;
    for (const auto& [name, by_version] : entries_)
        out.push_back(name);
    return out;
}

std::string Repository::payload(const std::string& name, const Version& version) const {
    const ArchiveEntry* entry = find_entry(name, version);
    if (!entry)
        fail(Errc::unknown_version,
             name + " " + version.text() + " is not in the archive");
    const std::string vtext = entry->manifest.version.text();
    auto bytes = fsio::read_file_if_exists(payload_path(name, vtext));
    if (!bytes)
        fail(Errc::missing_payload,
             "payload for " + name + " " + vtext + " is missing from the archive");
    if (sha256_hex(*bytes) != entry->payload_hash)
        fail(Errc::payload_hash_mismatch,
             "archived payload for " + name + " " + vtext + " does not match its hash");
    return std::move(*bytes);
}

} // namespace vpm
