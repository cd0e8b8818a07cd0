#include "vpm/lockfile.hpp"

#include "vpm/errors.hpp"
#include "vpm/fsio.hpp"
#include "vpm/hash.hpp"
#include "vpm/manifest.hpp"
#include "vpm/tool_info.hpp"

#include <algorithm>
#include <set>

namespace vpm {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

void collect_tree(const ResolutionTree& tree,
                  std::vector<std::pair<std::string, std::string>>& order,
                  std::set<std::pair<std::string, std::string>>& seen) {
    if (seen.insert({tree.name, tree.version.text()}).second)
        order.emplace_back(tree.name, tree.version.text());
    for (const ResolutionTree& child : tree.children)
        collect_tree(child, order, seen);
}

// Every (name, version) the lockfile resolves, deduplicated, in a stable order.
std::vector<std::pair<std::string, std::string>> entries_of(const Lockfile& lock) {
    std::vector<std::pair<std::string, std::string>> order;
    if (lock.nested) {
        std::set<std::pair<std::string, std::string>> seen;
        for (const ResolutionTree& tree : lock.trees)
            collect_tree(tree, order, seen);
    } else {
        for (const auto& [name, vtext] : lock.flat_pins)
            order.emplace_back(name, vtext);
    }
    return order;
}

void fill_header(Lockfile& lock, const Repository& repo,
                 std::optional<SnapshotBinding> snapshot,
                 std::optional<std::string> platform) {
    lock.tool_version = std::string(tool_version);
    lock.hash_algorithm = std::string(vpm::hash_algorithm);
    lock.created_sequence = repo.next_sequence();
    lock.platform = std::move(platform);
    lock.snapshot = std::move(snapshot);
}

void fill_hashes(Lockfile& lock, const Repository& repo) {
    for (const auto& [name, vtext] : entries_of(lock)) {
        const ArchiveEntry* entry = repo.find_entry(name, Version::parse(vtext));
        if (!entry)
            fail(Errc::unknown_version, name + " " + vtext + " is not in the archive");
        lock.hashes.emplace(name + "@" + vtext, entry->payload_hash);
    }
}

void check_complete(const Lockfile& lock) {
    if (lock.roots.empty())
        fail(Errc::incomplete_resolution, "lockfile has no roots");
    if (lock.nested) {
        if (lock.trees.size() != lock.roots.size())
            fail(Errc::incomplete_resolution, "lockfile root and tree counts differ");
        for (std::size_t i = 0; i < lock.roots.size(); ++i)
            if (lock.roots[i].name != lock.trees[i].name)
                fail(Errc::incomplete_resolution,
                     "lockfile tree order does not match its roots");
    } else {
        if (lock.flat_pins.empty())
            fail(Errc::incomplete_resolution, "lockfile has no resolved pins");
        for (const RootSpec& root : lock.roots)
            if (!lock.flat_pins.count(root.name))
                fail(Errc::incomplete_resolution,
                     "root '" + root.name + "' has no resolved pin");
    }
    auto order = entries_of(lock);
    std::set<std::string> keys;
    for (const auto& [name, vtext] : order) {
        std::string key = name + "@" + vtext;
        if (!lock.hashes.count(key))
            fail(Errc::incomplete_resolution, "missing payload hash for " + key);
        keys.insert(std::move(key));
    }
    for (const auto& [key, hex] : lock.hashes)
        if (!keys.count(key))
            fail(Errc::incomplete_resolution,
                 "hash entry '" + key + "' matches no resolved package");
}

bool is_hex_digest(const std::string& hex) {
    if (hex.size() != 64)
        return false;
    return std::all_of(hex.begin(), hex.end(), [](char c) {
        return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    });
}

Version parse_locked_version(const std::string& text) {
    try {
        return Version::parse(text);
    } catch (const Error& e) {
        fail(Errc::bad_lockfile, "bad version '" + text + "': " + e.what());
    }
}

} // namespace

Lockfile make_lock(const NestedResolution& resolution,
                   std::span<const ResolveRequest> requests, const Repository& repo,
                   std::optional<SnapshotBinding> snapshot,
                   std::optional<std::string> platform) {
    Lockfile lock;
    fill_header(lock, repo, std::move(snapshot), std::move(platform));
    lock.nested = true;
    lock.trees = resolution.trees;
    for (const ResolveRequest& request : requests)
        lock.roots.push_back({request.name, request.range.text()});
    fill_hashes(lock, repo);
    return lock;
}

Lockfile make_lock(const InstallPlan& plan, std::span<const ResolveRequest> requests,
                   const Repository& repo, std::optional<SnapshotBinding> snapshot,
                   std::optional<std::string> platform) {
    Lockfile lock;
    fill_header(lock, repo, std::move(snapshot), std::move(platform));
    lock.nested = false;
    for (const auto& [name, version] : plan.pins)
        lock.flat_pins.emplace(name, version.text());
    for (const ResolveRequest& request : requests)
        lock.roots.push_back({request.name, request.range.text()});
    fill_hashes(lock, repo);
    return lock;
}

std::string write_lock(const Lockfile& lock) {
    check_complete(lock);

    ojson j = ojson::object();
    j["tool_version"] = lock.tool_version;
    j["hash_algorithm"] = lock.hash_algorithm;
    j["created_sequence"] = lock.created_sequence;
    j["platform"] = lock.platform ? ojson(*lock.platform) : ojson(nullptr);
    if (lock.snapshot) {
        ojson s = ojson::object();
        s["branch"] = lock.snapshot->branch_id;
        s["revision"] = lock.snapshot->revision;
        j["snapshot"] = std::move(s);
    } else {
        j["snapshot"] = nullptr;
    }
    ojson roots = ojson::array();
    for (const RootSpec& root : lock.roots) {
        ojson r = ojson::object();
        r["name"] = root.name;
        r["range"] = root.range_text;
        roots.push_back(std::move(r));
    }
    j["roots"] = std::move(roots);

    ojson resolved = ojson::object();
    if (lock.nested) {
        resolved["mode"] = "nested";
        ojson trees = ojson::array();
        for (const ResolutionTree& tree : lock.trees)
            trees.push_back(tree_to_json(tree));
        resolved["trees"] = std::move(trees);
    } else {
        resolved["mode"] = "flat";
        ojson pins = ojson::object();
        for (const auto& [name, vtext] : lock.flat_pins)
            pins[name] = vtext;
        resolved["pins"] = std::move(pins);
    }
    j["resolved"] = std::move(resolved);

    ojson hashes = ojson::object();
    for (const auto& [key, hex] : lock.hashes)
        hashes[key] = hex;
    j["hashes"] = std::move(hashes);

    return j.dump(2) + "\n";
}

Lockfile parse_lock(std::string_view text) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::bad_lockfile, "not valid JSON: " + std::string(e.what()));
    }

    try {
        Lockfile lock;
        lock.tool_version = j.at("tool_version").get<std::string>();
        lock.hash_algorithm = j.at("hash_algorithm").get<std::string>();
        lock.created_sequence = j.at("created_sequence").get<std::uint64_t>();
        if (!j.at("platform").is_null())
            lock.platform = j.at("platform").get<std::string>();
        if (!j.at("snapshot").is_null()) {
            const ojson& s = j.at("snapshot");
            lock.snapshot = SnapshotBinding{s.at("branch").get<std::string>(),
                                            s.at("revision").get<std::uint64_t>()};
        }
        for (const ojson& row : j.at("roots")) {
            RootSpec root{row.at("name").get<std::string>(),
                          row.at("range").get<std::string>()};
            if (!is_valid_package_name(root.name))
                fail(Errc::bad_lockfile, "bad root name '" + root.name + "'");
            lock.roots.push_back(std::move(root));
        }
        const ojson& resolved = j.at("resolved");
        std::string mode = resolved.at("mode").get<std::string>();
        if (mode == "nested") {
            lock.nested = true;
            for (const ojson& tree : resolved.at("trees"))
                lock.trees.push_back(tree_from_json(tree));
        } else if (mode == "flat") {
            lock.nested = false;
            for (const auto& [name, vtext] : resolved.at("pins").items()) {
                if (!is_valid_package_name(name))
                    fail(Errc::bad_lockfile, "bad package name '" + name + "'");
                parse_locked_version(vtext.get<std::string>());
                lock.flat_pins.emplace(name, vtext.get<std::string>());
            }
        } else {
            fail(Errc::bad_lockfile, "unknown resolution mode '" + mode + "'");
        }
        for (const auto& [key, hex] : j.at("hashes").items()) {
            if (!is_hex_digest(hex.get<std::string>()))
                fail(Errc::bad_lockfile, "malformed digest for '" + key + "'");
            lock.hashes.emplace(key, hex.get<std::string>());
        }

        try {
            check_complete(lock);
        } catch (const Error& e) {
            fail(Errc::bad_lockfile, e.what());
        }
        return lock;
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::bad_lockfile, "missing or mistyped field: " + std::string(e.what()));
    } catch (const Error& e) {
        if (e.code() == Errc::bad_lockfile)
            throw;
        fail(Errc::bad_lockfile, e.what());
    }
}

LibraryStore restore_lock(const Lockfile& lock, const Repository& repo,
                          const fs::path& store_root) {
    check_complete(lock);

    fsio::ensure_dir(store_root.parent_path());
    fsio::FileLock guard(fs::path(store_root.string() + ".lock"));

    fs::path staging(store_root.string() + ".staging-" + fsio::unique_suffix());
    std::error_code ec;
    fs::remove_all(staging, ec);

    try {
        LibraryStore store = LibraryStore::create(staging, StoreMode::versioned);

        for (const auto& [name, vtext] : entries_of(lock)) {
            Version version = parse_locked_version(vtext);
            const ArchiveEntry* entry = repo.find_entry(name, version);
            if (!entry)
                fail(Errc::unknown_version, name + " " + vtext + " is not in the archive");
            const std::string& want = lock.hashes.at(name + "@" + vtext);
            if (entry->payload_hash != want)
                fail(Errc::payload_hash_mismatch,
                     "archive content for " + name + " " + vtext +
                         " does not match the lockfile digest");
            store.install_one(name, version, repo);
        }

        if (lock.nested) {
            for (std::size_t i = 0; i < lock.roots.size(); ++i) {
                TreeRecord record;
                record.root = lock.roots[i].name;
                record.version_text = lock.trees[i].version.text();
                record.range_text = lock.roots[i].range_text;
                record.nested = true;
                record.tree = lock.trees[i];
                store.write_record(record);
            }
        } else {
            for (const RootSpec& root : lock.roots) {
                TreeRecord record;
                record.root = root.name;
                record.version_text = lock.flat_pins.at(root.name);
                record.range_text = root.range_text;
                record.nested = false;
                record.flat_pins = lock.flat_pins;
                store.write_record(record);
            }
        }

        ojson prov = ojson::object();
        prov["tool_version"] = lock.tool_version;
        prov["hash_algorithm"] = lock.hash_algorithm;
        prov["created_sequence"] = lock.created_sequence;
        prov["platform"] = lock.platform ? ojson(*lock.platform) : ojson(nullptr);
        if (lock.snapshot) {
            ojson s = ojson::object();
            s["branch"] = lock.snapshot->branch_id;
            s["revision"] = lock.snapshot->revision;
            prov["snapshot"] = std::move(s);
        } else {
            prov["snapshot"] = nullptr;
        }
        prov["mode"] = lock.nested ? "nested" : "flat";
        ojson roots = ojson::array();
        for (const RootSpec& root : lock.roots) {
            ojson r = ojson::object();
            r["name"] = root.name;
            r["range"] = root.range_text;
            r["version"] = lock.nested
                               ? lock.trees[&root - lock.roots.data()].version.text()
                               : lock.flat_pins.at(root.name);
            roots.push_back(std::move(r));
        }
        prov["roots"] = std::move(roots);
        store.write_provenance(prov);

        if (fs::exists(store_root)) {
            fs::path old(store_root.string() + ".old-" + fsio::unique_suffix());
            fs::rename(store_root, old);
            fs::rename(staging, store_root);
            fs::remove_all(old, ec);
        } else {
            fs::rename(staging, store_root);
        }
        return LibraryStore::open(store_root);
    } catch (...) {
        fs::remove_all(staging, ec);
        throw;
    }
}

Lockfile lock_from_store(const LibraryStore& store,
                         std::optional<std::uint64_t> default_sequence,
                         std::optional<SnapshotBinding> default_snapshot) {
    std::vector<TreeRecord> records = store.tree_records();
    Lockfile lock;

    auto find_record = [&](const std::string& name,
                           const std::string& vtext) -> const TreeRecord* {
        for (const TreeRecord& record : records)
            if (record.root == name && record.version_text == vtext)
                return &record;
        return nullptr;
    };

    if (auto prov = store.provenance()) {
        try {
            const ojson& p = *prov;
            lock.tool_version = p.at("tool_version").get<std::string>();
            lock.hash_algorithm = p.at("hash_algorithm").get<std::string>();
            lock.created_sequence = p.at("created_sequence").get<std::uint64_t>();
            if (!p.at("platform").is_null())
                lock.platform = p.at("platform").get<std::string>();
            if (!p.at("snapshot").is_null()) {
                const ojson& s = p.at("snapshot");
                lock.snapshot = SnapshotBinding{s.at("branch").get<std::string>(),
                                                s.at("revision").get<std::uint64_t>()};
            }
            lock.nested = p.at("mode").get<std::string>() == "nested";
            for (const ojson& row : p.at("roots")) {
                std::string name = row.at("name").get<std::string>();
                std::string vtext = row.at("version").get<std::string>();
                lock.roots.push_back({name, row.at("range").get<std::string>()});
                const TreeRecord* record = find_record(name, vtext);
                if (!record || record->nested != lock.nested)
                    fail(Errc::store_corrupt,
                         "missing resolution record for " + name + "@" + vtext);
                if (lock.nested)
                    lock.trees.push_back(*record->tree);
                else
                    for (const auto& [pin, pin_vtext] : record->flat_pins)
                        lock.flat_pins.emplace(pin, pin_vtext);
            }
        } catch (const nlohmann::json::exception& e) {
            fail(Errc::store_corrupt, "bad provenance record: " + std::string(e.what()));
        }
    } else {
        if (records.empty())
            fail(Errc::incomplete_resolution, "store has no resolution records");
        lock.tool_version = std::string(tool_version);
        lock.hash_algorithm = std::string(vpm::hash_algorithm);
        lock.created_sequence = default_sequence.value_or(0);
        lock.snapshot = std::move(default_snapshot);
        lock.nested = records.front().nested;
        for (const TreeRecord& record : records) {
            if (record.nested != lock.nested)
                fail(Errc::incomplete_resolution,
                     "store mixes nested and flat resolution records");
            lock.roots.push_back({record.root, record.range_text});
            if (lock.nested) {
                lock.trees.push_back(*record.tree);
            } else {
                for (const auto& [pin, vtext] : record.flat_pins) {
                    auto [it, inserted] = lock.flat_pins.emplace(pin, vtext);
                    if (!inserted && it->second != vtext)
                        fail(Errc::incomplete_resolution,
                             "store records disagree on '" + pin + "'");
                }
            }
        }
    }

    for (const auto& [name, vtext] : entries_of(lock)) {
        auto installed = store.find_installed(name, parse_locked_version(vtext));
        if (!installed)
            fail(Errc::store_corrupt, "resolution record references '" + name + " " +
                                          vtext + "' which is not installed");
        lock.hashes.emplace(name + "@" + vtext, installed->payload_hash);
    }
    return lock;
}

} // namespace vpm
