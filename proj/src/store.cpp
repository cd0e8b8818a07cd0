#include "vpm/store.hpp"

#include "vpm/errors.hpp"
#include "vpm/fsio.hpp"
#include "vpm/hash.hpp"
#include "vpm/tool_info.hpp"

#include <algorithm>
#include <set>

namespace vpm {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string_view to_string(StoreMode mode) noexcept {
    return mode == StoreMode::versioned ? "versioned" : "legacy-flat";
}

namespace {

constexpr const char* store_marker = ".store.json";

ojson meta_json(const std::string& name, const std::string& vtext, const std::string& hash,
                bool unstable, const std::string& manifest_raw) {
    ojson j = ojson::object();
    j["name"] = name;
    j["version"] = vtext;
    j["hash"] = hash;
    j["unstable"] = unstable;
    j["manifest"] = manifest_raw;
    return j;
}

InstalledPackage meta_from_dir(const fs::path& dir) {
    auto text = fsio::read_file_if_exists(dir / ".meta");
    if (!text)
        fail(Errc::store_corrupt, "missing .meta in '" + dir.string() + "'");
    try {
        ojson j = ojson::parse(*text);
        InstalledPackage p;
        p.name = j.at("name").get<std::string>();
        p.version = Version::parse(j.at("version").get<std::string>());
        p.payload_hash = j.at("hash").get<std::string>();
        p.unstable = j.at("unstable").get<bool>();
        p.manifest_raw = j.at("manifest").get<std::string>();
        return p;
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::store_corrupt, "bad .meta in '" + dir.string() + "': " + e.what());
    }
}

void collect_nodes(const ResolutionTree& tree,
                   std::vector<std::pair<std::string, Version>>& order,
                   std::set<std::pair<std::string, Version>>& seen) {
    if (seen.insert({tree.name, tree.version}).second)
        order.emplace_back(tree.name, tree.version);
    for (const ResolutionTree& child : tree.children)
        collect_nodes(child, order, seen);
}

} // namespace

LibraryStore LibraryStore::create(const fs::path& root, StoreMode mode) {
    if (exists(root))
        fail(Errc::io_error, "'" + root.string() + "' is already a library store");
    fsio::ensure_dir(root);
    fsio::ensure_dir(root / ".trees");
    ojson marker = ojson::object();
    marker["mode"] = std::string(to_string(mode));
    marker["tool"] = std::string(tool_version);
    fsio::write_file_atomic(root / store_marker, marker.dump(2) + "\n");
    return LibraryStore(root, mode);
}

LibraryStore LibraryStore::open(const fs::path& root) {
    auto text = fsio::read_file_if_exists(root / store_marker);
    if (!text)
        fail(Errc::io_error, "'" + root.string() + "' is not a library store");
    try {
        ojson j = ojson::parse(*text);
        std::string mode = j.at("mode").get<std::string>();
        if (mode == "versioned")
            return LibraryStore(root, StoreMode::versioned);
        if (mode == "legacy-flat")
            return LibraryStore(root, StoreMode::legacy_flat);
        fail(Errc::store_corrupt, "unknown store mode '" + mode + "'");
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::store_corrupt, "bad store marker: " + std::string(e.what()));
    }
}

bool LibraryStore::exists(const fs::path& root) {
    std::error_code ec;
    return fs::exists(root / store_marker, ec);
}

fs::path LibraryStore::dir_for(const std::string& name, const std::string& vtext) const {
    if (mode_ == StoreMode::versioned)
        return root_ / (name + "_" + vtext);
    return root_ / name;
}

std::vector<Version> LibraryStore::installed_versions(const std::string& name) const {
    std::vector<Version> out;
    std::error_code ec;
    for (fs::directory_iterator it(root_, ec), end; !ec && it != end; it.increment(ec)) {
        const fs::path& p = it->path();
        std::string fname = p.filename().string();
        if (fname.empty() || fname.front() == '.' || !it->is_directory())
            continue;
        if (mode_ == StoreMode::versioned) {
            std::size_t sep = fname.find('_');
            if (sep == std::string::npos || fname.substr(0, sep) != name)
                continue;
            out.push_back(Version::parse(fname.substr(sep + 1)));
        } else if (fname == name) {
            out.push_back(meta_from_dir(p).version);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<InstalledPackage> LibraryStore::find_installed(const std::string& name,
                                                             const Version& version) const {
    std::error_code ec;
    for (fs::directory_iterator it(root_, ec), end; !ec && it != end; it.increment(ec)) {
        std::string fname = it->path().filename().string();
        if (fname.empty() || fname.front() == '.' || !it->is_directory())
            continue;
        if (mode_ == StoreMode::versioned) {
            std::size_t sep = fname.find('_');
            if (sep == std::string::npos || fname.substr(0, sep) != name)
                continue;
            if (Version::parse(fname.substr(sep + 1)) == version)
                return meta_from_dir(it->path());
        } else if (fname == name) {
            InstalledPackage p = meta_from_dir(it->path());
            if (p.version == version)
                return p;
            return std::nullopt;
        }
    }
    return std::nullopt;
}

std::vector<InstalledPackage> LibraryStore::installed() const {
    std::vector<fs::path> dirs;
    std::error_code ec;
    for (fs::directory_iterator it(root_, ec), end; !ec && it != end; it.increment(ec)) {
        std::string fname = it->path().filename().string();
        if (!fname.empty() && fname.front() != '.' && it->is_directory())
            dirs.push_back(it->path());
    }
    std::sort(dirs.begin(), dirs.end());
    std::vector<InstalledPackage> out;
    for (const fs::path& dir : dirs)
        out.push_back(meta_from_dir(dir));
    return out;
}

bool LibraryStore::place_versioned(const std::string& name, const Version& version,
                                   const Repository& repo, bool unstable_flag,
                                   std::vector<std::string>& event_lines) {
    const ArchiveEntry* entry = repo.find_entry(name, version);
    if (!entry)
        fail(Errc::unknown_version, name + " " + version.text() + " is not in the archive");
    const std::string vtext = entry->manifest.version.text();
    fs::path dir = dir_for(name, vtext);

    if (fs::exists(dir)) {
        InstalledPackage existing = meta_from_dir(dir);
        auto payload = fsio::read_file_if_exists(dir / "payload.bin");
        if (!payload || sha256_hex(*payload) != existing.payload_hash)
            fail(Errc::store_corrupt,
                 "contents of '" + dir.string() + "' no longer match their recorded hash");
        if (existing.payload_hash != entry->payload_hash)
            fail(Errc::store_corrupt,
                 "'" + dir.string() + "' was installed from different archive content");
        return false;
    }

    std::string payload = repo.payload(name, version);
    fs::path staging = root_ / (".staging-" + name + "_" + vtext + "-" + fsio::unique_suffix());
    fsio::ensure_dir(staging);
    fsio::write_file_atomic(staging / "payload.bin", payload);
    fsio::write_file_atomic(
        staging / ".meta",
        meta_json(name, vtext, entry->payload_hash, unstable_flag, entry->manifest_raw).dump(2) +
            "\n");
    std::error_code ec;
    fs::rename(staging, dir, ec);
    if (ec) {
        fs::remove_all(staging, ec);
        fail(Errc::io_error, "cannot activate '" + dir.string() + "'");
    }
    event_lines.push_back("install " + name + " " + vtext);
    return true;
}

void LibraryStore::install_tree(const ResolutionTree& tree, const std::string& range_text,
                                const Repository& repo, bool unstable_flag) {
    if (mode_ != StoreMode::versioned)
        fail(Errc::store_mode_mismatch, "nested installs require a versioned store");
    fsio::FileLock lock(root_ / ".lock");

    std::vector<std::pair<std::string, Version>> order;
    std::set<std::pair<std::string, Version>> seen;
    collect_nodes(tree, order, seen);

    std::vector<std::string> event_lines;
    bool created = false;
    for (const auto& [name, version] : order)
        created |= place_versioned(name, version, repo, unstable_flag, event_lines);
    if (!created)
        event_lines.push_back("noop " + tree.name + "@" + tree.version.text());

    TreeRecord record;
    record.root = tree.name;
    record.version_text = tree.version.text();
    record.range_text = range_text;
    record.nested = true;
    record.tree = tree;
    write_record(record);

    for (const std::string& line : event_lines)
        fsio::append_line(root_ / ".events.log", line);
}

bool LibraryStore::install_one(const std::string& name, const Version& version,
                               const Repository& repo, bool unstable_flag) {
    if (mode_ != StoreMode::versioned)
        fail(Errc::store_mode_mismatch, "single-package installs require a versioned store");
    fsio::FileLock lock(root_ / ".lock");
    std::vector<std::string> event_lines;
    bool created = place_versioned(name, version, repo, unstable_flag, event_lines);
    for (const std::string& line : event_lines)
        fsio::append_line(root_ / ".events.log", line);
    return created;
}

void LibraryStore::install_plan(const InstallPlan& plan,
                                std::span<const ResolveRequest> requests,
                                const Repository& repo, bool unstable_flag) {
    fsio::FileLock lock(root_ / ".lock");
    std::vector<std::string> event_lines;

    if (mode_ == StoreMode::versioned) {
        bool created = false;
        for (const auto& [name, version] : plan.pins)
            created |= place_versioned(name, version, repo, unstable_flag, event_lines);
        if (!created)
            event_lines.push_back("noop plan");
    } else {
        for (const auto& [name, version] : plan.pins) {
            const ArchiveEntry* entry = repo.find_entry(name, version);
            if (!entry)
                fail(Errc::unknown_version,
                     name + " " + version.text() + " is not in the archive");
            const std::string vtext = entry->manifest.version.text();
            fs::path dir = dir_for(name, vtext);
            std::optional<std::string> previous;
            if (fs::exists(dir)) {
                InstalledPackage existing = meta_from_dir(dir);
                if (existing.version == version) {
                    event_lines.push_back("noop " + name + " " + vtext);
                    continue;
                }
                previous = existing.version.text();
            }
            std::string payload = repo.payload(name, version);
            fs::path staging = root_ / (".staging-" + name + "-" + fsio::unique_suffix());
            fsio::ensure_dir(staging);
            fsio::write_file_atomic(staging / "payload.bin", payload);
            fsio::write_file_atomic(staging / ".meta",
                                    meta_json(name, vtext, entry->payload_hash, unstable_flag,
                                              entry->manifest_raw)
                                            .dump(2) +
                                        "\n");
            std::error_code ec;
            if (previous) {
                fs::path old = root_ / (".old-" + name + "-" + fsio::unique_suffix());
                fs::rename(dir, old, ec);
                if (!ec)
                    fs::rename(staging, dir, ec);
                fs::remove_all(old, ec);
                event_lines.push_back("overwrite " + name + " " + vtext + " previous=" +
                                      *previous);
            } else {
                fs::rename(staging, dir, ec);
                if (ec)
                    fail(Errc::io_error, "cannot activate '" + dir.string() + "'");
                event_lines.push_back("install " + name + " " + vtext);
            }
        }
    }

    for (const ResolveRequest& request : requests) {
        auto it = plan.pins.find(request.name);
        if (it == plan.pins.end())
            continue;
        if (mode_ == StoreMode::legacy_flat) {
            // The overwrite removed the old environment, so its record must
            // not linger and contradict the new one.
            std::vector<fs::path> stale;
            std::error_code ec;
            for (fs::directory_iterator dit(root_ / ".trees", ec), end; !ec && dit != end;
                 dit.increment(ec))
                if (dit->path().filename().string().rfind(request.name + "@", 0) == 0)
                    stale.push_back(dit->path());
            for (const fs::path& file : stale)
                fs::remove(file, ec);
        }
        TreeRecord record;
        record.root = request.name;
        record.version_text = it->second.text();
        record.range_text = request.range.text();
        record.nested = false;
        for (const auto& [name, version] : plan.pins)
            record.flat_pins.emplace(name, version.text());
        write_record(record);
    }

    for (const std::string& line : event_lines)
        fsio::append_line(root_ / ".events.log", line);
}

void LibraryStore::write_record(const TreeRecord& record) {
    ojson j = ojson::object();
    j["root"] = record.root;
    j["version"] = record.version_text;
    j["range"] = record.range_text;
    j["mode"] = record.nested ? "nested" : "flat";
    if (record.nested)
        j["tree"] = tree_to_json(*record.tree);
    else {
        ojson pins = ojson::object();
        for (const auto& [name, vtext] : record.flat_pins)
            pins[name] = vtext;
        j["pins"] = std::move(pins);
    }
    fsio::write_file_atomic(root_ / ".trees" /
                                (record.root + "@" + record.version_text + ".json"),
                            j.dump(2) + "\n");
}

std::vector<TreeRecord> LibraryStore::tree_records() const {
    std::vector<fs::path> files;
    std::error_code ec;
    for (fs::directory_iterator it(root_ / ".trees", ec), end; !ec && it != end;
         it.increment(ec))
        if (it->path().extension() == ".json")
            files.push_back(it->path());
    std::sort(files.begin(), files.end());

    std::vector<TreeRecord> out;
    for (const fs::path& file : files) {
        try {
            ojson j = ojson::parse(fsio::read_file(file));
            TreeRecord record;
            record.root = j.at("root").get<std::string>();
            record.version_text = j.at("version").get<std::string>();
            record.range_text = j.at("range").get<std::string>();
            record.nested = j.at("mode").get<std::string>() == "nested";
            if (record.nested)
                record.tree = tree_from_json(j.at("tree"));
            else
                for (const auto& [name, vtext] : j.at("pins").items())
                    record.flat_pins.emplace(name, vtext.get<std::string>());
            out.push_back(std::move(record));
        } catch (const nlohmann::json::exception& e) {
            fail(Errc::store_corrupt,
                 "bad resolution record '" + file.string() + "': " + e.what());
        }
    }
    return out;
}

std::vector<std::string> LibraryStore::events() const {
    auto text = fsio::read_file_if_exists(root_ / ".events.log");
    std::vector<std::string> out;
    if (!text)
        return out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text->size(); ++i) {
        if (i < text->size() && (*text)[i] != '\n')
            continue;
        if (i > start)
            out.push_back(text->substr(start, i - start));
        start = i + 1;
    }
    return out;
}

void LibraryStore::write_provenance(const ojson& snapshot) {
    fsio::write_file_atomic(root_ / ".snapshot.json", snapshot.dump(2) + "\n");
}

std::optional<ojson> LibraryStore::provenance() const {
    auto text = fsio::read_file_if_exists(root_ / ".snapshot.json");
    if (!text)
        return std::nullopt;
    try {
        return ojson::parse(*text);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::store_corrupt, "bad provenance record: " + std::string(e.what()));
    }
}

} // namespace vpm
