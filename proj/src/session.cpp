#include "vpm/session.hpp"

#include "vpm/errors.hpp"
#include "vpm/fsio.hpp"
#include "vpm/resolver.hpp"
#include "vpm/tool_info.hpp"

#include <sys/utsname.h>

namespace vpm {

using ojson = nlohmann::ordered_json;

std::string_view to_string(SessionMode mode) noexcept {
    return mode == SessionMode::versioned ? "versioned" : "flat";
}

std::string platform_string() {
    utsname u{};
    if (::uname(&u) != 0)
        return "unknown";
    return std::string(u.sysname) + "-" + u.machine;
}

LoadResult Session::load(LibraryStore& store, const std::string& name,
                         const RangeDescriptor& range, const LoadOptions& options) {
    if (mode_ == SessionMode::versioned && store.mode() != StoreMode::versioned)
        fail(Errc::store_mode_mismatch,
             "a versioned session cannot load from a legacy-flat store");

    LoadResult result;

    std::vector<Version> candidates = store.installed_versions(name);
    std::optional<Version> selected = max_satisfying(candidates, range);

    if (!selected && options.autoinstall && options.repo &&
        store.mode() == StoreMode::versioned) {
        const Repository& repo = *options.repo;
        std::string branch = repo.newest_stable().value_or("unstable");
        auto view = repo.view(branch);
        std::vector<ResolveRequest> requests{{name, range}};
        NestedResolution res = resolve_nested(*view, requests);
        for (std::string& w : res.warnings)
            result.warnings.push_back(std::move(w));
        store.install_tree(res.trees.at(0), range.text(), repo, branch == "unstable");
        selected = res.trees.at(0).version;
    }

    if (!selected)
        fail(Errc::no_installed_match,
             "no installed version of '" + name + "' satisfies '" + range.text() + "'");

    if (mode_ == SessionMode::flat) {
        for (const LoadedEntry& entry : entries_) {
            if (entry.name != name)
                continue;
            if (satisfies(entry.version, range)) {
                result.namespace_id = entry.namespace_id;
                result.already_loaded = true;
                return result;
            }
            fail(Errc::version_conflict,
                 "'" + name + " " + entry.version.text() +
                     "' is already attached; cannot attach " + selected->text() +
                     " in a flat session");
        }
    }

    InstalledPackage installed = [&] {
        auto p = store.find_installed(name, *selected);
        if (!p)
            fail(Errc::store_corrupt,
                 "'" + name + " " + selected->text() + "' vanished from the store");
        return *p;
    }();

    std::string id =
        mode_ == SessionMode::versioned ? name + "@" + installed.version.text() : name;

    for (const LoadedEntry& entry : entries_) {
        if (entry.namespace_id == id) {
            result.namespace_id = id;
            result.already_loaded = true;
            return result;
        }
    }

    if (installed.unstable)
        result.warnings.push_back("'" + name + " " + installed.version.text() +
                                  "' was installed from the unstable branch");

    entries_.push_back({id, name, installed.version, installed.unstable});
    result.namespace_id = id;
    return result;
}

SessionReport Session::info() const {
    return {mode_, std::string(tool_name) + " " + std::string(tool_version), entries_};
}

std::string SessionReport::to_text() const {
    std::string out;
    out += "mode: " + std::string(to_string(mode)) + "\n";
    out += "tool: " + tool + "\n";
    out += "loaded:\n";
    for (const LoadedEntry& entry : loaded) {
        out += "  " + entry.name + "@" + entry.version.text();
        if (entry.unstable)
            out += " (unstable)";
        out += "\n";
    }
    return out;
}

Session Session::from_file(const std::filesystem::path& path) {
    try {
        ojson j = ojson::parse(fsio::read_file(path));
        std::string mode = j.at("mode").get<std::string>();
        if (mode != "versioned" && mode != "flat")
            fail(Errc::io_error, "bad session file: unknown mode '" + mode + "'");
        Session session(mode == "versioned" ? SessionMode::versioned : SessionMode::flat);
        for (const ojson& row : j.at("loaded")) {
            LoadedEntry entry;
            entry.namespace_id = row.at("id").get<std::string>();
            entry.name = row.at("name").get<std::string>();
            entry.version = Version::parse(row.at("version").get<std::string>());
            entry.unstable = row.at("unstable").get<bool>();
            session.entries_.push_back(std::move(entry));
        }
        return session;
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::io_error, "bad session file '" + path.string() + "': " + e.what());
    }
}

void Session::save(const std::filesystem::path& path) const {
    ojson j = ojson::object();
    j["mode"] = std::string(to_string(mode_));
    ojson rows = ojson::array();
    for (const LoadedEntry& entry : entries_) {
        ojson row = ojson::object();
        row["id"] = entry.namespace_id;
        row["name"] = entry.name;
        row["version"] = entry.version.text();
        row["unstable"] = entry.unstable;
        rows.push_back(std::move(row));
    }
    j["loaded"] = std::move(rows);
    fsio::write_file_atomic(path, j.dump(2) + "\n");
}

} // namespace vpm
