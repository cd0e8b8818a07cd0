#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vpm/range.hpp"
#include "vpm/store.hpp"
#include "vpm/version.hpp"

namespace vpm {

// versioned: any number of versions of a package may be attached side by side,
//            each under its own name@version namespace.
// flat: classic single-namespace behavior; a second distinct version of an
//       attached package is refused.
enum class SessionMode { versioned, flat };

std::string_view to_string(SessionMode mode) noexcept;

struct LoadedEntry {
    std::string namespace_id; // "name@version" (versioned) or "name" (flat)
    std::string name;
    Version version;
    bool unstable = false;
};

struct LoadResult {
    std::string namespace_id;
    bool already_loaded = false;
    std::vector<std::string> warnings;
};

struct LoadOptions {
    // When the store has no match, resolve against the repository and install
    // before attaching. Uses the newest stable branch, or unstable when no
    // stable branch exists.
    bool autoinstall = false;
    const Repository* repo = nullptr;
};

struct SessionReport {
    SessionMode mode;
    std::string tool;
    std::vector<LoadedEntry> loaded;

    std::string to_text() const;
};

std::string platform_string();

// Tracks which package versions are attached, in attach order.
class Session {
public:
    explicit Session(SessionMode mode) : mode_(mode) {}

    SessionMode mode() const noexcept { return mode_; }
    const std::vector<LoadedEntry>& loaded() const noexcept { return entries_; }

    LoadResult load(LibraryStore& store, const std::string& name,
                    const RangeDescriptor& range, const LoadOptions& options = {});

    SessionReport info() const;

    static Session from_file(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

private:
    SessionMode mode_;
    std::vector<LoadedEntry> entries_;
};

} // namespace vpm
