#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace vpm::fsio {

std::string read_file(const std::filesystem::path& path);
std::optional<std::string> read_file_if_exists(const std::filesystem::path& path);

// Writes content to a temporary sibling and renames it into place, so readers
// never observe a half-written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

void append_line(const std::filesystem::path& path, std::string_view line);
void ensure_dir(const std::filesystem::path& path);

// Process-unique suffix for staging paths.
std::string unique_suffix();

// Exclusive advisory lock (flock). Used to serialize writers on a repository
// or library store root.
class FileLock {
public:
    explicit FileLock(const std::filesystem::path& path);
    ~FileLock();

    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_ = -1;
};

} // namespace vpm::fsio
