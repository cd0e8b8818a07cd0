#include "vpm/fsio.hpp"

#include "vpm/errors.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <atomic>
#include <fstream>
#include <sstream>

namespace vpm::fsio {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(Errc::io_error, "cannot read '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad())
        fail(Errc::io_error, "read failed for '" + path.string() + "'");
    return std::move(buf).str();
}

std::optional<std::string> read_file_if_exists(const fs::path& path) {
    std::error_code ec;
    if (!fs::exists(path, ec) || ec)
        return std::nullopt;
    return read_file(path);
}

std::string unique_suffix() {
    static std::atomic<unsigned> counter{0};
    return std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1));
}

void write_file_atomic(const fs::path& path, std::string_view content) {
    ensure_dir(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp-" + unique_suffix();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            fail(Errc::io_error, "cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out)
            fail(Errc::io_error, "write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        fail(Errc::io_error, "cannot rename into '" + path.string() + "'");
    }
}

void append_line(const fs::path& path, std::string_view line) {
    ensure_dir(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out)
        fail(Errc::io_error, "cannot append to '" + path.string() + "'");
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
    out.put('\n');
    if (!out)
        fail(Errc::io_error, "append failed for '" + path.string() + "'");
}

void ensure_dir(const fs::path& path) {
    if (path.empty())
        return;
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec)
        fail(Errc::io_error, "cannot create directory '" + path.string() + "'");
}

FileLock::FileLock(const fs::path& path) {
    fd_ = ::open(path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
    if (fd_ < 0)
        fail(Errc::io_error, "cannot open lock file '" + path.string() + "'");
    if (::flock(fd_, LOCK_EX) != 0) {
        ::close(fd_);
        fd_ = -1;
        fail(Errc::io_error, "cannot lock '" + path.string() + "'");
    }
}

FileLock::~FileLock() {
    if (fd_ >= 0) {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
}

} // namespace vpm::fsio
