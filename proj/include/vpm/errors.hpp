#pragma once

#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vpm {

// Every failure the toolkit reports. The names are part of the CLI contract:
// they appear verbatim in "error: <Name>: <detail>" lines.
enum class Errc {
    // version parsing
    empty_version,
    non_numeric_component,
    dangling_separator,
    too_many_components,
    component_out_of_range,
    // range descriptors
    syntax_error,
    url_dependency_unsupported,
    empty_descriptor,
    // manifests
    manifest_syntax,
    missing_field,
    bad_package_name,
    bad_constraint_syntax,
    duplicate_dependency,
    self_dependency,
    // repository
    duplicate_version,
    payload_hash_mismatch,
    branch_id_taken,
    unknown_branch,
    unknown_revision,
    unknown_version,
    unknown_package,
    not_pinned,
    empty_reason,
    // resolution
    unsatisfiable,
    cycle_detected,
    resolution_diverged,
    // stores and sessions
    missing_payload,
    store_corrupt,
    store_mode_mismatch,
    no_installed_match,
    version_conflict,
    // lockfiles
    incomplete_resolution,
    bad_lockfile,
    // filesystem
    io_error,
};

std::string_view errc_name(Errc code) noexcept;

inline std::ostream& operator<<(std::ostream& os, Errc code) {
    return os << errc_name(code);
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& detail)
        : std::runtime_error(detail), code_(code) {}

    Errc code() const noexcept { return code_; }
    std::string_view name() const noexcept { return errc_name(code_); }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& detail) {
    throw Error(code, detail);
}

} // namespace vpm
