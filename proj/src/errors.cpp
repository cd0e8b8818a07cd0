#include "vpm/errors.hpp"

namespace vpm {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
    case Errc::empty_version: return "EmptyVersion";
    case Errc::non_numeric_component: return "NonNumericComponent";
    case Errc::dangling_separator: return "DanglingSeparator";
    case Errc::too_many_components: return "TooManyComponents";
    case Errc::component_out_of_range: return "ComponentOutOfRange";
    case Errc::syntax_error: return "SyntaxError";
    case Errc::url_dependency_unsupported: return "UrlDependencyUnsupported";
    case Errc::empty_descriptor: return "EmptyDescriptor";
    case Errc::manifest_syntax: return "ManifestSyntax";
    case Errc::missing_field: return "MissingField";
    case Errc::bad_package_name: return "BadPackageName";
    case Errc::bad_constraint_syntax: return "BadConstraintSyntax";
    case Errc::duplicate_dependency: return "DuplicateDependency";
    case Errc::self_dependency: return "SelfDependency";
    case Errc::duplicate_version: return "DuplicateVersion";
    case Errc::payload_hash_mismatch: return "PayloadHashMismatch";
    case Errc::branch_id_taken: return "BranchIdTaken";
    case Errc::unknown_branch: return "UnknownBranch";
    case Errc::unknown_revision: return "UnknownRevision";
    case Errc::unknown_version: return "UnknownVersion";
    case Errc::unknown_package: return "UnknownPackage";
    case Errc::not_pinned: return "NotPinned";
    case Errc::empty_reason: return "EmptyReason";
    case Errc::unsatisfiable: return "Unsatisfiable";
    case Errc::cycle_detected: return "CycleDetected";
    case Errc::resolution_diverged: return "ResolutionDiverged";
    case Errc::missing_payload: return "MissingPayload";
    case Errc::store_corrupt: return "StoreCorrupt";
    case Errc::store_mode_mismatch: return "StoreModeMismatch";
    case Errc::no_installed_match: return "NoInstalledMatch";
    case Errc::version_conflict: return "VersionConflict";
    case Errc::incomplete_resolution: return "IncompleteResolution";
    case Errc::bad_lockfile: return "BadLockfile";
    case Errc::io_error: return "IoError";
    }
    return "UnknownError";
}

} // namespace vpm
