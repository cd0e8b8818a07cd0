#include "vpm/cli.hpp"

#include "vpm/errors.hpp"
#include "vpm/fsio.hpp"
#include "vpm/lockfile.hpp"
#include "vpm/manifest.hpp"
#include "vpm/repository.hpp"
#include "vpm/resolver.hpp"
#include "vpm/session.hpp"
#include "vpm/store.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <set>

namespace vpm::cli {

namespace {

namespace fs = std::filesystem;

// Thrown by handlers that have already written their own report.
struct CliExit {
    int code;
};

ResolveRequest parse_spec(const std::string& spec) {
    std::size_t at = spec.find('@');
    std::string name = spec.substr(0, at == std::string::npos ? spec.size() : at);
    if (!is_valid_package_name(name))
        fail(Errc::bad_package_name, "bad package name '" + name + "'");
    RangeDescriptor range = at == std::string::npos
                                ? RangeDescriptor::wildcard()
                                : RangeDescriptor::parse(spec.substr(at + 1));
    return {std::move(name), std::move(range)};
}

std::string pick_branch(const Repository& repo, const std::string& flag, bool devel) {
    if (devel)
        return "unstable";
    if (!flag.empty())
        return flag;
    return repo.newest_stable().value_or("unstable");
}

LibraryStore open_or_create(const std::string& lib, StoreMode want) {
    if (!LibraryStore::exists(lib))
        return LibraryStore::create(lib, want);
    LibraryStore store = LibraryStore::open(lib);
    if (store.mode() != want)
        fail(Errc::store_mode_mismatch, "store at '" + lib + "' is " +
                                            std::string(to_string(store.mode())) + ", not " +
                                            std::string(to_string(want)));
    return store;
}

void print_installed(std::ostream& out, const ResolutionTree& tree,
                     std::set<std::pair<std::string, std::string>>& seen) {
    if (seen.insert({tree.name, tree.version.text()}).second)
        out << "installed " << tree.name << " " << tree.version.text() << "\n";
    for (const ResolutionTree& child : tree.children)
        print_installed(out, child, seen);
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"package repository with staged branches and versioned installs"};
    app.name("vpm");
    app.require_subcommand(1);

    // publish
    std::string pub_dir, pub_repo = "./repo", pub_hash;
    CLI::App* publish = app.add_subcommand("publish", "archive a package directory");
    publish->add_option("dir", pub_dir, "directory with DESCRIPTION or package.meta.json")
        ->required();
    publish->add_option("--repo", pub_repo, "repository root")
        ->envname("VPM_REPO")
        ->capture_default_str();
    publish->add_option("--hash", pub_hash, "expected sha256 hex of payload.bin");
    publish->callback([&] {
        fs::path dir = pub_dir;
        bool has_native = fs::exists(dir / "package.meta.json");
        bool has_dcf = fs::exists(dir / "DESCRIPTION");
        if (has_native && has_dcf)
            fail(Errc::manifest_syntax,
                 "'" + pub_dir + "' has both DESCRIPTION and package.meta.json");
        if (!has_native && !has_dcf)
            fail(Errc::missing_field,
                 "'" + pub_dir + "' has no DESCRIPTION or package.meta.json");
        std::string raw =
            fsio::read_file(dir / (has_native ? "package.meta.json" : "DESCRIPTION"));
        PackageManifest manifest =
            has_native ? parse_native_manifest(raw) : parse_dcf_manifest(raw);
        std::string payload = fsio::read_file_if_exists(dir / "payload.bin").value_or("");
        Repository repo(pub_repo);
        std::optional<std::string> declared;
        if (!pub_hash.empty())
            declared = pub_hash;
        repo.publish(manifest, payload, raw, declared);
        out << "published " << manifest.name << " " << manifest.version.text() << "\n";
    });

    // freeze
    std::string fr_id, fr_repo = "./repo";
    CLI::App* freeze = app.add_subcommand("freeze", "snapshot unstable into a testing branch");
    freeze->add_option("id", fr_id, "new testing branch id")->required();
    freeze->add_option("--repo", fr_repo, "repository root")
        ->envname("VPM_REPO")
        ->capture_default_str();
    freeze->callback([&] {
        Repository repo(fr_repo);
        const BranchInfo& branch = repo.freeze(fr_id);
        out << "frozen " << branch.id << " pins=" << branch.pins.size() << "\n";
    });

    // promote
    std::string pm_testing, pm_stable, pm_repo = "./repo";
    CLI::App* promote =
        app.add_subcommand("promote", "copy a testing branch into a new stable branch");
    promote->add_option("testing", pm_testing, "source testing branch")->required();
    promote->add_option("stable", pm_stable, "new stable branch id")->required();
    promote->add_option("--repo", pm_repo, "repository root")
        ->envname("VPM_REPO")
        ->capture_default_str();
    promote->callback([&] {
        Repository repo(pm_repo);
        const BranchInfo& branch = repo.promote(pm_testing, pm_stable);
        out << "promoted " << branch.id << " pins=" << branch.pins.size() << "\n";
    });

    // backport
    std::string bp_branch, bp_name, bp_version, bp_reason, bp_repo = "./repo";
    CLI::App* backport =
        app.add_subcommand("backport", "repin one package on a frozen branch");
    backport->add_option("branch", bp_branch, "target branch")->required();
    backport->add_option("name", bp_name, "package name")->required();
    backport->add_option("version", bp_version, "archived version to pin")->required();
    backport->add_option("--reason", bp_reason, "why the pin moves")->required();
    backport->add_option("--repo", bp_repo, "repository root")
        ->envname("VPM_REPO")
        ->capture_default_str();
    backport->callback([&] {
        Repository repo(bp_repo);
        Version version = Version::parse(bp_version);
        repo.backport(bp_branch, bp_name, version, bp_reason);
        const BranchInfo& branch = repo.branch(bp_branch);
        const ArchiveEntry* entry = repo.find_entry(bp_name, version);
        out << "backported " << branch.id << " " << bp_name << " "
            << entry->manifest.version.text() << " revision=" << branch.revision << "\n";
    });

    // install
    std::vector<std::string> in_specs;
    std::string in_repo = "./repo", in_lib = "./lib", in_branch, in_mode = "nested";
    bool in_devel = false, in_optional = false;
    CLI::App* install = app.add_subcommand("install", "resolve and install packages");
    install->add_option("specs", in_specs, "package name or name@range")->required();
    install->add_option("--repo", in_repo, "repository root")
        ->envname("VPM_REPO")
        ->capture_default_str();
    install->add_option("--lib", in_lib, "library store root")
        ->envname("VPM_LIB")
        ->capture_default_str();
    CLI::Option* in_branch_opt =
        install->add_option("--branch", in_branch, "resolve against this branch");
    install->add_option("--mode", in_mode, "nested, flat, or legacy")
        ->check(CLI::IsMember({"nested", "flat", "legacy"}))
        ->capture_default_str();
    install->add_flag("--devel", in_devel, "resolve against the unstable branch")
        ->excludes(in_branch_opt);
    install->add_flag("--with-optional", in_optional, "resolve optional dependencies too");
    install->callback([&] {
        Repository repo(in_repo);
        std::string branch = pick_branch(repo, in_branch, in_devel);
        if (in_devel)
            err << "warning: installing from unstable branch\n";
        auto view = repo.view(branch);
        std::vector<ResolveRequest> requests;
        for (const std::string& spec : in_specs)
            requests.push_back(parse_spec(spec));
        ResolveOptions options{in_optional};
        bool unstable_flag = branch == "unstable";

        if (in_mode == "nested") {
            NestedResolution res = resolve_nested(*view, requests, options);
            for (const std::string& w : res.warnings)
                err << "warning: " << w << "\n";
            LibraryStore store = open_or_create(in_lib, StoreMode::versioned);
            std::set<std::pair<std::string, std::string>> seen;
            for (std::size_t i = 0; i < requests.size(); ++i) {
                store.install_tree(res.trees[i], requests[i].range.text(), repo,
                                   unstable_flag);
                print_installed(out, res.trees[i], seen);
            }
        } else {
            FlatResolution res = resolve_flat(*view, requests, options);
            for (const std::string& w : res.warnings)
                err << "warning: " << w << "\n";
            if (!res.ok()) {
                out << conflict_to_text(*res.conflict);
                err << "error: VersionConflict: " << res.conflict->explanation << "\n";
                throw CliExit{1};
            }
            LibraryStore store = open_or_create(
                in_lib, in_mode == "legacy" ? StoreMode::legacy_flat : StoreMode::versioned);
            store.install_plan(*res.plan, requests, repo, unstable_flag);
            for (const auto& [name, version] : res.plan->pins)
                out << "installed " << name << " " << version.text() << "\n";
        }
    });

    // tree
    std::string tr_spec, tr_repo = "./repo", tr_branch;
    bool tr_optional = false;
    CLI::App* tree = app.add_subcommand("tree", "print the resolved dependency tree");
    tree->add_option("spec", tr_spec, "package name or name@range")->required();
    tree->add_option("--repo", tr_repo, "repository root")
        ->envname("VPM_REPO")
        ->capture_default_str();
    tree->add_option("--branch", tr_branch, "resolve against this branch");
    tree->add_flag("--with-optional", tr_optional, "resolve optional dependencies too");
    tree->callback([&] {
        Repository repo(tr_repo);
        std::string branch = pick_branch(repo, tr_branch, false);
        auto view = repo.view(branch);
        std::vector<ResolveRequest> requests{parse_spec(tr_spec)};
        NestedResolution res = resolve_nested(*view, requests, ResolveOptions{tr_optional});
        for (const std::string& w : res.warnings)
            err << "warning: " << w << "\n";
        out << render_tree(res.trees);
    });

    // revdep
    std::string rv_name, rv_repo = "./repo", rv_branch;
    CLI::App* revdep = app.add_subcommand("revdep", "list reverse dependencies");
    revdep->add_option("name", rv_name, "package name")->required();
    revdep->add_option("--repo", rv_repo, "repository root")
        ->envname("VPM_REPO")
        ->capture_default_str();
    revdep->add_option("--branch", rv_branch, "inspect this branch");
    revdep->callback([&] {
        Repository repo(rv_repo);
        std::string branch = pick_branch(repo, rv_branch, false);
        RevDeps deps = repo.revdep(branch, rv_name);
        for (const std::string& name : deps.required)
            out << name << "\n";
        for (const std::string& name : deps.optional)
            out << name << " (optional)\n";
    });

    // impact
    std::string im_path, im_repo = "./repo", im_branch;
    CLI::App* impact =
        app.add_subcommand("impact", "dry-run a candidate release against a branch");
    impact->add_option("manifest", im_path, "candidate manifest file")->required();
    impact->add_option("--repo", im_repo, "repository root")
        ->envname("VPM_REPO")
        ->capture_default_str();
    impact->add_option("--branch", im_branch, "branch to check against");
    impact->callback([&] {
        Repository repo(im_repo);
        std::string branch = pick_branch(repo, im_branch, false);
        PackageManifest candidate = parse_manifest(fsio::read_file(im_path));
        ImpactReport report = repo.update_impact(branch, candidate);
        for (const ImpactEntry& entry : report.entries) {
            out << entry.dependent << " " << to_string(entry.status) << " range='"
                << entry.range_text << "' before="
                << (entry.selected_before ? entry.selected_before->text() : "none")
                << " after="
                << (entry.selected_after ? entry.selected_after->text() : "none") << "\n";
        }
        out << "summary: broken=" << report.count(ImpactStatus::broken)
            << " newly-selected=" << report.count(ImpactStatus::newly_selected)
            << " unaffected=" << report.count(ImpactStatus::unaffected) << "\n";
    });

    // load
    std::string ld_spec, ld_version, ld_session = "./session.json", ld_lib = "./lib",
                ld_repo = "./repo";
    bool ld_autoinstall = false, ld_flat = false;
    CLI::App* load = app.add_subcommand("load", "attach a package version to a session");
    load->add_option("name", ld_spec, "package name or name@range")->required();
    CLI::Option* ld_version_opt =
        load->add_option("--version", ld_version, "version range to satisfy");
    load->add_option("--session", ld_session, "session state file")->capture_default_str();
    load->add_option("--lib", ld_lib, "library store root")
        ->envname("VPM_LIB")
        ->capture_default_str();
    load->add_option("--repo", ld_repo, "repository root")
        ->envname("VPM_REPO")
        ->capture_default_str();
    load->add_flag("--autoinstall", ld_autoinstall,
                   "install from the repository when nothing matches");
    load->add_flag("--flat", ld_flat, "start a flat session (single namespace)");
    load->callback([&] {
        ResolveRequest request = parse_spec(ld_spec);
        bool spec_has_range = ld_spec.find('@') != std::string::npos;
        if (ld_version_opt->count() > 0) {
            if (spec_has_range)
                fail(Errc::bad_constraint_syntax,
                     "give the range either as name@range or --version, not both");
            request.range = RangeDescriptor::parse(ld_version);
        }
        Session session = fs::exists(ld_session)
                              ? Session::from_file(ld_session)
                              : Session(ld_flat ? SessionMode::flat : SessionMode::versioned);
        LibraryStore store = !LibraryStore::exists(ld_lib) && ld_autoinstall
                                 ? LibraryStore::create(ld_lib, StoreMode::versioned)
                                 : LibraryStore::open(ld_lib);
        std::optional<Repository> repo;
        LoadOptions options;
        options.autoinstall = ld_autoinstall;
        if (ld_autoinstall) {
            repo.emplace(ld_repo);
            options.repo = &*repo;
        }
        LoadResult result = session.load(store, request.name, request.range, options);
        session.save(ld_session);
        for (const std::string& w : result.warnings)
            err << "warning: " << w << "\n";
        out << result.namespace_id << "\n";
    });

    // lock
    std::string lk_out, lk_lib = "./lib", lk_repo = "./repo", lk_branch, lk_platform;
    CLI::App* lock = app.add_subcommand("lock", "write a lockfile for a library store");
    lock->add_option("--out", lk_out, "also write the lockfile here");
    lock->add_option("--lib", lk_lib, "library store root")
        ->envname("VPM_LIB")
        ->capture_default_str();
    lock->add_option("--repo", lk_repo, "repository root")
        ->envname("VPM_REPO")
        ->capture_default_str();
    lock->add_option("--branch", lk_branch, "record this branch and revision");
    CLI::Option* lk_platform_opt =
        lock->add_option("--platform", lk_platform, "platform to record");
    lock->callback([&] {
        LibraryStore store = LibraryStore::open(lk_lib);
        std::optional<SnapshotBinding> binding;
        std::optional<std::uint64_t> sequence;
        if (!lk_branch.empty()) {
            Repository repo(lk_repo);
            binding = SnapshotBinding{lk_branch, repo.branch(lk_branch).revision};
            sequence = repo.next_sequence();
        }
        Lockfile lockfile = lock_from_store(store, sequence, binding);
        if (lk_platform_opt->count() > 0)
            lockfile.platform = lk_platform;
        std::string bytes = write_lock(lockfile);
        out << bytes;
        if (!lk_out.empty())
            fsio::write_file_atomic(lk_out, bytes);
    });

    // restore
    std::string rs_lock, rs_repo = "./repo", rs_lib = "./lib";
    CLI::App* restore =
        app.add_subcommand("restore", "rebuild a library store from a lockfile");
    restore->add_option("lockfile", rs_lock, "lockfile path")->required();
    restore->add_option("--repo", rs_repo, "repository root")
        ->envname("VPM_REPO")
        ->capture_default_str();
    restore->add_option("--lib", rs_lib, "library store root to (re)create")
        ->envname("VPM_LIB")
        ->capture_default_str();
    restore->callback([&] {
        Repository repo(rs_repo);
        Lockfile lockfile = parse_lock(fsio::read_file(rs_lock));
        restore_lock(lockfile, repo, rs_lib);
        for (const auto& [key, hex] : lockfile.hashes) {
            std::size_t at = key.find('@');
            out << "restored " << key.substr(0, at) << " " << key.substr(at + 1) << "\n";
        }
    });

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("vpm");
    for (const std::string& a : args)
        argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e, out, err);
        return rc == 0 ? 0 : 2;
    } catch (const CliExit& e) {
        return e.code;
    } catch (const Error& e) {
        err << "error: " << e.name() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: Internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace vpm::cli
