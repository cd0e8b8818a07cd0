#include <doctest.h>

#include "support/fixtures.hpp"
#include "support/temp_dir.hpp"
#include "vpm/errors.hpp"
#include "vpm/hash.hpp"
#include "vpm/lockfile.hpp"
#include "vpm/tool_info.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>

using namespace vpm;
using testsupport::TempDir;
using ojson = nlohmann::ordered_json;

namespace {

Errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return Errc::io_error;
}

struct NestedFixture {
    std::vector<ResolveRequest> requests{{"d3", RangeDescriptor::wildcard()}};
    NestedResolution resolution;

    explicit NestedFixture(const Repository& repo) {
        auto view = repo.view("unstable");
        resolution = resolve_nested(*view, requests);
    }
};

// Mutate one field of a valid lock document and expect BadLockfile.
void check_rejected(const std::string& bytes, const std::function<void(ojson&)>& mutate) {
    ojson j = ojson::parse(bytes);
    mutate(j);
    std::string text = j.dump(2) + "\n";
    CHECK(code_of([&] { parse_lock(text); }) == Errc::bad_lockfile);
}

} // namespace

TEST_CASE("a nested lockfile carries digests for all thirteen packages") {
    TempDir tmp;
    Repository repo(tmp.sub("repo"));
    testsupport::publish_d3_fixture(repo);
    NestedFixture fx(repo);

    Lockfile lock = make_lock(fx.resolution, fx.requests, repo);
    CHECK(lock.nested);
    CHECK(lock.tool_version == tool_version);
    CHECK(lock.hash_algorithm == hash_algorithm);
    CHECK(lock.created_sequence == repo.next_sequence());
    CHECK_FALSE(lock.platform.has_value());
    CHECK_FALSE(lock.snapshot.has_value());
    REQUIRE(lock.roots.size() == 1);
    CHECK(lock.roots[0] == RootSpec{"d3", "*"});
    CHECK(lock.hashes.size() == 13);
    for (const auto& [name, vtext] : testsupport::d3_expected_pins())
        CHECK(lock.hashes.at(name + "@" + vtext) ==
              sha256_hex("payload of " + name + "@" + vtext));
}

TEST_CASE("lockfile serialization is canonical and stable") {
    TempDir tmp;
    Repository repo(tmp.sub("repo"));
    testsupport::publish_d3_fixture(repo);
    NestedFixture fx(repo);

    Lockfile lock = make_lock(fx.resolution, fx.requests, repo,
                              SnapshotBinding{"stable-1", 2}, std::string("linux-x86_64"));
    std::string first = write_lock(lock);
    std::string second = write_lock(lock);
    CHECK(first == second);
    CHECK(first.rfind("{\n  \"tool_version\":", 0) == 0);
    CHECK(first.back() == '\n');
    CHECK(first.find("\"branch\": \"stable-1\"") != std::string::npos);
    CHECK(first.find("\"platform\": \"linux-x86_64\"") != std::string::npos);

    Lockfile reparsed = parse_lock(first);
    CHECK(write_lock(reparsed) == first);
    CHECK(reparsed.snapshot == SnapshotBinding{"stable-1", 2});
    CHECK(reparsed.platform == "linux-x86_64");
    CHECK(reparsed.trees == lock.trees);

    Lockfile bare = make_lock(fx.resolution, fx.requests, repo);
    std::string bare_bytes = write_lock(bare);
    CHECK(bare_bytes.find("\"platform\": null") != std::string::npos);
    CHECK(bare_bytes.find("\"snapshot\": null") != std::string::npos);
    CHECK(write_lock(parse_lock(bare_bytes)) == bare_bytes);
}

TEST_CASE("flat lockfiles round-trip the same way") {
    TempDir tmp;
    Repository repo(tmp.sub("repo"));
    testsupport::publish_caret_fixture(repo);

    auto view = repo.view("unstable");
    std::vector<ResolveRequest> requests{{"caret", RangeDescriptor::wildcard()}};
    FlatResolution flat = resolve_flat(*view, requests);
    REQUIRE(flat.ok());

    Lockfile lock = make_lock(*flat.plan, requests, repo);
    CHECK_FALSE(lock.nested);
    CHECK(lock.flat_pins ==
          std::map<std::string, std::string>{
              {"caret", "4.78"}, {"lattice", "0.19-13"}, {"reshape", "0.8.4"}});
    CHECK(lock.hashes.size() == 3);

    std::string bytes = write_lock(lock);
    CHECK(bytes.find("\"mode\": \"flat\"") != std::string::npos);
    Lockfile reparsed = parse_lock(bytes);
    CHECK_FALSE(reparsed.nested);
    CHECK(reparsed.flat_pins == lock.flat_pins);
    CHECK(write_lock(reparsed) == bytes);
}

TEST_CASE("write_lock refuses incomplete resolutions") {
    TempDir tmp;
    Repository repo(tmp.sub("repo"));
    testsupport::publish_d3_fixture(repo);
    NestedFixture fx(repo);
    Lockfile good = make_lock(fx.resolution, fx.requests, repo);

    Lockfile no_roots = good;
    no_roots.roots.clear();
    CHECK(code_of([&] { write_lock(no_roots); }) == Errc::incomplete_resolution);

    Lockfile no_trees = good;
    no_trees.trees.clear();
    CHECK(code_of([&] { write_lock(no_trees); }) == Errc::incomplete_resolution);

    Lockfile wrong_order = good;
    wrong_order.roots[0].name = "sizzle";
    CHECK(code_of([&] { write_lock(wrong_order); }) == Errc::incomplete_resolution);

    Lockfile missing_hash = good;
    missing_hash.hashes.erase("mime@1.2.7");
    CHECK(code_of([&] { write_lock(missing_hash); }) == Errc::incomplete_resolution);

    Lockfile extra_hash = good;
    extra_hash.hashes.emplace("stowaway@1.0", std::string(64, 'a'));
    CHECK(code_of([&] { write_lock(extra_hash); }) == Errc::incomplete_resolution);

    Lockfile no_pins;
    no_pins.tool_version = "x";
    no_pins.hash_algorithm = "sha256";
    no_pins.nested = false;
    no_pins.roots.push_back({"caret", "*"});
    CHECK(code_of([&] { write_lock(no_pins); }) == Errc::incomplete_resolution);
}

TEST_CASE("parse_lock rejects malformed documents as BadLockfile") {
    TempDir tmp;
    Repository repo(tmp.sub("repo"));
    testsupport::publish_d3_fixture(repo);
    NestedFixture fx(repo);
    std::string bytes = write_lock(make_lock(fx.resolution, fx.requests, repo));

    CHECK(code_of([] { parse_lock("not json at all"); }) == Errc::bad_lockfile);
    CHECK(code_of([] { parse_lock("{}"); }) == Errc::bad_lockfile);

    check_rejected(bytes, [](ojson& j) { j.erase("platform"); });
    check_rejected(bytes, [](ojson& j) { j["created_sequence"] = "seven"; });
    check_rejected(bytes, [](ojson& j) { j["resolved"]["mode"] = "spiral"; });
    check_rejected(bytes, [](ojson& j) { j["roots"][0]["name"] = "9bad"; });
    check_rejected(bytes, [](ojson& j) { j["roots"][0]["name"] = "request"; });
    check_rejected(bytes, [](ojson& j) { j["resolved"]["trees"][0]["version"] = "abc"; });
    check_rejected(bytes, [](ojson& j) { j["resolved"]["trees"][0]["children"] = 7; });
    check_rejected(bytes, [](ojson& j) { j["hashes"]["d3@2.10.3"] = "deadbeef"; });
    check_rejected(bytes, [](ojson& j) {
        j["hashes"]["d3@2.10.3"] = std::string(64, 'A');
    });
    check_rejected(bytes, [](ojson& j) { j["hashes"].erase("mime@1.2.7"); });
    check_rejected(bytes, [](ojson& j) { j["snapshot"] = ojson::object(); });
}

TEST_CASE("restore_lock rebuilds a store whose lockfile matches byte for byte") {
    TempDir tmp;
    Repository repo(tmp.sub("repo"));
    testsupport::publish_d3_fixture(repo);
    NestedFixture fx(repo);
    Lockfile lock = make_lock(fx.resolution, fx.requests, repo,
                              SnapshotBinding{"unstable", 0}, std::string("test-platform"));
    std::string original = write_lock(lock);

    std::filesystem::path lib = tmp.sub("lib");
    LibraryStore store = restore_lock(lock, repo, lib);
    CHECK(store.mode() == StoreMode::versioned);
    CHECK(store.installed().size() == 13);
    for (const auto& [name, vtext] : testsupport::d3_expected_pins())
        CHECK(store.find_installed(name, Version::parse(vtext)).has_value());
    REQUIRE(store.provenance().has_value());

    Lockfile rebuilt = lock_from_store(store);
    CHECK(write_lock(rebuilt) == original);
}

TEST_CASE("restore_lock replaces an existing store atomically") {
    TempDir tmp;
    Repository repo(tmp.sub("repo"));
    testsupport::publish_d3_fixture(repo);
    repo.publish(parse_dcf_manifest("Package: squatter\nVersion: 1.0\n"), "old bytes");

    std::filesystem::path lib = tmp.sub("lib");
    {
        LibraryStore old = LibraryStore::create(lib, StoreMode::versioned);
        old.install_one("squatter", Version::parse("1.0"), repo);
    }

    NestedFixture fx(repo);
    Lockfile lock = make_lock(fx.resolution, fx.requests, repo);
    LibraryStore store = restore_lock(lock, repo, lib);
    CHECK(store.installed().size() == 13);
    CHECK_FALSE(store.find_installed("squatter", Version::parse("1.0")).has_value());
}

TEST_CASE("restore_lock failures leave the target store untouched") {
    TempDir tmp;
    Repository repo(tmp.sub("repo"));
    testsupport::publish_d3_fixture(repo);
    NestedFixture fx(repo);
    Lockfile lock = make_lock(fx.resolution, fx.requests, repo);

    std::filesystem::path lib = tmp.sub("lib");
    restore_lock(lock, repo, lib);
    auto fingerprint = [&] {
        std::vector<std::string> names;
        for (const InstalledPackage& p : LibraryStore::open(lib).installed())
            names.push_back(p.name + "@" + p.version.text() + ":" + p.payload_hash);
        return names;
    };
    auto before = fingerprint();

    SUBCASE("a digest that disagrees with the archive") {
        Lockfile tampered = lock;
        tampered.hashes["mime@1.2.7"] = sha256_hex("somebody else's bytes");
        CHECK(code_of([&] { restore_lock(tampered, repo, lib); }) ==
              Errc::payload_hash_mismatch);
    }

    SUBCASE("a package version the archive never saw") {
        Lockfile unknown = lock;
        for (ResolutionTree& tree : unknown.trees)
            for (ResolutionTree& child : tree.children)
                if (child.name == "sizzle")
                    child.version = Version::parse("8.8.8");
        unknown.hashes.erase("sizzle@1.1.0");
        unknown.hashes.emplace("sizzle@8.8.8", std::string(64, 'b'));
        CHECK(code_of([&] { restore_lock(unknown, repo, lib); }) == Errc::unknown_version);
    }

    SUBCASE("a payload file deleted from the archive") {
        std::filesystem::remove(tmp.sub("repo") / "archive" / "mime" / "mime_1.2.7.pkg");
        CHECK(code_of([&] { restore_lock(lock, repo, lib); }) == Errc::missing_payload);
    }

    // The existing store still opens and holds exactly what it held before,
    // and no staging directories were left behind.
    CHECK(fingerprint() == before);
    for (const auto& entry : std::filesystem::directory_iterator(tmp.path())) {
        std::string name = entry.path().filename().string();
        CHECK(name.find(".staging-") == std::string::npos);
        CHECK(name.find(".old-") == std::string::npos);
    }
}

TEST_CASE("lock_from_store works without provenance, with supplied defaults") {
    TempDir tmp;
    Repository repo(tmp.sub("repo"));
    testsupport::publish_d3_fixture(repo);
    NestedFixture fx(repo);

    LibraryStore store = LibraryStore::create(tmp.sub("lib"), StoreMode::versioned);
    store.install_tree(fx.resolution.trees[0], "*", repo);

    Lockfile defaults = lock_from_store(store);
    CHECK(defaults.created_sequence == 0);
    CHECK_FALSE(defaults.snapshot.has_value());
    CHECK_FALSE(defaults.platform.has_value());
    CHECK(defaults.tool_version == tool_version);
    CHECK(defaults.roots == std::vector<RootSpec>{{"d3", "*"}});
    CHECK(defaults.trees == fx.resolution.trees);
    CHECK(defaults.hashes.size() == 13);

    // With the header fields supplied, the bytes match a directly-built lock.
    Lockfile filled = lock_from_store(store, repo.next_sequence(), std::nullopt);
    CHECK(write_lock(filled) == write_lock(make_lock(fx.resolution, fx.requests, repo)));
}

TEST_CASE("flat lockfiles restore and rebuild byte for byte") {
    TempDir tmp;
    Repository repo(tmp.sub("repo"));
    testsupport::publish_caret_fixture(repo);

    auto view = repo.view("unstable");
    std::vector<ResolveRequest> requests{{"caret", RangeDescriptor::wildcard()}};
    FlatResolution flat = resolve_flat(*view, requests);
    REQUIRE(flat.ok());
    Lockfile lock = make_lock(*flat.plan, requests, repo);
    std::string original = write_lock(lock);

    LibraryStore store = restore_lock(lock, repo, tmp.sub("lib"));
    CHECK(store.installed().size() == 3);
    auto records = store.tree_records();
    REQUIRE(records.size() == 1);
    CHECK_FALSE(records[0].nested);
    CHECK(write_lock(lock_from_store(store)) == original);
}

TEST_CASE("stores without coherent records cannot produce a lockfile") {
    TempDir tmp;
    Repository repo(tmp.sub("repo"));
    testsupport::publish_d3_fixture(repo);
    testsupport::publish_caret_fixture(repo);

    LibraryStore empty = LibraryStore::create(tmp.sub("empty"), StoreMode::versioned);
    CHECK(code_of([&] { lock_from_store(empty); }) == Errc::incomplete_resolution);

    // Mixed nested and flat records in one store.
    LibraryStore mixed = LibraryStore::create(tmp.sub("mixed"), StoreMode::versioned);
    NestedFixture fx(repo);
    mixed.install_tree(fx.resolution.trees[0], "*", repo);
    auto view = repo.view("unstable");
    std::vector<ResolveRequest> requests{{"caret", RangeDescriptor::wildcard()}};
    FlatResolution flat = resolve_flat(*view, requests);
    REQUIRE(flat.ok());
    mixed.install_plan(*flat.plan, requests, repo);
    CHECK(code_of([&] { lock_from_store(mixed); }) == Errc::incomplete_resolution);

    // Two flat records that disagree about a shared pin.
    LibraryStore split = LibraryStore::create(tmp.sub("split"), StoreMode::versioned);
    split.install_one("caret", Version::parse("4.78"), repo);
    split.install_one("lattice", Version::parse("0.19-13"), repo);
    TreeRecord a{"caret", "4.78", "*", false, std::nullopt, {{"caret", "4.78"},
                                                             {"lattice", "0.19-13"}}};
    TreeRecord b{"lattice", "0.19-13", "*", false, std::nullopt, {{"lattice", "0.20"}}};
    split.write_record(a);
    split.write_record(b);
    CHECK(code_of([&] { lock_from_store(split); }) == Errc::incomplete_resolution);

    // A record that references a package the store does not hold.
    LibraryStore hollow = LibraryStore::create(tmp.sub("hollow"), StoreMode::versioned);
    TreeRecord ghost{"caret", "4.78", "*", false, std::nullopt, {{"caret", "4.78"}}};
    hollow.write_record(ghost);
    CHECK(code_of([&] { lock_from_store(hollow); }) == Errc::store_corrupt);
}
