#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vpm/manifest.hpp"
#include "vpm/repository.hpp"
#include "vpm/view.hpp"

namespace testsupport {

// Renders exactly this 13-package tree when resolved from the d3 fixture.
inline const char* d3_golden_tree =
    "└─┬ d3@2.10.3\n"
    "  ├─┬ jsdom@0.2.14\n"
    "  │ ├─┬ contextify@0.1.3\n"
    "  │ │ └── bindings@1.0.0\n"
    "  │ ├── cssom@0.2.5\n"
    "  │ ├── htmlparser@1.7.6\n"
    "  │ └─┬ request@2.12.0\n"
    "  │   ├─┬ form-data@0.0.3\n"
    "  │   │ ├── async@0.1.9\n"
    "  │   │ └─┬ combined-stream@0.0.3\n"
    "  │   │   └── delayed-stream@0.0.5\n"
    "  │   └── mime@1.2.7\n"
    "  └── sizzle@1.1.0\n";

inline const std::vector<std::pair<std::string, std::string>>& d3_expected_pins() {
    static const std::vector<std::pair<std::string, std::string>> pins = {
        {"d3", "2.10.3"},           {"jsdom", "0.2.14"},
        {"contextify", "0.1.3"},    {"bindings", "1.0.0"},
        {"cssom", "0.2.5"},         {"htmlparser", "1.7.6"},
        {"request", "2.12.0"},      {"form-data", "0.0.3"},
        {"async", "0.1.9"},         {"combined-stream", "0.0.3"},
        {"delayed-stream", "0.0.5"}, {"mime", "1.2.7"},
        {"sizzle", "1.1.0"},
    };
    return pins;
}

// Native-format manifests. The last four are decoy releases the ranges must
// exclude for the golden tree to come out right.
inline const std::vector<std::string>& d3_manifests() {
    static const std::vector<std::string> manifests = {
        R"({"name": "d3", "version": "2.10.3",
            "dependencies": {"jsdom": "0.2.x", "sizzle": "~1.1"}})",
        R"({"name": "jsdom", "version": "0.2.14",
            "dependencies": {"contextify": "0.1.3", "cssom": ">=0.2.2",
                             "htmlparser": "1.7.6", "request": ">=2.9.202"}})",
        R"({"name": "contextify", "version": "0.1.3",
            "dependencies": {"bindings": "1.0.0"}})",
        R"({"name": "bindings", "version": "1.0.0"})",
        R"({"name": "cssom", "version": "0.2.5"})",
        R"({"name": "htmlparser", "version": "1.7.6"})",
        R"({"name": "request", "version": "2.12.0",
            "dependencies": {"form-data": "0.0.x", "mime": ">=1.2.5"}})",
        R"({"name": "form-data", "version": "0.0.3",
            "dependencies": {"async": "~0.1", "combined-stream": "0.0.x"}})",
        R"({"name": "async", "version": "0.1.9"})",
        R"({"name": "combined-stream", "version": "0.0.3",
            "dependencies": {"delayed-stream": "0.0.5"}})",
        R"({"name": "delayed-stream", "version": "0.0.5"})",
        R"({"name": "mime", "version": "1.2.7"})",
        R"({"name": "sizzle", "version": "1.1.0"})",
        R"({"name": "jsdom", "version": "0.3.0"})",
        R"({"name": "sizzle", "version": "1.2.0"})",
        R"({"name": "form-data", "version": "0.1.0"})",
        R"({"name": "delayed-stream", "version": "0.0.6"})",
    };
    return manifests;
}

inline void publish_manifests(vpm::Repository& repo, const std::vector<std::string>& texts) {
    for (const std::string& text : texts) {
        vpm::PackageManifest manifest = vpm::parse_native_manifest(text);
        repo.publish(manifest, "payload of " + manifest.name + "@" + manifest.version.text(),
                     text);
    }
}

inline void publish_d3_fixture(vpm::Repository& repo) {
    publish_manifests(repo, d3_manifests());
}

inline vpm::InMemoryView d3_view() {
    vpm::InMemoryView view;
    for (const std::string& text : d3_manifests())
        view.add(vpm::parse_native_manifest(text));
    return view;
}

// A and B agree on everything except which C they need.
inline const std::vector<std::string>& conflict_manifests() {
    static const std::vector<std::string> manifests = {
        R"({"name": "A", "version": "1.0.0", "dependencies": {"C": "==1.0.0"}})",
        R"({"name": "B", "version": "1.0.0", "dependencies": {"C": "==2.0.0"}})",
        R"({"name": "C", "version": "1.0.0"})",
        R"({"name": "C", "version": "2.0.0"})",
    };
    return manifests;
}

inline vpm::InMemoryView conflict_view() {
    vpm::InMemoryView view;
    for (const std::string& text : conflict_manifests())
        view.add(vpm::parse_native_manifest(text));
    return view;
}

// Shared dependency with overlapping but distinct ranges: flat resolution must
// settle on 1.9, nested resolution gives each parent its own pick.
inline vpm::InMemoryView diamond_view() {
    vpm::InMemoryView view;
    for (const char* text : {
             R"({"name": "top", "version": "1.0.0", "dependencies": {"left": "*", "right": "*"}})",
             R"({"name": "left", "version": "1.0.0", "dependencies": {"shared": "<2.0"}})",
             R"({"name": "right", "version": "1.0.0", "dependencies": {"shared": ">=1.5"}})",
             R"({"name": "shared", "version": "1.0"})",
             R"({"name": "shared", "version": "1.5"})",
             R"({"name": "shared", "version": "1.9"})",
             R"({"name": "shared", "version": "2.0"})",
         })
        view.add(vpm::parse_native_manifest(text));
    return view;
}

// Five reverse dependents of ggplot2 0.8.9; three pin the 0.8 series and break
// when 0.9.0 replaces it, two track whatever is newest.
inline const std::vector<std::string>& ggplot2_manifests() {
    static const std::vector<std::string> manifests = {
        R"({"name": "ggplot2", "version": "0.8.9"})",
        R"({"name": "ggExtra", "version": "1.0", "dependencies": {"ggplot2": "0.8.x"}})",
        R"({"name": "ggmap", "version": "1.0", "dependencies": {"ggplot2": "0.8.x"}})",
        R"({"name": "ggdendro", "version": "1.0", "dependencies": {"ggplot2": "0.8.x"}})",
        R"({"name": "ggally", "version": "1.0", "dependencies": {"ggplot2": "*"}})",
        R"({"name": "ggsubplot", "version": "1.0", "dependencies": {"ggplot2": "*"}})",
    };
    return manifests;
}

inline const char* ggplot2_candidate_text =
    R"({"name": "ggplot2", "version": "0.9.0"})";

// caret 4.78 and its reduced dependency set, DCF style.
inline const char* caret_dcf =
    "Package: caret\n"
    "Version: 4.78\n"
    "Depends: lattice (>= 0.19), reshape\n"
    "Suggests: gbm\n";

inline void publish_caret_fixture(vpm::Repository& repo) {
    struct Row {
        const char* text;
        bool dcf;
    };
    static const Row rows[] = {
        {caret_dcf, true},
        {"Package: lattice\nVersion: 0.19-13\n", true},
        {"Package: reshape\nVersion: 0.8.4\n", true},
        {"Package: gbm\nVersion: 1.6-3.1\n", true},
    };
    for (const Row& row : rows) {
        vpm::PackageManifest manifest = vpm::parse_dcf_manifest(row.text);
        repo.publish(manifest, "payload of " + manifest.name + "@" + manifest.version.text(),
                     row.text);
    }
}

} // namespace testsupport
