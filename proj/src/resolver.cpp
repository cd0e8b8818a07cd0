#include "vpm/resolver.hpp"

#include "vpm/errors.hpp"

#include <algorithm>
#include <set>

namespace vpm {

namespace {

std::string join_path(const std::vector<std::string>& path) {
    std::string out;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i)
            out += " > ";
        out += path[i];
    }
    return out;
}

struct NestedResolver {
    const ResolutionView& view;
    const ResolveOptions& options;
    std::vector<std::string> warnings;
    std::vector<std::string> path_labels; // "name@version" for each ancestor
    std::vector<std::string> path_names;

    ResolutionTree resolve(const std::string& name, const RangeDescriptor& range) {
        for (const std::string& ancestor : path_names) {
            if (ancestor == name)
                fail(Errc::cycle_detected,
                     "dependency cycle: " + join_path(path_labels) + " > " + name);
        }
        std::vector<Version> candidates = view.available(name);
        std::optional<Version> best = max_satisfying(candidates, range);
        if (!best) {
            std::string detail = candidates.empty()
                                     ? "no versions of '" + name + "' are available"
                                     : "no version of '" + name + "' satisfies '" +
                                           range.text() + "'";
            if (!path_labels.empty())
                detail += " (required by " + join_path(path_labels) + ")";
            fail(Errc::unsatisfiable, detail);
        }

        ResolutionTree node{name, *best, {}};
        const PackageManifest* manifest = view.find_manifest(name, *best);
        if (!manifest)
            fail(Errc::unsatisfiable, "manifest for '" + name + "' disappeared mid-resolve");

        path_names.push_back(name);
        path_labels.push_back(name + "@" + best->text());
        for (const DependencyDecl& dep : manifest->dependencies) {
            if (dep.kind == DepKind::required) {
                node.children.push_back(resolve(dep.name, dep.range));
            } else if (options.include_optional && dep.auto_resolvable()) {
                try {
                    node.children.push_back(resolve(dep.name, dep.range));
                } catch (const Error& e) {
                    if (e.code() != Errc::unsatisfiable)
                        throw;
                    warnings.push_back("optional dependency '" + dep.name + "' of '" +
                                       path_labels.back() + "' skipped: " + e.what());
                }
            }
        }
        path_labels.pop_back();
        path_names.pop_back();
        return node;
    }
};

} // namespace

NestedResolution resolve_nested(const ResolutionView& view,
                                std::span<const ResolveRequest> requests,
                                const ResolveOptions& options) {
    NestedResolution result;
    NestedResolver resolver{view, options, {}, {}, {}};
    for (const ResolveRequest& request : requests)
        result.trees.push_back(resolver.resolve(request.name, request.range));
    result.warnings = std::move(resolver.warnings);
    return result;
}

FlatResolution resolve_flat(const ResolutionView& view,
                            std::span<const ResolveRequest> requests,
                            const ResolveOptions& options) {
    struct DemandRec {
        std::string requirer;
        const RangeDescriptor* range;
        bool optional;
    };

    std::set<std::string> root_names;
    for (const ResolveRequest& request : requests)
        root_names.insert(request.name);

    // The step bound guards against oscillating pin sets.
    std::size_t bound = 1;
    for (const ResolveRequest& request : requests)
        bound += view.available(request.name).size() + 1;

    std::map<std::string, Version> pins;
    FlatResolution result;

    for (std::size_t step = 0;; ++step) {
        std::map<std::string, std::vector<DemandRec>> demands;
        for (const ResolveRequest& request : requests)
            demands[request.name].push_back({"(request)", &request.range, false});
        for (const auto& [name, version] : pins) {
            const PackageManifest* manifest = view.find_manifest(name, version);
            if (!manifest)
                continue;
            for (const DependencyDecl& dep : manifest->dependencies) {
                if (dep.kind == DepKind::required)
                    demands[dep.name].push_back({name, &dep.range, false});
                else if (options.include_optional && dep.auto_resolvable())
                    demands[dep.name].push_back({name, &dep.range, true});
            }
        }

        // Grow the bound as new names enter the demand set.
        std::size_t full_bound = bound;
        for (const auto& [name, _] : demands)
            full_bound += view.available(name).size() + 1;

        std::map<std::string, Version> next;
        std::optional<ConflictReport> conflict;
        std::vector<std::string> warnings;

        for (const auto& [name, dlist] : demands) {
            std::vector<Version> candidates = view.available(name);
            auto pick = [&](bool drop_optional) -> std::optional<Version> {
                std::optional<Version> best;
                for (const Version& v : candidates) {
                    bool all = true;
                    for (const DemandRec& d : dlist) {
                        if (drop_optional && d.optional)
                            continue;
                        if (!satisfies(v, *d.range)) {
                            all = false;
                            break;
                        }
                    }
                    if (all && (!best || *best < v))
                        best = v;
                }
                return best;
            };

            std::optional<Version> best = pick(false);
            bool has_optional = std::any_of(dlist.begin(), dlist.end(),
                                            [](const DemandRec& d) { return d.optional; });
            bool dropped = false;
            if (!best && has_optional) {
                best = pick(true);
                dropped = best.has_value();
                bool only_optional = std::all_of(dlist.begin(), dlist.end(),
                                                 [](const DemandRec& d) { return d.optional; });
                if (!best && only_optional) {
                    warnings.push_back("optional dependency '" + name +
                                       "' has no satisfying version; skipped");
                    continue;
                }
            }
            if (dropped) {
                warnings.push_back("optional constraints on '" + name +
                                   "' conflict with required ones; optional demands dropped");
            }
            if (!best) {
                if (candidates.empty() && root_names.count(name))
                    fail(Errc::unsatisfiable, "no versions of '" + name + "' are available");
                if (!conflict || name < conflict->package) {
                    ConflictReport report;
                    report.package = name;
                    for (const DemandRec& d : dlist)
                        report.demands.push_back({d.requirer, d.range->text()});
                    std::string expl = "no version of '" + name + "' satisfies ";
                    for (std::size_t i = 0; i < report.demands.size(); ++i) {
                        if (i)
                            expl += ", ";
                        expl += report.demands[i].requirer + " ('" +
                                report.demands[i].range_text + "')";
                    }
                    if (candidates.empty())
                        expl += "; no versions are available";
                    report.explanation = std::move(expl);
                    conflict = std::move(report);
                }
                continue;
            }
            next.emplace(name, *best);
        }

        if (next == pins) {
            if (conflict) {
                result.conflict = std::move(conflict);
            } else {
                InstallPlan plan;
                plan.pins = std::move(next);
                for (const ResolveRequest& request : requests)
                    plan.roots.push_back(request.name);
                result.plan = std::move(plan);
            }
            result.warnings = std::move(warnings);
            return result;
        }
        if (step > full_bound)
            fail(Errc::resolution_diverged,
                 "flat resolution did not reach a fixed point within its step bound");
        pins = std::move(next);
    }
}

namespace {

void render_node(const ResolutionTree& node, const std::string& prefix, bool last,
                 std::string& out) {
    out += prefix;
    out += last ? "└─" : "├─";
    out += node.children.empty() ? "─ " : "┬ ";
    out += node.name;
    out += '@';
    out += node.version.text();
    out += '\n';
    std::string child_prefix = prefix + (last ? "  " : "│ ");
    for (std::size_t i = 0; i < node.children.size(); ++i)
        render_node(node.children[i], child_prefix, i + 1 == node.children.size(), out);
}

} // namespace

std::string render_tree(std::span<const ResolutionTree> trees) {
    std::string out;
    for (std::size_t i = 0; i < trees.size(); ++i)
        render_node(trees[i], "", i + 1 == trees.size(), out);
    return out;
}

nlohmann::ordered_json tree_to_json(const ResolutionTree& tree) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    j["name"] = tree.name;
    j["version"] = tree.version.text();
    nlohmann::ordered_json children = nlohmann::ordered_json::array();
    for (const ResolutionTree& child : tree.children)
        children.push_back(tree_to_json(child));
    j["children"] = children;
    return j;
}

ResolutionTree tree_from_json(const nlohmann::ordered_json& j) {
    if (!j.is_object() || !j.contains("name") || !j["name"].is_string() ||
        !j.contains("version") || !j["version"].is_string() || !j.contains("children") ||
        !j["children"].is_array())
        fail(Errc::bad_lockfile, "malformed resolution tree record");
    ResolutionTree tree;
    tree.name = j["name"].get<std::string>();
    tree.version = Version::parse(j["version"].get<std::string>());
    for (const auto& child : j["children"])
        tree.children.push_back(tree_from_json(child));
    return tree;
}

std::string conflict_to_text(const ConflictReport& report) {
    std::string out = "conflict: " + report.package + "\n";
    for (const Demand& demand : report.demands)
        out += "  " + demand.requirer + " requires '" + demand.range_text + "'\n";
    out += "  " + report.explanation + "\n";
    return out;
}

} // namespace vpm
