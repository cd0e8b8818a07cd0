#include "vpm/manifest.hpp"

#include "vpm/errors.hpp"

#include <json.hpp>

#include <cctype>
#include <set>
#include <utility>

namespace vpm {

using ojson = nlohmann::ordered_json;

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b]))
        ++b;
    while (e > b && is_space(s[e - 1]))
        --e;
    return s.substr(b, e - b);
}

bool is_name_char(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
           c == '.' || c == '-';
}

RangeDescriptor parse_dep_range(const std::string& dep_name, std::string_view text) {
    try {
        return RangeDescriptor::parse(text);
    } catch (const Error& e) {
        throw Error(e.code(), "dependency '" + dep_name + "': " + e.what());
    }
}

void finalize(PackageManifest& m) {
    if (!is_valid_package_name(m.name))
        fail(Errc::bad_package_name, "invalid package name '" + m.name + "'");
    std::set<std::pair<std::string, DepKind>> seen;
    for (const DependencyDecl& dep : m.dependencies) {
        if (!is_valid_package_name(dep.name))
            fail(Errc::bad_package_name, "invalid dependency name '" + dep.name + "'");
        if (dep.name == m.name)
            fail(Errc::self_dependency, "'" + m.name + "' depends on itself");
        if (!seen.insert({dep.name, dep.kind}).second)
            fail(Errc::duplicate_dependency,
                 "dependency '" + dep.name + "' declared twice with the same kind");
    }
}

// --- DCF -------------------------------------------------------------------

void parse_dcf_entries(std::string_view value, DepKind kind, DepOrigin origin,
                       std::vector<DependencyDecl>& out) {
    std::size_t start = 0;
    for (std::size_t i = 0; i <= value.size(); ++i) {
        if (i < value.size() && value[i] != ',')
            continue;
        std::string_view entry = trim(value.substr(start, i - start));
        start = i + 1;
        if (entry.empty())
            fail(Errc::bad_constraint_syntax, "empty dependency entry");

        std::size_t n = 0;
        while (n < entry.size() && is_name_char(entry[n]))
            ++n;
        std::string name(entry.substr(0, n));
        std::string_view rest = trim(entry.substr(n));

        DependencyDecl dep;
        dep.name = std::move(name);
        dep.kind = kind;
        dep.origin = origin;

        if (rest.empty()) {
            dep.range = RangeDescriptor::wildcard();
        } else if (rest.front() == '(') {
            if (rest.back() != ')')
                fail(Errc::bad_constraint_syntax,
                     "unterminated constraint in '" + std::string(entry) + "'");
            std::string_view inside = trim(rest.substr(1, rest.size() - 2));
            std::string_view op;
            for (std::string_view candidate : {">=", "<=", "=="}) {
                if (inside.starts_with(candidate)) {
                    op = candidate;
                    break;
                }
            }
            if (op.empty())
                fail(Errc::bad_constraint_syntax,
                     "constraint operator must be >=, <= or == in '" + std::string(entry) + "'");
            std::string_view vtext = trim(inside.substr(op.size()));
            if (vtext.empty())
                fail(Errc::bad_constraint_syntax,
                     "missing version in '" + std::string(entry) + "'");
            try {
                Version::parse(vtext);
            } catch (const Error& e) {
                fail(Errc::bad_constraint_syntax,
                     "bad version in '" + std::string(entry) + "': " + e.what());
            }
            // "==" normalizes to an exact pin, the others to a comparator.
            std::string range_text =
                op == "==" ? std::string(vtext) : std::string(op) + std::string(vtext);
            dep.range = parse_dep_range(dep.name, range_text);
        } else {
            fail(Errc::bad_constraint_syntax,
                 "unexpected text after name in '" + std::string(entry) + "'");
        }
        out.push_back(std::move(dep));
    }
}

} // namespace

bool is_valid_package_name(std::string_view name) {
    if (name.empty())
        return false;
    char first = name.front();
    bool alpha = (first >= 'A' && first <= 'Z') || (first >= 'a' && first <= 'z');
    if (!alpha)
        return false;
    for (char c : name)
        if (!is_name_char(c))
            return false;
    return true;
}

PackageManifest parse_dcf_manifest(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> fields;
    std::set<std::string> field_names;

    std::size_t line_start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i < text.size() && text[i] != '\n')
            continue;
        std::string_view line = text.substr(line_start, i - line_start);
        line_start = i + 1;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (trim(line).empty())
            continue;
        if (line.front() == ' ' || line.front() == '\t') {
            if (fields.empty())
                fail(Errc::manifest_syntax, "continuation line before any field");
            fields.back().second += ' ';
            fields.back().second += trim(line);
            continue;
        }
        std::size_t colon = line.find(':');
        if (colon == std::string_view::npos)
            fail(Errc::manifest_syntax, "expected 'Field: value' in '" + std::string(line) + "'");
        std::string key(trim(line.substr(0, colon)));
        if (key.empty())
            fail(Errc::manifest_syntax, "empty field name");
        if (!field_names.insert(key).second)
            fail(Errc::manifest_syntax, "duplicate field '" + key + "'");
        fields.emplace_back(std::move(key), std::string(trim(line.substr(colon + 1))));
    }

    auto find_field = [&](std::string_view key) -> const std::string* {
        for (const auto& [k, v] : fields)
            if (k == key)
                return &v;
        return nullptr;
    };

    PackageManifest m;
    const std::string* package = find_field("Package");
    if (!package)
        fail(Errc::missing_field, "required field 'Package' is missing");
    m.name = *package;
    const std::string* version = find_field("Version");
    if (!version)
        fail(Errc::missing_field, "required field 'Version' is missing");
    m.version = Version::parse(*version);
    if (const std::string* description = find_field("Description"))
        m.description = *description;

    for (const auto& [key, value] : fields) {
        if (key == "Depends")
            parse_dcf_entries(value, DepKind::required, DepOrigin::depends, m.dependencies);
        else if (key == "Imports")
            parse_dcf_entries(value, DepKind::required, DepOrigin::imports, m.dependencies);
        else if (key == "Suggests")
            parse_dcf_entries(value, DepKind::optional, DepOrigin::suggests, m.dependencies);
        else if (key == "Enhances")
            parse_dcf_entries(value, DepKind::optional, DepOrigin::enhances, m.dependencies);
    }

    finalize(m);
    return m;
}

PackageManifest parse_native_manifest(std::string_view text) {
    // Track duplicate keys during the parse; the DOM silently keeps the last.
    struct DupState {
        std::vector<std::set<std::string>> keys;
        std::vector<std::string> names;
        std::string last_key;
        bool found = false;
        std::string object_name;
        std::string key;
    } state;

    ojson::parser_callback_t cb = [&state](int, ojson::parse_event_t event, ojson& parsed) {
        switch (event) {
        case ojson::parse_event_t::object_start:
            state.names.push_back(state.last_key);
            state.keys.emplace_back();
            break;
        case ojson::parse_event_t::object_end:
            state.names.pop_back();
            state.keys.pop_back();
            break;
        case ojson::parse_event_t::key: {
            std::string k = parsed.get<std::string>();
            state.last_key = k;
            if (!state.keys.empty() && !state.keys.back().insert(k).second && !state.found) {
                state.found = true;
                state.object_name = state.names.back();
                state.key = k;
            }
            break;
        }
        default:
            break;
        }
        return true;
    };

    ojson doc;
    try {
        doc = ojson::parse(text, cb);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::manifest_syntax, std::string("invalid manifest json: ") + e.what());
    }
    if (state.found) {
        if (state.object_name == "dependencies" || state.object_name == "optionalDependencies")
            fail(Errc::duplicate_dependency,
                 "dependency '" + state.key + "' declared twice in " + state.object_name);
        fail(Errc::manifest_syntax, "duplicate key '" + state.key + "'");
    }
    if (!doc.is_object())
        fail(Errc::manifest_syntax, "manifest must be a json object");

    PackageManifest m;
    if (!doc.contains("name"))
        fail(Errc::missing_field, "required field 'name' is missing");
    if (!doc["name"].is_string())
        fail(Errc::manifest_syntax, "'name' must be a string");
    m.name = doc["name"].get<std::string>();

    if (!doc.contains("version"))
        fail(Errc::missing_field, "required field 'version' is missing");
    if (!doc["version"].is_string())
        fail(Errc::manifest_syntax, "'version' must be a string");
    m.version = Version::parse(doc["version"].get<std::string>());

    if (doc.contains("description")) {
        if (!doc["description"].is_string())
            fail(Errc::manifest_syntax, "'description' must be a string");
        m.description = doc["description"].get<std::string>();
    }

    auto read_deps = [&](const char* field, DepKind kind) {
        if (!doc.contains(field))
            return;
        const ojson& obj = doc[field];
        if (!obj.is_object())
            fail(Errc::manifest_syntax, std::string("'") + field + "' must be an object");
        for (const auto& [dep_name, dep_range] : obj.items()) {
            if (!dep_range.is_string())
                fail(Errc::manifest_syntax, "range for '" + dep_name + "' must be a string");
            DependencyDecl dep;
            dep.name = dep_name;
            dep.range = parse_dep_range(dep_name, dep_range.get<std::string>());
            dep.kind = kind;
            dep.origin = DepOrigin::native;
            m.dependencies.push_back(std::move(dep));
        }
    };
    read_deps("dependencies", DepKind::required);
    read_deps("optionalDependencies", DepKind::optional);

    finalize(m);
    return m;
}

PackageManifest parse_manifest(std::string_view text) {
    std::string_view body = trim(text);
    if (!body.empty() && body.front() == '{')
        return parse_native_manifest(text);
    return parse_dcf_manifest(text);
}

std::string to_native_text(const PackageManifest& manifest) {
    ojson doc = ojson::object();
    doc["name"] = manifest.name;
    doc["version"] = manifest.version.text();
    if (!manifest.description.empty())
        doc["description"] = manifest.description;
    ojson required = ojson::object();
    ojson optional = ojson::object();
    for (const DependencyDecl& dep : manifest.dependencies) {
        if (dep.kind == DepKind::required)
            required[dep.name] = dep.range.text();
        else
            optional[dep.name] = dep.range.text();
    }
    if (!required.empty())
        doc["dependencies"] = required;
    if (!optional.empty())
        doc["optionalDependencies"] = optional;
    return doc.dump(2) + "\n";
}

} // namespace vpm
