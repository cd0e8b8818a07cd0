#include "vpm/range.hpp"

#include "vpm/errors.hpp"

#include <cctype>
#include <stdexcept>

namespace vpm {

std::string_view to_symbol(CompareOp op) noexcept {
    switch (op) {
    case CompareOp::lt: return "<";
    case CompareOp::le: return "<=";
    case CompareOp::gt: return ">";
    case CompareOp::ge: return ">=";
    case CompareOp::eq: return "==";
    }
    return "?";
}

namespace {

struct Token {
    std::string_view text;
    std::size_t pos;
    bool is_or;
};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (is_space(text[i])) {
            ++i;
            continue;
        }
        if (text.compare(i, 2, "||") == 0) {
            out.push_back({text.substr(i, 2), i, true});
            i += 2;
            continue;
        }
        std::size_t start = i;
        while (i < text.size() && !is_space(text[i]) && text.compare(i, 2, "||") != 0)
            ++i;
        out.push_back({text.substr(start, i - start), start, false});
    }
    return out;
}

[[noreturn]] void syntax(std::size_t pos, const std::string& message) {
    fail(Errc::syntax_error, "at " + std::to_string(pos) + ": " + message);
}

Version version_at(std::string_view tok, std::size_t pos) {
    try {
        return Version::parse(tok);
    } catch (const Error& e) {
        syntax(pos, "bad version '" + std::string(tok) + "': " + e.what());
    }
}

std::vector<std::string_view> separator_segments(std::string_view tok) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= tok.size(); ++i) {
        if (i < tok.size() && tok[i] != '.' && tok[i] != '-')
            continue;
        out.push_back(tok.substr(start, i - start));
        start = i + 1;
    }
    return out;
}

Primitive parse_primitive(std::string_view tok, std::size_t pos) {
    if (tok.starts_with("http://") || tok.starts_with("https://"))
        fail(Errc::url_dependency_unsupported,
             "url dependency '" + std::string(tok) + "' is not supported");
    if (tok == "*")
        return Wildcard{};

    struct OpPrefix {
        std::string_view symbol;
        CompareOp op;
    };
    // Two-character operators must be tried first.
    static constexpr OpPrefix ops[] = {
        {">=", CompareOp::ge}, {"<=", CompareOp::le}, {"==", CompareOp::eq},
        {">", CompareOp::gt},  {"<", CompareOp::lt},
    };
    for (const auto& [symbol, op] : ops) {
        if (tok.starts_with(symbol)) {
            std::string_view rest = tok.substr(symbol.size());
            if (rest.empty())
                syntax(pos, "expected version after '" + std::string(symbol) + "'");
            return Comparator{op, version_at(rest, pos + symbol.size())};
        }
    }

    if (tok.starts_with("~")) {
        std::string_view rest = tok.substr(1);
        if (rest.empty())
            syntax(pos, "expected version after '~'");
        Version base = version_at(rest, pos + 1);
        if (base.components().size() < 2)
            syntax(pos, "'~' requires at least two version components");
        return Tilde{base};
    }

    // x placeholder: only meaningful as the final component.
    auto segs = separator_segments(tok);
    if (segs.size() >= 2 && segs.back() == "x") {
        std::string_view prefix_text = tok.substr(0, tok.size() - 2);
        Version prefix = version_at(prefix_text, pos);
        return XRange{prefix.components()};
    }

    return Exact{version_at(tok, pos)};
}

Conjunction parse_conjunction(const std::vector<Token>& toks, std::size_t fallback_pos) {
    if (toks.empty())
        syntax(fallback_pos, "empty alternative");
    Conjunction conj;
    std::size_t j = 0;
    while (j < toks.size()) {
        if (toks[j].text == "-")
            syntax(toks[j].pos, "dangling hyphen");
        if (j + 1 < toks.size() && toks[j + 1].text == "-") {
            // hyphen range: both bounds must be plain versions
            Version lo = version_at(toks[j].text, toks[j].pos);
            if (j + 2 >= toks.size())
                syntax(toks[j + 1].pos, "hyphen range is missing its upper bound");
            Version hi = version_at(toks[j + 2].text, toks[j + 2].pos);
            conj.primitives.push_back(HyphenRange{std::move(lo), std::move(hi)});
            j += 3;
            continue;
        }
        conj.primitives.push_back(parse_primitive(toks[j].text, toks[j].pos));
        ++j;
    }
    return conj;
}

} // namespace

RangeDescriptor RangeDescriptor::parse(std::string_view text) {
    std::size_t b = 0, e = text.size();
    while (b < e && is_space(text[b]))
        ++b;
    while (e > b && is_space(text[e - 1]))
        --e;
    std::string_view trimmed = text.substr(b, e - b);
    if (trimmed.empty())
        fail(Errc::empty_descriptor, "empty range descriptor");

    RangeDescriptor r;
    r.text_.assign(trimmed);

    auto tokens = tokenize(text);
    std::vector<Token> group;
    for (const Token& tok : tokens) {
        if (tok.is_or) {
            r.alternatives_.push_back(parse_conjunction(group, tok.pos));
            group.clear();
        } else {
            group.push_back(tok);
        }
    }
    r.alternatives_.push_back(parse_conjunction(group, text.size()));
    return r;
}

RangeDescriptor RangeDescriptor::wildcard() { return parse("*"); }

std::vector<Comparator> desugar(const Primitive& p) {
    struct Visitor {
        std::vector<Comparator> operator()(const Comparator& c) const { return {c}; }
        std::vector<Comparator> operator()(const HyphenRange& h) const {
            return {{CompareOp::ge, h.lo}, {CompareOp::le, h.hi}};
        }
        std::vector<Comparator> operator()(const Tilde& t) const {
            const auto& b = t.base.components();
            Version upper = Version::of({b[0], b[1] + 1});
            return {{CompareOp::ge, t.base}, {CompareOp::lt, std::move(upper)}};
        }
        std::vector<Comparator> operator()(const XRange& x) const {
            std::vector<std::uint64_t> up = x.prefix;
            up.back() += 1;
            return {{CompareOp::ge, Version::of(x.prefix)},
                    {CompareOp::lt, Version::of(std::move(up))}};
        }
        std::vector<Comparator> operator()(const Exact& e) const {
            return {{CompareOp::eq, e.version}};
        }
        std::vector<Comparator> operator()(const Wildcard&) const {
            throw std::logic_error("desugar called on wildcard");
        }
    };
    return std::visit(Visitor{}, p);
}

bool holds(const Version& v, const Comparator& c) noexcept {
    auto ord = v <=> c.version;
    switch (c.op) {
    case CompareOp::lt: return ord < 0;
    case CompareOp::le: return ord <= 0;
    case CompareOp::gt: return ord > 0;
    case CompareOp::ge: return ord >= 0;
    case CompareOp::eq: return ord == 0;
    }
    return false;
}

bool satisfies(const Version& v, const RangeDescriptor& r) {
    for (const Conjunction& conj : r.alternatives()) {
        bool all = true;
        for (const Primitive& p : conj.primitives) {
            if (std::holds_alternative<Wildcard>(p))
                continue;
            for (const Comparator& c : desugar(p)) {
                if (!holds(v, c)) {
                    all = false;
                    break;
                }
            }
            if (!all)
                break;
        }
        if (all)
            return true;
    }
    return false;
}

std::optional<Version> max_satisfying(std::span<const Version> candidates,
                                      const RangeDescriptor& r) {
    std::optional<Version> best;
    for (const Version& v : candidates) {
        if (!satisfies(v, r))
            continue;
        if (!best || *best < v)
            best = v;
    }
    return best;
}

} // namespace vpm
