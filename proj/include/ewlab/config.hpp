#pragma once

#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ewlab/algebra.hpp"
#include "ewlab/error.hpp"

namespace ewlab {

// ---------------------------------------------------------------------------
// TOML subset: [tables], key = value, numbers, strings, booleans and
// (nested, possibly multi-line) arrays. Comments start with '#'.
// ---------------------------------------------------------------------------

struct ParsedDocument {
    nlohmann::json root = nlohmann::json::object();
    std::map<std::string, int> line_of;  // "table.key" -> line number
};

namespace detail {

class TomlReader {
public:
    TomlReader(const std::string& text, int first_line) : s_(text), line_(first_line) {}

    nlohmann::json value() {
        skip_space();
        if (at_end()) error("missing value");
        const char c = s_[pos_];
        if (c == '[') return array();
        if (c == '"') return string();
        if (starts_with("true")) return advance_literal("true", true);
        if (starts_with("false")) return advance_literal("false", false);
        return number();
    }

    void expect_end() {
        skip_space();
        if (!at_end()) error("unexpected trailing characters '" + s_.substr(pos_) + "'");
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;
    int line_;

    [[noreturn]] void error(const std::string& what) const { fail(ErrorKind::config, "config line " + std::to_string(line_) + ": " + what); }

    bool at_end() const { return pos_ >= s_.size(); }
    bool starts_with(const char* lit) const { return s_.compare(pos_, std::char_traits<char>::length(lit), lit) == 0; }

    void skip_space() {
        while (!at_end()) {
            const char c = s_[pos_];
            if (c == '\n') {
                ++line_;
                ++pos_;
            } else if (c == ' ' || c == '\t' || c == '\r') {
                ++pos_;
            } else if (c == '#') {
                while (!at_end() && s_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    nlohmann::json advance_literal(const char* lit, bool v) {
        pos_ += std::char_traits<char>::length(lit);
        return v;
    }

    nlohmann::json array() {
        ++pos_;
        nlohmann::json out = nlohmann::json::array();
        skip_space();
        if (!at_end() && s_[pos_] == ']') {
            ++pos_;
            return out;
        }
        while (true) {
            out.push_back(value());
            skip_space();
            if (at_end()) error("unterminated array");
            if (s_[pos_] == ',') {
                ++pos_;
                skip_space();
                if (!at_end() && s_[pos_] == ']') {
                    ++pos_;
                    return out;
                }
                continue;
            }
            if (s_[pos_] == ']') {
                ++pos_;
                return out;
            }
            error("expected ',' or ']' in array");
        }
    }

    nlohmann::json string() {
        ++pos_;
        std::string out;
        while (!at_end() && s_[pos_] != '"') {
            char c = s_[pos_++];
            if (c == '\n') error("unterminated string");
            if (c == '\\') {
                if (at_end()) error("unterminated string");
                const char e = s_[pos_++];
                switch (e) {
                    case 'n': c = '\n'; break;
                    case 't': c = '\t'; break;
                    case '"': c = '"'; break;
                    case '\\': c = '\\'; break;
                    default: error(std::string("unsupported escape '\\") + e + "'");
                }
            }
            out.push_back(c);
        }
        if (at_end()) error("unterminated string");
        ++pos_;
        return out;
    }

    nlohmann::json number() {
        const std::size_t start = pos_;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' || s_[pos_] == '+' ||
                             s_[pos_] == '-'))
            ++pos_;
        std::string tok = s_.substr(start, pos_ - start);
        if (tok.empty()) error("invalid value");
        const bool integral = tok.find_first_of(".eE") == std::string::npos;
        const char* b = tok.data() + (tok[0] == '+' ? 1 : 0);
        const char* e = tok.data() + tok.size();
        if (integral) {
            long long v = 0;
            auto [p, ec] = std::from_chars(b, e, v);
            if (ec == std::errc() && p == e) return v;
        }
        double v = 0;
        auto [p, ec] = std::from_chars(b, e, v);
        if (ec != std::errc() || p != e) error("invalid value '" + tok + "'");
        if (!std::isfinite(v)) error("non-finite number '" + tok + "'");
        return v;
    }
};

inline bool is_bare_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
    return true;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_str = !in_str;
        if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

inline int bracket_balance(const std::string& s) {
    int depth = 0;
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
        if (in_str) continue;
        if (s[i] == '[') ++depth;
        if (s[i] == ']') --depth;
    }
    return depth;
}

}  // namespace detail

inline ParsedDocument parse_toml(const std::string& text) {
    ParsedDocument doc;
    std::vector<std::string> lines;
    {
        std::string cur;
        for (char c : text) {
            if (c == '\n') {
                lines.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        lines.push_back(cur);
    }
    std::string table;
    std::set<std::string> seen_tables;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const int lineno = static_cast<int>(i) + 1;
        auto err = [&](const std::string& what) { fail(ErrorKind::config, "config line " + std::to_string(lineno) + ": " + what); };
        const std::string line = detail::trim(detail::strip_comment(lines[i]));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) err("malformed table header");
            table = detail::trim(line.substr(1, line.size() - 2));
            if (!detail::is_bare_key(table)) err("invalid table name '" + table + "'");
            if (!seen_tables.insert(table).second) err("duplicate table [" + table + "]");
            doc.root[table] = nlohmann::json::object();
            doc.line_of[table] = lineno;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) err("expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        if (!detail::is_bare_key(key)) err("invalid key '" + key + "'");
        std::string rhs = line.substr(eq + 1);
        // Multi-line arrays: keep reading until brackets balance.
        std::size_t j = i;
        while (detail::bracket_balance(rhs) > 0 && j + 1 < lines.size()) {
            ++j;
            rhs += "\n" + detail::strip_comment(lines[j]);
        }
        if (detail::bracket_balance(rhs) != 0) err("unbalanced brackets");
        detail::TomlReader reader(rhs, lineno);
        nlohmann::json v = reader.value();
        reader.expect_end();
        nlohmann::json& tab = table.empty() ? doc.root : doc.root[table];
        if (tab.contains(key)) err("duplicate key '" + key + "'");
        tab[key] = std::move(v);
        doc.line_of[table.empty() ? key : table + "." + key] = lineno;
        i = j;
    }
    return doc;
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

enum class Mode { simulate, classify, spectral, scan, reconstruct, energy, check };

inline const std::vector<std::string>& mode_names() {
    static const std::vector<std::string> names{"simulate", "classify", "spectral", "scan", "reconstruct", "energy", "check"};
    return names;
}

inline std::string mode_name(Mode m) { return mode_names()[static_cast<std::size_t>(m)]; }

inline Mode parse_mode(const std::string& s) {
    const auto& n = mode_names();
    for (std::size_t k = 0; k < n.size(); ++k)
        if (n[k] == s) return static_cast<Mode>(k);
    fail(ErrorKind::config, "unknown mode '" + s + "'");
}

struct AxisSpec {
    double start = -3.0;
    double stop = 3.0;
    int count = 41;

    std::vector<double> values() const {
        std::vector<double> v;
        if (count == 1) return {start};
        for (int k = 0; k < count; ++k) v.push_back(start + (stop - start) * k / (count - 1));
        return v;
    }
};

struct GridSpec {
    AxisSpec re;
    AxisSpec im;
    std::vector<cplx> points;  // explicit list; replaces the rectangle when non-empty
    double match_tol = 1e-4;

    std::vector<cplx> values() const {
        if (!points.empty()) return points;
        std::vector<cplx> out;
        for (double x : re.values())
            for (double y : im.values()) out.push_back({x, y});
        return out;
    }
};

struct RunConfig {
    Mode mode = Mode::simulate;
    cplx q0{};
    cplx dq0{};
    double xi0 = 0.0;  // xi(0) = i * xi0
    cplx lambda{};
    double C = 0.0;
    int m = 1;
    int n = 1;
    std::optional<double> h0;
    bool branch_plus = true;
    double step = 1e-3;
    std::optional<double> length;  // empty: integrate one period
    double max_length = 100.0;
    double tol = 1e-6;
    std::optional<double> profile_step;
    GridSpec grid;
    int mesh_nx = 32;
    int mesh_stride = 0;  // 0: choose automatically
    std::string out_dir = "out";
    std::optional<std::string> trajectory_path;
};

namespace detail {

struct FieldReader {
    const ParsedDocument& doc;

    std::string where(const std::string& path) const {
        auto it = doc.line_of.find(path);
        return it == doc.line_of.end() ? path : "config line " + std::to_string(it->second) + ": " + path;
    }

    [[noreturn]] void error(const std::string& path, const std::string& what) const { fail(ErrorKind::config, where(path) + ": " + what); }

    const nlohmann::json* find(const std::string& table, const std::string& key) const {
        const nlohmann::json& root = doc.root;
        if (table.empty()) return root.contains(key) ? &root.at(key) : nullptr;
        if (!root.contains(table) || !root.at(table).is_object() || !root.at(table).contains(key)) return nullptr;
        return &root.at(table).at(key);
    }

    static std::string path(const std::string& table, const std::string& key) { return table.empty() ? key : table + "." + key; }

    double number(const nlohmann::json& v, const std::string& p) const {
        if (!v.is_number()) error(p, "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) error(p, "must be finite");
        return x;
    }

    cplx pair(const nlohmann::json& v, const std::string& p) const {
        if (v.is_number()) return {number(v, p), 0.0};
        if (!v.is_array() || v.size() != 2) error(p, "expected [re, im]");
        return {number(v[0], p), number(v[1], p)};
    }

    int integer(const nlohmann::json& v, const std::string& p) const {
        if (!v.is_number_integer()) error(p, "expected an integer");
        return v.get<int>();
    }

    std::string text(const nlohmann::json& v, const std::string& p) const {
        if (!v.is_string()) error(p, "expected a string");
        return v.get<std::string>();
    }

    AxisSpec axis(const nlohmann::json& v, const std::string& p) const {
        if (!v.is_array() || v.size() != 3) error(p, "expected [start, stop, count]");
        AxisSpec a{number(v[0], p), number(v[1], p), integer(v[2], p)};
        if (a.count < 1) error(p, "count must be positive");
        return a;
    }
};

}  // namespace detail

/// Keys accepted in each table.
inline const std::map<std::string, std::set<std::string>>& config_schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"", {"mode"}},
        {"initial", {"q", "dq", "xi"}},
        {"params", {"lambda", "C"}},
        {"seifert", {"m", "n", "h0", "branch"}},
        {"numerics", {"step", "length", "max_length", "tol", "profile_step"}},
        {"grid", {"re", "im", "points", "match_tol"}},
        {"mesh", {"nx", "stride"}},
        {"output", {"dir"}},
        {"input", {"trajectory"}},
    };
    return s;
}

inline const std::vector<std::string>& required_keys() {
    static const std::vector<std::string> k{"initial.q", "params.lambda", "params.C", "numerics.length"};
    return k;
}

inline RunConfig parse_config(const std::string& text) {
    const ParsedDocument doc = parse_toml(text);
    const detail::FieldReader rd{doc};
    const auto& schema = config_schema();

    for (auto it = doc.root.begin(); it != doc.root.end(); ++it) {
        if (it.value().is_object()) {
            auto tab = schema.find(it.key());
            if (tab == schema.end() || it.key().empty()) rd.error(it.key(), "unknown table [" + it.key() + "]");
            for (auto kt = it.value().begin(); kt != it.value().end(); ++kt)
                if (!tab->second.count(kt.key())) rd.error(it.key() + "." + kt.key(), "unknown key");
        } else if (!schema.at("").count(it.key())) {
            rd.error(it.key(), "unknown key");
        }
    }

    std::vector<std::string> missing;
    for (const auto& k : required_keys()) {
        const auto dot = k.find('.');
        if (!rd.find(k.substr(0, dot), k.substr(dot + 1))) missing.push_back(k);
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& k : missing) list += (list.empty() ? "" : ", ") + k;
        fail(ErrorKind::config, "missing required keys: " + list);
    }

    RunConfig c;
    auto get = [&](const std::string& t, const std::string& k) { return rd.find(t, k); };

    if (auto v = get("", "mode")) c.mode = parse_mode(rd.text(*v, "mode"));

    c.q0 = rd.pair(*get("initial", "q"), "initial.q");
    if (auto v = get("initial", "dq")) c.dq0 = rd.pair(*v, "initial.dq");
    if (auto v = get("initial", "xi")) {
        const cplx xi = rd.pair(*v, "initial.xi");
        // A bare number is read as the imaginary part.
        if (v->is_number()) {
            c.xi0 = xi.real();
        } else {
            if (xi.real() != 0.0) rd.error("initial.xi", "xi must be purely imaginary");
            c.xi0 = xi.imag();
        }
    }

    c.lambda = rd.pair(*get("params", "lambda"), "params.lambda");
    c.C = rd.number(*get("params", "C"), "params.C");

    if (auto v = get("seifert", "m")) c.m = rd.integer(*v, "seifert.m");
    if (auto v = get("seifert", "n")) c.n = rd.integer(*v, "seifert.n");
    if (c.m < 0 || c.n < 0) rd.error("seifert.m", "m and n must be nonnegative");
    if (std::gcd(c.m, c.n) != 1) rd.error("seifert.n", "gcd(m,n) must be 1");
    if (auto v = get("seifert", "h0")) {
        c.h0 = rd.number(*v, "seifert.h0");
        if (!(*c.h0 > 0)) rd.error("seifert.h0", "must be positive");
    }
    if (auto v = get("seifert", "branch")) {
        const std::string b = rd.text(*v, "seifert.branch");
        if (b != "plus" && b != "minus") rd.error("seifert.branch", "expected \"plus\" or \"minus\"");
        c.branch_plus = b == "plus";
    }

    if (auto v = get("numerics", "step")) c.step = rd.number(*v, "numerics.step");
    if (!(c.step > 0)) rd.error("numerics.step", "step must be positive");
    {
        const nlohmann::json& v = *get("numerics", "length");
        if (v.is_string()) {
            if (v.get<std::string>() != "period") rd.error("numerics.length", "expected a number or \"period\"");
        } else {
            c.length = rd.number(v, "numerics.length");
            if (!(*c.length > 0)) rd.error("numerics.length", "length must be positive");
        }
    }
    if (auto v = get("numerics", "max_length")) c.max_length = rd.number(*v, "numerics.max_length");
    if (auto v = get("numerics", "tol")) c.tol = rd.number(*v, "numerics.tol");
    if (!(c.tol > 0)) rd.error("numerics.tol", "tol must be positive");
    if (auto v = get("numerics", "profile_step")) {
        c.profile_step = rd.number(*v, "numerics.profile_step");
        if (!(*c.profile_step > 0)) rd.error("numerics.profile_step", "must be positive");
    }

    if (auto v = get("grid", "re")) c.grid.re = rd.axis(*v, "grid.re");
    if (auto v = get("grid", "im")) c.grid.im = rd.axis(*v, "grid.im");
    if (auto v = get("grid", "points")) {
        if (!v->is_array() || v->empty()) rd.error("grid.points", "expected a nonempty list of [re, im] pairs");
        for (const auto& p : *v) c.grid.points.push_back(rd.pair(p, "grid.points"));
    }
    if (auto v = get("grid", "match_tol")) c.grid.match_tol = rd.number(*v, "grid.match_tol");

    if (auto v = get("mesh", "nx")) c.mesh_nx = rd.integer(*v, "mesh.nx");
    if (c.mesh_nx < 8) rd.error("mesh.nx", "must be at least 8");
    if (auto v = get("mesh", "stride")) c.mesh_stride = rd.integer(*v, "mesh.stride");
    if (c.mesh_stride < 0) rd.error("mesh.stride", "must be nonnegative");

    if (auto v = get("output", "dir")) c.out_dir = rd.text(*v, "output.dir");
    if (auto v = get("input", "trajectory")) c.trajectory_path = rd.text(*v, "input.trajectory");
    return c;
}

}  // namespace ewlab
