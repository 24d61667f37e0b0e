#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "apkit/alternating.hpp"
#include "apkit/sets.hpp"
#include "apkit/vector.hpp"

namespace apkit {

/// Malformed or invalid problem file. `line` is 1-based, 0 when unknown.
class parse_error : public std::runtime_error {
public:
    parse_error(int line, std::string field, const std::string& message)
        : std::runtime_error(format(line, field, message)), line_(line), field_(std::move(field)) {}

    [[nodiscard]] int line() const noexcept { return line_; }
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    static std::string format(int line, const std::string& field, const std::string& message) {
        std::string s = "line " + std::to_string(line);
        if (!field.empty()) s += ", field '" + field + "'";
        return s + ": " + message;
    }

    int line_;
    std::string field_;
};

struct DiagnosticsRequest {
    bool rate = false;
    std::optional<IndexRange> window;
    bool transversality = false;
    std::optional<Vector> at;  ///< defaults to the final iterate of a converged run
    double radius = 0.1;
    std::size_t pairs = 128;
    std::size_t samples = 0;
    std::optional<double> linear_bound_c;

    friend bool operator==(const DiagnosticsRequest&, const DiagnosticsRequest&) = default;
};

inline bool operator==(const SolverConfig& a, const SolverConfig& b) {
    return a.max_iter == b.max_iter && a.gap_tol == b.gap_tol && a.stall_tol == b.stall_tol &&
           a.stall_window == b.stall_window && a.seed == b.seed && a.record_angles == b.record_angles &&
           a.start_side == b.start_side;
}

struct ProblemSpec {
    std::string name;
    std::size_t dim = 0;
    SetSpec X;
    SetSpec Y;
    Vector start;
    SolverConfig solver;
    DiagnosticsRequest diagnostics;
    std::uint64_t seed = 0;

    friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;
};

namespace detail {

/// Maps JSON paths ("X.directions[1]") to the line where they appear.
class LineIndex {
public:
    explicit LineIndex(std::string_view text) : text_(text) {
        Handler h{*this};
        Cursor first{text.data(), text.data(), &offset_};
        Cursor last{text.data() + text.size(), text.data(), &offset_};
        nlohmann::json::sax_parse(first, last, &h);
    }

    /// Line of the path, or of its nearest recorded ancestor.
    [[nodiscard]] int line_of(std::string path) const {
        for (;;) {
            if (auto it = lines_.find(path); it != lines_.end()) return it->second;
            if (path.empty()) return 1;
            const auto cut = path.find_last_of(".[");
            path = (cut == std::string::npos) ? std::string() : path.substr(0, cut);
        }
    }

private:
    struct Cursor {
        using iterator_category = std::input_iterator_tag;
        using value_type = char;
        using difference_type = std::ptrdiff_t;
        using pointer = const char*;
        using reference = const char&;

        const char* p;
        const char* base;
        std::size_t* offset;

        reference operator*() const { return *p; }
        Cursor& operator++() {
            ++p;
            *offset = static_cast<std::size_t>(p - base);
            return *this;
        }
        Cursor operator++(int) {
            Cursor c = *this;
            ++*this;
            return c;
        }
        friend bool operator==(const Cursor& a, const Cursor& b) { return a.p == b.p; }
        friend bool operator!=(const Cursor& a, const Cursor& b) { return a.p != b.p; }
    };

    struct Frame {
        bool array;
        std::size_t index;
        std::string key;
    };

    struct Handler : nlohmann::json_sax<nlohmann::json> {
        LineIndex& idx;
        std::vector<Frame> stack;
        std::string pending_key;

        explicit Handler(LineIndex& i) : idx(i) {}

        std::string path() const {
            std::string p;
            for (const Frame& f : stack) {
                if (f.array) p += "[" + std::to_string(f.index) + "]";
                else if (!f.key.empty()) p += (p.empty() ? "" : ".") + f.key;
            }
            return p;
        }
        void value_seen() {
            idx.record(path());
            if (!stack.empty() && stack.back().array) ++stack.back().index;
        }
        void open(bool array) {
            idx.record(path());
            stack.push_back({array, 0, {}});
        }
        void close() {
            stack.pop_back();
            if (!stack.empty() && stack.back().array) ++stack.back().index;
        }

        bool null() override { return value_seen(), true; }
        bool boolean(bool) override { return value_seen(), true; }
        bool number_integer(number_integer_t) override { return value_seen(), true; }
        bool number_unsigned(number_unsigned_t) override { return value_seen(), true; }
        bool number_float(number_float_t, const string_t&) override { return value_seen(), true; }
        bool string(string_t&) override { return value_seen(), true; }
        bool binary(binary_t&) override { return value_seen(), true; }
        bool start_object(std::size_t) override { return open(false), true; }
        bool end_object() override { return close(), true; }
        bool start_array(std::size_t) override { return open(true), true; }
        bool end_array() override { return close(), true; }
        bool key(string_t& k) override {
            stack.back().key = k;
            idx.record(path());
            return true;
        }
        bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override {
            return false;
        }
    };

    void record(const std::string& path) { lines_.emplace(path, line_at(offset_)); }

    [[nodiscard]] int line_at(std::size_t offset) const {
        offset = std::min(offset, text_.size());
        // Back over the lookahead character and any whitespace the lexer consumed.
        while (offset > 0 && std::isspace(static_cast<unsigned char>(text_[offset - 1]))) --offset;
        return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
    }

    std::string_view text_;
    std::size_t offset_ = 0;
    std::map<std::string, int> lines_;
};

class ProblemReader {
public:
    using json = nlohmann::json;

    explicit ProblemReader(std::string_view text) : lines_(text) {}

    [[noreturn]] void fail(const std::string& path, const std::string& message) const {
        throw parse_error(lines_.line_of(path), path, message);
    }

    static std::string join(const std::string& parent, const std::string& key) {
        return parent.empty() ? key : parent + "." + key;
    }

    const json& require(const json& obj, const std::string& path, const char* key) const {
        if (!obj.is_object()) fail(path, "expected an object");
        auto it = obj.find(key);
        if (it == obj.end()) fail(join(path, key), std::string(key) + " required");
        return *it;
    }

    const json* optional(const json& obj, const char* key) const {
        auto it = obj.find(key);
        return it == obj.end() ? nullptr : &*it;
    }

    double number(const json& j, const std::string& path) const {
        if (!j.is_number()) fail(path, "expected a number");
        const double v = j.get<double>();
        if (!std::isfinite(v)) fail(path, "expected a finite number");
        return v;
    }

    std::uint64_t count(const json& j, const std::string& path) const {
        if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() == 0)) {
            fail(path, "expected a non-negative integer");
        }
        return j.get<std::uint64_t>();
    }

    bool flag(const json& j, const std::string& path) const {
        if (!j.is_boolean()) fail(path, "expected true or false");
        return j.get<bool>();
    }

    /// Number, or the strings "inf" / "-inf" when `allow_infinite`.
    double bound(const json& j, const std::string& path, bool allow_infinite) const {
        if (allow_infinite && j.is_string()) {
            const auto s = j.get<std::string>();
            if (s == "inf") return std::numeric_limits<double>::infinity();
            if (s == "-inf") return -std::numeric_limits<double>::infinity();
            fail(path, "expected a number, \"inf\" or \"-inf\"");
        }
        return number(j, path);
    }

    Vector vector(const json& j, const std::string& path, std::size_t dim, bool allow_infinite = false) const {
        if (!j.is_array()) fail(path, "expected an array of numbers");
        if (j.size() != dim) {
            fail(path, "expected " + std::to_string(dim) + " entries, got " + std::to_string(j.size()));
        }
        Vector v(dim);
        for (std::size_t i = 0; i < dim; ++i) v[i] = bound(j[i], path + "[" + std::to_string(i) + "]", allow_infinite);
        return v;
    }

    SetSpec set(const json& j, const std::string& path, std::size_t dim) const {
        const json& type = require(j, path, "type");
        if (!type.is_string()) fail(join(path, "type"), "expected a string");
        const std::string kind = type.get<std::string>();
        try {
            if (kind == "affine") {
                Vector base = vector(require(j, path, "base"), join(path, "base"), dim);
                const json& dirs = require(j, path, "directions");
                const std::string dpath = join(path, "directions");
                if (!dirs.is_array()) fail(dpath, "expected an array of vectors");
                std::vector<Vector> directions;
                for (std::size_t i = 0; i < dirs.size(); ++i) {
                    directions.push_back(vector(dirs[i], dpath + "[" + std::to_string(i) + "]", dim));
                }
                if (!is_orthonormal(directions)) fail(dpath, "directions are not orthonormal");
                return SetSpec::affine(std::move(base), std::move(directions));
            }
            if (kind == "box") {
                return SetSpec::box(vector(require(j, path, "lo"), join(path, "lo"), dim, true),
                                    vector(require(j, path, "hi"), join(path, "hi"), dim, true));
            }
            if (kind == "ball" || kind == "sphere") {
                Vector center = vector(require(j, path, "center"), join(path, "center"), dim);
                const double radius = number(require(j, path, "radius"), join(path, "radius"));
                if (!(radius > 0.0)) fail(join(path, "radius"), "radius must be positive");
                return kind == "ball" ? SetSpec::ball(std::move(center), radius)
                                      : SetSpec::sphere(std::move(center), radius);
            }
            if (kind == "halfspace") {
                Vector normal = vector(require(j, path, "normal"), join(path, "normal"), dim);
                if (norm(normal) == 0.0) fail(join(path, "normal"), "normal must be nonzero");
                return SetSpec::halfspace(std::move(normal), number(require(j, path, "offset"), join(path, "offset")));
            }
            if (kind == "sparsity") {
                const std::uint64_t k = count(require(j, path, "k"), join(path, "k"));
                if (k > dim) fail(join(path, "k"), "k = " + std::to_string(k) + " exceeds dim = " + std::to_string(dim));
                return SetSpec::sparsity(dim, static_cast<std::size_t>(k));
            }
            if (kind == "union") {
                const json& members = require(j, path, "members");
                const std::string mpath = join(path, "members");
                if (!members.is_array() || members.empty()) fail(mpath, "expected a nonempty array of sets");
                std::vector<SetSpec> sets;
                for (std::size_t i = 0; i < members.size(); ++i) {
                    const std::string ipath = mpath + "[" + std::to_string(i) + "]";
                    SetSpec m = set(members[i], ipath, dim);
                    if (!m.is_convex()) fail(ipath, "union members must be convex");
                    sets.push_back(std::move(m));
                }
                return SetSpec::union_of(std::move(sets));
            }
            if (kind == "translated") {
                SetSpec inner = set(require(j, path, "inner"), join(path, "inner"), dim);
                return SetSpec::translated(std::move(inner), vector(require(j, path, "shift"), join(path, "shift"), dim));
            }
        } catch (const std::invalid_argument& e) {
            fail(path, e.what());
        }
        fail(join(path, "type"), "unknown set variant '" + kind + "'");
    }

private:
    LineIndex lines_;
};

}  // namespace detail

/**
 * Parses and validates a problem file (JSON). Required: dim, X, Y, start,
 * seed. Optional: name, start_side, solver, diagnostics.
 */
inline ProblemSpec parse_problem(std::string_view text) {
    using json = nlohmann::json;
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const std::size_t at = std::min<std::size_t>(e.byte, text.size());
        const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(at), '\n'));
        throw parse_error(line, "", std::string("malformed JSON: ") + e.what());
    }
    const detail::ProblemReader r(text);
    if (!root.is_object()) r.fail("", "top level must be an object");

    const std::uint64_t dim = r.count(r.require(root, "", "dim"), "dim");
    if (dim == 0) r.fail("dim", "dim must be positive");
    const std::size_t n = static_cast<std::size_t>(dim);

    SetSpec X = r.set(r.require(root, "", "X"), "X", n);
    SetSpec Y = r.set(r.require(root, "", "Y"), "Y", n);
    Vector start = r.vector(r.require(root, "", "start"), "start", n);
    const std::uint64_t seed = r.count(r.require(root, "", "seed"), "seed");

    SolverConfig solver;
    solver.seed = seed;
    if (const json* side = r.optional(root, "start_side")) {
        const std::string s = side->is_string() ? side->get<std::string>() : std::string();
        if (s == "X") solver.start_side = StartSide::X;
        else if (s == "Y") solver.start_side = StartSide::Y;
        else r.fail("start_side", "expected \"X\" or \"Y\"");
    }
    if (const json* s = r.optional(root, "solver")) {
        if (!s->is_object()) r.fail("solver", "expected an object");
        if (const json* v = r.optional(*s, "max_iter")) {
            solver.max_iter = r.count(*v, "solver.max_iter");
            if (solver.max_iter < 1) r.fail("solver.max_iter", "max_iter must be at least 1");
        }
        if (const json* v = r.optional(*s, "gap_tol")) solver.gap_tol = r.number(*v, "solver.gap_tol");
        if (const json* v = r.optional(*s, "stall_tol")) solver.stall_tol = r.number(*v, "solver.stall_tol");
        if (const json* v = r.optional(*s, "stall_window")) solver.stall_window = r.count(*v, "solver.stall_window");
        if (const json* v = r.optional(*s, "record_angles")) solver.record_angles = r.flag(*v, "solver.record_angles");
        if (solver.gap_tol < 0.0) r.fail("solver.gap_tol", "must be non-negative");
        if (solver.stall_tol < 0.0) r.fail("solver.stall_tol", "must be non-negative");
    }

    DiagnosticsRequest diag;
    if (const json* d = r.optional(root, "diagnostics")) {
        if (!d->is_object()) r.fail("diagnostics", "expected an object");
        if (const json* v = r.optional(*d, "rate")) diag.rate = r.flag(*v, "diagnostics.rate");
        if (const json* v = r.optional(*d, "window")) {
            if (!v->is_array() || v->size() != 2) r.fail("diagnostics.window", "expected [first, last]");
            diag.window = IndexRange{static_cast<std::size_t>(r.count((*v)[0], "diagnostics.window[0]")),
                                     static_cast<std::size_t>(r.count((*v)[1], "diagnostics.window[1]"))};
            if (diag.window->first > diag.window->last) r.fail("diagnostics.window", "first must not exceed last");
        }
        if (const json* v = r.optional(*d, "transversality")) diag.transversality = r.flag(*v, "diagnostics.transversality");
        if (const json* v = r.optional(*d, "at")) diag.at = r.vector(*v, "diagnostics.at", n);
        if (const json* v = r.optional(*d, "radius")) {
            diag.radius = r.number(*v, "diagnostics.radius");
            if (!(diag.radius > 0.0)) r.fail("diagnostics.radius", "radius must be positive");
        }
        if (const json* v = r.optional(*d, "pairs")) diag.pairs = r.count(*v, "diagnostics.pairs");
        if (const json* v = r.optional(*d, "samples")) diag.samples = r.count(*v, "diagnostics.samples");
        if (const json* v = r.optional(*d, "linear_bound_c")) {
            diag.linear_bound_c = r.number(*v, "diagnostics.linear_bound_c");
            if (!(*diag.linear_bound_c > 0.0 && *diag.linear_bound_c < 1.0)) {
                r.fail("diagnostics.linear_bound_c", "c must lie in (0, 1)");
            }
        }
    }

    std::string name;
    if (const json* v = r.optional(root, "name")) {
        if (!v->is_string()) r.fail("name", "expected a string");
        name = v->get<std::string>();
    }
    return ProblemSpec{std::move(name), n, std::move(X), std::move(Y), std::move(start), solver, diag, seed};
}

// ---------------------------------------------------------------------------
// Serialization back to the file format.
// ---------------------------------------------------------------------------

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson file_vector_json(const Vector& v) {
    ojson a = ojson::array();
    for (double x : v) {
        if (std::isinf(x)) a.push_back(x > 0 ? "inf" : "-inf");
        else a.push_back(x);
    }
    return a;
}

}  // namespace detail

inline nlohmann::ordered_json set_to_json(const SetSpec& set) {
    using detail::ojson;
    using detail::file_vector_json;
    return std::visit(
        [](const auto& s) -> ojson {
            using T = std::decay_t<decltype(s)>;
            ojson j;
            if constexpr (std::is_same_v<T, Affine>) {
                j["type"] = "affine";
                j["base"] = file_vector_json(s.base);
                j["directions"] = ojson::array();
                for (const Vector& d : s.directions) j["directions"].push_back(file_vector_json(d));
            } else if constexpr (std::is_same_v<T, Box>) {
                j["type"] = "box";
                j["lo"] = file_vector_json(s.lo);
                j["hi"] = file_vector_json(s.hi);
            } else if constexpr (std::is_same_v<T, Ball> || std::is_same_v<T, Sphere>) {
                j["type"] = std::is_same_v<T, Ball> ? "ball" : "sphere";
                j["center"] = file_vector_json(s.center);
                j["radius"] = s.radius;
            } else if constexpr (std::is_same_v<T, HalfSpace>) {
                j["type"] = "halfspace";
                j["normal"] = file_vector_json(s.normal);
                j["offset"] = s.offset;
            } else if constexpr (std::is_same_v<T, Sparsity>) {
                j["type"] = "sparsity";
                j["k"] = s.k;
            } else if constexpr (std::is_same_v<T, UnionOf>) {
                j["type"] = "union";
                j["members"] = ojson::array();
                for (const SetSpec& m : s.members) j["members"].push_back(set_to_json(m));
            } else {
                j["type"] = "translated";
                j["inner"] = set_to_json(*s.inner);
                j["shift"] = file_vector_json(s.shift);
            }
            return j;
        },
        set.variant());
}

inline nlohmann::ordered_json problem_to_json(const ProblemSpec& spec) {
    using detail::ojson;
    ojson j;
    if (!spec.name.empty()) j["name"] = spec.name;
    j["dim"] = spec.dim;
    j["X"] = set_to_json(spec.X);
    j["Y"] = set_to_json(spec.Y);
    j["start"] = detail::file_vector_json(spec.start);
    j["start_side"] = spec.solver.start_side == StartSide::X ? "X" : "Y";
    j["seed"] = spec.seed;
    ojson s;
    s["max_iter"] = spec.solver.max_iter;
    s["gap_tol"] = spec.solver.gap_tol;
    s["stall_tol"] = spec.solver.stall_tol;
    s["stall_window"] = spec.solver.stall_window;
    s["record_angles"] = spec.solver.record_angles;
    j["solver"] = s;
    const DiagnosticsRequest& d = spec.diagnostics;
    ojson dj;
    dj["rate"] = d.rate;
    if (d.window) dj["window"] = {d.window->first, d.window->last};
    dj["transversality"] = d.transversality;
    if (d.at) dj["at"] = detail::file_vector_json(*d.at);
    dj["radius"] = d.radius;
    dj["pairs"] = d.pairs;
    dj["samples"] = d.samples;
    if (d.linear_bound_c) dj["linear_bound_c"] = *d.linear_bound_c;
    j["diagnostics"] = dj;
    return j;
}

inline std::string emit_problem(const ProblemSpec& spec) { return problem_to_json(spec).dump(2) + "\n"; }

}  // namespace apkit
