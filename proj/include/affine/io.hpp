#pragma once

#include <complex>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "affine/classify.hpp"
#include "affine/counters.hpp"
#include "affine/errors.hpp"
#include "affine/model.hpp"
#include "affine/simulate.hpp"

namespace affine {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Rationals: accepted as integers or "p/q" strings, emitted in the narrowest
// form that round-trips exactly.
// ---------------------------------------------------------------------------

inline Rational rational_from_json(const json& j, const std::string& where) {
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
    if (j.is_string()) {
        try {
            return Rational::parse(j.get<std::string>());
        } catch (const ParseError& e) {
            throw SchemaError(where + ": " + e.what());
        }
    }
    throw SchemaError(where + ": expected integer or \"p/q\" string");
}

inline json rational_to_json(const Rational& r) {
    if (r.is_integer()) return json(r.num());
    return json(r.to_string());
}

// ---------------------------------------------------------------------------
// Complex scalars on the wire: "a+bi" strings ("0.7i", "1", "-1-2i", "i").
// ---------------------------------------------------------------------------

inline std::complex<double> parse_complex(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw ParseError("empty complex literal");

    // Split at the sign that separates the two parts (not a leading sign, not
    // an exponent sign).
    std::size_t split = std::string::npos;
    for (std::size_t i = 1; i < s.size(); ++i) {
        if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E')
            split = i; // keep the last candidate
    }
    const auto parse_part = [&](std::string part, bool expect_imag) {
        double sign = 1.0;
        if (expect_imag) {
            if (part.empty() || part.back() != 'i')
                throw ParseError("malformed complex literal: \"" + text + "\"");
            part.pop_back();
            if (part.empty() || part == "+")
                return 1.0;
            if (part == "-") return -1.0;
        }
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(part, &pos);
        } catch (...) {
            throw ParseError("malformed complex literal: \"" + text + "\"");
        }
        if (pos != part.size()) throw ParseError("malformed complex literal: \"" + text + "\"");
        return sign * v;
    };

    if (split == std::string::npos) {
        if (s.back() == 'i') return {0.0, parse_part(s, true)};
        return {parse_part(s, false), 0.0};
    }
    const std::string head = s.substr(0, split);
    const std::string tail = s.substr(split);
    if (tail.back() == 'i') return {parse_part(head, false), parse_part(tail, true)};
    if (head.back() == 'i') return {parse_part(tail, false), parse_part(head, true)};
    throw ParseError("malformed complex literal: \"" + text + "\"");
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string complex_to_string(std::complex<double> z) {
    std::string out = format_double(z.real());
    out += z.imag() < 0 ? "-" : "+";
    out += format_double(std::abs(z.imag()));
    out += "i";
    return out;
}

// ---------------------------------------------------------------------------
// Model schema. A model document is a JSON object with fields
//   dimension: d
//   states:    explicit [[..],..] or {"kind":"interval","N":n} /
//              {"kind":"simplex","N":n}
//   channels:  [{"jump":[..], "intensity":{"linear":[..],"offset":r}}, ..]
//   drift:     optional {"matrix":[[..]],"offset":[..]}
//   hybrid:    optional layered extension, see hybrid_from_json
// Unknown keys are rejected.
// ---------------------------------------------------------------------------

namespace detail_io {

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw SchemaError(where + ": unknown key \"" + it.key() + "\"");
    }
}

inline Point point_from_json(const json& j, std::size_t d, const std::string& where) {
    if (!j.is_array() || j.size() != d)
        throw SchemaError(where + ": expected array of " + std::to_string(d) + " integers");
    Point p(d);
    for (std::size_t i = 0; i < d; ++i) {
        if (!j[i].is_number_integer())
            throw SchemaError(where + "/" + std::to_string(i) + ": expected integer");
        p[i] = j[i].get<std::int64_t>();
    }
    return p;
}

inline AffineFunctional functional_from_json(const json& j, std::size_t d,
                                             const std::string& where) {
    if (!j.is_object()) throw SchemaError(where + ": expected object");
    reject_unknown_keys(j, {"linear", "offset"}, where);
    if (!j.contains("linear") || !j["linear"].is_array() || j["linear"].size() != d)
        throw SchemaError(where + "/linear: expected array of " + std::to_string(d) +
                          " rationals");
    RatVec lin(d);
    for (std::size_t i = 0; i < d; ++i)
        lin[i] = rational_from_json(j["linear"][i], where + "/linear/" + std::to_string(i));
    Rational off(0);
    if (j.contains("offset")) off = rational_from_json(j["offset"], where + "/offset");
    return {std::move(lin), off};
}

inline AffineMap map_from_json(const json& j, std::size_t d, const std::string& where) {
    if (!j.is_object()) throw SchemaError(where + ": expected object");
    reject_unknown_keys(j, {"matrix", "offset"}, where);
    if (!j.contains("matrix") || !j["matrix"].is_array() || j["matrix"].size() != d)
        throw SchemaError(where + "/matrix: expected " + std::to_string(d) + " rows");
    RatMat m(d, RatVec(d));
    for (std::size_t i = 0; i < d; ++i) {
        const json& row = j["matrix"][i];
        if (!row.is_array() || row.size() != d)
            throw SchemaError(where + "/matrix/" + std::to_string(i) + ": expected " +
                              std::to_string(d) + " entries");
        for (std::size_t k = 0; k < d; ++k)
            m[i][k] = rational_from_json(row[k], where + "/matrix/" + std::to_string(i) + "/" +
                                                     std::to_string(k));
    }
    RatVec off(d, Rational(0));
    if (j.contains("offset")) {
        if (!j["offset"].is_array() || j["offset"].size() != d)
            throw SchemaError(where + "/offset: expected " + std::to_string(d) + " entries");
        for (std::size_t i = 0; i < d; ++i)
            off[i] = rational_from_json(j["offset"][i], where + "/offset/" + std::to_string(i));
    }
    return {std::move(m), std::move(off)};
}

} // namespace detail_io

inline AffineModel model_from_json(const json& j) {
    using namespace detail_io;
    if (!j.is_object()) throw SchemaError("/: expected object");
    reject_unknown_keys(j, {"dimension", "states", "channels", "drift", "hybrid"}, "/");

    if (!j.contains("dimension") || !j["dimension"].is_number_integer())
        throw SchemaError("/dimension: expected positive integer");
    const auto d_signed = j["dimension"].get<std::int64_t>();
    if (d_signed < 1) throw SchemaError("/dimension: expected positive integer");
    const std::size_t d = static_cast<std::size_t>(d_signed);

    if (!j.contains("states")) throw SchemaError("/states: required");
    std::optional<StateSpace> space;
    const json& st = j["states"];
    if (st.is_array()) {
        std::vector<Point> pts;
        for (std::size_t i = 0; i < st.size(); ++i)
            pts.push_back(point_from_json(st[i], d, "/states/" + std::to_string(i)));
        if (pts.empty()) throw SchemaError("/states: must be nonempty");
        space.emplace(d, std::move(pts));
    } else if (st.is_object()) {
        reject_unknown_keys(st, {"kind", "N"}, "/states");
        if (!st.contains("kind") || !st["kind"].is_string())
            throw SchemaError("/states/kind: expected string");
        if (!st.contains("N") || !st["N"].is_number_integer())
            throw SchemaError("/states/N: expected integer");
        const std::string kind = st["kind"].get<std::string>();
        const std::int64_t n = st["N"].get<std::int64_t>();
        if (kind == "interval") {
            if (d != 1) throw SchemaError("/states: interval generator requires dimension 1");
            space.emplace(StateSpace::interval(n));
        } else if (kind == "simplex") {
            space.emplace(StateSpace::simplex(d, n));
        } else {
            throw SchemaError("/states/kind: unknown generator \"" + kind + "\"");
        }
    } else {
        throw SchemaError("/states: expected array or generator object");
    }

    std::vector<JumpChannel> channels;
    if (j.contains("channels")) {
        if (!j["channels"].is_array()) throw SchemaError("/channels: expected array");
        for (std::size_t i = 0; i < j["channels"].size(); ++i) {
            const json& ch = j["channels"][i];
            const std::string where = "/channels/" + std::to_string(i);
            if (!ch.is_object()) throw SchemaError(where + ": expected object");
            reject_unknown_keys(ch, {"jump", "intensity"}, where);
            if (!ch.contains("jump") || !ch.contains("intensity"))
                throw SchemaError(where + ": requires jump and intensity");
            Point jump = point_from_json(ch["jump"], d, where + "/jump");
            if (point_is_zero(jump)) throw SchemaError(where + "/jump: must be nonzero");
            channels.push_back(
                {std::move(jump), functional_from_json(ch["intensity"], d, where + "/intensity")});
        }
    }

    std::optional<AffineMap> drift;
    if (j.contains("drift")) drift = detail_io::map_from_json(j["drift"], d, "/drift");

    return AffineModel(std::move(*space), JumpKernel(std::move(channels)), std::move(drift));
}

inline json functional_to_json(const AffineFunctional& f) {
    json lin = json::array();
    for (const auto& c : f.linear) lin.push_back(rational_to_json(c));
    return json{{"linear", std::move(lin)}, {"offset", rational_to_json(f.offset)}};
}

inline json map_to_json(const AffineMap& m) {
    json rows = json::array();
    for (const auto& row : m.matrix) {
        json r = json::array();
        for (const auto& c : row) r.push_back(rational_to_json(c));
        rows.push_back(std::move(r));
    }
    json off = json::array();
    for (const auto& c : m.offset) off.push_back(rational_to_json(c));
    return json{{"matrix", std::move(rows)}, {"offset", std::move(off)}};
}

inline json model_to_json(const AffineModel& model) {
    json states = json::array();
    for (const auto& p : model.space().points()) states.push_back(p);
    json channels = json::array();
    for (const auto& ch : model.kernel().channels())
        channels.push_back(
            json{{"jump", ch.jump}, {"intensity", functional_to_json(ch.intensity)}});
    json out{{"dimension", model.dimension()},
             {"states", std::move(states)},
             {"channels", std::move(channels)}};
    if (model.drift()) out["drift"] = map_to_json(*model.drift());
    return out;
}

/// Layered hybrid extension, stored alongside a one-dimensional base model:
///   hybrid: {"z_drift":[b0,b1,b2],
///            "z_jumps":[{"kind":"constant"|"uniform","c":..} per channel],
///            "z_bounds":[[lo,hi] per layer 0..N]}
inline HybridModel hybrid_from_json(const json& j) {
    using namespace detail_io;
    AffineModel base = model_from_json(j);
    if (!j.contains("hybrid")) throw SchemaError("/hybrid: required for a hybrid model");
    const json& h = j["hybrid"];
    reject_unknown_keys(h, {"z_drift", "z_jumps", "z_bounds"}, "/hybrid");
    if (!h.contains("z_drift") || !h["z_drift"].is_array() || h["z_drift"].size() != 3)
        throw SchemaError("/hybrid/z_drift: expected [b0, b1, b2]");
    std::array<double, 3> drift{};
    for (std::size_t i = 0; i < 3; ++i) {
        if (!h["z_drift"][i].is_number())
            throw SchemaError("/hybrid/z_drift/" + std::to_string(i) + ": expected number");
        drift[i] = h["z_drift"][i].get<double>();
    }
    const std::size_t n_channels = base.kernel().channels().size();
    std::vector<HybridModel::ZJump> jumps;
    if (!h.contains("z_jumps") || !h["z_jumps"].is_array() ||
        h["z_jumps"].size() != n_channels)
        throw SchemaError("/hybrid/z_jumps: expected one entry per channel (" +
                          std::to_string(n_channels) + ")");
    for (std::size_t i = 0; i < n_channels; ++i) {
        const json& zj = h["z_jumps"][i];
        const std::string where = "/hybrid/z_jumps/" + std::to_string(i);
        reject_unknown_keys(zj, {"kind", "c"}, where);
        if (!zj.contains("kind") || !zj["kind"].is_string() || !zj.contains("c") ||
            !zj["c"].is_number())
            throw SchemaError(where + ": expected {kind, c}");
        const std::string kind = zj["kind"].get<std::string>();
        HybridModel::ZJump out;
        if (kind == "constant")
            out.kind = HybridModel::ZJump::Kind::Constant;
        else if (kind == "uniform")
            out.kind = HybridModel::ZJump::Kind::Uniform;
        else
            throw SchemaError(where + "/kind: expected constant or uniform");
        out.c = zj["c"].get<double>();
        jumps.push_back(out);
    }
    std::vector<std::pair<double, double>> bounds;
    if (!h.contains("z_bounds") || !h["z_bounds"].is_array())
        throw SchemaError("/hybrid/z_bounds: expected array of [lo,hi]");
    for (std::size_t i = 0; i < h["z_bounds"].size(); ++i) {
        const json& b = h["z_bounds"][i];
        if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number())
            throw SchemaError("/hybrid/z_bounds/" + std::to_string(i) + ": expected [lo, hi]");
        bounds.emplace_back(b[0].get<double>(), b[1].get<double>());
    }
    return HybridModel(std::move(base), drift, std::move(jumps), std::move(bounds));
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("JSON parse error in ") + path + ": " + e.what());
    }
}

/// Loads and schema-validates a model file, expanding state generators.
inline AffineModel load_model(const std::string& path) {
    return model_from_json(load_json_file(path));
}

inline HybridModel load_hybrid_model(const std::string& path) {
    return hybrid_from_json(load_json_file(path));
}

inline void save_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open file for writing: " + path);
    out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Report serialization used by the CLI and tests.
// ---------------------------------------------------------------------------

inline json validation_report_to_json(const ValidationReport& report) {
    const auto issues_to_json = [](const std::vector<ValidationReport::Issue>& issues) {
        json arr = json::array();
        for (const auto& issue : issues) {
            json e{{"kind", issue_kind_name(issue.kind)}, {"detail", issue.detail}};
            if (issue.state) e["state"] = *issue.state;
            if (issue.jump) e["jump"] = *issue.jump;
            arr.push_back(std::move(e));
        }
        return arr;
    };
    return json{{"valid", report.valid},
                {"dimension", report.dimension},
                {"num_states", report.num_states},
                {"num_channels", report.num_channels},
                {"span_dim", report.span_dim},
                {"levy_integrability", report.levy_integrable ? "satisfied (finite support)"
                                                              : "violated"},
                {"errors", issues_to_json(report.errors)},
                {"warnings", issues_to_json(report.warnings)}};
}

inline json counter_to_json(const JumpCounter& c) {
    return json{{"jump", c.jump},
                {"linear", functional_to_json(c.functional)["linear"]},
                {"offset", rational_to_json(c.functional.offset)}};
}

inline json transform_result_to_json(const TransformResult& tr) {
    json basis = json::array();
    for (const auto& c : tr.counter_basis) basis.push_back(counter_to_json(c));
    return json{{"k", tr.k}, {"map", map_to_json(tr.map)}, {"basis", std::move(basis)}};
}

inline json classification1d_to_json(const Classification1D& c) {
    json out{{"kind", c.kind == Classification1D::Kind::Deterministic ? "Deterministic"
                                                                      : "BirthDeath"},
             {"N", c.n},
             {"normalizing_map", map_to_json(c.normalizing_map)}};
    if (c.kind == Classification1D::Kind::BirthDeath) {
        out["alpha_rate"] = rational_to_json(c.alpha_rate);
        out["beta_rate"] = rational_to_json(c.beta_rate);
    }
    return out;
}

inline json classification2d_to_json(const Classification2D& c) {
    json jumps = json::array();
    for (const auto& u : c.jump_set) jumps.push_back(u);
    json counters = json::array();
    for (const auto& jc : c.counters) counters.push_back(counter_to_json(jc));
    return json{{"case", classification2d_name(c.kind)},
                {"witness_map", map_to_json(c.witness_map)},
                {"jump_set", std::move(jumps)},
                {"counters", std::move(counters)}};
}

} // namespace affine
