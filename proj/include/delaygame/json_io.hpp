#pragma once

// JSON forms of histories, positions, control signals and reports.
//
// History literal:
//
//   {"h": 1.0, "segments": [
//       {"start": -1.0, "kind": "constant",   "value": [0, 1]},
//       {"start": -0.5, "kind": "polynomial", "origin": -0.5, "coeffs": [[0, 0], [1, 0]]},
//       {"start": -0.2, "kind": "sampled",    "nodes": [-0.2, -0.1, 0.0], "values": [[0, 0], [1, 1], [0, 2]]}]}
//
// Segment i covers [start_i, start_{i+1}) and the last one ends at 0. The
// first start must be -h. Polynomial coefficients are vectors c_k of
// sum_k c_k (xi - origin)^k; sampled values hold one vector per node. The
// shorthand {"h": 1.0, "constant": [0, 1]} is one constant segment.
//
// Control signal: {"constant": [u]}, {"cells": [[u], [u], ...]} (equal cells
// over [tau, theta]) or {"mesh": [...], "values": [[u], ...]}.

#include "delaygame/audit.hpp"
#include "delaygame/cicalculus.hpp"
#include "delaygame/dynamics.hpp"
#include "delaygame/history.hpp"
#include "delaygame/valuesolver.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace delaygame::io {

using nlohmann::json;

/// Invalid or missing configuration field; `field` is a dotted path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error("field '" + field + "': " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

inline std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

inline const json& require(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) throw ConfigError(join(path, key), "missing");
    return *it;
}

inline double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    return j.get<double>();
}

inline double number_or(const json& j, const std::string& key, const std::string& path, double fallback) {
    return j.is_object() && j.contains(key) ? number(j.at(key), join(path, key)) : fallback;
}

inline long long integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
    return j.get<long long>();
}

inline long long integer_or(const json& j, const std::string& key, const std::string& path, long long fallback) {
    return j.is_object() && j.contains(key) ? integer(j.at(key), join(path, key)) : fallback;
}

inline std::size_t count_or(const json& j, const std::string& key, const std::string& path, std::size_t fallback,
                            long long min = 0) {
    const long long v = integer_or(j, key, path, static_cast<long long>(fallback));
    if (v < min) throw ConfigError(join(path, key), "must be >= " + std::to_string(min));
    return static_cast<std::size_t>(v);
}

inline std::string string_or(const json& j, const std::string& key, const std::string& path, std::string fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    if (!j.at(key).is_string()) throw ConfigError(join(path, key), "expected a string");
    return j.at(key).get<std::string>();
}

inline Vec vector(const json& j, const std::string& path, Eigen::Index expected = -1) {
    if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], path + "[" + std::to_string(i) + "]");
    if (expected >= 0 && v.size() != expected)
        throw ConfigError(path, "expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()));
    return v;
}

inline std::vector<int> grid_counts(const json& j, const std::string& path) {
    if (j.is_number_integer()) return {j.get<int>()};
    if (!j.is_array()) throw ConfigError(path, "expected an integer or an array of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(static_cast<int>(integer(j[i], path + "[" + std::to_string(i) + "]")));
    return out;
}

inline json to_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

// ---- histories --------------------------------------------------------------

inline History history_from_json(const json& j, const std::string& path, Eigen::Index dim = -1) {
    const double h = number(require(j, "h", path), join(path, "h"));
    if (!(h > 0.0)) throw ConfigError(join(path, "h"), "must be positive");
    try {
        if (j.contains("constant")) return History::constant(h, vector(j.at("constant"), join(path, "constant"), dim));
        const json& segs = require(j, "segments", path);
        if (!segs.is_array() || segs.empty()) throw ConfigError(join(path, "segments"), "expected a non-empty array");
        std::vector<double> knots;
        std::vector<Segment> pieces;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            const std::string p = join(path, "segments") + "[" + std::to_string(i) + "]";
            const json& s = segs[i];
            knots.push_back(number(require(s, "start", p), join(p, "start")));
            const std::string kind = string_or(s, "kind", p, "constant");
            if (kind == "constant") {
                pieces.push_back(ConstantPiece{vector(require(s, "value", p), join(p, "value"), dim)});
            } else if (kind == "polynomial") {
                const json& cs = require(s, "coeffs", p);
                if (!cs.is_array() || cs.empty()) throw ConfigError(join(p, "coeffs"), "expected a non-empty array");
                PolynomialPiece poly;
                poly.origin = number_or(s, "origin", p, knots.back());
                for (std::size_t k = 0; k < cs.size(); ++k)
                    poly.coeffs.push_back(vector(cs[k], join(p, "coeffs") + "[" + std::to_string(k) + "]", dim));
                pieces.push_back(std::move(poly));
            } else if (kind == "sampled") {
                const json& ns = require(s, "nodes", p);
                const json& vs = require(s, "values", p);
                if (!ns.is_array() || !vs.is_array() || ns.size() != vs.size() || ns.size() < 2)
                    throw ConfigError(p, "nodes and values need the same length >= 2");
                SampledPiece sp;
                for (std::size_t k = 0; k < ns.size(); ++k) sp.nodes.push_back(number(ns[k], join(p, "nodes")));
                for (std::size_t k = 0; k < vs.size(); ++k) {
                    const Vec v = vector(vs[k], join(p, "values") + "[" + std::to_string(k) + "]", dim);
                    if (k == 0) sp.values.resize(v.size(), static_cast<Eigen::Index>(vs.size()));
                    else if (v.size() != sp.values.rows()) throw ConfigError(join(p, "values"), "ragged value vectors");
                    sp.values.col(static_cast<Eigen::Index>(k)) = v;
                }
                pieces.push_back(std::move(sp));
            } else {
                throw ConfigError(join(p, "kind"), "unknown segment kind '" + kind + "'");
            }
        }
        knots.push_back(0.0);
        return History(h, std::move(knots), std::move(pieces));
    } catch (const DomainError& e) {
        throw ConfigError(path, e.what());
    }
}

inline json history_to_json(const History& w) {
    json segs = json::array();
    for (std::size_t i = 0; i < w.segments().size(); ++i) {
        json s;
        s["start"] = w.knots()[i];
        std::visit(
            [&s](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, ConstantPiece>) {
                    s["kind"] = "constant";
                    s["value"] = to_json(p.value);
                } else if constexpr (std::is_same_v<T, PolynomialPiece>) {
                    s["kind"] = "polynomial";
                    s["origin"] = p.origin;
                    s["coeffs"] = json::array();
                    for (const Vec& c : p.coeffs) s["coeffs"].push_back(to_json(c));
                } else {
                    s["kind"] = "sampled";
                    s["nodes"] = p.nodes;
                    s["values"] = json::array();
                    for (Eigen::Index k = 0; k < p.values.cols(); ++k) s["values"].push_back(to_json(p.values.col(k)));
                }
            },
            w.segments()[i]);
        segs.push_back(std::move(s));
    }
    return {{"h", w.delay()}, {"segments", std::move(segs)}};
}

// ---- positions and signals --------------------------------------------------

inline GamePosition position_from_json(const json& j, const std::string& path, const GameSpec& game) {
    GamePosition pos;
    pos.tau = number(require(j, "tau", path), join(path, "tau"));
    pos.z = vector(require(j, "z", path), join(path, "z"), game.n);
    pos.w = history_from_json(require(j, "history", path), join(path, "history"), game.n);
    if (pos.w.delay() != game.h) throw ConfigError(join(path, "history.h"), "does not match the game's delay");
    if (!(pos.tau >= game.t0 && pos.tau <= game.theta)) throw ConfigError(join(path, "tau"), "outside [t0, theta]");
    return pos;
}

inline json position_to_json(const GamePosition& pos) {
    return {{"tau", pos.tau}, {"z", to_json(pos.z)}, {"history", history_to_json(pos.w)}};
}

inline ControlSignal signal_from_json(const json& j, const std::string& path, double from, double to,
                                     const ControlBox& box) {
    ControlSignal s;
    if (j.is_object() && j.contains("constant")) {
        s = ControlSignal::constant(from, to, vector(j.at("constant"), join(path, "constant"), box.dim()));
    } else if (j.is_object() && j.contains("cells")) {
        const json& cs = j.at("cells");
        if (!cs.is_array() || cs.empty()) throw ConfigError(join(path, "cells"), "expected a non-empty array");
        std::vector<Vec> vals;
        for (std::size_t k = 0; k < cs.size(); ++k)
            vals.push_back(vector(cs[k], join(path, "cells") + "[" + std::to_string(k) + "]", box.dim()));
        s = ControlSignal::uniform(from, to, std::move(vals));
    } else if (j.is_object() && j.contains("mesh")) {
        const json& ms = j.at("mesh");
        const json& vs = require(j, "values", path);
        if (!ms.is_array() || !vs.is_array()) throw ConfigError(path, "mesh and values must be arrays");
        for (std::size_t k = 0; k < ms.size(); ++k) s.mesh.push_back(number(ms[k], join(path, "mesh")));
        for (std::size_t k = 0; k < vs.size(); ++k)
            s.values.push_back(vector(vs[k], join(path, "values") + "[" + std::to_string(k) + "]", box.dim()));
    } else {
        throw ConfigError(path, "expected one of 'constant', 'cells' or 'mesh'");
    }
    try {
        s.validate(box, from, to);
    } catch (const DomainError& e) {
        throw ConfigError(path, e.what());
    }
    return s;
}

// ---- reports ----------------------------------------------------------------

inline json to_json(const ValueEstimate& e) {
    return {{"value", e.value},         {"steps", e.steps},           {"u_grid", e.u_grid},
            {"v_grid", e.v_grid},       {"node_count", e.node_count}, {"elapsed_ms", e.elapsed_ms}};
}

inline json to_json(const ConditionReport& r) {
    return {{"samples", r.samples},
            {"radius", r.radius},
            {"growth_constant", r.growth_constant},
            {"lipschitz_f", r.lipschitz_f},
            {"lipschitz_sigma", r.lipschitz_sigma},
            {"max_isaacs_gap", r.max_isaacs_gap},
            {"isaacs_grid_spacing", r.isaacs_grid_spacing}};
}

inline json to_json(const ResidualEntry& e) {
    return {{"kind", to_string(e.candidate.kind)},
            {"p0", e.candidate.p0},
            {"p", to_json(e.candidate.p)},
            {"residual", e.residual},
            {"uncertainty", e.uncertainty},
            {"verdict", to_string(e.verdict)}};
}

inline json to_json(const MembershipResult& m) {
    return {{"verdict", to_string(m.verdict)},
            {"worst_violation", m.worst_violation},
            {"worst_direction", {{"l0", m.worst_direction.l0}, {"l", to_json(m.worst_direction.l)}}},
            {"uncertainty", m.worst_uncertainty},
            {"directions", m.directions_checked}};
}

inline json to_json(const StabilityResiduals& s) {
    return {{"u_residual", s.u_residual},
            {"v_residual", s.v_residual},
            {"phi", s.phi_at_position},
            {"node_count", s.node_count}};
}

} // namespace delaygame::io
