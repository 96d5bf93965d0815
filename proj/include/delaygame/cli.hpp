#pragma once

// Command layer behind the delaygame command-line tool. Each command takes a
// parsed RunConfig document and returns an exit code, a JSON report and, for
// `simulate`, a CSV trajectory. No file or console I/O happens here.
//
// RunConfig:
//
//   {"game": "demo", "game_options": {...},
//    "position": {"tau": 2.5, "z": [1, 0], "history": <history literal>},
//    "seed": 0,
//    "simulate":    {"steps": 100, "scheme": "euler", "u": <signal>, "v": <signal>},
//    "hamiltonian": {"s": [[1, -1], ...], "u_grid": [2001], "v_grid": [3]},
//    "value":       {"steps": 1, "u_grid": [...], "v_grid": [...], "substeps": 1,
//                    "node_budget": 1e7, "scheme": "euler", "memoize": false},
//    "verify":      {"functional": "demo_phi", "samples": 20, "positions": [...],
//                    "tolerance": 5e-3, "terminal_tolerance": 1e-10, "directions": 8},
//    "audit":       {"samples": 200, "radius": 1.0, "u_grid": [...], "v_grid": [...]}}
//
// Only the block of the command being run is read. `verify` and `audit` do
// not need a position.

#include "delaygame/audit.hpp"
#include "delaygame/cicalculus.hpp"
#include "delaygame/dynamics.hpp"
#include "delaygame/errors.hpp"
#include "delaygame/hamiltonian.hpp"
#include "delaygame/json_io.hpp"
#include "delaygame/registry.hpp"
#include "delaygame/valuesolver.hpp"

#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

namespace delaygame::cli {

using io::ConfigError;
using io::json;

enum ExitCode : int { kOk = 0, kVerificationFailed = 1, kConfigError = 2, kBudgetExceeded = 3 };

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<double> tolerance;
};

struct CommandResult {
    int exit_code = kOk;
    json report;
    std::string csv;      // simulate only
    std::string message;  // diagnostics for stderr
};

namespace detail {

inline const json& block(const json& config, const char* name) {
    static const json empty = json::object();
    if (!config.contains(name)) return empty;
    const json& b = config.at(name);
    if (!b.is_object()) throw ConfigError(name, "expected an object");
    return b;
}

inline GameSpec load_game(const json& config) {
    const json& name = io::require(config, "game", "");
    if (!name.is_string()) throw ConfigError("game", "expected a registry name");
    const auto& table = registry::games();
    const auto it = table.find(name.get<std::string>());
    if (it == table.end()) throw ConfigError("game", "unknown game '" + name.get<std::string>() + "'");
    const json options = config.contains("game_options") ? config.at("game_options") : json();
    if (!options.is_null() && !options.is_object()) throw ConfigError("game_options", "expected an object");
    try {
        GameSpec g = it->second.make(options);
        g.validate();
        return g;
    } catch (const DomainError& e) {
        throw ConfigError("game_options", e.what());
    }
}

inline Scheme load_scheme(const json& b, const std::string& path) {
    const std::string s = io::string_or(b, "scheme", path, "euler");
    if (s == "euler") return Scheme::Euler;
    if (s == "heun") return Scheme::Heun;
    throw ConfigError(io::join(path, "scheme"), "expected 'euler' or 'heun'");
}

inline std::uint64_t seed_of(const json& config, const RunOptions& opts) {
    if (opts.seed) return *opts.seed;
    const long long s = io::integer_or(config, "seed", "", 0);
    if (s < 0) throw ConfigError("seed", "must be >= 0");
    return static_cast<std::uint64_t>(s);
}

inline GridCounts load_grids(const json& b, const std::string& path) {
    GridCounts g;
    if (b.contains("u_grid")) g.u = io::grid_counts(b.at("u_grid"), io::join(path, "u_grid"));
    if (b.contains("v_grid")) g.v = io::grid_counts(b.at("v_grid"), io::join(path, "v_grid"));
    return g;
}

inline void check_grids(const GameSpec& game, const GridCounts& g, const std::string& path) {
    try {
        game.U.grid(g.u);
        game.V.grid(g.v);
    } catch (const DomainError& e) {
        throw ConfigError(path, e.what());
    }
    for (int c : g.u)
        if (c < 1) throw ConfigError(io::join(path, "u_grid"), "counts must be >= 1");
    for (int c : g.v)
        if (c < 1) throw ConfigError(io::join(path, "v_grid"), "counts must be >= 1");
}

inline std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << x;
    return os.str();
}

} // namespace detail

inline CommandResult cmd_simulate(const json& config, const RunOptions& = {}) {
    const GameSpec game = detail::load_game(config);
    const GamePosition pos = io::position_from_json(io::require(config, "position", ""), "position", game);
    if (!(pos.tau < game.theta)) throw ConfigError("position.tau", "must precede theta");
    const json& b = detail::block(config, "simulate");
    const std::size_t steps = io::count_or(b, "steps", "simulate", 100, 1);
    const Scheme scheme = detail::load_scheme(b, "simulate");
    auto signal = [&](const char* key, const ControlBox& box) {
        if (b.contains(key)) return io::signal_from_json(b.at(key), std::string("simulate.") + key, pos.tau, game.theta, box);
        return ControlSignal::constant(pos.tau, game.theta, (0.5 * (box.lower() + box.upper())).eval());
    };
    const ControlSignal u = signal("u", game.U);
    const ControlSignal v = signal("v", game.V);

    const Motion m = integrate(game, pos, u, v, steps, scheme);
    CommandResult out;
    out.report = {{"command", "simulate"},
                  {"game", game.name},
                  {"gamma", payoff(game, m, u, v)},
                  {"mesh", {{"tau", pos.tau}, {"theta", game.theta}, {"steps", steps}, {"dt", m.dt()},
                            {"scheme", scheme == Scheme::Euler ? "euler" : "heun"}}},
                  {"lipschitz_estimate", m.lipschitz_estimate()},
                  {"terminal_state", io::to_json(m.terminal_state())}};

    std::ostringstream csv;
    csv << "t";
    for (Eigen::Index i = 0; i < game.n; ++i) csv << ",x_" << i + 1;
    for (Eigen::Index i = 0; i < game.l; ++i) csv << ",u_" << i + 1;
    for (Eigen::Index i = 0; i < game.m; ++i) csv << ",v_" << i + 1;
    csv << "\n";
    for (std::size_t k = 0; k < m.size(); ++k) {
        const double t = m.time(k);
        csv << detail::fmt(t);
        const Vec x = m.state(k);
        const Vec uk = u.value_at(t);
        const Vec vk = v.value_at(t);
        for (Eigen::Index i = 0; i < x.size(); ++i) csv << "," << detail::fmt(x(i));
        for (Eigen::Index i = 0; i < uk.size(); ++i) csv << "," << detail::fmt(uk(i));
        for (Eigen::Index i = 0; i < vk.size(); ++i) csv << "," << detail::fmt(vk(i));
        csv << "\n";
    }
    out.csv = csv.str();
    return out;
}

inline CommandResult cmd_hamiltonian(const json& config, const RunOptions& = {}) {
    const GameSpec game = detail::load_game(config);
    const GamePosition pos = io::position_from_json(io::require(config, "position", ""), "position", game);
    const json& b = detail::block(config, "hamiltonian");
    const GridCounts grids = detail::load_grids(b, "hamiltonian");
    detail::check_grids(game, grids, "hamiltonian");
    const json& ss = io::require(b, "s", "hamiltonian");
    std::vector<Vec> costates;
    if (ss.is_array() && !ss.empty() && ss.front().is_number()) {
        costates.push_back(io::vector(ss, "hamiltonian.s", game.n));
    } else {
        if (!ss.is_array() || ss.empty()) throw ConfigError("hamiltonian.s", "expected a vector or a non-empty list of vectors");
        for (std::size_t k = 0; k < ss.size(); ++k)
            costates.push_back(io::vector(ss[k], "hamiltonian.s[" + std::to_string(k) + "]", game.n));
    }
    const delaygame::detail::PreHamiltonianTable table(game, pos, grids);
    json rows = json::array();
    for (const Vec& s : costates) {
        const Eigen::MatrixXd g = table.values(s);
        const double minmax = g.rowwise().maxCoeff().minCoeff();
        const double maxmin = g.colwise().minCoeff().maxCoeff();
        rows.push_back({{"s", io::to_json(s)}, {"minmax", minmax}, {"maxmin", maxmin}, {"isaacs_gap", std::max(minmax - maxmin, 0.0)}});
    }
    CommandResult out;
    out.report = {{"command", "hamiltonian"},
                  {"game", game.name},
                  {"u_spacing", table.u_spacing()},
                  {"v_spacing", table.v_spacing()},
                  {"results", std::move(rows)}};
    return out;
}

inline DPConfig load_dp_config(const json& b, const GameSpec& game) {
    DPConfig c;
    c.steps = io::count_or(b, "steps", "value", 1, 1);
    c.substeps = io::count_or(b, "substeps", "value", 1, 1);
    const GridCounts g = detail::load_grids(b, "value");
    detail::check_grids(game, g, "value");
    c.u_grid = g.u;
    c.v_grid = g.v;
    c.node_budget = io::number_or(b, "node_budget", "value", 1e7);
    if (!(c.node_budget > 0.0)) throw ConfigError("value.node_budget", "must be positive");
    c.scheme = detail::load_scheme(b, "value");
    if (b.contains("memoize")) {
        if (!b.at("memoize").is_boolean()) throw ConfigError("value.memoize", "expected true or false");
        c.memoize = b.at("memoize").get<bool>();
    }
    return c;
}

inline CommandResult cmd_value(const json& config, const RunOptions& = {}) {
    const GameSpec game = detail::load_game(config);
    const GamePosition pos = io::position_from_json(io::require(config, "position", ""), "position", game);
    if (!(pos.tau < game.theta)) throw ConfigError("position.tau", "must precede theta");
    const DPConfig c = load_dp_config(detail::block(config, "value"), game);
    const ValueEstimate lo = lower_value(game, pos, c);
    const ValueEstimate up = upper_value(game, pos, c);
    const ValueEstimate pm = programmed_maximin(game, pos, c);
    CommandResult out;
    out.report = {{"command", "value"},
                  {"game", game.name},
                  {"lower", io::to_json(lo)},
                  {"upper", io::to_json(up)},
                  {"programmed_maximin", io::to_json(pm)},
                  {"gaps",
                   {{"lower_minus_upper", lo.value - up.value},
                    {"lower_minus_programmed", lo.value - pm.value},
                    {"upper_minus_programmed", up.value - pm.value}}}};
    return out;
}

inline CommandResult cmd_audit(const json& config, const RunOptions& opts = {}) {
    const GameSpec game = detail::load_game(config);
    const json& b = detail::block(config, "audit");
    const std::size_t samples = io::count_or(b, "samples", "audit", 200, 1);
    const double radius = io::number_or(b, "radius", "audit", 1.0);
    if (!(radius > 0.0)) throw ConfigError("audit.radius", "must be positive");
    const GridCounts grids = detail::load_grids(b, "audit");
    detail::check_grids(game, grids, "audit");
    const std::uint64_t seed = detail::seed_of(config, opts);
    CommandResult out;
    out.report = io::to_json(audit_conditions(game, samples, radius, seed, grids));
    out.report["command"] = "audit";
    out.report["game"] = game.name;
    out.report["seed"] = seed;
    return out;
}

inline CommandResult cmd_verify(const json& config, const RunOptions& opts = {}) {
    const GameSpec game = detail::load_game(config);
    const json& b = detail::block(config, "verify");
    const json& fname = io::require(b, "functional", "verify");
    if (!fname.is_string()) throw ConfigError("verify.functional", "expected a registry name");
    const auto& table = registry::functionals();
    const auto it = table.find(fname.get<std::string>());
    if (it == table.end()) throw ConfigError("verify.functional", "unknown functional '" + fname.get<std::string>() + "'");
    const registry::FunctionalEntry& entry = it->second;
    if (entry.game != game.name) throw ConfigError("verify.functional", "belongs to game '" + entry.game + "'");

    const double tol = opts.tolerance ? *opts.tolerance : io::number_or(b, "tolerance", "verify", 5e-3);
    if (!(tol >= 0.0)) throw ConfigError("tolerance", "must be non-negative");
    const double terminal_tol = io::number_or(b, "terminal_tolerance", "verify", 1e-10);
    const std::size_t random_dirs = io::count_or(b, "directions", "verify", 8);
    const std::uint64_t seed = detail::seed_of(config, opts);

    std::vector<GamePosition> positions;
    if (b.contains("positions")) {
        const json& ps = b.at("positions");
        if (!ps.is_array()) throw ConfigError("verify.positions", "expected an array");
        for (std::size_t k = 0; k < ps.size(); ++k)
            positions.push_back(io::position_from_json(ps[k], "verify.positions[" + std::to_string(k) + "]", game));
        if (positions.empty()) throw ConfigError("verify.positions", "no positions to check");
    } else {
        const std::size_t n = io::count_or(b, "samples", "verify", 20);
        if (n == 0) throw ConfigError("verify.samples", "no positions to check");
        positions = entry.sample(n, seed);
    }
    for (std::size_t k = 0; k < positions.size(); ++k)
        if (!(positions[k].tau < game.theta))
            throw ConfigError("verify.positions[" + std::to_string(k) + "].tau", "must precede theta");

    const Functional phi = entry.make();
    const auto dirs = default_directions(game.n, random_dirs, seed + 7);
    const DirectionalOptions dopts;

    std::vector<GamePosition> terminal = positions;
    for (GamePosition& p : terminal) p.tau = game.theta;
    const double terminal_mismatch = terminal_check(phi, game, terminal);

    double worst_sub = -std::numeric_limits<double>::infinity();
    double worst_super = std::numeric_limits<double>::infinity();
    double max_violation = terminal_mismatch > terminal_tol ? terminal_mismatch : 0.0;
    std::size_t n_pass = 0, n_fail = 0, n_inconclusive = 0;
    json rows = json::array();
    for (const GamePosition& pos : positions) {
        json row = {{"tau", pos.tau}, {"z", io::to_json(pos.z)}};
        if (entry.label) row["region"] = entry.label(pos);
        std::vector<DiffCandidate> cands;
        const CiGradientEstimate est = ci_gradient(phi, pos, dopts);
        if (est.gradient) {
            row["source"] = "ci_gradient";
            row["ci_gradient"] = {{"dt", est.gradient->dt}, {"grad_z", io::to_json(est.gradient->grad_z)},
                                  {"uncertainty", est.uncertainty}};
            cands.push_back({est.gradient->dt, est.gradient->grad_z, DiffKind::Sub, est.uncertainty});
            cands.push_back({est.gradient->dt, est.gradient->grad_z, DiffKind::Super, est.uncertainty});
        } else {
            row["source"] = "candidates";
            row["not_differentiable"] = est.reason;
            cands = entry.candidates(pos);
        }
        const auto residuals = viscosity_residuals(phi, game, pos, cands, tol);
        bool fail = false;
        bool inconclusive = false;
        json entries = json::array();
        for (std::size_t k = 0; k < residuals.size(); ++k) {
            const ResidualEntry& r = residuals[k];
            const MembershipResult mem = test_subdifferential(phi, pos, r.candidate, dirs, dopts);
            json e = io::to_json(r);
            e["membership"] = io::to_json(mem);
            entries.push_back(std::move(e));
            if (r.candidate.kind == DiffKind::Sub) worst_sub = std::max(worst_sub, r.residual);
            else worst_super = std::min(worst_super, r.residual);
            const double excess = r.candidate.kind == DiffKind::Sub ? r.residual : -r.residual;
            if (r.verdict == Verdict::Fail) max_violation = std::max(max_violation, excess);
            if (mem.verdict == Verdict::Fail) max_violation = std::max(max_violation, mem.worst_violation);
            fail = fail || r.verdict == Verdict::Fail || mem.verdict == Verdict::Fail;
            inconclusive = inconclusive || r.verdict == Verdict::Inconclusive || mem.verdict == Verdict::Inconclusive;
        }
        const Verdict v = fail ? Verdict::Fail : (inconclusive ? Verdict::Inconclusive : Verdict::Pass);
        (v == Verdict::Fail ? n_fail : v == Verdict::Inconclusive ? n_inconclusive : n_pass)++;
        row["candidates"] = std::move(entries);
        row["verdict"] = to_string(v);
        rows.push_back(std::move(row));
    }
    const bool terminal_ok = terminal_mismatch <= terminal_tol;
    const bool ok = n_fail == 0 && terminal_ok;

    CommandResult out;
    out.exit_code = ok ? kOk : kVerificationFailed;
    out.report = {{"command", "verify"},
                  {"game", game.name},
                  {"functional", fname.get<std::string>()},
                  {"seed", seed},
                  {"tolerance", tol},
                  {"terminal", {{"mismatch", terminal_mismatch}, {"tolerance", terminal_tol}, {"samples", terminal.size()},
                                {"verdict", terminal_ok ? "pass" : "fail"}}},
                  {"worst_sub_residual", worst_sub},
                  {"worst_super_residual", worst_super},
                  {"max_violation", max_violation},
                  {"counts", {{"pass", n_pass}, {"fail", n_fail}, {"inconclusive", n_inconclusive}}},
                  {"verdict", ok ? "pass" : "fail"},
                  {"positions", std::move(rows)}};
    if (!ok) out.message = "verification failed: max violation " + detail::fmt(max_violation);
    return out;
}

/// Dispatches by name and maps exceptions to exit codes.
inline CommandResult run_command(const std::string& name, const json& config, const RunOptions& opts = {}) {
    CommandResult out;
    try {
        if (!config.is_object()) throw ConfigError("<root>", "expected a JSON object");
        if (name == "simulate") return cmd_simulate(config, opts);
        if (name == "hamiltonian") return cmd_hamiltonian(config, opts);
        if (name == "value") return cmd_value(config, opts);
        if (name == "verify") return cmd_verify(config, opts);
        if (name == "audit") return cmd_audit(config, opts);
        throw ConfigError("<command>", "unknown command '" + name + "'");
    } catch (const ConfigError& e) {
        out.exit_code = kConfigError;
        out.message = std::string("config error: ") + e.what();
    } catch (const ResourceError& e) {
        out.exit_code = kBudgetExceeded;
        out.message = "budget exceeded: required " + detail::fmt(e.required()) + " nodes, budget " + detail::fmt(e.budget());
        out.report = {{"error", "budget"}, {"required", e.required()}, {"budget", e.budget()}};
    } catch (const IntegrationError& e) {
        out.exit_code = kConfigError;
        out.message = std::string("integration error: ") + e.what();
    } catch (const DomainError& e) {
        out.exit_code = kConfigError;
        out.message = std::string("config error: ") + e.what();
    }
    return out;
}

} // namespace delaygame::cli
