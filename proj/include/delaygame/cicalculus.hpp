#pragma once

// Numerical coinvariant calculus for functionals on G = [t0, theta] x R^n x PC.
//
// Every probe moves along the constant right extension of the base position:
// phi(tau + l0*delta, z + l*delta, kappa_{tau + l0*delta}). The liminf/limsup
// over (delta, g0, g) is approximated by fixing (g0, g) = (l0, l) and sweeping
// delta over a short decreasing schedule; the two finest quotients are
// Richardson-extrapolated. An optional jitter mode also perturbs (g0, g).

#include "delaygame/dynamics.hpp"
#include "delaygame/errors.hpp"
#include "delaygame/hamiltonian.hpp"
#include "delaygame/history.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace delaygame {

/// A functional phi: G -> R, assumed to belong to the Lipschitz class used by
/// the viscosity theory. `evaluate` must be re-entrant.
struct Functional {
    std::function<double(const GamePosition&)> evaluate;
    double t0 = 0.0;
    double theta = 1.0;

    double operator()(const GamePosition& pos) const {
        const double v = evaluate(pos);
        if (!std::isfinite(v)) throw DomainError("Functional: non-finite value");
        return v;
    }
};

/// (l0, l) with l0 >= 0.
struct Direction {
    double l0 = 0.0;
    Vec l;
};

struct CiGradient {
    double dt = 0.0;  // ci-derivative in (tau, w)
    Vec grad_z;
};

enum class DiffKind { Sub, Super };
enum class Side { Lower, Upper };
enum class Verdict { Pass, Fail, Inconclusive };

inline const char* to_string(DiffKind k) { return k == DiffKind::Sub ? "sub" : "super"; }
inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    default: return "inconclusive";
    }
}

/// (p0, p) candidate for the sub- or superdifferential.
struct DiffCandidate {
    double p0 = 0.0;
    Vec p;
    DiffKind kind = DiffKind::Sub;
    double uncertainty = 0.0;  // numerical error carried by the candidate itself
};

struct DirectionalOptions {
    std::vector<double> deltas{1e-2, 1e-3, 1e-4};
    double jitter = 0.0;  // > 0 enables the (g0, g) perturbation stress mode
    std::uint64_t seed = 0;
};

struct DerivativeEstimate {
    double value = 0.0;         // side-selected estimate
    double extrapolated = 0.0;  // Richardson value from the two finest deltas
    double uncertainty = 0.0;
    std::vector<double> quotients;
};

inline double relative_tolerance(double rel, double scale) { return rel * std::max(1.0, std::abs(scale)); }

namespace detail {

inline double probe_quotient(const Functional& phi, const GamePosition& pos, double base, double g0, const Vec& g,
                             double delta) {
    const double t = pos.tau + g0 * delta;
    if (t > phi.theta) throw DomainError("directional_derivative: probe runs past theta");
    GamePosition probe{t, pos.z + delta * g, constant_extension(pos, t, phi.theta)};
    return (phi(probe) - base) / delta;
}

} // namespace detail

inline DerivativeEstimate directional_derivative(const Functional& phi, const GamePosition& pos, const Direction& dir,
                                                 Side side, const DirectionalOptions& opts = {}) {
    if (!(pos.tau < phi.theta)) throw DomainError("directional_derivative: need tau < theta");
    if (!(dir.l0 >= 0.0)) throw DomainError("directional_derivative: l0 must be non-negative");
    if (dir.l.size() != pos.z.size()) throw DomainError("directional_derivative: direction has wrong dimension");
    const auto& deltas = opts.deltas;
    if (deltas.empty()) throw DomainError("directional_derivative: empty delta schedule");
    for (std::size_t k = 0; k < deltas.size(); ++k)
        if (!(deltas[k] > 0.0) || (k > 0 && !(deltas[k] < deltas[k - 1])))
            throw DomainError("directional_derivative: deltas must be positive and decreasing");

    const double base = phi(pos);
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    DerivativeEstimate est;
    for (double delta : deltas) {
        double q = detail::probe_quotient(phi, pos, base, dir.l0, dir.l, delta);
        if (opts.jitter > 0.0) {
            const double radius = opts.jitter * std::sqrt(delta);
            for (int j = 0; j < 4; ++j) {
                Vec g = dir.l;
                for (Eigen::Index i = 0; i < g.size(); ++i) g(i) += radius * gauss(rng);
                const double g0 = std::max(0.0, dir.l0 + radius * gauss(rng));
                const double qj = detail::probe_quotient(phi, pos, base, g0, g, delta);
                q = side == Side::Lower ? std::min(q, qj) : std::max(q, qj);
            }
        }
        est.quotients.push_back(q);
    }
    const std::size_t n = est.quotients.size();
    if (n == 1) {
        est.extrapolated = est.value = est.quotients.front();
        return est;
    }
    const double coarse = est.quotients[n - 2];
    const double fine = est.quotients[n - 1];
    const double ratio = deltas[n - 2] / deltas[n - 1];
    est.extrapolated = (ratio * fine - coarse) / (ratio - 1.0);
    est.uncertainty = std::max(std::abs(coarse - est.extrapolated), std::abs(fine - est.extrapolated));
    est.value = side == Side::Lower ? std::min(est.extrapolated, fine) : std::max(est.extrapolated, fine);
    return est;
}

struct CiGradientEstimate {
    std::optional<CiGradient> gradient;  // empty: not differentiable
    double uncertainty = 0.0;
    std::string reason;                  // why differentiability was rejected
};

/// Forward differences along the constant extension for the ci-derivative,
/// one-sided differences along +-e_i (time and history frozen) for the
/// z-gradient. Rejects differentiability when the +-e_i slopes or the lower
/// and upper time estimates disagree beyond tolerance.
inline CiGradientEstimate ci_gradient(const Functional& phi, const GamePosition& pos,
                                      const DirectionalOptions& opts = {}, double rel_tol = 1e-3) {
    const Eigen::Index n = pos.z.size();
    CiGradientEstimate out;
    const Direction time_dir{1.0, Vec::Zero(n)};
    const DerivativeEstimate lo = directional_derivative(phi, pos, time_dir, Side::Lower, opts);
    const DerivativeEstimate hi = directional_derivative(phi, pos, time_dir, Side::Upper, opts);
    double unc = std::max(lo.uncertainty, hi.uncertainty);
    if (hi.value - lo.value > relative_tolerance(rel_tol, lo.extrapolated)) {
        out.uncertainty = unc;
        out.reason = "lower and upper time derivatives disagree";
        return out;
    }
    CiGradient g;
    g.dt = lo.extrapolated;
    g.grad_z = Vec::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Vec e = Vec::Zero(n);
        e(i) = 1.0;
        const DerivativeEstimate plus = directional_derivative(phi, pos, {0.0, e}, Side::Lower, opts);
        const DerivativeEstimate minus = directional_derivative(phi, pos, {0.0, -e}, Side::Lower, opts);
        const double right = plus.extrapolated;
        const double left = -minus.extrapolated;
        const double mismatch = std::abs(right - left);
        if (mismatch > relative_tolerance(rel_tol, right) + plus.uncertainty + minus.uncertainty) {
            out.uncertainty = std::max(unc, mismatch);
            out.reason = "one-sided slopes along z_" + std::to_string(i + 1) + " disagree";
            return out;
        }
        g.grad_z(i) = 0.5 * (right + left);
        unc = std::max({unc, plus.uncertainty, minus.uncertainty, 0.5 * mismatch});
    }
    out.gradient = g;
    out.uncertainty = unc;
    return out;
}

/// Fixed probes (1, 0), (0, +-e_i) followed by `random_count` random unit l
/// with l0 = 0 and as many with l0 = 1.
inline std::vector<Direction> default_directions(Eigen::Index n, std::size_t random_count = 8, std::uint64_t seed = 7) {
    std::vector<Direction> dirs;
    dirs.push_back({1.0, Vec::Zero(n)});
    for (Eigen::Index i = 0; i < n; ++i) {
        Vec e = Vec::Zero(n);
        e(i) = 1.0;
        dirs.push_back({0.0, e});
        dirs.push_back({0.0, -e});
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double l0 : {0.0, 1.0}) {
        for (std::size_t k = 0; k < random_count; ++k) {
            Vec l(n);
            for (Eigen::Index i = 0; i < n; ++i) l(i) = gauss(rng);
            if (l.norm() == 0.0) l(0) = 1.0;
            dirs.push_back({l0, l / l.norm()});
        }
    }
    return dirs;
}

struct MembershipResult {
    Verdict verdict = Verdict::Pass;
    double worst_violation = -std::numeric_limits<double>::infinity();  // <= 0 means every probe holds exactly
    Direction worst_direction;
    double worst_uncertainty = 0.0;
    std::size_t directions_checked = 0;
};

/// Sub: l0*p0 + <l, p> <= lower directional derivative along every probe.
/// Super: l0*q0 + <l, q> >= upper directional derivative. Passing is
/// evidence on a finite direction sample, not proof of membership.
inline MembershipResult test_subdifferential(const Functional& phi, const GamePosition& pos, const DiffCandidate& cand,
                                             const std::vector<Direction>& dirs, const DirectionalOptions& opts = {},
                                             double rel_tol = 1e-3) {
    if (dirs.empty()) throw DomainError("test_subdifferential: empty direction set");
    if (cand.p.size() != pos.z.size()) throw DomainError("test_subdifferential: candidate has wrong dimension");
    MembershipResult res;
    bool any_fail = false;
    bool any_inconclusive = false;
    for (const Direction& d : dirs) {
        const double lhs = d.l0 * cand.p0 + d.l.dot(cand.p);
        const Side side = cand.kind == DiffKind::Sub ? Side::Lower : Side::Upper;
        const DerivativeEstimate est = directional_derivative(phi, pos, d, side, opts);
        const double violation = cand.kind == DiffKind::Sub ? lhs - est.value : est.value - lhs;
        const double unc = est.uncertainty + cand.uncertainty * (d.l0 + d.l.norm());
        ++res.directions_checked;
        if (violation > res.worst_violation) {
            res.worst_violation = violation;
            res.worst_direction = d;
            res.worst_uncertainty = unc;
        }
        if (violation <= relative_tolerance(rel_tol, lhs)) continue;
        if (unc > 0.5 * violation) any_inconclusive = true;
        else any_fail = true;
    }
    res.verdict = any_fail ? Verdict::Fail : (any_inconclusive ? Verdict::Inconclusive : Verdict::Pass);
    return res;
}

struct ResidualEntry {
    DiffCandidate candidate;
    double residual = 0.0;  // p0 + H(pos, p)
    double uncertainty = 0.0;
    Verdict verdict = Verdict::Pass;
};

/// p0 + H(pos, p) <= 0 for sub candidates, q0 + H(pos, q) >= 0 for super
/// candidates; a residual beyond `tol` on the wrong side is a violation.
inline std::vector<ResidualEntry> viscosity_residuals(const Functional& phi, const GameSpec& game,
                                                      const GamePosition& pos,
                                                      const std::vector<DiffCandidate>& candidates, double tol = 5e-3,
                                                      const GridCounts& grids = {}) {
    if (!(pos.tau < phi.theta)) throw DomainError("viscosity_residuals: need tau < theta");
    std::vector<ResidualEntry> out;
    if (candidates.empty()) return out;
    const detail::PreHamiltonianTable table(game, pos, grids);
    const double lip = table.max_f_norm();
    for (const DiffCandidate& c : candidates) {
        if (c.p.size() != game.n) throw DomainError("viscosity_residuals: candidate has wrong dimension");
        ResidualEntry e;
        e.candidate = c;
        e.residual = c.p0 + table.minmax(c.p);
        e.uncertainty = c.uncertainty * (1.0 + lip);
        const double excess = c.kind == DiffKind::Sub ? e.residual : -e.residual;
        if (excess <= tol) e.verdict = Verdict::Pass;
        else if (e.uncertainty > 0.5 * excess) e.verdict = Verdict::Inconclusive;
        else e.verdict = Verdict::Fail;
        out.push_back(std::move(e));
    }
    return out;
}

/// max |phi(theta, z, w) - sigma(z, w)| over positions that all sit at theta.
inline double terminal_check(const Functional& phi, const GameSpec& game, const std::vector<GamePosition>& samples) {
    double worst = 0.0;
    for (const GamePosition& p : samples) {
        if (p.tau != game.theta) throw DomainError("terminal_check: sample not at theta");
        worst = std::max(worst, std::abs(phi(p) - game.sigma(p.z, p.w)));
    }
    return worst;
}

} // namespace delaygame
