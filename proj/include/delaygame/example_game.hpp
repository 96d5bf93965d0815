#pragma once

// Two-dimensional test game with a closed-form value functional.
//
//   x1' = x2(t - 1) + u,  x2' = v,  |u| <= 1, |v| <= 2,  t in [0, 3],
//   gamma = |x1(3)| - integral of sqrt(1 - u^2).
//
// The value is phi = max over theta in [0, 1] of |phi0| theta + eta(tau, theta)
// with phi0 = z1 + chi(tau) z2 + integral_{-1}^{2 - tau - chi(tau)} w2,
// chi(tau) = max(2 - tau, 0), eta(tau, theta) = chi^2 theta - (3 - tau) sqrt(1 + theta^2).
// Throughout, w2(-1) means the value of the second history component at -1.

#include "delaygame/cicalculus.hpp"
#include "delaygame/dynamics.hpp"
#include "delaygame/errors.hpp"
#include "delaygame/history.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace delaygame::demo {

inline constexpr double kT0 = 0.0;
inline constexpr double kTheta = 3.0;
inline constexpr double kDelay = 1.0;
inline constexpr double kZeroBand = 1e-9;
inline constexpr double kBoundaryGuard = 1e-6;

enum class Region { Plus, Minus, Zero };

inline const char* to_string(Region r) {
    switch (r) {
    case Region::Plus: return "G_plus";
    case Region::Minus: return "G_minus";
    default: return "G_zero";
    }
}

inline GameSpec example_spec(int u_count = 2001, int v_count = 3) {
    GameSpec g;
    g.name = "demo";
    g.n = 2;
    g.l = 1;
    g.m = 1;
    g.t0 = kT0;
    g.theta = kTheta;
    g.h = kDelay;
    g.f = [](double, const Vec&, const History& r, const Vec& u, const Vec& v) {
        Vec out(2);
        out << r.eval(-1.0)(1) + u(0), v(0);
        return out;
    };
    g.f0 = [](double, const Vec&, const History&, const Vec& u, const Vec&) {
        return -std::sqrt(std::max(0.0, 1.0 - u(0) * u(0)));
    };
    g.sigma = [](const Vec& x, const History&) { return std::abs(x(0)); };
    g.U = ControlBox::interval(-1.0, 1.0, u_count);
    g.V = ControlBox::interval(-2.0, 2.0, v_count);
    return g;
}

inline double chi(double tau) { return std::max(2.0 - tau, 0.0); }

inline double eta(double tau, double th) {
    if (!(th >= 0.0 && th <= 1.0)) throw DomainError("eta: theta outside [0, 1]");
    const double c = chi(tau);
    return c * c * th - (3.0 - tau) * std::sqrt(1.0 + th * th);
}

inline double w2_left_end(const GamePosition& pos) { return pos.w.eval(-kDelay)(1); }

inline double phi0(const GamePosition& pos) {
    const double c = chi(pos.tau);
    const double upper = 2.0 - pos.tau - c;
    return pos.z(0) + c * pos.z(1) + pos.w.integrate_component(1, -kDelay, std::max(upper, -kDelay));
}

namespace detail {

inline double objective(double a, double tau, double th) { return a * th + eta(tau, th); }

/// argmax over [0, 1] of a*theta + eta(tau, theta): 1001-point scan, then
/// golden-section inside the neighbouring cells. Ties go to the smaller theta.
inline double argmax_theta(double a, double tau) {
    constexpr int kScan = 1000;
    int best_k = 0;
    double best = objective(a, tau, 0.0);
    for (int k = 1; k <= kScan; ++k) {
        const double v = objective(a, tau, static_cast<double>(k) / kScan);
        if (v > best) {
            best = v;
            best_k = k;
        }
    }
    double best_th = static_cast<double>(best_k) / kScan;
    double lo = static_cast<double>(std::max(best_k - 1, 0)) / kScan;
    double hi = static_cast<double>(std::min(best_k + 1, kScan)) / kScan;
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
        const double x1 = hi - invphi * (hi - lo);
        const double x2 = lo + invphi * (hi - lo);
        if (objective(a, tau, x1) < objective(a, tau, x2)) lo = x1;
        else hi = x2;
    }
    const double refined = std::clamp(0.5 * (lo + hi), 0.0, 1.0);
    if (objective(a, tau, refined) > best) best_th = refined;
    return best_th;
}

} // namespace detail

inline double theta_star(const GamePosition& pos) { return detail::argmax_theta(std::abs(phi0(pos)), pos.tau); }

inline double phi(const GamePosition& pos) {
    const double a = std::abs(phi0(pos));
    const double th = detail::argmax_theta(a, pos.tau);
    return detail::objective(a, pos.tau, th);
}

inline Region region(const GamePosition& pos, double zero_band = kZeroBand) {
    if (!(pos.tau < kTheta)) throw DomainError("region: need tau < 3");
    const double p = phi0(pos);
    if (std::abs(p) <= zero_band) return Region::Zero;
    return p > 0.0 ? Region::Plus : Region::Minus;
}

inline double closed_form_hamiltonian(const GamePosition& pos, const Vec& s) {
    return w2_left_end(pos) * s(0) - std::sqrt(1.0 + s(0) * s(0)) + 2.0 * std::abs(s(1));
}

/// ci-gradient on G_plus (upper signs) and G_minus (lower signs).
inline CiGradient closed_form_ci_gradient(const GamePosition& pos) {
    if (!(pos.tau < kTheta)) throw DomainError("closed_form_ci_gradient: need tau < 3");
    const double p = phi0(pos);
    if (std::abs(p) <= kBoundaryGuard) throw NotDifferentiableError("closed_form_ci_gradient: position in or near G_zero");
    const double sign = p > 0.0 ? 1.0 : -1.0;
    const double th = theta_star(pos);
    const double c = chi(pos.tau);
    CiGradient g;
    g.dt = -sign * w2_left_end(pos) * th - 2.0 * c * th + std::sqrt(1.0 + th * th);
    g.grad_z = Vec(2);
    g.grad_z << sign * th, sign * c * th;
    return g;
}

/// Lower = upper directional derivative on G_zero.
inline double closed_form_directional(const GamePosition& pos, const Direction& dir) {
    if (region(pos) != Region::Zero) throw DomainError("closed_form_directional: position not in G_zero");
    const double th = theta_star(pos);
    const double c = chi(pos.tau);
    return std::abs(-w2_left_end(pos) * dir.l0 + dir.l(0) + c * dir.l(1)) * th +
           (-2.0 * c * th + std::sqrt(1.0 + th * th)) * dir.l0;
}

/// Members of the subdifferential on G_zero, p1 spread over [-theta_o, theta_o]
/// with p2 = chi p1 and p0 at its largest admissible value.
inline std::vector<DiffCandidate> g0_sub_candidates(const GamePosition& pos, int count = 5) {
    if (region(pos) != Region::Zero) throw DomainError("g0_sub_candidates: position not in G_zero");
    const double th = theta_star(pos);
    const double c = chi(pos.tau);
    const double w2 = w2_left_end(pos);
    std::vector<DiffCandidate> out;
    const int k_max = std::max(count, 1) - 1;
    for (int k = 0; k <= k_max; ++k) {
        const double p1 = k_max == 0 ? th : -th + 2.0 * th * k / k_max;
        DiffCandidate cand;
        cand.kind = DiffKind::Sub;
        cand.p = Vec(2);
        cand.p << p1, c * p1;
        cand.p0 = -w2 * p1 - 2.0 * c * th + std::sqrt(1.0 + th * th);
        out.push_back(cand);
        if (th == 0.0) break;
    }
    return out;
}

/// Superdifferential members on G_zero; non-empty only when theta_o = 0, in
/// which case D+ = {(q0, 0) : q0 >= 1}.
inline std::vector<DiffCandidate> g0_super_candidates(const GamePosition& pos) {
    if (region(pos) != Region::Zero) throw DomainError("g0_super_candidates: position not in G_zero");
    if (theta_star(pos) != 0.0) return {};
    DiffCandidate cand;
    cand.kind = DiffKind::Super;
    cand.p = Vec::Zero(2);
    cand.p0 = 1.0;
    return {cand};
}

inline Functional phi_functional() { return Functional{[](const GamePosition& p) { return phi(p); }, kT0, kTheta}; }

/// phi + c * z1; its ci-gradient is shifted by (c, 0), so it is not a solution.
inline Functional perturbed_phi_functional(double c = 0.2) {
    return Functional{[c](const GamePosition& p) { return phi(p) + c * p.z(0); }, kT0, kTheta};
}

/// Random positions cycling through G_plus, G_minus and G_zero. Histories are
/// piecewise constant with 1-3 pieces in [-1, 1]^2; |phi0| >= 0.2 on G_plus and
/// G_minus. Times avoid [1.98, 2), where forward time probes would straddle
/// the kink of chi at tau = 2.
inline std::vector<GamePosition> sample_positions(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> tau_dist(0.0, 2.9);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> offset(0.2, 1.2);
    std::uniform_int_distribution<int> pieces_dist(1, 3);
    std::vector<GamePosition> out;
    for (std::size_t k = 0; k < count; ++k) {
        double tau = tau_dist(rng);
        if (tau >= 1.98 && tau < 2.0) tau -= 0.1;
        const int pieces = pieces_dist(rng);
        std::vector<double> knots{-kDelay};
        for (int i = 1; i < pieces; ++i) knots.push_back(-kDelay + kDelay * i / pieces + 0.1 * unit(rng) / pieces);
        knots.push_back(0.0);
        std::vector<Segment> segs;
        for (int i = 0; i < pieces; ++i) {
            Vec val(2);
            val << unit(rng), unit(rng);
            segs.push_back(ConstantPiece{val});
        }
        GamePosition pos{tau, Vec(2), History(kDelay, knots, segs)};
        pos.z << 0.0, unit(rng);
        const double rest = phi0(pos);
        const Region target = static_cast<Region>(k % 3);
        const double want = target == Region::Plus ? offset(rng) : target == Region::Minus ? -offset(rng) : 0.0;
        pos.z(0) = want - rest;
        out.push_back(std::move(pos));
    }
    return out;
}

} // namespace delaygame::demo
