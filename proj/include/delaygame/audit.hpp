#pragma once

// Sampling-based audit of the growth, Lipschitz and saddle-point conditions
// on a game. The audit can falsify a condition or bound its constants on the
// sample; it never certifies anything.

#include "delaygame/dynamics.hpp"
#include "delaygame/hamiltonian.hpp"
#include "delaygame/history.hpp"

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace delaygame {

struct ConditionReport {
    std::size_t samples = 0;
    double radius = 0.0;
    double growth_constant = 0.0;     // c_f estimate
    double lipschitz_f = 0.0;         // lambda_f(radius) estimate
    double lipschitz_sigma = 0.0;     // lambda_sigma(radius) estimate
    double max_isaacs_gap = 0.0;      // over sampled (position, s)
    double isaacs_grid_spacing = 0.0; // largest control grid spacing used for the gap
};

namespace sampling {

/// Uniform point in the closed Euclidean ball of the given radius.
inline Vec ball_point(std::mt19937_64& rng, Eigen::Index n, double radius) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vec d(n);
    for (Eigen::Index i = 0; i < n; ++i) d(i) = gauss(rng);
    const double norm = d.norm();
    if (norm == 0.0) return Vec::Zero(n);
    return d / norm * radius * std::pow(unif(rng), 1.0 / static_cast<double>(n));
}

inline Vec box_point(std::mt19937_64& rng, const ControlBox& box) {
    Vec p(box.dim());
    for (Eigen::Index i = 0; i < box.dim(); ++i) {
        std::uniform_real_distribution<double> d(box.lower()(i), box.upper()(i));
        p(i) = box.lower()(i) == box.upper()(i) ? box.lower()(i) : d(rng);
    }
    return p;
}

/// Piecewise-constant history with 1-4 pieces and sup norm <= radius.
inline History piecewise_constant_history(std::mt19937_64& rng, double h, Eigen::Index n, double radius) {
    std::uniform_int_distribution<int> pieces_dist(1, 4);
    std::uniform_real_distribution<double> knot_dist(-h, 0.0);
    const int pieces = pieces_dist(rng);
    std::vector<double> knots{-h, 0.0};
    while (static_cast<int>(knots.size()) < pieces + 1) {
        const double k = knot_dist(rng);
        if (std::none_of(knots.begin(), knots.end(), [&](double x) { return std::abs(x - k) < 1e-9 * h; }))
            knots.push_back(k);
    }
    std::sort(knots.begin(), knots.end());
    std::vector<Segment> segs;
    for (int i = 0; i < pieces; ++i) segs.push_back(ConstantPiece{ball_point(rng, n, radius)});
    return History(h, std::move(knots), std::move(segs));
}

} // namespace sampling

/// Largest observed ratios for the growth and Lipschitz conditions over
/// `samples` random draws from P(radius), plus the largest grid Isaacs gap.
/// Half of the Lipschitz pairs are small perturbations so that local slopes
/// are seen as well as global ones.
inline ConditionReport audit_conditions(const GameSpec& game, std::size_t samples, double radius, std::uint64_t seed,
                                        const GridCounts& grids = {}) {
    game.validate();
    if (samples < 1) throw DomainError("audit_conditions: samples must be >= 1");
    if (!(radius > 0.0)) throw DomainError("audit_conditions: radius must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> time_dist(game.t0, game.theta);
    ConditionReport rep;
    rep.samples = samples;
    rep.radius = radius;
    rep.isaacs_grid_spacing = std::max(game.U.spacing(grids.u), game.V.spacing(grids.v));
    const double h = game.h;

    for (std::size_t k = 0; k < samples; ++k) {
        const double t = time_dist(rng);
        const Vec x = sampling::ball_point(rng, game.n, radius);
        const History r = sampling::piecewise_constant_history(rng, h, game.n, radius);
        const Vec u = sampling::box_point(rng, game.U);
        const Vec v = sampling::box_point(rng, game.V);

        const Vec fx = game.f(t, x, r, u, v);
        const double c0 = game.f0(t, x, r, u, v);
        const double growth = (fx.norm() + std::abs(c0)) / (1.0 + x.norm() + norm_l1(r) + r.eval(-h).norm());
        rep.growth_constant = std::max(rep.growth_constant, growth);

        Vec x2;
        History r2;
        if (k % 2 == 0) {
            x2 = sampling::ball_point(rng, game.n, radius);
            r2 = sampling::piecewise_constant_history(rng, h, game.n, radius);
        } else {
            const double eps = 1e-3 * radius;
            x2 = x + sampling::ball_point(rng, game.n, eps);
            if (x2.norm() > radius) x2 *= radius / x2.norm();
            const GamePosition p{t, x, r};
            // a short constant extension is a small L1 move of the history
            r2 = constant_extension(p, t + std::min(eps, 0.5 * h), std::numeric_limits<double>::infinity());
        }
        const double dist = (x - x2).norm() + l1_distance(r, r2);
        const Vec fx2 = game.f(t, x2, r2, u, v);
        const double c2 = game.f0(t, x2, r2, u, v);
        const double dist_f = dist + (r.eval(-h) - r2.eval(-h)).norm();
        if (dist_f > 0.0)
            rep.lipschitz_f = std::max(rep.lipschitz_f, ((fx - fx2).norm() + std::abs(c0 - c2)) / dist_f);
        if (dist > 0.0)
            rep.lipschitz_sigma = std::max(rep.lipschitz_sigma, std::abs(game.sigma(x, r) - game.sigma(x2, r2)) / dist);

        const Vec s = sampling::ball_point(rng, game.n, radius);
        const GamePosition pos{t, x, r};
        rep.max_isaacs_gap = std::max(rep.max_isaacs_gap, isaacs_gap(game, pos, s, grids).gap);
    }
    return rep;
}

} // namespace delaygame
