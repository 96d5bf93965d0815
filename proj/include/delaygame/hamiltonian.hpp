#pragma once

// Game Hamiltonian H(tau, z, w, s) = min_u max_v (<f, s> + f0) evaluated by
// exhaustive search over the control grids, and the Isaacs gap.

#include "delaygame/dynamics.hpp"
#include "delaygame/errors.hpp"
#include "delaygame/history.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace delaygame {

/// Grid min-max value with the spacings it was computed on.
struct GridValue {
    double value = 0.0;
    double u_spacing = 0.0;
    double v_spacing = 0.0;
};

struct IsaacsGap {
    double gap = 0.0;  // raw value clamped at zero
    double raw = 0.0;  // minmax - maxmin
    double minmax = 0.0;
    double maxmin = 0.0;
};

/// Optional grid overrides; empty vectors fall back to the game's boxes.
struct GridCounts {
    std::vector<int> u;
    std::vector<int> v;
};

inline double pre_hamiltonian(const GameSpec& game, const GamePosition& pos, const Vec& u, const Vec& v, const Vec& s) {
    if (!game.U.contains(u)) throw DomainError("pre_hamiltonian: u outside U");
    if (!game.V.contains(v)) throw DomainError("pre_hamiltonian: v outside V");
    if (s.size() != game.n || !s.allFinite()) throw DomainError("pre_hamiltonian: bad costate vector");
    return game.f(pos.tau, pos.z, pos.w, u, v).dot(s) + game.f0(pos.tau, pos.z, pos.w, u, v);
}

namespace detail {

/// Table of <f, s> + f0 over U-grid x V-grid; row = u index, column = v index.
/// f and f0 are evaluated once per control pair and reused for every s.
class PreHamiltonianTable {
public:
    PreHamiltonianTable(const GameSpec& game, const GamePosition& pos, const GridCounts& grids = {})
        : us_(game.U.grid(grids.u)), vs_(game.V.grid(grids.v)),
          u_spacing_(game.U.spacing(grids.u)), v_spacing_(game.V.spacing(grids.v)) {
        const auto nu = static_cast<Eigen::Index>(us_.size());
        const auto nv = static_cast<Eigen::Index>(vs_.size());
        f_.resize(game.n, nu * nv);
        f0_.resize(nu, nv);
        for (Eigen::Index i = 0; i < nu; ++i)
            for (Eigen::Index j = 0; j < nv; ++j) {
                const Vec& u = us_[static_cast<std::size_t>(i)];
                const Vec& v = vs_[static_cast<std::size_t>(j)];
                f_.col(i * nv + j) = game.f(pos.tau, pos.z, pos.w, u, v);
                f0_(i, j) = game.f0(pos.tau, pos.z, pos.w, u, v);
            }
    }

    Eigen::MatrixXd values(const Vec& s) const {
        Eigen::MatrixXd g = f0_;
        const Eigen::Index nv = g.cols();
        const Eigen::RowVectorXd proj = s.transpose() * f_;
        for (Eigen::Index i = 0; i < g.rows(); ++i)
            for (Eigen::Index j = 0; j < nv; ++j) g(i, j) += proj(i * nv + j);
        return g;
    }

    double minmax(const Vec& s) const { return values(s).rowwise().maxCoeff().minCoeff(); }
    double maxmin(const Vec& s) const { return values(s).colwise().minCoeff().maxCoeff(); }

    /// max ||f|| over the grid: Lipschitz constant of H in s.
    double max_f_norm() const { return f_.colwise().norm().maxCoeff(); }

    double u_spacing() const { return u_spacing_; }
    double v_spacing() const { return v_spacing_; }

private:
    std::vector<Vec> us_;
    std::vector<Vec> vs_;
    double u_spacing_;
    double v_spacing_;
    Eigen::MatrixXd f_;
    Eigen::MatrixXd f0_;
};

inline void check_costate(const GameSpec& game, const Vec& s) {
    if (s.size() != game.n || !s.allFinite()) throw DomainError("hamiltonian: bad costate vector");
}

} // namespace detail

inline GridValue hamiltonian_minmax(const GameSpec& game, const GamePosition& pos, const Vec& s,
                                    const GridCounts& grids = {}) {
    detail::check_costate(game, s);
    const detail::PreHamiltonianTable table(game, pos, grids);
    return {table.minmax(s), table.u_spacing(), table.v_spacing()};
}

inline GridValue hamiltonian_maxmin(const GameSpec& game, const GamePosition& pos, const Vec& s,
                                    const GridCounts& grids = {}) {
    detail::check_costate(game, s);
    const detail::PreHamiltonianTable table(game, pos, grids);
    return {table.maxmin(s), table.u_spacing(), table.v_spacing()};
}

/// minmax - maxmin over the same finite grids, so the raw value is >= 0 up
/// to rounding.
inline IsaacsGap isaacs_gap(const GameSpec& game, const GamePosition& pos, const Vec& s, const GridCounts& grids = {}) {
    detail::check_costate(game, s);
    const detail::PreHamiltonianTable table(game, pos, grids);
    const Eigen::MatrixXd g = table.values(s);
    IsaacsGap out;
    out.minmax = g.rowwise().maxCoeff().minCoeff();
    out.maxmin = g.colwise().minCoeff().maxCoeff();
    out.raw = out.minmax - out.maxmin;
    out.gap = std::max(out.raw, 0.0);
    return out;
}

} // namespace delaygame
