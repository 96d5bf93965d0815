#pragma once

// Delay differential games: game data, control realizations, motions and the
// quality index.

#include "delaygame/errors.hpp"
#include "delaygame/history.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace delaygame {

/// Compact box in R^k together with a per-axis grid used by min-max searches.
/// Grids always contain both box endpoints.
class ControlBox {
public:
    ControlBox() = default;

    ControlBox(Vec lower, Vec upper, std::vector<int> grid_counts)
        : lower_(std::move(lower)), upper_(std::move(upper)), counts_(std::move(grid_counts)) {
        if (lower_.size() != upper_.size() || static_cast<std::size_t>(lower_.size()) != counts_.size())
            throw DomainError("ControlBox: bounds and grid counts disagree on dimension");
        for (Eigen::Index i = 0; i < lower_.size(); ++i) {
            if (!(lower_(i) <= upper_(i))) throw DomainError("ControlBox: lower > upper");
            const int c = counts_[static_cast<std::size_t>(i)];
            if (c < 1 || (c == 1 && lower_(i) != upper_(i)))
                throw DomainError("ControlBox: grid needs >= 2 points per non-degenerate axis");
        }
    }

    static ControlBox interval(double lo, double hi, int count) {
        return ControlBox(Vec::Constant(1, lo), Vec::Constant(1, hi), {count});
    }

    Eigen::Index dim() const { return lower_.size(); }
    const Vec& lower() const { return lower_; }
    const Vec& upper() const { return upper_; }
    const std::vector<int>& grid_counts() const { return counts_; }

    bool contains(const Vec& x, double tol = 1e-12) const {
        if (x.size() != dim()) return false;
        for (Eigen::Index i = 0; i < dim(); ++i)
            if (!(x(i) >= lower_(i) - tol && x(i) <= upper_(i) + tol)) return false;
        return true;
    }

    /// Cartesian product grid. `counts` overrides the stored counts when
    /// non-empty; a count of 1 selects the midpoint of that axis.
    std::vector<Vec> grid(const std::vector<int>& counts = {}) const {
        const std::vector<int>& c = counts.empty() ? counts_ : counts;
        if (c.size() != counts_.size()) throw DomainError("ControlBox::grid: override has wrong dimension");
        std::vector<std::vector<double>> axes(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (c[i] < 1) throw DomainError("ControlBox::grid: counts must be >= 1");
            const auto ii = static_cast<Eigen::Index>(i);
            if (c[i] == 1) {
                axes[i].push_back(0.5 * (lower_(ii) + upper_(ii)));
                continue;
            }
            for (int k = 0; k < c[i]; ++k)
                axes[i].push_back(k == c[i] - 1 ? upper_(ii)
                                                : lower_(ii) + (upper_(ii) - lower_(ii)) * k / (c[i] - 1));
        }
        std::vector<Vec> out;
        std::vector<std::size_t> idx(c.size(), 0);
        while (true) {
            Vec p(static_cast<Eigen::Index>(c.size()));
            for (std::size_t i = 0; i < c.size(); ++i) p(static_cast<Eigen::Index>(i)) = axes[i][idx[i]];
            out.push_back(std::move(p));
            std::size_t i = 0;
            for (; i < c.size(); ++i) {
                if (++idx[i] < axes[i].size()) break;
                idx[i] = 0;
            }
            if (i == c.size()) break;
        }
        return out;
    }

    /// Largest per-axis grid spacing.
    double spacing(const std::vector<int>& counts = {}) const {
        const std::vector<int>& c = counts.empty() ? counts_ : counts;
        double s = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            const double width = upper_(ii) - lower_(ii);
            s = std::max(s, c[i] <= 1 ? width : width / (c[i] - 1));
        }
        return s;
    }

private:
    Vec lower_;
    Vec upper_;
    std::vector<int> counts_;
};

using DynamicsFn = std::function<Vec(double t, const Vec& x, const History& r, const Vec& u, const Vec& v)>;
using RunningCostFn = std::function<double(double t, const Vec& x, const History& r, const Vec& u, const Vec& v)>;
using TerminalCostFn = std::function<double(const Vec& x, const History& r)>;

/// dx/dt = f(t, x(t), x_t, u, v) on [t0, theta]; the first player minimizes
/// sigma(x(theta), x_theta) + integral of f0.
struct GameSpec {
    std::string name;
    Eigen::Index n = 1;
    Eigen::Index l = 1;
    Eigen::Index m = 1;
    double t0 = 0.0;
    double theta = 1.0;
    double h = 1.0;
    DynamicsFn f;
    RunningCostFn f0;
    TerminalCostFn sigma;
    ControlBox U;
    ControlBox V;

    void validate() const {
        if (!(t0 < theta)) throw DomainError("GameSpec: t0 must precede theta");
        if (!(h > 0.0)) throw DomainError("GameSpec: delay must be positive");
        if (n < 1 || l < 1 || m < 1) throw DomainError("GameSpec: dimensions must be positive");
        if (U.dim() != l || V.dim() != m) throw DomainError("GameSpec: control boxes disagree with l, m");
        if (!f || !f0 || !sigma) throw DomainError("GameSpec: f, f0 and sigma must all be set");
    }
};

/// Piecewise-constant control realization, right-continuous on each cell.
struct ControlSignal {
    std::vector<double> mesh;  // cell boundaries, strictly increasing
    std::vector<Vec> values;   // one per cell

    static ControlSignal constant(double from, double to, const Vec& value) { return {{from, to}, {value}}; }

    /// Equal cells on [from, to], one value each.
    static ControlSignal uniform(double from, double to, std::vector<Vec> values) {
        ControlSignal s;
        const auto cells = values.size();
        for (std::size_t k = 0; k <= cells; ++k)
            s.mesh.push_back(k == cells ? to : from + (to - from) * static_cast<double>(k) / static_cast<double>(cells));
        s.values = std::move(values);
        return s;
    }

    Vec value_at(double t) const {
        const auto it = std::upper_bound(mesh.begin(), mesh.end(), t);
        auto k = static_cast<std::ptrdiff_t>(it - mesh.begin()) - 1;
        k = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(values.size()) - 1);
        return values[static_cast<std::size_t>(k)];
    }

    void validate(const ControlBox& box, double from, double to) const {
        if (mesh.size() < 2 || values.size() != mesh.size() - 1)
            throw DomainError("ControlSignal: need one value per mesh cell");
        for (std::size_t k = 1; k < mesh.size(); ++k)
            if (!(mesh[k] > mesh[k - 1])) throw DomainError("ControlSignal: mesh must be strictly increasing");
        const double slack = 1e-12 * std::max(1.0, std::abs(to));
        if (mesh.front() > from + slack || mesh.back() < to - slack)
            throw DomainError("ControlSignal: mesh does not cover [tau, theta]");
        for (const Vec& v : values)
            if (!box.contains(v)) throw DomainError("ControlSignal: value outside the control box");
    }
};

enum class Scheme { Euler, Heun };

/// Integrated motion x(.) on [tau - h, end]. The past before tau is the
/// stored initial history; from tau on the motion is the polyline through
/// the mesh states.
class Motion {
public:
    const GamePosition& position() const { return pos_; }
    Scheme scheme() const { return scheme_; }
    double dt() const { return dt_; }
    std::size_t planned_cells() const { return cells_; }
    std::size_t size() const { return count_; }
    bool complete() const { return count_ == cells_ + 1; }

    double time(std::size_t k) const { return k == cells_ ? end_ : pos_.tau + static_cast<double>(k) * dt_; }
    double end_time() const { return time(count_ - 1); }
    Vec state(std::size_t k) const { return states_.col(static_cast<Eigen::Index>(k)); }
    Vec terminal_state() const { return state(count_ - 1); }

    std::vector<double> times() const {
        std::vector<double> t(count_);
        for (std::size_t k = 0; k < count_; ++k) t[k] = time(k);
        return t;
    }

    /// x(t) for t in [tau - h, end].
    Vec state_at(double t) const {
        const double tau = pos_.tau;
        if (t < tau) {
            if (t < tau - pos_.w.delay()) throw DomainError("Motion::state_at: t before tau - h");
            return pos_.w.eval(t - tau);
        }
        check_time(t, "state_at");
        if (count_ == 1) return state(0);
        const double u = (t - tau) / dt_;
        auto j = static_cast<std::size_t>(std::floor(u));
        j = std::min(j, count_ - 2);
        const double lam = std::clamp((t - time(j)) / (time(j + 1) - time(j)), 0.0, 1.0);
        return (1.0 - lam) * state(j) + lam * state(j + 1);
    }

    /// x_t(.) with x_t(xi) = x(t + xi), xi in [-h, 0).
    History slice(double t) const {
        check_time(t, "slice");
        const double tau = pos_.tau;
        const double h = pos_.w.delay();
        const double d = t - tau;
        if (d <= 0.0) return pos_.w;

        const double eps = 1e-12 * std::max(1.0, std::abs(t));
        // last node strictly before t, and the matching node (if any) at t
        std::size_t last = 0;
        while (last + 1 < count_ && time(last + 1) < t - eps) ++last;
        std::size_t first = 0;
        if (d >= h) {
            while (first + 1 <= last && time(first + 1) <= t - h) ++first;
        }
        const std::size_t cols = last - first + 2;
        std::vector<double> nodes(cols);
        Eigen::MatrixXd values(states_.rows(), static_cast<Eigen::Index>(cols));
        for (std::size_t j = first; j <= last; ++j) {
            nodes[j - first] = time(j) - t;
            values.col(static_cast<Eigen::Index>(j - first)) = states_.col(static_cast<Eigen::Index>(j));
        }
        nodes.back() = 0.0;
        const bool on_node = last + 1 < count_ && std::abs(time(last + 1) - t) <= eps;
        values.col(static_cast<Eigen::Index>(cols - 1)) = on_node ? state(last + 1) : state_at(t);
        if (cols >= 2 && !(nodes[cols - 1] > nodes[cols - 2])) throw DomainError("Motion::slice: degenerate node set");

        SampledPiece tail{std::move(nodes), std::move(values)};
        if (d >= h) return History(h, {-h, 0.0}, {std::move(tail)});
        return detail::shift_and_append(pos_.w, d, std::move(tail));
    }

    /// max ||x(t_{k+1}) - x(t_k)|| / dt over the built mesh.
    double lipschitz_estimate() const {
        double best = 0.0;
        for (std::size_t k = 0; k + 1 < count_; ++k)
            best = std::max(best, (state(k + 1) - state(k)).norm() / (time(k + 1) - time(k)));
        return best;
    }

private:
    friend class MotionBuilder;

    void check_time(double t, const char* op) const {
        const double eps = 1e-12 * std::max(1.0, std::abs(t));
        if (t < pos_.tau - eps || t > end_time() + eps) {
            std::ostringstream os;
            os << "Motion::" << op << ": t = " << t << " outside [" << pos_.tau << ", " << end_time() << "]";
            throw DomainError(os.str());
        }
    }

    GamePosition pos_;
    Scheme scheme_ = Scheme::Euler;
    double end_ = 0.0;
    double dt_ = 0.0;
    std::size_t cells_ = 0;
    std::size_t count_ = 0;
    Eigen::MatrixXd states_;
};

/// Grows a Motion one mesh cell at a time; `truncate` rewinds, which is what
/// the game-tree search uses to replay control sequences.
class MotionBuilder {
public:
    MotionBuilder(const GameSpec& game, GamePosition pos, double end, std::size_t cells, Scheme scheme = Scheme::Euler)
        : game_(&game) {
        if (cells < 1) throw DomainError("MotionBuilder: need at least one cell");
        if (!(end > pos.tau)) throw DomainError("MotionBuilder: end must follow tau");
        motion_.pos_ = std::move(pos);
        motion_.scheme_ = scheme;
        motion_.end_ = end;
        motion_.cells_ = cells;
        motion_.dt_ = (end - motion_.pos_.tau) / static_cast<double>(cells);
        motion_.states_.resize(motion_.pos_.z.size(), static_cast<Eigen::Index>(cells + 1));
        motion_.states_.col(0) = motion_.pos_.z;
        motion_.count_ = 1;
    }

    const Motion& motion() const { return motion_; }
    std::size_t size() const { return motion_.count_; }
    bool complete() const { return motion_.complete(); }

    void truncate(std::size_t nodes) {
        if (nodes < 1 || nodes > motion_.count_) throw DomainError("MotionBuilder::truncate: bad node count");
        motion_.count_ = nodes;
    }

    /// Advances one cell under constant (u, v); returns the running-cost
    /// increment over the cell, integrated with the same rule as the state.
    double step(const Vec& u, const Vec& v) {
        if (complete()) throw DomainError("MotionBuilder::step: motion already reaches its end");
        const GameSpec& g = *game_;
        const std::size_t k = motion_.count_ - 1;
        const double t = motion_.time(k);
        const double t1 = motion_.time(k + 1);
        const double dt = t1 - t;
        const Vec x = motion_.state(k);
        const History r = motion_.slice(t);
        const Vec fk = g.f(t, x, r, u, v);
        check_finite(fk, t, x);
        const double ck = g.f0(t, x, r, u, v);

        const auto col = static_cast<Eigen::Index>(k + 1);
        motion_.states_.col(col) = x + dt * fk;
        motion_.count_ = k + 2;
        if (motion_.scheme_ == Scheme::Euler) return dt * ck;

        const Vec pred = motion_.state(k + 1);
        const Vec f1 = g.f(t1, pred, motion_.slice(t1), u, v);
        check_finite(f1, t1, pred);
        motion_.states_.col(col) = x + 0.5 * dt * (fk + f1);
        const Vec x1 = motion_.state(k + 1);
        const double c1 = g.f0(t1, x1, motion_.slice(t1), u, v);
        return 0.5 * dt * (ck + c1);
    }

private:
    static void check_finite(const Vec& fx, double t, const Vec& x) {
        if (fx.allFinite()) return;
        std::ostringstream os;
        os << "non-finite dynamics at t = " << t << ", x = [" << x.transpose() << "]";
        throw IntegrationError(os.str(), t);
    }

    const GameSpec* game_;
    Motion motion_;
};

/// Motion x(. | tau, z, w, u, v) on a uniform mesh of `steps` cells over
/// [tau, theta]. Controls are sampled at the left end of every cell.
inline Motion integrate(const GameSpec& game, const GamePosition& pos, const ControlSignal& u, const ControlSignal& v,
                        std::size_t steps, Scheme scheme = Scheme::Euler) {
    game.validate();
    check_position(pos, game.t0, game.theta);
    if (pos.w.delay() != game.h || pos.z.size() != game.n) throw DomainError("integrate: position does not fit the game");
    if (steps < 1) throw DomainError("integrate: steps must be >= 1");
    if (!(pos.tau < game.theta)) throw DomainError("integrate: tau must precede theta");
    u.validate(game.U, pos.tau, game.theta);
    v.validate(game.V, pos.tau, game.theta);
    MotionBuilder b(game, pos, game.theta, steps, scheme);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = b.motion().time(k);
        b.step(u.value_at(t), v.value_at(t));
    }
    return b.motion();
}

inline History slice(const Motion& motion, double t) { return motion.slice(t); }

/// gamma = sigma(x(theta), x_theta) + integral of f0, the integral taken with
/// the rule that matches the motion's scheme (left rectangle for Euler,
/// trapezoid for Heun).
inline double payoff(const GameSpec& game, const Motion& motion, const ControlSignal& u, const ControlSignal& v) {
    if (!motion.complete()) throw DomainError("payoff: motion does not reach theta");
    double running = 0.0;
    for (std::size_t k = 0; k + 1 < motion.size(); ++k) {
        const double t = motion.time(k);
        const double t1 = motion.time(k + 1);
        const Vec uk = u.value_at(t);
        const Vec vk = v.value_at(t);
        const double ck = game.f0(t, motion.state(k), motion.slice(t), uk, vk);
        if (motion.scheme() == Scheme::Euler) {
            running += (t1 - t) * ck;
        } else {
            const double c1 = game.f0(t1, motion.state(k + 1), motion.slice(t1), uk, vk);
            running += 0.5 * (t1 - t) * (ck + c1);
        }
    }
    const double end = motion.end_time();
    return game.sigma(motion.terminal_state(), motion.slice(end)) + running;
}

} // namespace delaygame
