#pragma once

// Desk-scale lower/upper values by exhaustive discrete-time game-tree search.
//
// [tau, end] is cut into `steps` stages; in every stage both players hold a
// grid control. The lower value lets the minimizer commit first in each stage
// (min_u max_v per stage), the upper value lets the maximizer commit first
// (max_v min_u). Open-loop variants fix one player's whole sequence first.
// Motions are never stored per node: the builder is rewound and replayed.

#include "delaygame/cicalculus.hpp"
#include "delaygame/dynamics.hpp"
#include "delaygame/errors.hpp"
#include "delaygame/history.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

namespace delaygame {

struct DPConfig {
    std::size_t steps = 1;
    std::vector<int> u_grid;  // empty: use the game's U grid
    std::vector<int> v_grid;  // empty: use the game's V grid
    std::size_t substeps = 1;
    double node_budget = 1e7;
    Scheme scheme = Scheme::Euler;
    bool memoize = false;
    double memo_quantum = 1e-12;
};

struct ValueEstimate {
    double value = 0.0;
    std::size_t steps = 0;
    std::vector<int> u_grid;
    std::vector<int> v_grid;
    std::uint64_t node_count = 0;  // complete control sequences, (|U||V|)^steps
    double elapsed_ms = 0.0;
};

struct StabilityResiduals {
    double u_residual = 0.0;  // sup_v inf_u [phi(t, ...) + cost] - phi(pos); u-stable iff <= 0
    double v_residual = 0.0;  // inf_u sup_v [phi(t, ...) + cost] - phi(pos); v-stable iff >= 0
    double phi_at_position = 0.0;
    std::uint64_t node_count = 0;
};

namespace detail {

enum class Player { Min, Max };

class GameTree {
public:
    using Terminal = std::function<double(const Motion&)>;

    GameTree(const GameSpec& game, const GamePosition& pos, double end, const DPConfig& cfg, Terminal terminal)
        : cfg_(cfg), us_(game.U.grid(cfg.u_grid)), vs_(game.V.grid(cfg.v_grid)), terminal_(std::move(terminal)),
          builder_(game, pos, end, check_config(cfg) * cfg.substeps, cfg.scheme) {
        const double per_stage = static_cast<double>(us_.size()) * static_cast<double>(vs_.size());
        const double required = std::pow(per_stage, static_cast<double>(cfg.steps));
        if (!(required <= cfg.node_budget)) {
            std::ostringstream os;
            os << "game tree needs " << required << " nodes, budget is " << cfg.node_budget;
            throw ResourceError(os.str(), required, cfg.node_budget);
        }
        leaves_ = static_cast<std::uint64_t>(std::llround(required));
    }

    std::uint64_t leaves() const { return leaves_; }

    /// `first` commits per stage, the other player answers.
    double stagewise(Player first) { return stagewise_at(0, 0.0, first); }

    /// `outer` picks a whole open-loop sequence, the other player answers it
    /// with a whole open-loop sequence of its own.
    double open_loop(Player outer) {
        const std::size_t choices = outer == Player::Min ? us_.size() : vs_.size();
        std::vector<std::size_t> seq(cfg_.steps, 0);
        double best = outer == Player::Min ? inf() : -inf();
        while (true) {
            const double val = respond(0, 0.0, outer == Player::Min ? Player::Max : Player::Min, seq);
            best = outer == Player::Min ? std::min(best, val) : std::max(best, val);
            std::size_t i = 0;
            for (; i < seq.size(); ++i) {
                if (++seq[i] < choices) break;
                seq[i] = 0;
            }
            if (i == seq.size()) break;
        }
        return best;
    }

private:
    static std::size_t check_config(const DPConfig& cfg) {
        if (cfg.steps < 1 || cfg.substeps < 1) throw DomainError("DPConfig: steps and substeps must be >= 1");
        return cfg.steps;
    }

    static double inf() { return std::numeric_limits<double>::infinity(); }

    double play(std::size_t base, double cost, const Vec& u, const Vec& v) {
        builder_.truncate(base);
        for (std::size_t k = 0; k < cfg_.substeps; ++k) cost += builder_.step(u, v);
        return cost;
    }

    std::vector<std::int64_t> memo_key(std::size_t stage) const {
        const Motion& m = builder_.motion();
        const double q = cfg_.memo_quantum;
        std::vector<std::int64_t> key{static_cast<std::int64_t>(stage)};
        const double t = m.end_time();
        const Vec x = m.terminal_state();
        for (Eigen::Index i = 0; i < x.size(); ++i) key.push_back(std::llround(x(i) / q));
        const History r = m.slice(t);
        constexpr int kProbes = 33;
        for (int j = 0; j < kProbes; ++j) {
            const Vec y = r.eval(-r.delay() + r.delay() * j / kProbes);
            for (Eigen::Index i = 0; i < y.size(); ++i) key.push_back(std::llround(y(i) / q));
        }
        return key;
    }

    double stagewise_at(std::size_t stage, double cost, Player first) {
        if (stage == cfg_.steps) return cost + terminal_(builder_.motion());
        std::vector<std::int64_t> key;
        if (cfg_.memoize) {
            key = memo_key(stage);
            if (auto it = memo_.find(key); it != memo_.end()) return cost + it->second;
        }
        const std::size_t base = builder_.size();
        const auto& outer = first == Player::Min ? us_ : vs_;
        const auto& inner = first == Player::Min ? vs_ : us_;
        double best = first == Player::Min ? inf() : -inf();
        for (const Vec& a : outer) {
            double reply = first == Player::Min ? -inf() : inf();
            for (const Vec& b : inner) {
                const Vec& u = first == Player::Min ? a : b;
                const Vec& v = first == Player::Min ? b : a;
                const double val = stagewise_at(stage + 1, play(base, cost, u, v), first);
                reply = first == Player::Min ? std::max(reply, val) : std::min(reply, val);
            }
            best = first == Player::Min ? std::min(best, reply) : std::max(best, reply);
        }
        builder_.truncate(base);
        if (cfg_.memoize) memo_.emplace(std::move(key), best - cost);
        return best;
    }

    double respond(std::size_t stage, double cost, Player responder, const std::vector<std::size_t>& fixed) {
        if (stage == cfg_.steps) return cost + terminal_(builder_.motion());
        const std::size_t base = builder_.size();
        const auto& options = responder == Player::Min ? us_ : vs_;
        double best = responder == Player::Min ? inf() : -inf();
        for (const Vec& a : options) {
            const Vec& u = responder == Player::Min ? a : us_[fixed[stage]];
            const Vec& v = responder == Player::Min ? vs_[fixed[stage]] : a;
            const double val = respond(stage + 1, play(base, cost, u, v), responder, fixed);
            best = responder == Player::Min ? std::min(best, val) : std::max(best, val);
        }
        builder_.truncate(base);
        return best;
    }

    DPConfig cfg_;
    std::vector<Vec> us_;
    std::vector<Vec> vs_;
    Terminal terminal_;
    MotionBuilder builder_;
    std::uint64_t leaves_ = 0;
    std::map<std::vector<std::int64_t>, double> memo_;
};

inline double terminal_payoff(const GameSpec& game, const Motion& m) {
    return game.sigma(m.terminal_state(), m.slice(m.end_time()));
}

inline void check_value_inputs(const GameSpec& game, const GamePosition& pos) {
    game.validate();
    check_position(pos, game.t0, game.theta);
    if (pos.w.delay() != game.h || pos.z.size() != game.n) throw DomainError("value solver: position does not fit the game");
    if (!(pos.tau < game.theta)) throw DomainError("value solver: need tau < theta");
}

template <class Search>
ValueEstimate run_value(const GameSpec& game, const GamePosition& pos, const DPConfig& cfg, Search search) {
    check_value_inputs(game, pos);
    const auto start = std::chrono::steady_clock::now();
    GameTree tree(game, pos, game.theta, cfg, [&game](const Motion& m) { return terminal_payoff(game, m); });
    ValueEstimate est;
    est.value = search(tree);
    est.steps = cfg.steps;
    est.u_grid = cfg.u_grid.empty() ? game.U.grid_counts() : cfg.u_grid;
    est.v_grid = cfg.v_grid.empty() ? game.V.grid_counts() : cfg.v_grid;
    est.node_count = tree.leaves();
    est.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return est;
}

} // namespace detail

/// Minimizer commits first in every stage: min_u max_v per stage.
inline ValueEstimate lower_value(const GameSpec& game, const GamePosition& pos, const DPConfig& cfg = {}) {
    return detail::run_value(game, pos, cfg, [](detail::GameTree& t) { return t.stagewise(detail::Player::Min); });
}

/// Maximizer commits first in every stage: max_v min_u per stage.
inline ValueEstimate upper_value(const GameSpec& game, const GamePosition& pos, const DPConfig& cfg = {}) {
    return detail::run_value(game, pos, cfg, [](detail::GameTree& t) { return t.stagewise(detail::Player::Max); });
}

/// sup over open-loop v sequences of inf over open-loop u sequences.
inline ValueEstimate programmed_maximin(const GameSpec& game, const GamePosition& pos, const DPConfig& cfg = {}) {
    return detail::run_value(game, pos, cfg, [](detail::GameTree& t) { return t.open_loop(detail::Player::Max); });
}

/// Stability residuals of phi on [pos.tau, t] with open-loop grid signals.
inline StabilityResiduals stability_residuals(const Functional& phi, const GameSpec& game, const GamePosition& pos,
                                              double t, const DPConfig& cfg = {}) {
    detail::check_value_inputs(game, pos);
    if (!(t > pos.tau && t <= game.theta)) throw DomainError("stability_residuals: need tau < t <= theta");
    auto terminal = [&phi](const Motion& m) {
        const double te = m.end_time();
        return phi(GamePosition{te, m.terminal_state(), m.slice(te)});
    };
    StabilityResiduals out;
    out.phi_at_position = phi(pos);
    DPConfig open = cfg;
    open.memoize = false;
    detail::GameTree tree(game, pos, t, open, terminal);
    out.u_residual = tree.open_loop(detail::Player::Max) - out.phi_at_position;
    out.v_residual = tree.open_loop(detail::Player::Min) - out.phi_at_position;
    out.node_count = 2 * tree.leaves();
    return out;
}

} // namespace delaygame
