#pragma once

// Name -> game and name -> functional tables used by the command layer.
// Adding an entry here is the way to plug in a new game or functional.

#include "delaygame/cicalculus.hpp"
#include "delaygame/dynamics.hpp"
#include "delaygame/example_game.hpp"
#include "delaygame/games.hpp"
#include "delaygame/json_io.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace delaygame::registry {

using io::json;

struct GameEntry {
    std::string description;
    std::function<GameSpec(const json& options)> make;  // options may be null
};

struct FunctionalEntry {
    std::string game;
    std::string description;
    std::function<Functional()> make;
    /// Sub/superdifferential members to test where no ci-gradient exists.
    std::function<std::vector<DiffCandidate>(const GamePosition&)> candidates;
    std::function<std::vector<GamePosition>(std::size_t count, std::uint64_t seed)> sample;
    std::function<std::string(const GamePosition&)> label;  // optional region name for reports
};

namespace detail {

inline int option_int(const json& o, const char* key, int fallback) {
    return static_cast<int>(io::integer_or(o.is_null() ? json::object() : o, key, std::string("game_options"), fallback));
}

inline std::vector<DiffCandidate> demo_candidates(const GamePosition& pos, double shift) {
    std::vector<DiffCandidate> out;
    if (demo::region(pos) == demo::Region::Zero) {
        out = demo::g0_sub_candidates(pos);
        for (DiffCandidate& c : demo::g0_super_candidates(pos)) out.push_back(c);
    } else {
        const CiGradient g = demo::closed_form_ci_gradient(pos);
        out.push_back({g.dt, g.grad_z, DiffKind::Sub, 0.0});
        out.push_back({g.dt, g.grad_z, DiffKind::Super, 0.0});
    }
    for (DiffCandidate& c : out) c.p(0) += shift;
    return out;
}

inline std::string demo_label(const GamePosition& pos) {
    return pos.tau < demo::kTheta ? demo::to_string(demo::region(pos)) : "terminal";
}

} // namespace detail

inline const std::map<std::string, GameEntry>& games() {
    static const std::map<std::string, GameEntry> table{
        {"demo",
         {"2-D delay game with a closed-form value (options: u_grid, v_grid)",
          [](const json& o) { return demo::example_spec(detail::option_int(o, "u_grid", 2001), detail::option_int(o, "v_grid", 3)); }}},
        {"trivial",
         {"f = 0, f0 = 0, sigma = 0 (options: n, theta)",
          [](const json& o) {
              const json opts = o.is_null() ? json::object() : o;
              return games::trivial_spec(detail::option_int(o, "n", 1), io::number_or(opts, "theta", "game_options", 1.0));
          }}},
        {"delay_linear",
         {"x'(t) = x(t - 1) (options: theta)",
          [](const json& o) {
              const json opts = o.is_null() ? json::object() : o;
              return games::delay_linear_spec(io::number_or(opts, "theta", "game_options", 1.0));
          }}},
        {"nonisaacs",
         {"x' = (u - v)^2, no saddle point (options: grid)",
          [](const json& o) { return games::nonisaacs_spec(detail::option_int(o, "grid", 21)); }}},
    };
    return table;
}

inline const std::map<std::string, FunctionalEntry>& functionals() {
    static const std::map<std::string, FunctionalEntry> table{
        {"demo_phi",
         {"demo", "closed-form value of demo", [] { return demo::phi_functional(); },
          [](const GamePosition& p) { return detail::demo_candidates(p, 0.0); }, demo::sample_positions,
          detail::demo_label}},
        {"demo_phi_perturbed",
         {"demo", "demo value plus 0.2 z1", [] { return demo::perturbed_phi_functional(0.2); },
          [](const GamePosition& p) { return detail::demo_candidates(p, 0.2); }, demo::sample_positions,
          detail::demo_label}},
    };
    return table;
}

} // namespace delaygame::registry
