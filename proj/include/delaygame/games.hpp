#pragma once

// Small reference games used by the CLI registry and the test suites.

#include "delaygame/dynamics.hpp"
#include "delaygame/history.hpp"

#include <cmath>

namespace delaygame::games {

/// f = 0, f0 = 0, sigma = 0; every value is zero.
inline GameSpec trivial_spec(Eigen::Index n = 1, double theta = 1.0) {
    GameSpec g;
    g.name = "trivial";
    g.n = n;
    g.t0 = 0.0;
    g.theta = theta;
    g.h = 1.0;
    g.f = [n](double, const Vec&, const History&, const Vec&, const Vec&) { return Vec::Zero(n).eval(); };
    g.f0 = [](double, const Vec&, const History&, const Vec&, const Vec&) { return 0.0; };
    g.sigma = [](const Vec&, const History&) { return 0.0; };
    g.U = ControlBox::interval(-1.0, 1.0, 3);
    g.V = ControlBox::interval(-1.0, 1.0, 3);
    return g;
}

/// Scalar x'(t) = x(t - 1) with no controls acting; exact solution from
/// w = 1, z = 1 at tau = 0 is 1 + t on [0, 1] and 2 + (t^2 - 1)/2 on [1, 2].
inline GameSpec delay_linear_spec(double theta = 1.0) {
    GameSpec g;
    g.name = "delay_linear";
    g.n = 1;
    g.t0 = 0.0;
    g.theta = theta;
    g.h = 1.0;
    g.f = [](double, const Vec&, const History& r, const Vec&, const Vec&) { return r.eval(-1.0); };
    g.f0 = [](double, const Vec&, const History&, const Vec&, const Vec&) { return 0.0; };
    g.sigma = [](const Vec& x, const History&) { return x(0); };
    g.U = ControlBox::interval(0.0, 0.0, 1);
    g.V = ControlBox::interval(0.0, 0.0, 1);
    return g;
}

/// Scalar x' = (u - v)^2, u, v in [-1, 1], sigma = x(theta). The
/// pre-Hamiltonian s (u - v)^2 has no saddle point: for s = 1 the grid
/// min-max is 1 and the max-min is 0.
inline GameSpec nonisaacs_spec(int grid = 21) {
    GameSpec g;
    g.name = "nonisaacs";
    g.n = 1;
    g.t0 = 0.0;
    g.theta = 1.0;
    g.h = 1.0;
    g.f = [](double, const Vec&, const History&, const Vec& u, const Vec& v) {
        const double d = u(0) - v(0);
        return Vec::Constant(1, d * d).eval();
    };
    g.f0 = [](double, const Vec&, const History&, const Vec&, const Vec&) { return 0.0; };
    g.sigma = [](const Vec& x, const History&) { return x(0); };
    g.U = ControlBox::interval(-1.0, 1.0, grid);
    g.V = ControlBox::interval(-1.0, 1.0, grid);
    return g;
}

} // namespace delaygame::games
