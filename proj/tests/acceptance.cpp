// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "delaygame/cli.hpp"
#include "delaygame/delaygame.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace delaygame;
namespace ex = delaygame::demo;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& run) {
    Outcome o;
    try {
        o = run();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s [%d] %s: %s\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

// ---- test-side closed forms for the example game ---------------------------

double w2_at_minus_one(const GamePosition& p) { return p.w.eval(-1.0)(1); }
double chi(double tau) { return std::max(2.0 - tau, 0.0); }

double oracle_phi0(const GamePosition& p) {
    const double c = chi(p.tau);
    const double upper = 2.0 - p.tau - c;
    const double integral = upper <= -1.0 ? 0.0 : p.w.integrate_component(1, -1.0, upper);
    return p.z(0) + c * p.z(1) + integral;
}

double oracle_theta(const GamePosition& p) {
    const double a = std::abs(oracle_phi0(p));
    const double c = chi(p.tau);
    return oracle::grid_argmax([&](double th) { return a * th + c * c * th - (3.0 - p.tau) * std::sqrt(1.0 + th * th); },
                               0.0, 1.0);
}

double oracle_hamiltonian(const GamePosition& p, const Vec& s) {
    return w2_at_minus_one(p) * s(0) - std::sqrt(1.0 + s(0) * s(0)) + 2.0 * std::abs(s(1));
}

Outcome criterion1() {
    const GameSpec g = ex::example_spec(2001, 3);
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> unit(-3.0, 3.0);
    const auto positions = ex::sample_positions(50, 101);
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (const GamePosition& p : positions) {
        const Vec s = vec2(unit(rng), unit(rng));
        worst = std::max(worst, std::abs(hamiltonian_minmax(g, p, s).value - oracle_hamiltonian(p, s)));
    }
    const double secs = seconds_since(t0);
    return {worst <= 5e-3 && secs < 5.0, fmt("max |H_grid - H_closed| = %.3g (<= 5e-3) over 50 samples, %.2f s (< 5 s)", worst, secs)};
}

Outcome criterion2() {
    const GameSpec g = ex::example_spec(2001, 3);
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> unit(-3.0, 3.0);
    double worst = 0.0;
    for (const GamePosition& p : ex::sample_positions(50, 101)) {
        const Vec s = vec2(unit(rng), unit(rng));
        worst = std::max(worst, isaacs_gap(g, p, s).gap);
    }
    const GameSpec n = games::nonisaacs_spec();
    const GamePosition p0{0.0, Vec::Zero(1), History::zero(1.0, 1)};
    const double gap = isaacs_gap(n, p0, Vec::Ones(1)).gap;
    return {worst <= 1e-6 && gap >= 0.4,
            fmt("example max gap = %.3g (<= 1e-6); non-Isaacs gap at s = 1 is %.3g (>= 0.4)", worst, gap)};
}

Outcome criterion3() {
    const Functional phi = ex::phi_functional();
    const auto t0 = Clock::now();
    double worst_grad = 0.0;
    int smooth = 0;
    for (const GamePosition& p : ex::sample_positions(60, 303)) {
        if (smooth == 10) break;
        const double f0 = oracle_phi0(p);
        if (std::abs(f0) < 0.2) continue;
        const double sign = f0 > 0 ? 1.0 : -1.0;
        const double th = oracle_theta(p);
        const double c = chi(p.tau);
        const double dt = -sign * w2_at_minus_one(p) * th - 2.0 * c * th + std::sqrt(1.0 + th * th);
        const CiGradientEstimate est = ci_gradient(phi, p);
        if (!est.gradient) return {false, "no ci-gradient at a smooth point: " + est.reason};
        worst_grad = std::max({worst_grad, std::abs(est.gradient->dt - dt), std::abs(est.gradient->grad_z(0) - sign * th),
                               std::abs(est.gradient->grad_z(1) - sign * c * th)});
        ++smooth;
    }
    std::mt19937_64 rng(304);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Direction> dirs;
    for (int k = 0; k < 8; ++k) {
        Vec l = vec2(gauss(rng), gauss(rng));
        dirs.push_back({k < 4 ? 0.0 : 1.0, l / l.norm()});
    }
    double worst_dir = 0.0;
    int zero = 0;
    for (const GamePosition& p : ex::sample_positions(60, 305)) {
        if (zero == 5) break;
        if (std::abs(oracle_phi0(p)) > 1e-12) continue;
        const double th = oracle_theta(p);
        const double c = chi(p.tau);
        for (const Direction& d : dirs) {
            const double exact = std::abs(-w2_at_minus_one(p) * d.l0 + d.l(0) + c * d.l(1)) * th +
                                 (-2.0 * c * th + std::sqrt(1.0 + th * th)) * d.l0;
            const double lo = directional_derivative(phi, p, d, Side::Lower).value;
            const double up = directional_derivative(phi, p, d, Side::Upper).value;
            worst_dir = std::max({worst_dir, std::abs(lo - exact), std::abs(up - exact)});
        }
        ++zero;
    }
    const double secs = seconds_since(t0);
    return {smooth == 10 && zero == 5 && worst_grad <= 1e-3 && worst_dir <= 1e-3 && secs < 10.0,
            fmt("ci-gradient err %.3g at 10 smooth points, directional err %.3g at 5 x 8 G0 probes (<= 1e-3), %.2f s (< 10 s)",
                worst_grad, worst_dir, secs)};
}

Outcome criterion4() {
    using cli::json;
    const json good = {{"game", "demo"}, {"seed", 11}, {"verify", {{"functional", "demo_phi"}, {"samples", 24}}}};
    const json bad = {{"game", "demo"}, {"seed", 11}, {"verify", {{"functional", "demo_phi_perturbed"}, {"samples", 24}}}};
    const cli::CommandResult a = cli::run_command("verify", good);
    const cli::CommandResult b = cli::run_command("verify", bad);
    if (a.report.is_null() || b.report.is_null()) return {false, "verify did not produce a report: " + a.message + b.message};
    int regions[3] = {0, 0, 0};
    for (const auto& row : a.report["positions"]) {
        const std::string r = row["region"];
        regions[r == "G_plus" ? 0 : r == "G_minus" ? 1 : 2]++;
    }
    const double sub = a.report["worst_sub_residual"];
    const double sup = a.report["worst_super_residual"];
    const double term = a.report["terminal"]["mismatch"];
    const double bad_sub = b.report["worst_sub_residual"];
    const double bad_sup = b.report["worst_super_residual"];
    const double bad_violation = std::max(bad_sub, -bad_sup);
    const bool ok = a.exit_code == 0 && sub <= 5e-3 && sup >= -5e-3 && term <= 1e-10 && regions[0] > 0 && regions[1] > 0 &&
                    regions[2] > 0 && a.report["positions"].size() >= 20 && b.exit_code == 1 && bad_violation >= 0.05;
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "phi: exit %d, %zu positions (%d/%d/%d in G+/G-/G0), sub <= %.2g, super >= %.2g, terminal %.2g; "
                  "phi + 0.2 z1: exit %d, residual violation %.3g (>= 0.05)",
                  a.exit_code, a.report["positions"].size(), regions[0], regions[1], regions[2], sub, sup, term, b.exit_code,
                  bad_violation);
    return {ok, buf};
}

Outcome criterion5() {
    const GameSpec g = ex::example_spec();
    const GamePosition p{2.5, vec2(1, 0), History::zero(1.0, 2)};
    DPConfig c;
    c.steps = 2;
    c.substeps = 2;
    c.u_grid = {201};
    c.v_grid = {3};
    const auto t0 = Clock::now();
    const ValueEstimate lo = lower_value(g, p, c);
    const ValueEstimate up = upper_value(g, p, c);
    const ValueEstimate pm = programmed_maximin(g, p, c);
    const double secs = seconds_since(t0);
    const double target = 1.0 - std::sqrt(2.0) / 2.0;
    const double err = std::max({std::abs(lo.value - target), std::abs(up.value - target), std::abs(pm.value - target)});
    const double nodes = static_cast<double>(lo.node_count);
    return {err <= 0.02 && std::abs(lo.value - up.value) <= 0.05 && secs < 60.0 && nodes <= c.node_budget,
            fmt("lower %.6f upper %.6f programmed %.6f vs 0.292893 (<= 0.02), %.2f s (< 60 s)", lo.value, up.value, pm.value,
                secs)};
}

Outcome criterion6() {
    const GameSpec g = ex::example_spec(201, 3);
    const Functional phi = ex::phi_functional();
    DPConfig c;
    c.steps = 1;
    c.substeps = 4;
    double worst_u = -INFINITY;
    double worst_v = INFINITY;
    for (const GamePosition& p : ex::sample_positions(5, 606)) {
        const StabilityResiduals r = stability_residuals(phi, g, p, std::min(p.tau + 0.1, g.theta), c);
        worst_u = std::max(worst_u, r.u_residual);
        worst_v = std::min(worst_v, r.v_residual);
    }
    return {worst_u <= 0.03 && worst_v >= -0.03,
            fmt("5 positions, one cell of length 0.1: max u_residual %.3g (<= 0.03), min v_residual %.3g (>= -0.03)", worst_u,
                worst_v)};
}

Outcome criterion7() {
    auto solve = [](double theta, std::size_t steps) {
        const GameSpec g = games::delay_linear_spec(theta);
        const GamePosition p{0.0, Vec::Ones(1), History::constant(1.0, Vec::Ones(1))};
        const auto zero = ControlSignal::constant(0.0, theta, Vec::Zero(1));
        return integrate(g, p, zero, zero, steps).terminal_state()(0);
    };
    const double x1 = solve(1.0, 1000);
    const double e1 = std::abs(solve(2.0, 100) - oracle::delay_linear_exact(2.0));
    const double e2 = std::abs(solve(2.0, 200) - oracle::delay_linear_exact(2.0));
    const double e3 = std::abs(solve(2.0, 400) - oracle::delay_linear_exact(2.0));
    const double r1 = e1 / e2;
    const double r2 = e2 / e3;
    const bool ok = std::abs(x1 - 2.0) <= 1e-3 && std::abs(r1 - 2.0) <= 0.2 && std::abs(r2 - 2.0) <= 0.2;
    return {ok, fmt("x(1) = %.9f at 1000 steps; error ratios under halving on [0, 2]: %.3f, %.3f (first order ~ 2)", x1, r1,
                    r2)};
}

History scaled(const History& w, double a) {
    std::vector<Segment> segs;
    for (const Segment& s : w.segments()) {
        if (const auto* c = std::get_if<ConstantPiece>(&s)) segs.push_back(ConstantPiece{a * c->value});
        else if (const auto* p = std::get_if<PolynomialPiece>(&s)) {
            PolynomialPiece q = *p;
            for (Vec& v : q.coeffs) v *= a;
            segs.push_back(q);
        } else {
            SampledPiece q = std::get<SampledPiece>(s);
            q.values *= a;
            segs.push_back(q);
        }
    }
    return History(w.delay(), w.knots(), segs);
}

History random_sampled(std::mt19937_64& rng, double h, Eigen::Index n) {
    std::uniform_int_distribution<int> count(2, 40);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const int k = count(rng);
    std::vector<double> nodes;
    for (int j = 0; j <= k; ++j) nodes.push_back(j == k ? 0.0 : -h + h * j / k);
    Eigen::MatrixXd vals(n, k + 1);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int j = 0; j <= k; ++j) vals(i, j) = 2.0 * unit(rng);
    return History::sampled(h, nodes, vals);
}

Outcome criterion8() {
    std::mt19937_64 rng(808);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    int checked = 0;
    int bad = 0;
    std::string first_bad;
    auto expect = [&](bool cond, const char* what) {
        if (!cond && bad++ == 0) first_bad = what;
    };
    for (int trial = 0; trial < 150; ++trial) {
        const Eigen::Index n = 1 + trial % 3;
        const double h = trial % 5 == 0 ? 0.5 : 1.0;
        auto draw = [&] { return trial % 4 == 3 ? random_sampled(rng, h, n) : oracle::random_exact_history(rng, h, n); };
        const History a = draw();
        const History b = draw();
        const History c = draw();
        const double alpha = 3.0 * unit(rng);
        const double na = norm_l1(a);
        expect(na >= 0.0, "non-negativity");
        expect(norm_l1(History::zero(h, n)) == 0.0, "zero norm");
        expect(std::abs(norm_l1(scaled(a, alpha)) - std::abs(alpha) * na) <= 1e-10 * (1.0 + na), "homogeneity");
        expect(l1_distance(a, a) <= 1e-12, "identity");
        expect(std::abs(l1_distance(a, b) - l1_distance(b, a)) <= 1e-12, "symmetry");
        expect(l1_distance(a, c) <= l1_distance(a, b) + l1_distance(b, c) + 1e-10, "triangle");
        expect(na <= h * norm_sup(a) + 1e-10, "L1 <= h sup");
        // constant extensions converge in L1 as the shift goes to zero
        Vec z(n);
        for (Eigen::Index i = 0; i < n; ++i) z(i) = 2.0 * unit(rng);
        const GamePosition pos{0.3, z, a};
        const double tv = oracle::variation_bound(a, z);
        for (double d : {1e-1, 1e-2, 1e-3, 1e-4})
            expect(l1_distance(constant_extension(pos, 0.3 + d, 10.0), a) <= d * tv + 1e-10, "constant extension convergence");
        // right-continuity at every knot
        for (double xi : a.knots()) {
            if (xi >= 0.0) continue;
            expect((a.eval(xi + 1e-10) - a.eval(xi)).norm() <= 1e-6, "right-continuity");
        }
        ++checked;
    }
    return {bad == 0 && checked >= 100,
            std::to_string(checked) + " random histories, " + std::to_string(bad) + " violations" +
                (bad ? " (first: " + first_bad + ")" : std::string())};
}

} // namespace

int main() {
    report(1, "Hamiltonian oracle equivalence", criterion1);
    report(2, "Isaacs condition", criterion2);
    report(3, "ci-calculus oracle equivalence", criterion3);
    report(4, "viscosity verification", criterion4);
    report(5, "value coincidence", criterion5);
    report(6, "stability residuals", criterion6);
    report(7, "integrator correctness", criterion7);
    report(8, "history-space invariants", criterion8);
    std::printf("%d of 8 criteria passed\n", 8 - failures);
    return failures == 0 ? 0 : 1;
}
