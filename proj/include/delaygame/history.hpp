#pragma once

// Piecewise-continuous functions on [-h, 0) and the game position triple.
//
// A History is a list of knots -h = k_0 < k_1 < ... < k_m = 0 and one
// segment per half-open interval [k_i, k_{i+1}). Segments are right-continuous
// with a finite left limit at their right end. Three segment kinds are kept:
// constants, polynomials (stored around their own origin so that shifting in
// time is free) and sampled grids with linear interpolation.

#include "delaygame/errors.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace delaygame {

using Vec = Eigen::VectorXd;

inline constexpr int kMaxPolynomialDegree = 8;

struct ConstantPiece {
    Vec value;
};

/// value(xi) = sum_k coeffs[k] * (xi - origin)^k
struct PolynomialPiece {
    double origin = 0.0;
    std::vector<Vec> coeffs;
};

/// Linear interpolation between columns of `values` placed at `nodes`.
/// The node range must cover the segment interval; it may extend past it.
struct SampledPiece {
    std::vector<double> nodes;
    Eigen::MatrixXd values;  // dim x nodes.size()
};

using Segment = std::variant<ConstantPiece, PolynomialPiece, SampledPiece>;

namespace detail {

inline Eigen::Index segment_dim(const Segment& s) {
    return std::visit(
        [](const auto& p) -> Eigen::Index {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ConstantPiece>) return p.value.size();
            else if constexpr (std::is_same_v<T, PolynomialPiece>) return p.coeffs.empty() ? 0 : p.coeffs.front().size();
            else return p.values.rows();
        },
        s);
}

inline Vec segment_eval(const Segment& s, double xi) {
    return std::visit(
        [xi](const auto& p) -> Vec {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ConstantPiece>) {
                return p.value;
            } else if constexpr (std::is_same_v<T, PolynomialPiece>) {
                // Horner
                const double s = xi - p.origin;
                Vec acc = p.coeffs.back();
                for (auto k = static_cast<std::ptrdiff_t>(p.coeffs.size()) - 2; k >= 0; --k)
                    acc = acc * s + p.coeffs[static_cast<std::size_t>(k)];
                return acc;
            } else {
                const auto& x = p.nodes;
                if (xi <= x.front()) return p.values.col(0);
                if (xi >= x.back()) return p.values.col(static_cast<Eigen::Index>(x.size() - 1));
                const auto it = std::upper_bound(x.begin(), x.end(), xi);
                const auto j = static_cast<Eigen::Index>(it - x.begin()) - 1;
                const double a = x[static_cast<std::size_t>(j)];
                const double b = x[static_cast<std::size_t>(j + 1)];
                const double lam = (xi - a) / (b - a);
                return (1.0 - lam) * p.values.col(j) + lam * p.values.col(j + 1);
            }
        },
        s);
}

/// Integral of one component of a segment over [a, b]; exact for every kind
/// (the sampled kind is integrated as its piecewise-linear interpolant).
inline double segment_component_integral(const Segment& s, Eigen::Index i, double a, double b) {
    return std::visit(
        [&](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ConstantPiece>) {
                return p.value(i) * (b - a);
            } else if constexpr (std::is_same_v<T, PolynomialPiece>) {
                const double sa = a - p.origin;
                const double sb = b - p.origin;
                double acc = 0.0;
                for (std::size_t k = 0; k < p.coeffs.size(); ++k) {
                    const double kk = static_cast<double>(k + 1);
                    acc += p.coeffs[k](i) * (std::pow(sb, kk) - std::pow(sa, kk)) / kk;
                }
                return acc;
            } else {
                double acc = 0.0;
                double prev_x = a;
                double prev_y = segment_eval(s, a)(i);
                for (double node : p.nodes) {
                    if (node <= a) continue;
                    if (node >= b) break;
                    const double y = segment_eval(s, node)(i);
                    acc += 0.5 * (prev_y + y) * (node - prev_x);
                    prev_x = node;
                    prev_y = y;
                }
                acc += 0.5 * (prev_y + segment_eval(s, b)(i)) * (b - prev_x);
                return acc;
            }
        },
        s);
}

inline Segment shift_segment(const Segment& s, double d) {
    return std::visit(
        [d](const auto& p) -> Segment {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ConstantPiece>) {
                return p;
            } else if constexpr (std::is_same_v<T, PolynomialPiece>) {
                return PolynomialPiece{p.origin - d, p.coeffs};
            } else {
                SampledPiece q = p;
                for (double& x : q.nodes) x -= d;
                return q;
            }
        },
        s);
}

inline bool is_sampled(const Segment* s) { return s != nullptr && std::holds_alternative<SampledPiece>(*s); }
inline bool is_constant(const Segment* s) { return s == nullptr || std::holds_alternative<ConstantPiece>(*s); }

/// Integral over [a, b] of || s1(xi) - s2(xi) || (s2 may be null, meaning 0).
///
/// Constant pairs are exact. Any sampled operand switches to the composite
/// trapezoid rule on the union of both node sets. Otherwise the integrand is
/// smooth between sign changes of the components; those are bracketed and
/// bisected, and each smooth piece goes to adaptive Gauss-Kronrod.
inline double piece_norm_integral(const Segment& s1, const Segment* s2, double a, double b) {
    if (b <= a) return 0.0;
    auto diff = [&](double xi) -> Vec {
        Vec v = segment_eval(s1, xi);
        if (s2 != nullptr) v -= segment_eval(*s2, xi);
        return v;
    };
    if (is_constant(&s1) && is_constant(s2)) return diff(a).norm() * (b - a);

    if (is_sampled(&s1) || is_sampled(s2)) {
        std::vector<double> xs{a, b};
        for (const Segment* s : {&s1, s2}) {
            if (!is_sampled(s)) continue;
            for (double x : std::get<SampledPiece>(*s).nodes)
                if (x > a && x < b) xs.push_back(x);
        }
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        double acc = 0.0;
        double prev = diff(xs.front()).norm();
        for (std::size_t k = 1; k < xs.size(); ++k) {
            const double cur = diff(xs[k]).norm();
            acc += 0.5 * (prev + cur) * (xs[k] - xs[k - 1]);
            prev = cur;
        }
        return acc;
    }

    // Split points: sign changes of each component on a fine bracket grid.
    constexpr int kBrackets = 256;
    std::vector<double> cuts{a, b};
    const Vec fa = diff(a);
    const Eigen::Index n = fa.size();
    std::vector<double> grid(kBrackets + 1);
    Eigen::MatrixXd vals(n, kBrackets + 1);
    for (int k = 0; k <= kBrackets; ++k) {
        grid[static_cast<std::size_t>(k)] = a + (b - a) * k / kBrackets;
        vals.col(k) = diff(grid[static_cast<std::size_t>(k)]);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int k = 0; k < kBrackets; ++k) {
            double lo = grid[static_cast<std::size_t>(k)];
            double hi = grid[static_cast<std::size_t>(k + 1)];
            double flo = vals(i, k);
            const double fhi = vals(i, k + 1);
            if (!(flo * fhi < 0.0)) continue;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = diff(mid)(i);
                if ((fm < 0.0) == (flo < 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            cuts.push_back(0.5 * (lo + hi));
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    using boost::math::quadrature::gauss_kronrod;
    double acc = 0.0;
    for (std::size_t k = 1; k < cuts.size(); ++k) {
        if (cuts[k] <= cuts[k - 1]) continue;
        acc += gauss_kronrod<double, 15>::integrate([&](double xi) { return diff(xi).norm(); }, cuts[k - 1], cuts[k], 10,
                                                    1e-12);
    }
    return acc;
}

/// Supremum of ||s(xi)|| over [a, b], b taken as a left limit.
inline double piece_sup(const Segment& s, double a, double b) {
    return std::visit(
        [&](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ConstantPiece>) {
                return p.value.norm();
            } else if constexpr (std::is_same_v<T, SampledPiece>) {
                // the norm of a linear interpolant is convex between nodes
                double best = std::max(segment_eval(s, a).norm(), segment_eval(s, b).norm());
                for (std::size_t j = 0; j < p.nodes.size(); ++j)
                    if (p.nodes[j] > a && p.nodes[j] < b)
                        best = std::max(best, p.values.col(static_cast<Eigen::Index>(j)).norm());
                return best;
            } else {
                constexpr int kScan = 512;
                double best = -1.0;
                int best_k = 0;
                for (int k = 0; k <= kScan; ++k) {
                    const double v = segment_eval(s, a + (b - a) * k / kScan).norm();
                    if (v > best) {
                        best = v;
                        best_k = k;
                    }
                }
                // golden-section polish inside the neighbouring cells
                const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
                double lo = a + (b - a) * std::max(best_k - 1, 0) / kScan;
                double hi = a + (b - a) * std::min(best_k + 1, kScan) / kScan;
                for (int it = 0; it < 100 && hi - lo > 1e-14; ++it) {
                    const double x1 = hi - invphi * (hi - lo);
                    const double x2 = lo + invphi * (hi - lo);
                    if (segment_eval(s, x1).norm() < segment_eval(s, x2).norm()) lo = x1;
                    else hi = x2;
                }
                return std::max(best, segment_eval(s, 0.5 * (lo + hi)).norm());
            }
        },
        s);
}

} // namespace detail

class History {
public:
    History() = default;

    History(double h, std::vector<double> knots, std::vector<Segment> segments)
        : h_(h), knots_(std::move(knots)), segments_(std::move(segments)) {
        validate();
    }

    static History constant(double h, const Vec& value) { return History(h, {-h, 0.0}, {ConstantPiece{value}}); }
    static History zero(double h, Eigen::Index dim) { return constant(h, Vec::Zero(dim)); }

    /// Single sampled segment on [-h, 0) with nodes covering it.
    static History sampled(double h, std::vector<double> nodes, Eigen::MatrixXd values) {
        return History(h, {-h, 0.0}, {SampledPiece{std::move(nodes), std::move(values)}});
    }

    Eigen::Index dim() const { return dim_; }
    double delay() const { return h_; }
    const std::vector<double>& knots() const { return knots_; }
    const std::vector<Segment>& segments() const { return segments_; }

    /// Index of the segment whose half-open interval contains xi.
    std::size_t segment_index(double xi) const {
        if (!(xi >= -h_ && xi < 0.0)) throw DomainError(out_of_domain("eval", xi, "[-h, 0)"));
        const auto it = std::upper_bound(knots_.begin(), knots_.end(), xi);
        return static_cast<std::size_t>(it - knots_.begin()) - 1;
    }

    Vec eval(double xi) const { return detail::segment_eval(segments_[segment_index(xi)], xi); }

    Vec left_limit(double xi) const {
        if (!(xi > -h_ && xi <= 0.0)) throw DomainError(out_of_domain("left_limit", xi, "(-h, 0]"));
        const auto it = std::lower_bound(knots_.begin(), knots_.end(), xi);
        const auto idx = static_cast<std::size_t>(it - knots_.begin()) - 1;
        return detail::segment_eval(segments_[idx], xi);
    }

    /// Integral of component i over [a, b] with -h <= a, b <= 0; zero when b <= a.
    double integrate_component(Eigen::Index i, double a, double b) const {
        if (i < 0 || i >= dim_) throw DomainError("integrate_component: component index out of range");
        if (b <= a) return 0.0;
        if (a < -h_ || b > 0.0) throw DomainError("integrate_component: bounds outside [-h, 0]");
        double acc = 0.0;
        for (std::size_t k = 0; k < segments_.size(); ++k) {
            const double lo = std::max(a, knots_[k]);
            const double hi = std::min(b, knots_[k + 1]);
            if (hi > lo) acc += detail::segment_component_integral(segments_[k], i, lo, hi);
        }
        return acc;
    }

private:
    static std::string out_of_domain(const char* op, double xi, const char* range) {
        std::ostringstream os;
        os << op << ": xi = " << xi << " outside " << range;
        return os.str();
    }

    void validate() {
        if (!(h_ > 0.0) || !std::isfinite(h_)) throw DomainError("History: delay h must be positive");
        if (knots_.size() < 2) throw DomainError("History: need at least two knots");
        if (segments_.size() != knots_.size() - 1) throw DomainError("History: one segment per knot interval required");
        if (knots_.front() != -h_ || knots_.back() != 0.0) throw DomainError("History: knots must run from -h to 0");
        for (std::size_t k = 1; k < knots_.size(); ++k)
            if (!(knots_[k] > knots_[k - 1])) throw DomainError("History: knots must be strictly increasing");
        dim_ = detail::segment_dim(segments_.front());
        if (dim_ <= 0) throw DomainError("History: dimension must be positive");
        for (std::size_t k = 0; k < segments_.size(); ++k) {
            const Segment& s = segments_[k];
            if (detail::segment_dim(s) != dim_) throw DomainError("History: segments disagree on dimension");
            if (const auto* poly = std::get_if<PolynomialPiece>(&s)) {
                if (poly->coeffs.empty() || poly->coeffs.size() > kMaxPolynomialDegree + 1)
                    throw DomainError("History: polynomial degree out of range");
                for (const Vec& c : poly->coeffs)
                    if (c.size() != dim_ || !c.allFinite()) throw DomainError("History: bad polynomial coefficient");
            } else if (const auto* smp = std::get_if<SampledPiece>(&s)) {
                const auto& x = smp->nodes;
                if (x.size() < 2 || static_cast<Eigen::Index>(x.size()) != smp->values.cols())
                    throw DomainError("History: sampled segment needs >= 2 nodes, one value column each");
                for (std::size_t j = 1; j < x.size(); ++j)
                    if (!(x[j] > x[j - 1])) throw DomainError("History: sampled nodes must be strictly increasing");
                const double slack = 1e-12 * std::max(1.0, h_);
                if (x.front() > knots_[k] + slack || x.back() < knots_[k + 1] - slack)
                    throw DomainError("History: sampled nodes do not cover the segment interval");
                if (!smp->values.allFinite()) throw DomainError("History: non-finite sample");
            } else if (!std::get<ConstantPiece>(s).value.allFinite()) {
                throw DomainError("History: non-finite constant");
            }
        }
    }

    double h_ = 1.0;
    std::vector<double> knots_;
    std::vector<Segment> segments_;
    Eigen::Index dim_ = 0;
};

/// (tau, z, w) in G.
struct GamePosition {
    double tau = 0.0;
    Vec z;
    History w;
};

inline void check_position(const GamePosition& pos, double t0, double theta) {
    if (!(pos.tau >= t0 && pos.tau <= theta)) throw DomainError("GamePosition: tau outside the horizon");
    if (pos.z.size() != pos.w.dim()) throw DomainError("GamePosition: z and w disagree on dimension");
}

/// ||w||_1 = integral over [-h, 0) of the Euclidean norm.
inline double norm_l1(const History& w) {
    double acc = 0.0;
    const auto& k = w.knots();
    for (std::size_t i = 0; i < w.segments().size(); ++i)
        acc += detail::piece_norm_integral(w.segments()[i], nullptr, k[i], k[i + 1]);
    return acc;
}

inline double norm_sup(const History& w) {
    double best = 0.0;
    const auto& k = w.knots();
    for (std::size_t i = 0; i < w.segments().size(); ++i)
        best = std::max(best, detail::piece_sup(w.segments()[i], k[i], k[i + 1]));
    return best;
}

/// ||w - w2||_1 over the merged knot set.
inline double l1_distance(const History& w, const History& w2) {
    if (w.dim() != w2.dim() || w.delay() != w2.delay()) throw DomainError("l1_distance: histories disagree on dim or h");
    std::vector<double> knots = w.knots();
    knots.insert(knots.end(), w2.knots().begin(), w2.knots().end());
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double a = knots[i];
        const double b = knots[i + 1];
        const Segment& s1 = w.segments()[w.segment_index(a)];
        const Segment& s2 = w2.segments()[w2.segment_index(a)];
        acc += detail::piece_norm_integral(s1, &s2, a, b);
    }
    return acc;
}

namespace detail {

/// Pieces of `w` moved left by d and clipped to [-h, -d), followed by `tail`
/// on [-d, 0). Requires 0 < d < h.
inline History shift_and_append(const History& w, double d, Segment tail) {
    const double h = w.delay();
    const double min_len = 1e-14 * h;
    std::vector<double> knots;
    std::vector<Segment> segs;
    const auto& k = w.knots();
    for (std::size_t i = 0; i < w.segments().size(); ++i) {
        const double lo = std::max(k[i] - d, -h);
        const double hi = std::min(k[i + 1] - d, -d);
        if (hi - lo <= min_len) continue;
        knots.push_back(knots.empty() ? -h : lo);
        segs.push_back(shift_segment(w.segments()[i], d));
    }
    if (knots.empty()) return History(h, {-h, 0.0}, {std::move(tail)});
    knots.push_back(-d);
    segs.push_back(std::move(tail));
    knots.push_back(0.0);
    return History(h, std::move(knots), std::move(segs));
}

} // namespace detail

/// kappa_t for the constant right extension kappa in Lambda_0(tau, z, w):
/// kappa equals w shifted on [tau - h, tau) and z on [tau, theta].
inline History constant_extension(const GamePosition& pos, double t, double theta) {
    const double d = t - pos.tau;
    if (!(d >= 0.0) || t > theta) throw DomainError("constant_extension: t outside [tau, theta]");
    const double h = pos.w.delay();
    if (d == 0.0) return pos.w;
    if (d >= h) return History::constant(h, pos.z);
    return detail::shift_and_append(pos.w, d, ConstantPiece{pos.z});
}

} // namespace delaygame
