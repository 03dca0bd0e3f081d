#include "mvsde/yamada.hpp"

#include "mvsde/csv.hpp"
#include "mvsde/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace mvsde {

namespace {

constexpr double kRampShare = 0.05;

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;

double raw_bump(double x) {
    const double d = 1.0 - x * x;
    return d > 0.0 ? std::exp(-1.0 / d) : 0.0;
}

double bump_mass() {
    static const double mass = Kronrod::integrate(raw_bump, -1.0, 1.0, 20, 1e-15);
    return mass;
}

}  // namespace

YamadaFunction::YamadaFunction(double epsilon) : eps_(epsilon), lo_(0.0) {
    if (!(epsilon >= 0.02 && epsilon < 1.0))
        throw DomainError("epsilon = " + std::to_string(epsilon) + " outside [0.02, 1)");
    const double span = 1.0 / eps_;  // log-length of the support
    lo_ = eps_ * std::exp(-span);
    const double x1 = lo_ * std::exp(kRampShare * span);
    const double x2 = eps_ * std::exp(-kRampShare * span);

    // Lower ramp: the line through (lo, 0) and (x1, eps/x1) stays below eps/x.
    const double q1 = (eps_ / x1) / (x1 - lo_);
    // Upper ramp s0 (eps - x) meets eps/x at x2 and at eps - x2; the hyperbola
    // is the smaller of the two on [x2, eps - x2].
    const double s0 = (eps_ / x2) / (eps_ - x2);
    const double x3 = std::max(x2, eps_ - x2);

    pieces_ = {
        {lo_, x1, false, -q1 * lo_, q1, 0.0, 0.0},
        {x1, x3, true, 0.0, 0.0, 0.0, 0.0},
        {x3, eps_, false, s0 * eps_, -s0, 0.0, 0.0},
    };

    // Unnormalized mass, then cumulative V', V at each piece boundary.
    double vp = 0.0;
    double v = 0.0;
    for (auto& pc : pieces_) {
        pc.vp_lo = vp;
        pc.v_lo = v;
        const double d = pc.hi - pc.lo;
        if (pc.hyperbola) {
            const double l = std::log(pc.hi / pc.lo);
            v += vp * d + eps_ * (pc.hi * l - d);
            vp += eps_ * l;
        } else {
            const double at_lo = pc.p + pc.q * pc.lo;
            v += vp * d + at_lo * d * d / 2.0 + pc.q * d * d * d / 6.0;
            vp += at_lo * d + pc.q * d * d / 2.0;
        }
    }
    c_ = 1.0 / vp;
    for (auto& pc : pieces_) {
        pc.vp_lo *= c_;
        pc.v_lo *= c_;
    }
    vp_end_ = std::min(1.0, vp * c_);
    v_end_ = v * c_;
}

const YamadaFunction::Piece* YamadaFunction::find(double x) const {
    if (x < lo_ || x > eps_) return nullptr;
    for (const auto& pc : pieces_)
        if (x <= pc.hi) return &pc;
    return &pieces_.back();
}

double YamadaFunction::unnormalized(const Piece& pc, double x) const {
    return pc.hyperbola ? eps_ / x : std::max(0.0, pc.p + pc.q * x);
}

double YamadaFunction::psi(double x) const {
    const Piece* pc = find(x);
    return pc ? c_ * unnormalized(*pc, x) : 0.0;
}

double YamadaFunction::V_second(double x) const { return psi(std::abs(x)); }

double YamadaFunction::V_prime(double x) const {
    const double ax = std::abs(x);
    double out = 0.0;
    if (ax >= eps_) {
        out = vp_end_;
    } else if (const Piece* pc = find(ax)) {
        const double d = ax - pc->lo;
        double inc = 0.0;
        if (pc->hyperbola) {
            inc = c_ * eps_ * std::log(ax / pc->lo);
        } else {
            inc = c_ * ((pc->p + pc->q * pc->lo) * d + pc->q * d * d / 2.0);
        }
        out = std::min(1.0, pc->vp_lo + inc);
    }
    return x < 0.0 ? -out : out;
}

double YamadaFunction::V(double x) const {
    const double ax = std::abs(x);
    if (ax >= eps_) return v_end_ + vp_end_ * (ax - eps_);
    const Piece* pc = find(ax);
    if (!pc) return 0.0;
    const double d = ax - pc->lo;
    if (pc->hyperbola) return pc->v_lo + pc->vp_lo * d + c_ * eps_ * (ax * std::log(ax / pc->lo) - d);
    const double at_lo = pc->p + pc->q * pc->lo;
    return pc->v_lo + pc->vp_lo * d + c_ * (at_lo * d * d / 2.0 + pc->q * d * d * d / 6.0);
}

YamadaFunction make_yamada(double epsilon) { return YamadaFunction(epsilon); }

double bump(double x) { return raw_bump(x) / bump_mass(); }

double bump_moment(double alpha) {
    if (!(alpha >= 0.0)) throw DomainError("bump moment needs alpha >= 0");
    auto f = [alpha](double x) { return std::pow(x, alpha) * raw_bump(x); };
    return 2.0 * Kronrod::integrate(f, 0.0, 1.0, 20, 1e-14) / bump_mass();
}

double mollifier_error_bound(double K_sigma, double alpha, int n) {
    if (n < 1) throw DomainError("mollifier index n must be >= 1");
    return K_sigma * std::pow(static_cast<double>(n), -alpha) * bump_moment(alpha);
}

MollifiedSigma::MollifiedSigma(DiffusionFn sigma, int n) : sigma_(std::move(sigma)), n_(n) {
    if (n < 1) throw DomainError("mollifier index n must be >= 1");
    if (!sigma_) throw DomainError("mollifier needs a diffusion coefficient");
}

double MollifiedSigma::operator()(double t, double x) const {
    const double inv_n = 1.0 / static_cast<double>(n_);
    auto f = [&](double u) { return sigma_(t, x - u * inv_n) * raw_bump(u); };
    return Kronrod::integrate(f, -1.0, 1.0, 15, 1e-12) / bump_mass();
}

MollifiedSigma mollify_sigma(const ModelSpec& model, int n) { return MollifiedSigma(model.sigma, n); }

std::vector<double> yamada_grid(const YamadaFunction& v, std::size_t points) {
    if (points < 4) throw DomainError("yamada grid needs at least 4 points");
    const double eps = v.epsilon();
    const std::size_t n_log = points / 4;
    const std::size_t n_lin = points - 2 * n_log;
    std::vector<double> xs;
    xs.reserve(points);
    const double a = std::log(v.support_lo() / 10.0);
    const double b = std::log(2.0 * eps);
    for (std::size_t i = 0; i < n_log; ++i) {
        const double x = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n_log - 1));
        xs.push_back(x);
        xs.push_back(-x);
    }
    for (std::size_t i = 0; i < n_lin; ++i)
        xs.push_back(-2.0 * eps + 4.0 * eps * static_cast<double>(i) / static_cast<double>(n_lin - 1));
    std::sort(xs.begin(), xs.end());
    return xs;
}

YamadaAudit audit_yamada(const YamadaFunction& v, std::span<const double> xs, double tol) {
    YamadaAudit out;
    out.epsilon = v.epsilon();
    out.rows.reserve(xs.size());
    for (double x : xs) {
        YamadaAuditRow row{x, v.V(x), v.V_prime(x), v.V_second(x), 0.0, true, true};
        const double ax = std::abs(x);
        const bool on_support = ax >= v.support_lo() && ax <= v.support_hi();
        row.bound = on_support ? 2.0 * v.epsilon() / ax : 0.0;
        const double slope = x >= 0.0 ? row.V_prime : -row.V_prime;
        row.r1 = ax - v.epsilon() - tol <= row.V && row.V <= ax + tol && slope >= -tol && slope <= 1.0 + tol;
        row.r2 = on_support ? row.V_second <= row.bound + tol : row.V_second == 0.0;
        if (!row.r1) ++out.r1_violations;
        if (!row.r2) ++out.r2_violations;
        out.rows.push_back(row);
    }
    return out;
}

void write_yamada_csv(std::ostream& os, const YamadaAudit& audit) {
    os << "x,V,V_prime,V_second,bound,r1,r2\n";
    for (const auto& r : audit.rows)
        os << fmt_num(r.x) << ',' << fmt_num(r.V) << ',' << fmt_num(r.V_prime) << ',' << fmt_num(r.V_second) << ','
           << fmt_num(r.bound) << ',' << (r.r1 ? 1 : 0) << ',' << (r.r2 ? 1 : 0) << '\n';
}

}  // namespace mvsde
