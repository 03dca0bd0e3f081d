#include "mvsde/model.hpp"

#include "mvsde/error.hpp"
#include "mvsde/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mvsde {

void validate(const ModelSpec& model) {
    const auto& k = model.constants;
    if (!model.drift || !model.path_drift || !model.sigma)
        throw DomainError("model '" + model.name + "' is missing a coefficient");
    if (!std::isfinite(k.K_b) || !std::isfinite(k.K_B) || !std::isfinite(k.K_sigma) || !std::isfinite(k.alpha))
        throw DomainError("model constants must be finite");
    if (k.K_B < 0.0) throw DomainError("K_B must be >= 0");
    if (k.K_sigma < 0.0) throw DomainError("K_sigma must be >= 0");
    if (k.alpha < 0.5 || k.alpha > 1.0)
        throw DomainError("alpha = " + std::to_string(k.alpha) +
                          " is outside [1/2, 1], the admissible Hoelder exponent range of the diffusion");
    if (!(model.moment_order > 1.0)) throw DomainError("moment order p must exceed 1");
}

namespace {

[[noreturn]] void non_finite(const ModelSpec& model, const char* what, double t, double x) {
    std::ostringstream os;
    os << "model '" << model.name << "': " << what << " is not finite at t=" << t << ", x=" << x;
    throw ModelError(os.str());
}

}  // namespace

double eval_drift(const ModelSpec& model, double t, double x, const EmpiricalMeasure& mu) {
    const double v = model.drift(t, x, mu);
    if (!std::isfinite(v)) non_finite(model, "drift b", t, x);
    return v;
}

double eval_path_drift(const ModelSpec& model, double t, const Segment& seg, const EmpiricalMeasure& mu) {
    const double v = model.path_drift(t, seg, mu);
    if (!std::isfinite(v)) non_finite(model, "path drift B", t, seg.back());
    return v;
}

double eval_sigma(const ModelSpec& model, double t, double x) {
    const double v = model.sigma(t, x);
    if (!std::isfinite(v)) non_finite(model, "diffusion sigma", t, x);
    return v;
}

ModelSpec zero_model() {
    ModelSpec m;
    m.name = "zero";
    m.drift = [](double, double, const EmpiricalMeasure&) { return 0.0; };
    m.path_drift = [](double, const Segment&, const EmpiricalMeasure&) { return 0.0; };
    m.sigma = [](double, double) { return 0.0; };
    m.constants = {0.0, 0.0, 0.0, 1.0};
    m.mean_oracle = [](double, double m0) { return m0; };
    return m;
}

ModelSpec linear_model(double a, double c, double sigma0) {
    ModelSpec m;
    m.name = "linear";
    m.drift = [a, c](double, double x, const EmpiricalMeasure& mu) { return a * x + c * mu.mean(); };
    m.path_drift = [](double, const Segment&, const EmpiricalMeasure&) { return 0.0; };
    m.sigma = [sigma0](double, double) { return sigma0; };
    // [a(x-y) + c(m1-m2)] sgn(x-y) <= a|x-y| + |c| W1, so max(a, |c|) is the
    // smallest admissible one-sided constant. Taking x = y shows no valid
    // constant is negative.
    m.constants = {std::max(a, std::abs(c)), 0.0, std::abs(sigma0), 1.0};
    if (sigma0 != 0.0) {
        m.sigma_sq_lower_bound = sigma0 * sigma0;
        m.bounded_measure_dependence = true;
    }
    m.mean_oracle = [a, c](double t, double m0) { return m0 * std::exp((a + c) * t); };
    return m;
}

ModelSpec sqrt_model(double kappa, double theta, double c, double sigma0) {
    ModelSpec m;
    m.name = "sqrt";
    m.drift = [kappa, theta, c](double, double x, const EmpiricalMeasure& mu) {
        return kappa * (theta - x) + c * mu.mean();
    };
    m.path_drift = [](double, const Segment&, const EmpiricalMeasure&) { return 0.0; };
    m.sigma = [sigma0](double, double x) { return sigma0 * std::sqrt(std::abs(x)); };
    m.constants = {std::max(-kappa, std::abs(c)), 0.0, std::abs(sigma0), 0.5};
    // m' = kappa theta + (c - kappa) m
    m.mean_oracle = [kappa, theta, c](double t, double m0) {
        const double g = c - kappa;
        const double f = kappa * theta;
        if (g == 0.0) return m0 + f * t;
        return (m0 + f / g) * std::exp(g * t) - f / g;
    };
    return m;
}

ModelSpec delay_model(double beta, double sigma0, DelayMeasure dm) {
    ModelSpec m;
    m.name = "delay";
    m.drift = [](double, double, const EmpiricalMeasure&) { return 0.0; };
    m.path_drift = [beta, dm](double, const Segment& seg, const EmpiricalMeasure&) { return beta * integrate(seg, dm); };
    m.sigma = [sigma0](double, double) { return sigma0; };
    m.constants = {0.0, std::abs(beta), std::abs(sigma0), 1.0};
    m.delay_measure = dm;
    m.hb_norm = NormVariant::l1m;
    if (sigma0 != 0.0) {
        m.sigma_sq_lower_bound = sigma0 * sigma0;
        m.bounded_measure_dependence = true;
    }
    if (dm.atoms().size() == 1) {
        // m'(t) = beta m(t - d) with constant history: method of steps gives
        // m(t) = m0 sum_{k=0}^{n} beta^k (t - (k-1) d)^k / k!, n = floor(t/d) + 1.
        const double d = -dm.atoms()[0].location;
        m.mean_oracle = [beta, d](double t, double m0) {
            if (d == 0.0) return m0 * std::exp(beta * t);
            const auto n = static_cast<int>(std::floor(t / d)) + 1;
            double sum = 0.0;
            double fact = 1.0;
            for (int k = 0; k <= n; ++k) {
                if (k > 0) fact *= k;
                sum += std::pow(beta, k) * std::pow(t - (k - 1) * d, k) / fact;
            }
            return m0 * sum;
        };
    }
    return m;
}

namespace {

enum Tag : std::uint64_t { kAuditTag = 0xA0D17 };

struct Sampler {
    CounterRng rng;
    std::uint64_t stream;
    std::uint64_t counter = 0;
    double uniform() { return rng.uniform(stream, counter++); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double sign() { return uniform() < 0.5 ? -1.0 : 1.0; }
    // Log-uniform magnitude in [width 1e-8, width].
    double small(double width) { return width * std::pow(10.0, -8.0 * uniform()); }
};

// The witness is the sample attaining the worst ratio lhs / unit.
void record(AssumptionCheck& c, double lhs, double rhs_unit, double rhs, double tol, double x, double y) {
    const double excess = lhs - rhs;
    if (excess > tol) {
        ++c.violations;
        c.pass = false;
    }
    c.worst_excess = c.has_witness ? std::max(c.worst_excess, excess) : excess;
    if (rhs_unit > 0.0 && (!c.has_witness || lhs / rhs_unit > c.estimated)) {
        c.estimated = std::max(c.estimated, lhs / rhs_unit);
        c.witness_x = x;
        c.witness_y = y;
    }
    c.has_witness = true;
}

}  // namespace

AssumptionReport check_assumptions(const ModelSpec& model, const AuditSpec& spec) {
    validate(model);
    if (!(spec.x_lo < spec.x_hi)) throw DomainError("audit box needs x_lo < x_hi");
    if (spec.t_grid.empty()) throw DomainError("audit needs at least one time");
    if (spec.measure_size == 0) throw DomainError("audit measures need at least one sample");
    const auto& k = model.constants;
    const double width = spec.x_hi - spec.x_lo;
    const double anchor = std::clamp(0.0, spec.x_lo, spec.x_hi);
    const std::size_t grid = delay_steps(spec.r, spec.h) + 1;
    const CounterRng rng(derive_seed(spec.seed, kAuditTag));
    auto clamp = [&](double v) { return std::clamp(v, spec.x_lo, spec.x_hi); };

    AssumptionReport rep;
    rep.drift = {"drift", k.K_b};
    rep.diffusion = {"diffusion", k.K_sigma};
    rep.path_drift = {"path_drift", k.K_B};
    rep.samples = spec.sample_count;

    const Segment zero_seg = Segment::constant(spec.r, spec.h, 0.0);
    const EmpiricalMeasure dirac0 = EmpiricalMeasure::dirac(0.0);

    for (std::size_t s = 0; s < spec.sample_count; ++s) {
        Sampler smp{rng, s};
        const int mode = static_cast<int>(s % 3);
        const auto ti = std::min(static_cast<std::size_t>(smp.uniform() * static_cast<double>(spec.t_grid.size())),
                                 spec.t_grid.size() - 1);
        const double t = spec.t_grid[ti];

        // 0: independent pairs; 1: near-diagonal pairs; 2: pairs clustered at the anchor.
        double x = 0.0;
        double y = 0.0;
        if (mode == 0) {
            x = smp.uniform(spec.x_lo, spec.x_hi);
            y = smp.uniform(spec.x_lo, spec.x_hi);
        } else if (mode == 1) {
            x = smp.uniform(spec.x_lo, spec.x_hi);
            y = clamp(x + smp.sign() * smp.small(width));
        } else {
            x = clamp(anchor + smp.sign() * smp.small(width));
            y = smp.uniform() < 0.25 ? anchor : clamp(anchor + smp.sign() * smp.small(width));
        }

        std::vector<double> mu_s(spec.measure_size);
        std::vector<double> nu_s(spec.measure_size);
        for (std::size_t j = 0; j < spec.measure_size; ++j) {
            mu_s[j] = smp.uniform(spec.x_lo, spec.x_hi);
            nu_s[j] = mode == 0 ? smp.uniform(spec.x_lo, spec.x_hi) : clamp(mu_s[j] + smp.sign() * smp.small(width));
        }
        const EmpiricalMeasure mu(std::move(mu_s));
        const EmpiricalMeasure nu(std::move(nu_s));
        const double w = w1(mu, nu);
        const double dx = std::abs(x - y);

        {
            const double sgn = x > y ? 1.0 : (x < y ? -1.0 : 0.0);
            const double lhs = (eval_drift(model, t, x, mu) - eval_drift(model, t, y, nu)) * sgn;
            record(rep.drift, lhs, w + dx, k.K_b * (w + dx), spec.tol, x, y);
        }
        {
            const double lhs = std::abs(eval_sigma(model, t, x) - eval_sigma(model, t, y));
            const double unit = std::pow(dx, k.alpha);
            record(rep.diffusion, lhs, unit, k.K_sigma * unit, spec.tol, x, y);
            const double at0 = std::abs(eval_sigma(model, t, 0.0));
            record(rep.diffusion, at0, 1.0, k.K_sigma, spec.tol, 0.0, 0.0);
            if (dx > 0.0 && dx < 1.0 && lhs > 0.0 && k.K_sigma > 0.0) {
                const double local = std::log(lhs / k.K_sigma) / std::log(dx);
                rep.alpha_hat = std::min(rep.alpha_hat, std::clamp(local, 0.0, 1.0));
            }
        }
        {
            std::vector<double> xi_v(grid);
            std::vector<double> eta_v(grid);
            for (std::size_t j = 0; j < grid; ++j) {
                xi_v[j] = smp.uniform(spec.x_lo, spec.x_hi);
                eta_v[j] = mode == 0 ? smp.uniform(spec.x_lo, spec.x_hi) : clamp(xi_v[j] + smp.sign() * smp.small(width));
            }
            const Segment xi(spec.r, spec.h, std::move(xi_v));
            const Segment eta(spec.r, spec.h, std::move(eta_v));
            const Segment diff = difference(xi, eta);
            const double dist =
                model.hb_norm == NormVariant::uniform ? uniform_norm(diff) : l1m_norm(diff, model.delay_measure);
            const double lhs = std::abs(eval_path_drift(model, t, xi, mu) - eval_path_drift(model, t, eta, nu));
            record(rep.path_drift, lhs, dist + w, k.K_B * (dist + w), spec.tol, xi.back(), eta.back());
            const double at0 = std::abs(eval_path_drift(model, t, zero_seg, dirac0));
            record(rep.path_drift, at0, 1.0, k.K_B, spec.tol, 0.0, 0.0);
        }
    }
    rep.note = rep.pass() ? "sampled audit: no violation found (not a proof)"
                          : "sampled audit: violation found, see witnesses";
    return rep;
}

}  // namespace mvsde
