#include "mvsde/chaos.hpp"

#include "mvsde/csv.hpp"
#include "mvsde/error.hpp"
#include "mvsde/measures.hpp"
#include "mvsde/solver.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <ostream>

namespace mvsde {

namespace {

void check_N_list(std::span<const std::size_t> N_list, std::size_t replicas) {
    if (N_list.empty()) throw ConfigError("chaos.N_list", "must not be empty");
    for (std::size_t i = 0; i < N_list.size(); ++i) {
        if (N_list[i] < 1) throw ConfigError("chaos.N_list", "particle counts must be >= 1");
        if (i > 0 && N_list[i] <= N_list[i - 1]) throw ConfigError("chaos.N_list", "must be strictly increasing");
    }
    if (replicas < 1) throw ConfigError("chaos.replicas", "must be >= 1");
}

// Runs body(i) for i in [0, count) across threads; the exception of the
// smallest failing index is rethrown.
template <class Body>
void parallel_runs(std::size_t count, Body body) {
    std::vector<std::exception_ptr> errors(count);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t i = 0; i < count; ++i) {
        try {
            body(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct MeanSe {
    double mean;
    double se;
};

MeanSe mean_se(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
    if (v.size() < 2) return {m, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / (n - 1.0) / n)};
}

// Groups runs by N (runs are ordered by N) and applies `field`.
template <class Field>
void group_by_N(std::span<const ChaosRun> runs, Field field, std::vector<std::size_t>& Ns, std::vector<double>& means,
                std::vector<double>& ses) {
    std::size_t i = 0;
    while (i < runs.size()) {
        std::vector<double> vals;
        const std::size_t N = runs[i].N;
        for (; i < runs.size() && runs[i].N == N; ++i) vals.push_back(field(runs[i]));
        const auto s = mean_se(vals);
        Ns.push_back(N);
        means.push_back(s.mean);
        ses.push_back(s.se);
    }
}

}  // namespace

double theoretical_exponent(double p) {
    if (!(p > 1.0)) throw DomainError("moment order p must exceed 1, got " + std::to_string(p));
    if (p == 2.0) throw DomainError("moment order p = 2 is excluded from the rate");
    if (std::isinf(p)) return 0.5;
    return std::min(0.5, (p - 1.0) / p);
}

LogLogFit fit_loglog(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw DomainError("fit_loglog: xs and ys differ in length");
    const std::size_t n = xs.size();
    if (n < 3) throw DomainError("fit_loglog: degenerate fit, need at least 3 points");
    std::vector<double> lx(n);
    std::vector<double> ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0) || !std::isfinite(xs[i]) || !std::isfinite(ys[i]))
            throw DomainError("fit_loglog: degenerate fit, values must be positive and finite");
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(ys[i]);
    }
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw DomainError("fit_loglog: degenerate fit, x values coincide");
    LogLogFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = ly[i] - fit.intercept - fit.slope * lx[i];
        ssr += e * e;
    }
    fit.slope_stderr = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
    return fit;
}

Reference build_reference(const SimConfig& config, const ModelSpec& model, const InitialLaw& initial,
                          std::size_t M, std::uint64_t seed) {
    config.validate();
    const std::size_t steps = config.steps();
    if (model.mean_oracle) {
        const double m0 = initial.expected_value();
        const auto means = MeasureFlow::point_masses(
            config.dt, steps, [&](double t) { return model.mean_oracle(t, m0); }, "oracle mean");
        PhiSample s = apply_phi_with_floor(config, model, initial, means, M, derive_seed(seed, kReferenceTag), 0.0);
        s.flow.set_tag("oracle");
        return {std::move(s.flow), "oracle", s.noise_floor / std::sqrt(2.0)};
    }
    SolverOptions opt;
    opt.M = M;
    opt.seed = derive_seed(seed, kReferenceTag);
    FixedPointResult fp = solve_fixed_point(config, model, initial, opt);
    if (!fp.converged)
        throw NonConvergenceError("reference fixed point did not converge in " + std::to_string(opt.max_iter) +
                                  " iterations (last rho " + fmt_num(fp.rho.back()) + ")");
    const double own = fp.noise_floor.back() / std::sqrt(2.0) + fp.rho.back();
    fp.flow.set_tag("solved");
    return {std::move(fp.flow), "solved", own};
}

std::uint64_t replica_seed(std::uint64_t master, std::size_t N, std::size_t replica) noexcept {
    return derive_seed(derive_seed(master, kReplicaTag, N), kReplicaTag, replica);
}

std::vector<ChaosRun> chaos_sweep(const SimConfig& base, const ModelSpec& model, const InitialLaw& initial,
                                  const MeasureFlow& reference, std::span<const std::size_t> N_list,
                                  std::size_t replicas) {
    check_N_list(N_list, replicas);
    std::vector<ChaosRun> runs;
    for (std::size_t N : N_list)
        for (std::size_t j = 0; j < replicas; ++j) runs.push_back({N, j, replica_seed(base.seed, N, j)});
    parallel_runs(runs.size(), [&](std::size_t i) {
        ChaosRun& run = runs[i];
        SimConfig c = base;
        c.N = run.N;
        c.seed = run.seed;
        const CoupledRun cr = simulate_coupled(c, model, initial, reference);
        run.sup_w1 = cr.sup_w1_particles();
        run.sup_pairing = cr.sup_pathwise_error();
        run.sup_w1_limit = cr.sup_w1_limit();
    });
    return runs;
}

RateReport summarize_rate(std::span<const ChaosRun> runs, double p, double reference_error) {
    RateReport r;
    r.theoretical_exponent = theoretical_exponent(p);
    r.reference_error = reference_error;
    r.runs.assign(runs.begin(), runs.end());
    std::vector<double> Ns;
    group_by_N(runs, [](const ChaosRun& c) { return c.sup_w1; }, r.N, r.error_mean, r.error_stderr);
    for (std::size_t N : r.N) Ns.push_back(static_cast<double>(N));
    r.fit = fit_loglog(Ns, r.error_mean);
    return r;
}

RateReport estimate_chaos_rate(const SimConfig& base, const ModelSpec& model, const InitialLaw& initial,
                               std::span<const std::size_t> N_list, std::size_t replicas, const Reference& reference) {
    if (N_list.size() < 3) throw DomainError("rate estimate: degenerate fit, need at least 3 particle counts");
    if (replicas < 2) throw ConfigError("chaos.replicas", "rate estimate needs >= 2 replicas for standard errors");
    (void)theoretical_exponent(model.moment_order);
    const auto runs = chaos_sweep(base, model, initial, reference.flow, N_list, replicas);
    return summarize_rate(runs, model.moment_order, reference.own_error);
}

CouplingCurve summarize_coupling(std::span<const ChaosRun> runs) {
    CouplingCurve c;
    c.runs.assign(runs.begin(), runs.end());
    group_by_N(runs, [](const ChaosRun& r) { return r.sup_pairing; }, c.N, c.error_mean, c.error_stderr);
    const bool positive = std::all_of(c.error_mean.begin(), c.error_mean.end(), [](double v) { return v > 0.0; });
    if (positive && c.N.size() >= 3) {
        std::vector<double> Ns(c.N.begin(), c.N.end());
        c.fit = fit_loglog(Ns, c.error_mean);
    }
    return c;
}

CouplingCurve coupling_error_curve(const SimConfig& base, const ModelSpec& model, const InitialLaw& initial,
                                   const MeasureFlow& reference, std::span<const std::size_t> N_list,
                                   std::size_t replicas) {
    return summarize_coupling(chaos_sweep(base, model, initial, reference, N_list, replicas));
}

void require_tv_preconditions(const ModelSpec& model) {
    if (!model.sigma_sq_lower_bound || !(*model.sigma_sq_lower_bound > 0.0) || !model.bounded_measure_dependence)
        throw PreconditionError("model '" + model.name +
                                "' does not declare condition sig (sigma^2 >= delta > 0 and coefficients bounded "
                                "Lipschitz in the measure); the marginal TV study requires it");
}

std::vector<TvRow> marginal_tv_study(const SimConfig& base, const ModelSpec& model, const InitialLaw& initial,
                                     const MeasureFlow& reference, std::span<const std::size_t> N_list,
                                     std::size_t replicas, std::span<const double> times, double bin_width) {
    require_tv_preconditions(model);
    check_N_list(N_list, replicas);
    if (replicas < 2) throw ConfigError("chaos.replicas", "TV study needs >= 2 replicas");
    if (times.empty()) throw ConfigError("tv.times", "must not be empty");
    base.validate();
    const std::size_t steps = base.steps();
    if (!reference.matches(base.dt, steps))
        throw ConfigError("flow", "reference flow grid does not match the simulation grid");
    std::vector<std::size_t> ks;
    for (double t : times) {
        if (!(t >= 0.0) || t > base.T * (1.0 + 1e-12)) throw ConfigError("tv.times", "times must lie in [0, T]");
        ks.push_back(std::min(steps, static_cast<std::size_t>(std::llround(t / base.dt))));
    }

    std::vector<TvRow> rows;
    for (std::size_t N : N_list) {
        // first[j][q] = particle 1 of replica j at time ks[q]
        std::vector<std::vector<double>> first(replicas, std::vector<double>(ks.size()));
        parallel_runs(replicas, [&](std::size_t j) {
            SimConfig c = base;
            c.N = N;
            c.seed = replica_seed(base.seed, N, j);
            const PathRecord rec = simulate_interacting(c, model, initial);
            for (std::size_t q = 0; q < ks.size(); ++q) first[j][q] = rec.values[ks[q]][0];
        });
        for (std::size_t q = 0; q < ks.size(); ++q) {
            std::vector<double> pooled(replicas);
            for (std::size_t j = 0; j < replicas; ++j) pooled[j] = first[j][q];
            const EmpiricalMeasure law(std::move(pooled));
            const EmpiricalMeasure& ref = reference.at(ks[q]);
            const double w = bin_width > 0.0 ? bin_width : freedman_diaconis_width(law, ref);
            const auto hist = shared_histogram(law, ref, w);
            const auto pk = pinsker_check(hist.q, hist.p);  // Ent(law | reference)
            rows.push_back({N, static_cast<double>(ks[q]) * base.dt, replicas, tv_estimate(law, ref, w), pk.var_norm,
                            pk.entropy, pk.holds});
        }
    }
    return rows;
}

std::vector<StabilityPoint> stability_perturbation_test(const SimConfig& config, const ModelSpec& model,
                                                        const InitialLaw& initial, std::span<const double> deltas) {
    config.validate();
    validate(model);
    const std::size_t steps = config.steps();
    const double r = config.delay();
    const auto base = sample_initial(config.N, initial, config.seed, r, config.dt);
    const CounterRng noise(derive_seed(config.seed, kNoiseTag));

    std::vector<StabilityPoint> out;
    for (double delta : deltas) {
        if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigError("stability.delta", "must be >= 0");
        std::vector<Segment> shifted;
        shifted.reserve(base.size());
        for (const auto& s : base) {
            std::vector<double> v = s.values();
            for (double& x : v) x += delta;
            shifted.emplace_back(r, config.dt, std::move(v));
        }
        ParticleEnsemble a(base, noise);
        ParticleEnsemble b(std::move(shifted), noise);
        StabilityPoint pt;
        pt.delta = delta;
        auto gap = [&] {
            double sum = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a.value(i) - b.value(i));
            return sum / static_cast<double>(a.size());
        };
        pt.mean_gap.push_back(gap());
        for (std::size_t k = 0; k < steps; ++k) {
            const double t = static_cast<double>(k) * config.dt;
            step_interacting(a, model, t, config.dt);
            step_interacting(b, model, t, config.dt);
            pt.mean_gap.push_back(gap());
        }
        if (delta > 0.0) pt.ratio = *std::max_element(pt.mean_gap.begin(), pt.mean_gap.end()) / delta;
        out.push_back(std::move(pt));
    }
    return out;
}

void write_rate_csv(std::ostream& os, const RateReport& report) {
    os << "N,error_mean,error_stderr\n";
    for (std::size_t i = 0; i < report.N.size(); ++i)
        os << report.N[i] << ',' << fmt_num(report.error_mean[i]) << ',' << fmt_num(report.error_stderr[i]) << '\n';
}

void write_rate_summary_csv(std::ostream& os, const RateReport& report) {
    os << "slope,stderr,theoretical_exponent\n"
       << fmt_num(report.fit.slope) << ',' << fmt_num(report.fit.slope_stderr) << ','
       << fmt_num(report.theoretical_exponent) << '\n';
}

void write_runs_csv(std::ostream& os, std::span<const ChaosRun> runs) {
    os << "N,replica,seed,sup_w1,sup_pairing,sup_w1_limit,triangle\n";
    for (const auto& r : runs)
        os << r.N << ',' << r.replica << ',' << r.seed << ',' << fmt_num(r.sup_w1) << ',' << fmt_num(r.sup_pairing)
           << ',' << fmt_num(r.sup_w1_limit) << ',' << (r.triangle_holds() ? 1 : 0) << '\n';
}

void write_coupling_csv(std::ostream& os, const CouplingCurve& curve) {
    os << "N,error_mean,error_stderr\n";
    for (std::size_t i = 0; i < curve.N.size(); ++i)
        os << curve.N[i] << ',' << fmt_num(curve.error_mean[i]) << ',' << fmt_num(curve.error_stderr[i]) << '\n';
}

void write_tv_csv(std::ostream& os, std::span<const TvRow> rows) {
    os << "N,t,samples,tv,var_norm,entropy,pinsker_holds\n";
    for (const auto& r : rows)
        os << r.N << ',' << fmt_num(r.t) << ',' << r.samples << ',' << fmt_num(r.tv) << ',' << fmt_num(r.var_norm)
           << ',' << fmt_num(r.entropy) << ',' << (r.pinsker_holds ? 1 : 0) << '\n';
}

void write_stability_csv(std::ostream& os, std::span<const StabilityPoint> points) {
    os << "delta,ratio\n";
    for (const auto& p : points) os << fmt_num(p.delta) << ',' << fmt_num(p.ratio) << '\n';
}

}  // namespace mvsde
