#include "mvsde/engine.hpp"

#include "mvsde/csv.hpp"
#include "mvsde/error.hpp"
#include "mvsde/yamada.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace mvsde {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr std::size_t kParallelThreshold = 256;

}  // namespace

std::size_t SimConfig::steps() const {
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("sim.T", "horizon must be positive and finite");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("sim.dt", "time step must be positive and finite");
    const double ratio = T / dt;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(ratio - n) > 4.0 * kEps * n)
        throw ConfigError("sim.dt", "time step " + std::to_string(dt) + " does not divide T = " + std::to_string(T));
    return static_cast<std::size_t>(n);
}

void SimConfig::validate() const {
    (void)steps();
    if (N < 1) throw ConfigError("sim.N", "particle count must be >= 1");
    if (r < 0.0 || !std::isfinite(r)) throw ConfigError("sim.r", "delay must be >= 0");
    try {
        (void)delay_steps(delay(), dt);
    } catch (const DomainError& e) {
        throw ConfigError("sim.r", "delay must be an integer multiple of dt");
    }
}

void InitialLaw::validate() const {
    switch (kind) {
        case InitialKind::constant:
            if (!std::isfinite(value)) throw ConfigError("init.value", "must be finite");
            break;
        case InitialKind::gaussian:
            if (!std::isfinite(mean)) throw ConfigError("init.mean", "must be finite");
            if (!(sd >= 0.0) || !std::isfinite(sd)) throw ConfigError("init.sd", "must be finite and >= 0");
            break;
        case InitialKind::bounded_pareto:
            if (!(shape > 0.0)) throw ConfigError("init.shape", "must be positive");
            if (!(lo > 0.0)) throw ConfigError("init.lo", "must be positive");
            if (!(hi > lo) || !std::isfinite(hi)) throw ConfigError("init.hi", "must be finite and exceed init.lo");
            break;
    }
}

double InitialLaw::expected_value() const {
    switch (kind) {
        case InitialKind::constant: return value;
        case InitialKind::gaussian: return mean;
        case InitialKind::bounded_pareto: return abs_moment(1.0);
    }
    return 0.0;
}

double InitialLaw::abs_moment(double p) const {
    switch (kind) {
        case InitialKind::constant: return std::pow(std::abs(value), p);
        case InitialKind::gaussian: {
            if (sd == 0.0) return std::pow(std::abs(mean), p);
            auto f = [&](double z) {
                return std::pow(std::abs(mean + sd * z), p) * std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
            };
            using Kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;
            const double kink = -mean / sd;
            return Kronrod::integrate(f, -40.0, std::clamp(kink, -40.0, 40.0), 15, 1e-13) +
                   Kronrod::integrate(f, std::clamp(kink, -40.0, 40.0), 40.0, 15, 1e-13);
        }
        case InitialKind::bounded_pareto: {
            // density a L^a x^{-a-1} / (1 - (L/H)^a) on [L, H]
            const double norm = shape * std::pow(lo, shape) / (1.0 - std::pow(lo / hi, shape));
            if (p == shape) return norm * std::log(hi / lo);
            return norm * (std::pow(hi, p - shape) - std::pow(lo, p - shape)) / (p - shape);
        }
    }
    return 0.0;
}

double InitialLaw::draw(double u) const {
    switch (kind) {
        case InitialKind::constant: return value;
        case InitialKind::gaussian: return mean + sd * normal_quantile(u);
        case InitialKind::bounded_pareto:
            return lo * std::pow(1.0 - u * (1.0 - std::pow(lo / hi, shape)), -1.0 / shape);
    }
    return 0.0;
}

InitialKind initial_kind_from_name(const std::string& name) {
    if (name == "constant") return InitialKind::constant;
    if (name == "gaussian") return InitialKind::gaussian;
    if (name == "pareto" || name == "bounded_pareto") return InitialKind::bounded_pareto;
    throw ConfigError("init.law", "unknown initial law '" + name + "' (constant, gaussian, pareto)");
}

std::vector<Segment> sample_initial(std::size_t count, const InitialLaw& law, std::uint64_t seed, double r,
                                    double h, std::size_t first_index) {
    law.validate();
    const CounterRng rng(derive_seed(seed, kInitialTag));
    std::vector<Segment> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(Segment::constant(r, h, law.draw(rng.uniform(first_index + i, 0))));
    return out;
}

ParticleEnsemble::ParticleEnsemble(std::vector<Segment> segments, CounterRng noise,
                                   std::vector<std::uint64_t> streams)
    : segments_(std::move(segments)), noise_(noise), streams_(std::move(streams)) {
    if (segments_.empty()) throw DomainError("ensemble needs at least one particle");
    for (const auto& s : segments_)
        if (!s.same_grid(segments_.front())) throw DomainError("ensemble segments must share one grid");
    if (streams_.empty()) {
        streams_.resize(segments_.size());
        for (std::size_t i = 0; i < streams_.size(); ++i) streams_[i] = i;
    }
    if (streams_.size() != segments_.size()) throw DomainError("one noise stream per particle required");
}

std::vector<double> ParticleEnsemble::values() const {
    std::vector<double> v(segments_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = segments_[i].back();
    return v;
}

void ParticleEnsemble::step_against(const ModelSpec& model, const EmpiricalMeasure& mu, const DiffusionFn& sigma,
                                    double t, double dt) {
    enum Status : unsigned char { kOk, kBadDrift, kBadSigma, kBadState };
    const std::size_t n = segments_.size();
    const double sq = std::sqrt(dt);
    const std::uint64_t k = step_;
    next_.resize(n);
    std::vector<unsigned char> status(n, kOk);

#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
    for (std::size_t i = 0; i < n; ++i) {
        const Segment& seg = segments_[i];
        const double x = seg.back();
        const double drift = model.drift(t, x, mu) + model.path_drift(t, seg, mu);
        const double diff = sigma(t, x);
        const double z = noise_.normal(streams_[i], k);
        next_[i] = x + drift * dt + diff * sq * z;
        // NaN is a coefficient defect; overflow to infinity is blow-up.
        if (std::isnan(drift))
            status[i] = kBadDrift;
        else if (std::isnan(diff))
            status[i] = kBadSigma;
        else if (!std::isfinite(next_[i]))
            status[i] = kBadState;
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (status[i] == kOk) continue;
        if (status[i] == kBadState) throw BlowUpError(i, k + 1);
        (void)(status[i] == kBadDrift ? eval_drift(model, t, segments_[i].back(), mu) +
                                            eval_path_drift(model, t, segments_[i], mu)
                                      : eval_sigma(model, t, segments_[i].back()));
        throw ModelError("model '" + model.name + "': non-finite coefficient for particle " + std::to_string(i));
    }
    for (std::size_t i = 0; i < n; ++i) segments_[i].advance(next_[i]);
    ++step_;
}

void step_interacting(ParticleEnsemble& ensemble, const ModelSpec& model, double t, double dt) {
    const EmpiricalMeasure mu = ensemble.empirical_measure();
    ensemble.step_against(model, mu, model.sigma, t, dt);
}

MeasureFlow PathRecord::flow(std::string tag) const { return MeasureFlow(dt, snapshots, std::move(tag)); }

void write_long_csv(std::ostream& os, const PathRecord& record) {
    os << "t,particle,value\n";
    for (std::size_t k = 0; k < record.times.size(); ++k) {
        const std::string t = fmt_num(record.times[k]);
        for (std::size_t i = 0; i < record.values[k].size(); ++i)
            os << t << ',' << i << ',' << fmt_num(record.values[k][i]) << '\n';
    }
}

void write_wide_csv(std::ostream& os, const PathRecord& record) {
    os << "t,q05,q25,q50,q75,q95,mean\n";
    for (std::size_t k = 0; k < record.times.size(); ++k) {
        const auto& s = record.snapshots[k];
        os << fmt_num(record.times[k]);
        for (double q : {0.05, 0.25, 0.5, 0.75, 0.95}) os << ',' << fmt_num(s.quantile(q));
        os << ',' << fmt_num(s.mean()) << '\n';
    }
}

namespace {

void check_delay_fits(const ModelSpec& model, double r) {
    if (model.delay_measure.leftmost() < -r * (1.0 + 1e-12))
        throw ConfigError("sim.r", "delay measure reaches below -r = " + std::to_string(-r));
}

struct Recorder {
    PathRecord rec;

    Recorder(double dt, std::size_t steps) {
        rec.dt = dt;
        rec.times.reserve(steps + 1);
        rec.values.reserve(steps + 1);
        rec.snapshots.reserve(steps + 1);
    }

    // Records the state at step k and returns its empirical measure.
    const EmpiricalMeasure& push(std::size_t k, const ParticleEnsemble& e) {
        rec.times.push_back(static_cast<double>(k) * rec.dt);
        rec.values.push_back(e.values());
        rec.snapshots.emplace_back(rec.values.back());
        return rec.snapshots.back();
    }
};

PathRecord run_interacting(const SimConfig& config, const ModelSpec& model, const InitialLaw& initial,
                           const DiffusionFn& sigma) {
    config.validate();
    validate(model);
    const std::size_t steps = config.steps();
    const double r = config.delay();
    check_delay_fits(model, r);
    ParticleEnsemble ens(sample_initial(config.N, initial, config.seed, r, config.dt),
                         CounterRng(derive_seed(config.seed, kNoiseTag)));
    Recorder rec(config.dt, steps);
    for (std::size_t k = 0; k < steps; ++k) {
        const EmpiricalMeasure& mu = rec.push(k, ens);
        ens.step_against(model, mu, sigma, static_cast<double>(k) * config.dt, config.dt);
    }
    rec.push(steps, ens);
    return std::move(rec.rec);
}

}  // namespace

PathRecord simulate_interacting(const SimConfig& config, const ModelSpec& model, const InitialLaw& initial) {
    return run_interacting(config, model, initial, model.sigma);
}

PathRecord simulate_mollified(const SimConfig& config, const ModelSpec& model, const InitialLaw& initial, int n) {
    const MollifiedSigma mollified = mollify_sigma(model, n);
    return run_interacting(config, model, initial, [&mollified](double t, double x) { return mollified(t, x); });
}

PathRecord simulate_frozen(const SimConfig& config, const ModelSpec& model, const InitialLaw& initial,
                           const MeasureFlow& flow, std::size_t n_paths, std::uint64_t seed) {
    config.validate();
    validate(model);
    const std::size_t steps = config.steps();
    if (!flow.matches(config.dt, steps)) throw ConfigError("flow", "measure flow grid does not match the simulation grid");
    if (n_paths < 1) throw DomainError("frozen simulation needs at least one path");
    const double r = config.delay();
    check_delay_fits(model, r);
    ParticleEnsemble ens(sample_initial(n_paths, initial, seed, r, config.dt), CounterRng(derive_seed(seed, kNoiseTag)));
    Recorder rec(config.dt, steps);
    for (std::size_t k = 0; k < steps; ++k) {
        rec.push(k, ens);
        ens.step_against(model, flow.at(k), model.sigma, static_cast<double>(k) * config.dt, config.dt);
    }
    rec.push(steps, ens);
    return std::move(rec.rec);
}

double CoupledRun::sup_pathwise_error() const { return *std::max_element(pathwise_error.begin(), pathwise_error.end()); }
double CoupledRun::sup_w1_particles() const { return *std::max_element(w1_particles.begin(), w1_particles.end()); }
double CoupledRun::sup_w1_limit() const { return *std::max_element(w1_limit.begin(), w1_limit.end()); }

CoupledRun simulate_coupled(const SimConfig& config, const ModelSpec& model, const InitialLaw& initial,
                            const MeasureFlow& reference) {
    config.validate();
    validate(model);
    const std::size_t steps = config.steps();
    if (!reference.matches(config.dt, steps))
        throw ConfigError("flow", "reference flow grid does not match the simulation grid");
    const double r = config.delay();
    check_delay_fits(model, r);
    const auto segments = sample_initial(config.N, initial, config.seed, r, config.dt);
    const CounterRng noise(derive_seed(config.seed, kNoiseTag));
    ParticleEnsemble particles(segments, noise);
    ParticleEnsemble limit(segments, noise);

    CoupledRun out;
    Recorder rp(config.dt, steps);
    Recorder rl(config.dt, steps);
    auto observe = [&](std::size_t k) -> const EmpiricalMeasure& {
        const EmpiricalMeasure& mu_hat = rp.push(k, particles);
        const EmpiricalMeasure& mu_tilde = rl.push(k, limit);
        const auto& xp = rp.rec.values.back();
        const auto& xl = rl.rec.values.back();
        double sum = 0.0;
        for (std::size_t i = 0; i < xp.size(); ++i) sum += std::abs(xl[i] - xp[i]);
        out.times.push_back(static_cast<double>(k) * config.dt);
        out.pathwise_error.push_back(sum / static_cast<double>(xp.size()));
        out.w1_particles.push_back(w1(mu_hat, reference.at(k)));
        out.w1_limit.push_back(w1(mu_tilde, reference.at(k)));
        return mu_hat;
    };
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * config.dt;
        const EmpiricalMeasure& mu_hat = observe(k);
        particles.step_against(model, mu_hat, model.sigma, t, config.dt);
        limit.step_against(model, reference.at(k), model.sigma, t, config.dt);
    }
    observe(steps);
    out.interacting = std::move(rp.rec);
    out.limit = std::move(rl.rec);
    return out;
}

void set_thread_count(int threads) {
    if (threads > 0) omp_set_num_threads(threads);
}

int thread_count() { return omp_get_max_threads(); }

}  // namespace mvsde
