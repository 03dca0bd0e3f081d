#include "mvsde/solver.hpp"

#include "mvsde/csv.hpp"
#include "mvsde/error.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace mvsde {

double rho_metric(const MeasureFlow& a, const MeasureFlow& b, double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("lambda must be >= 0");
    if (!a.same_grid(b)) throw DomainError("rho_metric: flows live on different grids");
    double best = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        best = std::max(best, std::exp(-lambda * a.time(k)) * w1(a.at(k), b.at(k)));
    return best;
}

double default_lambda(const ModelConstants& k) noexcept {
    return 4.0 * (std::max(k.K_b, 0.0) + k.K_B + 1.0);
}

MeasureFlow initial_flow(const SimConfig& config, const InitialLaw& initial, std::size_t M, std::uint64_t seed) {
    const auto segs = sample_initial(M, initial, seed, config.delay(), config.dt);
    std::vector<double> v(M);
    for (std::size_t i = 0; i < M; ++i) v[i] = segs[i].back();
    return MeasureFlow::constant(config.dt, config.steps(), EmpiricalMeasure(std::move(v)), "initial");
}

MeasureFlow apply_phi(const SimConfig& config, const ModelSpec& model, const InitialLaw& initial,
                      const MeasureFlow& flow, std::size_t M, std::uint64_t seed) {
    if (M < 2) throw DomainError("apply_phi needs M >= 2 paths");
    return simulate_frozen(config, model, initial, flow, M, seed).flow("phi");
}

PhiSample apply_phi_with_floor(const SimConfig& config, const ModelSpec& model, const InitialLaw& initial,
                               const MeasureFlow& flow, std::size_t M, std::uint64_t seed, double lambda) {
    if (M < 2) throw DomainError("apply_phi needs M >= 2 paths");
    const PathRecord rec = simulate_frozen(config, model, initial, flow, M, seed);
    double floor = 0.0;
    std::vector<double> even;
    std::vector<double> odd;
    for (std::size_t k = 0; k < rec.values.size(); ++k) {
        even.clear();
        odd.clear();
        for (std::size_t i = 0; i < M; ++i) (i % 2 == 0 ? even : odd).push_back(rec.values[k][i]);
        const double d = w1(EmpiricalMeasure(even), EmpiricalMeasure(odd));
        floor = std::max(floor, std::exp(-lambda * rec.times[k]) * d);
    }
    return {rec.flow("phi"), floor / std::sqrt(2.0)};
}

const char* to_string(StopReason r) noexcept {
    switch (r) {
        case StopReason::tolerance: return "tolerance";
        case StopReason::plateau: return "plateau";
        case StopReason::max_iter: return "max_iter";
    }
    return "?";
}

FixedPointResult solve_fixed_point(const SimConfig& config, const ModelSpec& model, const InitialLaw& initial,
                                   const SolverOptions& options) {
    config.validate();
    if (options.M < 2) throw ConfigError("solver.M", "must be >= 2");
    if (!(options.tol > 0.0)) throw ConfigError("solver.tol", "must be positive");
    if (options.max_iter < 1) throw ConfigError("solver.max_iter", "must be >= 1");

    FixedPointResult out{initial_flow(config, initial, options.M, derive_seed(options.seed, kPicardTag, 0)), {}, {}};
    out.lambda = options.lambda < 0.0 ? default_lambda(model.constants) : options.lambda;

    std::size_t plateau_run = 0;
    for (std::size_t k = 1; k <= options.max_iter; ++k) {
        const std::uint64_t sub = derive_seed(options.seed, kPicardTag, options.common_noise ? 1 : k);
        PhiSample next = apply_phi_with_floor(config, model, initial, out.flow, options.M, sub, out.lambda);
        const double rho = rho_metric(out.flow, next.flow, out.lambda);
        next.flow.set_tag("iterate " + std::to_string(k));
        out.flow = std::move(next.flow);
        out.rho.push_back(rho);
        out.noise_floor.push_back(next.noise_floor);
        if (k == 1 && options.tol < next.noise_floor) out.tol_below_noise_floor = true;

        if (rho < options.tol) {
            out.converged = true;
            out.reason = StopReason::tolerance;
            break;
        }
        plateau_run = rho <= 2.0 * next.noise_floor ? plateau_run + 1 : 0;
        if (plateau_run >= 3) {
            out.converged = true;
            out.reason = StopReason::plateau;
            break;
        }
    }
    return out;
}

void write_diagnostics_csv(std::ostream& os, const FixedPointResult& result) {
    os << "iter,rho\n";
    for (std::size_t k = 0; k < result.rho.size(); ++k) os << k + 1 << ',' << fmt_num(result.rho[k]) << '\n';
}

}  // namespace mvsde
