#pragma once

// Propagation-of-chaos experiments: error of the empirical law against a
// reference flow across particle counts, the synchronous-coupling pathwise
// error, the one-particle total-variation study and initial-data stability.

#include "mvsde/engine.hpp"
#include "mvsde/flow.hpp"
#include "mvsde/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mvsde {

// Dominant exponent of N^{-1/2} + N^{-(p-1)/p}: min(1/2, (p-1)/p).
// Rejects p <= 1 and p = 2.
[[nodiscard]] double theoretical_exponent(double p);

struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
};

// Ordinary least squares of log y on log x.
[[nodiscard]] LogLogFit fit_loglog(std::span<const double> xs, std::span<const double> ys);

struct Reference {
    MeasureFlow flow;
    std::string kind;  // "oracle" or "solved"
    // Estimated W1 distance of the reference itself from the limit law.
    double own_error = 0.0;
};

// Drift depending on the law only through its mean: M frozen paths driven by
// Dirac masses at the exact mean. Otherwise the Picard fixed point.
[[nodiscard]] Reference build_reference(const SimConfig& config, const ModelSpec& model, const InitialLaw& initial,
                                        std::size_t M, std::uint64_t seed);

// Replica seed for particle count N, replica j.
[[nodiscard]] std::uint64_t replica_seed(std::uint64_t master, std::size_t N, std::size_t replica) noexcept;

struct ChaosRun {
    std::size_t N = 0;
    std::size_t replica = 0;
    std::uint64_t seed = 0;
    double sup_w1 = 0.0;        // max_k W1(interacting law, reference)
    double sup_pairing = 0.0;   // max_k mean_i |X^i - X^{i,N}|
    double sup_w1_limit = 0.0;  // max_k W1(limit-copies law, reference)

    // sup W1 <= sup pairing + sup W1 of the limit copies.
    [[nodiscard]] bool triangle_holds() const noexcept { return sup_w1 <= sup_pairing + sup_w1_limit + 1e-12; }
};

// Every (N, replica) pair, each a coupled run against the reference. Runs
// are spread over threads; results do not depend on the thread count.
[[nodiscard]] std::vector<ChaosRun> chaos_sweep(const SimConfig& base, const ModelSpec& model,
                                                const InitialLaw& initial, const MeasureFlow& reference,
                                                std::span<const std::size_t> N_list, std::size_t replicas);

struct RateReport {
    std::vector<std::size_t> N;
    std::vector<double> error_mean;
    std::vector<double> error_stderr;
    LogLogFit fit;
    double theoretical_exponent = 0.0;
    double reference_error = 0.0;
    std::vector<ChaosRun> runs;
};

[[nodiscard]] RateReport estimate_chaos_rate(const SimConfig& base, const ModelSpec& model,
                                             const InitialLaw& initial, std::span<const std::size_t> N_list,
                                             std::size_t replicas, const Reference& reference);

// The same summary built from existing runs.
[[nodiscard]] RateReport summarize_rate(std::span<const ChaosRun> runs, double p, double reference_error);

struct CouplingCurve {
    std::vector<std::size_t> N;
    std::vector<double> error_mean;  // replica mean of sup_t pathwise error
    std::vector<double> error_stderr;
    LogLogFit fit;
    std::vector<ChaosRun> runs;
};

[[nodiscard]] CouplingCurve coupling_error_curve(const SimConfig& base, const ModelSpec& model,
                                                 const InitialLaw& initial, const MeasureFlow& reference,
                                                 std::span<const std::size_t> N_list, std::size_t replicas);

// Fit is left zero when any mean is 0.
[[nodiscard]] CouplingCurve summarize_coupling(std::span<const ChaosRun> runs);

struct TvRow {
    std::size_t N = 0;
    double t = 0.0;
    std::size_t samples = 0;
    double tv = 0.0;
    double var_norm = 0.0;
    double entropy = 0.0;
    bool pinsker_holds = true;
};

// Throws PreconditionError unless the model declares sigma^2 >= delta > 0
// and bounded measure dependence.
void require_tv_preconditions(const ModelSpec& model);

// Law of particle 1 (pooled over replicas) against the reference at the
// grid times nearest to `times`. bin_width <= 0 picks Freedman-Diaconis.
[[nodiscard]] std::vector<TvRow> marginal_tv_study(const SimConfig& base, const ModelSpec& model,
                                                   const InitialLaw& initial, const MeasureFlow& reference,
                                                   std::span<const std::size_t> N_list, std::size_t replicas,
                                                   std::span<const double> times, double bin_width = 0.0);

struct StabilityPoint {
    double delta = 0.0;
    double ratio = 0.0;               // sup_t mean |X - X~| / delta
    std::vector<double> mean_gap;     // mean |X - X~| at t_k
};

// Two interacting systems with shared noise whose initial segments differ by
// the constant delta.
[[nodiscard]] std::vector<StabilityPoint> stability_perturbation_test(const SimConfig& config,
                                                                      const ModelSpec& model,
                                                                      const InitialLaw& initial,
                                                                      std::span<const double> deltas);

// `N,error_mean,error_stderr`.
void write_rate_csv(std::ostream& os, const RateReport& report);
// `slope,stderr,theoretical_exponent`.
void write_rate_summary_csv(std::ostream& os, const RateReport& report);
// `N,replica,seed,sup_w1,sup_pairing,sup_w1_limit,triangle`.
void write_runs_csv(std::ostream& os, std::span<const ChaosRun> runs);
// `N,error_mean,error_stderr`.
void write_coupling_csv(std::ostream& os, const CouplingCurve& curve);
// `N,t,samples,tv,var_norm,entropy,pinsker_holds`.
void write_tv_csv(std::ostream& os, std::span<const TvRow> rows);
// `delta,ratio`.
void write_stability_csv(std::ostream& os, std::span<const StabilityPoint> points);

}  // namespace mvsde
