#pragma once

// Picard iteration on measure flows: mu -> Phi(mu), where Phi(mu)_t is the
// law at time t of the SDE driven by the frozen flow mu, approximated by M
// sample paths. Distances use the weighted metric
//
//   rho_lambda(mu, nu) = max_k exp(-lambda t_k) W1(mu_{t_k}, nu_{t_k}).

#include "mvsde/engine.hpp"
#include "mvsde/flow.hpp"
#include "mvsde/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mvsde {

[[nodiscard]] double rho_metric(const MeasureFlow& a, const MeasureFlow& b, double lambda);

// 4 (max(K_b, 0) + K_B + 1).
[[nodiscard]] double default_lambda(const ModelConstants& k) noexcept;

// Initial guess: the initial law held constant in time, M samples.
[[nodiscard]] MeasureFlow initial_flow(const SimConfig& config, const InitialLaw& initial, std::size_t M,
                                       std::uint64_t seed);

[[nodiscard]] MeasureFlow apply_phi(const SimConfig& config, const ModelSpec& model, const InitialLaw& initial,
                                    const MeasureFlow& flow, std::size_t M, std::uint64_t seed);

struct PhiSample {
    MeasureFlow flow;
    // rho between the even- and odd-indexed halves of the paths, scaled by
    // 1/sqrt(2): the spread expected between two independent M-path images.
    double noise_floor;
};

[[nodiscard]] PhiSample apply_phi_with_floor(const SimConfig& config, const ModelSpec& model,
                                             const InitialLaw& initial, const MeasureFlow& flow, std::size_t M,
                                             std::uint64_t seed, double lambda);

struct SolverOptions {
    std::size_t M = 10000;
    double lambda = -1.0;  // negative selects default_lambda
    double tol = 1e-3;
    std::size_t max_iter = 50;
    std::uint64_t seed = 1;
    bool common_noise = false;
};

enum class StopReason { tolerance, plateau, max_iter };

[[nodiscard]] const char* to_string(StopReason r) noexcept;

struct FixedPointResult {
    MeasureFlow flow;
    std::vector<double> rho;          // rho(iterate k-1, iterate k), k = 1..
    std::vector<double> noise_floor;  // per iterate
    double lambda = 0.0;
    bool converged = false;
    StopReason reason = StopReason::max_iter;
    bool tol_below_noise_floor = false;

    [[nodiscard]] std::size_t iterations() const noexcept { return rho.size(); }
};

// Never throws on non-convergence; callers inspect `converged`.
[[nodiscard]] FixedPointResult solve_fixed_point(const SimConfig& config, const ModelSpec& model,
                                                 const InitialLaw& initial, const SolverOptions& options);

// CSV `iter,rho`.
void write_diagnostics_csv(std::ostream& os, const FixedPointResult& result);

}  // namespace mvsde
