#pragma once

// Coefficient triples (b, B, sigma) of a one-dimensional path-dependent
// McKean-Vlasov SDE
//
//   dX(t) = b(t, X(t), mu_t) dt + B(t, X_t, mu_t) dt + sigma(t, X(t)) dW(t),
//
// together with the constants under which they are declared to satisfy the
// one-sided drift condition, the Hoelder diffusion condition and the
// Lipschitz path-drift condition.

#include "mvsde/measures.hpp"
#include "mvsde/paths.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mvsde {

using DriftFn = std::function<double(double t, double x, const EmpiricalMeasure& mu)>;
using PathDriftFn = std::function<double(double t, const Segment& seg, const EmpiricalMeasure& mu)>;
using DiffusionFn = std::function<double(double t, double x)>;
// Exact mean of the limit law at time t given the initial mean.
using MeanOracle = std::function<double(double t, double initial_mean)>;

struct ModelConstants {
    double K_b = 0.0;      // one-sided drift constant
    double K_B = 0.0;      // path-drift Lipschitz constant
    double K_sigma = 0.0;  // Hoelder constant of sigma, also bounds |sigma(t, 0)|
    double alpha = 1.0;    // Hoelder exponent, in [1/2, 1]
};

// Which segment norm the path drift is Lipschitz in.
enum class NormVariant { uniform, l1m };

struct ModelSpec {
    std::string name;
    DriftFn drift;
    PathDriftFn path_drift;
    DiffusionFn sigma;
    ModelConstants constants;
    DelayMeasure delay_measure = DelayMeasure::dirac(0.0);
    NormVariant hb_norm = NormVariant::l1m;
    // Order p of the moment assumed finite for the initial data.
    double moment_order = 4.0;
    // delta with sigma^2 >= delta, when the model has one.
    std::optional<double> sigma_sq_lower_bound;
    // Declared: b and B are bounded-Lipschitz in the measure, K (1 ^ W1).
    bool bounded_measure_dependence = false;
    MeanOracle mean_oracle;
};

// Throws DomainError when constants are out of range.
void validate(const ModelSpec& model);

[[nodiscard]] double eval_drift(const ModelSpec& model, double t, double x, const EmpiricalMeasure& mu);
[[nodiscard]] double eval_path_drift(const ModelSpec& model, double t, const Segment& seg, const EmpiricalMeasure& mu);
[[nodiscard]] double eval_sigma(const ModelSpec& model, double t, double x);

// Zoo.
[[nodiscard]] ModelSpec zero_model();
// b = a x + c mean(mu), B = 0, sigma = sigma0.
[[nodiscard]] ModelSpec linear_model(double a, double c, double sigma0);
// b = kappa (theta - x) + c mean(mu), B = 0, sigma = sigma0 sqrt|x|.
[[nodiscard]] ModelSpec sqrt_model(double kappa, double theta, double c, double sigma0);
// b = 0, B = beta * integral of xi against m, sigma = sigma0.
[[nodiscard]] ModelSpec delay_model(double beta, double sigma0, DelayMeasure m);

struct AuditSpec {
    double x_lo = -1.0;
    double x_hi = 1.0;
    std::vector<double> t_grid{0.0};
    std::size_t sample_count = 10000;
    std::uint64_t seed = 1;
    // Segment geometry for the path-drift check.
    double r = 1.0;
    double h = 0.1;
    std::size_t measure_size = 5;
    double tol = 1e-9;
};

struct AssumptionCheck {
    std::string name;
    double declared = 0.0;
    double estimated = 0.0;  // worst sampled ratio
    bool pass = true;
    std::size_t violations = 0;
    double worst_excess = 0.0;  // max of lhs - rhs over samples
    bool has_witness = false;
    double witness_x = 0.0;
    double witness_y = 0.0;
};

struct AssumptionReport {
    AssumptionCheck drift;      // one-sided condition on b
    AssumptionCheck diffusion;  // Hoelder condition on sigma
    AssumptionCheck path_drift; // Lipschitz condition on B
    double alpha_hat = 1.0;
    std::size_t samples = 0;
    std::string note;

    [[nodiscard]] bool pass() const noexcept { return drift.pass && diffusion.pass && path_drift.pass; }
};

// Random scan of the three coefficient conditions over the box. A passing
// report means only that no sampled tuple violated a condition.
[[nodiscard]] AssumptionReport check_assumptions(const ModelSpec& model, const AuditSpec& spec);

}  // namespace mvsde
