#pragma once

// Empirical probability measures on the real line and the distances used to
// compare them.

#include <cstddef>
#include <span>
#include <vector>

namespace mvsde {

// Uniformly weighted sample set, stored sorted ascending with a cached mean.
class EmpiricalMeasure {
public:
    explicit EmpiricalMeasure(std::vector<double> samples);

    static EmpiricalMeasure dirac(double x) { return EmpiricalMeasure({x}); }

    [[nodiscard]] std::size_t size() const noexcept { return sorted_.size(); }
    [[nodiscard]] std::span<const double> sorted() const noexcept { return sorted_; }
    [[nodiscard]] double mean() const noexcept { return mean_; }
    [[nodiscard]] double min() const noexcept { return sorted_.front(); }
    [[nodiscard]] double max() const noexcept { return sorted_.back(); }

    // Mean of |x|^p over the samples.
    [[nodiscard]] double abs_moment(double p) const;
    // Linearly interpolated order statistic (the usual "type 7" quantile).
    [[nodiscard]] double quantile(double q) const;

private:
    std::vector<double> sorted_;
    double mean_ = 0.0;
};

// Exact Wasserstein-1 distance between two empirical measures on R.
[[nodiscard]] double w1(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

// 1-Lipschitz piecewise-linear function used as a dual test function. Knots
// must be strictly increasing; every slope (including the two outer
// extrapolation slopes) must lie in [-1, 1].
class LipschitzTest {
public:
    LipschitzTest(std::vector<double> knots, std::vector<double> values, double left_slope = 0.0,
                  double right_slope = 0.0);

    static LipschitzTest identity() { return LipschitzTest({0.0}, {0.0}, 1.0, 1.0); }

    [[nodiscard]] double operator()(double x) const;

private:
    std::vector<double> knots_;
    std::vector<double> values_;
    double left_slope_;
    double right_slope_;
};

// max over the family of |mu(f) - nu(f)|; never exceeds w1(mu, nu).
[[nodiscard]] double w1_dual_lower_bound(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                                         std::span<const LipschitzTest> family);

struct CouplingBound {
    double w1_value;
    double pairing_mean;
};

// Both sides of W1(N^-1 sum delta_x, N^-1 sum delta_y) <= N^-1 sum |x_i - y_i|
// for the given (unsorted) pairing.
[[nodiscard]] CouplingBound empirical_coupling_bound(std::span<const double> x, std::span<const double> y);

// Histogram plug-in estimate of the total variation distance
// (1/2) sum |p_bin - q_bin| with bins of the given width anchored at the
// smallest pooled sample. Biased upward for finite samples.
[[nodiscard]] double tv_estimate(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double bin_width);

// Freedman-Diaconis width 2 IQR n^{-1/3} of the pooled samples.
[[nodiscard]] double freedman_diaconis_width(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

struct SharedHistogram {
    std::vector<double> p;
    std::vector<double> q;
};

// Bin probabilities of mu (p) and nu (q) on the same grid tv_estimate uses.
// Only bins holding at least one sample are returned.
[[nodiscard]] SharedHistogram shared_histogram(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                                               double bin_width);

struct PinskerResult {
    double var_norm;  // sum |p_i - q_i|
    double entropy;   // Ent(q | p), +inf when q is not absolutely continuous w.r.t. p
    bool holds;
};

[[nodiscard]] PinskerResult pinsker_check(std::span<const double> p, std::span<const double> q);

}  // namespace mvsde
