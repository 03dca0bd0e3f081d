#include "mvsde/measures.hpp"

#include "mvsde/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace mvsde {

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> samples) : sorted_(std::move(samples)) {
    if (sorted_.empty()) throw DomainError("empirical measure needs at least one sample");
    for (double v : sorted_)
        if (!std::isfinite(v)) throw DomainError("empirical measure samples must be finite");
    std::sort(sorted_.begin(), sorted_.end());
    double sum = 0.0;
    for (double v : sorted_) sum += v;
    mean_ = sum / static_cast<double>(sorted_.size());
}

double EmpiricalMeasure::abs_moment(double p) const {
    double sum = 0.0;
    for (double v : sorted_) sum += std::pow(std::abs(v), p);
    return sum / static_cast<double>(sorted_.size());
}

double EmpiricalMeasure::quantile(double q) const {
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
    const double pos = q * static_cast<double>(sorted_.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted_.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return sorted_[lo] + w * (sorted_[hi] - sorted_[lo]);
}

double w1(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    const auto x = mu.sorted();
    const auto y = nu.sorted();
    const std::size_t n = x.size();
    const std::size_t m = y.size();
    if (n == m) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += std::abs(x[i] - y[i]);
        return sum / static_cast<double>(n);
    }
    // Integral of |F - G| over the merged support; F - G is piecewise
    // constant between consecutive atoms, equal to (i m - j n) / (n m).
    const auto nn = static_cast<std::int64_t>(n);
    const auto mm = static_cast<std::int64_t>(m);
    std::size_t i = 0;
    std::size_t j = 0;
    double prev = std::min(x[0], y[0]);
    double total = 0.0;
    while (i < n || j < m) {
        const bool take_x = j >= m || (i < n && x[i] <= y[j]);
        const double z = take_x ? x[i] : y[j];
        const std::int64_t gap = static_cast<std::int64_t>(i) * mm - static_cast<std::int64_t>(j) * nn;
        total += static_cast<double>(gap < 0 ? -gap : gap) * (z - prev);
        prev = z;
        if (take_x)
            ++i;
        else
            ++j;
    }
    return total / (static_cast<double>(n) * static_cast<double>(m));
}

LipschitzTest::LipschitzTest(std::vector<double> knots, std::vector<double> values, double left_slope,
                             double right_slope)
    : knots_(std::move(knots)), values_(std::move(values)), left_slope_(left_slope), right_slope_(right_slope) {
    if (knots_.empty() || knots_.size() != values_.size())
        throw DomainError("Lipschitz test function needs matching, non-empty knots and values");
    if (std::abs(left_slope_) > 1.0 || std::abs(right_slope_) > 1.0)
        throw DomainError("extrapolation slopes must lie in [-1, 1]");
    for (std::size_t k = 1; k < knots_.size(); ++k) {
        const double dx = knots_[k] - knots_[k - 1];
        if (!(dx > 0.0)) throw DomainError("Lipschitz test knots must be strictly increasing");
        if (std::abs(values_[k] - values_[k - 1]) > dx) throw DomainError("Lipschitz test slope exceeds 1");
    }
}

double LipschitzTest::operator()(double x) const {
    if (x <= knots_.front()) return values_.front() + left_slope_ * (x - knots_.front());
    if (x >= knots_.back()) return values_.back() + right_slope_ * (x - knots_.back());
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    const auto k = static_cast<std::size_t>(it - knots_.begin());
    const double w = (x - knots_[k - 1]) / (knots_[k] - knots_[k - 1]);
    return (1.0 - w) * values_[k - 1] + w * values_[k];
}

double w1_dual_lower_bound(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                           std::span<const LipschitzTest> family) {
    double best = 0.0;
    for (const auto& f : family) {
        double a = 0.0;
        for (double v : mu.sorted()) a += f(v);
        double b = 0.0;
        for (double v : nu.sorted()) b += f(v);
        best = std::max(best, std::abs(a / static_cast<double>(mu.size()) - b / static_cast<double>(nu.size())));
    }
    return best;
}

CouplingBound empirical_coupling_bound(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw DomainError("coupling bound needs equal sample counts, got " + std::to_string(x.size()) + " and " +
                          std::to_string(y.size()));
    if (x.empty()) throw DomainError("coupling bound needs at least one pair");
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += std::abs(x[i] - y[i]);
    const CouplingBound out{w1(EmpiricalMeasure({x.begin(), x.end()}), EmpiricalMeasure({y.begin(), y.end()})),
                            sum / static_cast<double>(x.size())};
    if (out.w1_value > out.pairing_mean + 1e-12) throw std::logic_error("sorted matching beaten by a pairing");
    return out;
}

namespace {

// Walks the bins of the shared histogram in increasing order, calling
// visit(count_mu, count_nu) for every bin that holds a sample.
template <class Visit>
void walk_bins(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double bin_width, Visit&& visit) {
    if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw DomainError("bin width must be positive");
    const auto x = mu.sorted();
    const auto y = nu.sorted();
    const double lo = std::min(mu.min(), nu.min());
    auto bin = [&](double v) { return std::floor((v - lo) / bin_width); };
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < x.size() || j < y.size()) {
        double b = std::numeric_limits<double>::infinity();
        if (i < x.size()) b = bin(x[i]);
        if (j < y.size()) b = std::min(b, bin(y[j]));
        std::size_t cx = 0;
        std::size_t cy = 0;
        while (i < x.size() && bin(x[i]) == b) ++i, ++cx;
        while (j < y.size() && bin(y[j]) == b) ++j, ++cy;
        visit(cx, cy);
    }
}

}  // namespace

double tv_estimate(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double bin_width) {
    const double n = static_cast<double>(mu.size());
    const double m = static_cast<double>(nu.size());
    double total = 0.0;
    walk_bins(mu, nu, bin_width, [&](std::size_t cx, std::size_t cy) {
        total += std::abs(static_cast<double>(cx) / n - static_cast<double>(cy) / m);
    });
    return std::min(1.0, 0.5 * total);
}

SharedHistogram shared_histogram(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double bin_width) {
    SharedHistogram h;
    const double n = static_cast<double>(mu.size());
    const double m = static_cast<double>(nu.size());
    walk_bins(mu, nu, bin_width, [&](std::size_t cx, std::size_t cy) {
        h.p.push_back(static_cast<double>(cx) / n);
        h.q.push_back(static_cast<double>(cy) / m);
    });
    return h;
}

double freedman_diaconis_width(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    std::vector<double> pooled;
    pooled.reserve(mu.size() + nu.size());
    std::merge(mu.sorted().begin(), mu.sorted().end(), nu.sorted().begin(), nu.sorted().end(),
               std::back_inserter(pooled));
    const EmpiricalMeasure all(std::move(pooled));
    const double n = static_cast<double>(all.size());
    const double iqr = all.quantile(0.75) - all.quantile(0.25);
    if (iqr > 0.0) return 2.0 * iqr * std::cbrt(1.0 / n);
    const double range = all.max() - all.min();
    return range > 0.0 ? range / std::sqrt(n) : 1.0;
}

PinskerResult pinsker_check(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw DomainError("Pinsker check needs distributions on the same support");
    double var = 0.0;
    double ent = 0.0;
    bool singular = false;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] >= 0.0) || !(q[i] >= 0.0) || !std::isfinite(p[i]) || !std::isfinite(q[i]))
            throw DomainError("probabilities must be finite and non-negative");
        var += std::abs(p[i] - q[i]);
        if (q[i] == 0.0) continue;
        if (p[i] == 0.0) {
            singular = true;
            continue;
        }
        ent += q[i] * std::log(q[i] / p[i]);
    }
    if (singular) return {var, std::numeric_limits<double>::infinity(), true};
    return {var, ent, var * var <= 2.0 * ent + 1e-12};
}

}  // namespace mvsde
