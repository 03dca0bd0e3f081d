#include "mvsde/paths.hpp"

#include "mvsde/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace mvsde {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

bool in_window(double s, double r) {
    const double slack = 1e-12 * r;
    return s >= -r - slack && s <= slack;
}

}  // namespace

std::size_t delay_steps(double r, double h) {
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("delay r must be positive and finite");
    if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("grid spacing h must be positive and finite");
    const double ratio = r / h;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(ratio - n) > 4.0 * kEps * n)
        throw DomainError("grid spacing h = " + std::to_string(h) + " does not divide r = " + std::to_string(r));
    return static_cast<std::size_t>(n);
}

Segment::Segment(double r, double h, std::vector<double> values) : r_(r), h_(h), buf_(std::move(values)) {
    const std::size_t n = delay_steps(r, h);
    if (buf_.size() != n + 1)
        throw DomainError("segment needs " + std::to_string(n + 1) + " values, got " + std::to_string(buf_.size()));
    for (double v : buf_)
        if (!std::isfinite(v)) throw DomainError("segment values must be finite");
}

Segment Segment::constant(double r, double h, double value) {
    return Segment(r, h, std::vector<double>(delay_steps(r, h) + 1, value));
}

std::vector<double> Segment::values() const {
    std::vector<double> out(buf_.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = value(j);
    return out;
}

void Segment::advance(double new_value) {
    if (!std::isfinite(new_value)) throw DomainError("cannot advance a segment with a non-finite value");
    buf_[head_] = new_value;
    if (++head_ == buf_.size()) head_ = 0;
}

bool Segment::same_grid(const Segment& other) const noexcept {
    return buf_.size() == other.buf_.size() && r_ == other.r_ && h_ == other.h_;
}

Segment advance(Segment seg, double new_value) {
    seg.advance(new_value);
    return seg;
}

double interpolate(const Segment& seg, double s) {
    if (!in_window(s, seg.r()))
        throw DomainError("interpolation point " + std::to_string(s) + " outside [-r, 0]");
    const double u = std::clamp((s + seg.r()) / seg.h(), 0.0, static_cast<double>(seg.size() - 1));
    const double nearest = std::round(u);
    if (std::abs(u - nearest) <= 1e-9) return seg.value(static_cast<std::size_t>(nearest));
    const auto j = static_cast<std::size_t>(std::floor(u));
    const double w = u - static_cast<double>(j);
    return (1.0 - w) * seg.value(j) + w * seg.value(j + 1);
}

double uniform_norm(const Segment& seg) {
    double m = 0.0;
    for (std::size_t j = 0; j < seg.size(); ++j) m = std::max(m, std::abs(seg.value(j)));
    return m;
}

Segment difference(const Segment& xi, const Segment& eta) {
    if (!xi.same_grid(eta)) throw DomainError("segments live on different grids");
    std::vector<double> d(xi.size());
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = xi.value(j) - eta.value(j);
    return Segment(xi.r(), xi.h(), std::move(d));
}

DelayMeasure::DelayMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw DomainError("delay measure needs at least one atom");
    std::sort(atoms_.begin(), atoms_.end(), [](const Atom& a, const Atom& b) { return a.location < b.location; });
    double total = 0.0;
    for (const auto& a : atoms_) {
        if (!std::isfinite(a.location) || a.location > 0.0)
            throw DomainError("delay atom location must be finite and <= 0");
        if (!(a.weight > 0.0) || !std::isfinite(a.weight)) throw DomainError("delay atom weight must be positive");
        total += a.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("delay measure weights must sum to 1");
}

DelayMeasure DelayMeasure::dirac(double location) { return DelayMeasure({{location, 1.0}}); }

DelayMeasure DelayMeasure::uniform(double r, std::size_t count) {
    if (count == 0) throw DomainError("uniform delay measure needs at least one atom");
    if (count == 1) return dirac(-r);
    std::vector<Atom> atoms(count);
    const double w = 1.0 / static_cast<double>(count);
    for (std::size_t j = 0; j < count; ++j)
        atoms[j] = {-r + r * static_cast<double>(j) / static_cast<double>(count - 1), w};
    // Fix the last weight so the total is exactly representable as 1.
    double partial = 0.0;
    for (std::size_t j = 0; j + 1 < count; ++j) partial += atoms[j].weight;
    atoms.back().weight = 1.0 - partial;
    atoms.back().location = 0.0;
    return DelayMeasure(std::move(atoms));
}

std::pair<DelayMeasure, bool> DelayMeasure::snapped(double r, double h) const {
    const std::size_t n = delay_steps(r, h);
    std::map<std::size_t, double> merged;
    bool moved = false;
    for (const auto& a : atoms_) {
        if (!in_window(a.location, r)) throw DomainError("delay atom outside [-r, 0]");
        const double u = (a.location + r) / h;
        const auto j = static_cast<std::size_t>(std::clamp(std::round(u), 0.0, static_cast<double>(n)));
        if (std::abs(u - static_cast<double>(j)) > 1e-9) moved = true;
        merged[j] += a.weight;
    }
    std::vector<Atom> atoms;
    for (const auto& [j, w] : merged) atoms.push_back({j == n ? 0.0 : -r + static_cast<double>(j) * h, w});
    return {DelayMeasure(std::move(atoms)), moved};
}

double DelayMeasure::cumulative(double u) const {
    double total = 0.0;
    for (const auto& a : atoms_)
        if (a.location <= u) total += a.weight;
    return std::min(total, 1.0);
}

double l1m_norm(const Segment& seg, const DelayMeasure& m) {
    double total = 0.0;
    for (const auto& a : m.atoms()) total += a.weight * std::abs(interpolate(seg, a.location));
    return total;
}

double integrate(const Segment& seg, const DelayMeasure& m) {
    double total = 0.0;
    for (const auto& a : m.atoms()) total += a.weight * interpolate(seg, a.location);
    return total;
}

}  // namespace mvsde
