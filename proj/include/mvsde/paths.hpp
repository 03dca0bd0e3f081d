#pragma once

// Path segments on the delay window [-r, 0] and the delay measures that
// weight them.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace mvsde {

// Number of grid intervals in [-r, 0] for spacing h. Throws DomainError when
// h does not divide r.
std::size_t delay_steps(double r, double h);

// A path restricted to [-r, 0] sampled on a uniform grid of spacing h.
// value(j) is the path at time -r + j*h, j = 0..size()-1. Storage is a ring
// buffer so advance() is O(1).
class Segment {
public:
    Segment(double r, double h, std::vector<double> values);

    static Segment constant(double r, double h, double value);

    [[nodiscard]] double r() const noexcept { return r_; }
    [[nodiscard]] double h() const noexcept { return h_; }
    [[nodiscard]] std::size_t size() const noexcept { return buf_.size(); }

    [[nodiscard]] double value(std::size_t j) const noexcept {
        std::size_t k = head_ + j;
        if (k >= buf_.size()) k -= buf_.size();
        return buf_[k];
    }
    [[nodiscard]] double front() const noexcept { return value(0); }
    [[nodiscard]] double back() const noexcept { return value(buf_.size() - 1); }

    [[nodiscard]] std::vector<double> values() const;

    // Drops the oldest value and appends new_value at s = 0.
    void advance(double new_value);

    [[nodiscard]] bool same_grid(const Segment& other) const noexcept;

private:
    double r_;
    double h_;
    std::vector<double> buf_;
    std::size_t head_ = 0;
};

// Returns the segment advanced by one step; the argument is left untouched.
[[nodiscard]] Segment advance(Segment seg, double new_value);

// Linear interpolation of the grid values at s in [-r, 0]; exact at grid points.
[[nodiscard]] double interpolate(const Segment& seg, double s);

[[nodiscard]] double uniform_norm(const Segment& seg);

// Pointwise xi - eta on a shared grid.
[[nodiscard]] Segment difference(const Segment& xi, const Segment& eta);

// Probability measure on [-r, 0] given by finitely many weighted atoms.
class DelayMeasure {
public:
    struct Atom {
        double location;
        double weight;
    };

    explicit DelayMeasure(std::vector<Atom> atoms);

    static DelayMeasure dirac(double location);
    // count equally weighted atoms spread evenly over [-r, 0], endpoints included.
    static DelayMeasure uniform(double r, std::size_t count);

    [[nodiscard]] std::span<const Atom> atoms() const noexcept { return atoms_; }
    [[nodiscard]] double leftmost() const noexcept { return atoms_.front().location; }

    // Moves every atom to its nearest grid point of spacing h and merges
    // coincident atoms. The bool reports whether anything moved.
    [[nodiscard]] std::pair<DelayMeasure, bool> snapped(double r, double h) const;

    // m([-r, u]) for u in [-r, 0].
    [[nodiscard]] double cumulative(double u) const;

private:
    std::vector<Atom> atoms_;
};

// Integral of |seg(s)| against m.
[[nodiscard]] double l1m_norm(const Segment& seg, const DelayMeasure& m);

// Integral of seg(s) against m (signed).
[[nodiscard]] double integrate(const Segment& seg, const DelayMeasure& m);

}  // namespace mvsde
