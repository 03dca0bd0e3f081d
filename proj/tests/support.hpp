#pragma once

// Seeded generators for property tests.

#include <cstdint>
#include <random>
#include <vector>

namespace testing {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : eng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
    double normal(double mean = 0.0, double sd = 1.0) { return std::normal_distribution<double>(mean, sd)(eng_); }
    std::size_t index(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(eng_);
    }
    std::vector<double> normals(std::size_t n, double sd = 1.0) {
        std::vector<double> v(n);
        for (double& x : v) x = normal(0.0, sd);
        return v;
    }
    std::vector<double> uniforms(std::size_t n, double lo, double hi) {
        std::vector<double> v(n);
        for (double& x : v) x = uniform(lo, hi);
        return v;
    }
    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

}  // namespace testing
