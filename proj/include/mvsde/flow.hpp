#pragma once

#include "mvsde/measures.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace mvsde {

// A family of empirical measures on the uniform grid t_k = k dt, k = 0..steps.
class MeasureFlow {
public:
    MeasureFlow(double dt, std::vector<EmpiricalMeasure> snapshots, std::string tag = {});

    static MeasureFlow constant(double dt, std::size_t steps, const EmpiricalMeasure& mu, std::string tag = {});
    // Dirac masses at m(t_k).
    static MeasureFlow point_masses(double dt, std::size_t steps, const std::function<double(double)>& m,
                                    std::string tag = {});

    [[nodiscard]] std::size_t size() const noexcept { return snapshots_.size(); }
    [[nodiscard]] std::size_t steps() const noexcept { return snapshots_.size() - 1; }
    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] double time(std::size_t k) const noexcept { return static_cast<double>(k) * dt_; }
    [[nodiscard]] const EmpiricalMeasure& at(std::size_t k) const { return snapshots_.at(k); }
    [[nodiscard]] const std::string& tag() const noexcept { return tag_; }
    void set_tag(std::string tag) { tag_ = std::move(tag); }

    [[nodiscard]] bool same_grid(const MeasureFlow& other) const noexcept;
    [[nodiscard]] bool matches(double dt, std::size_t steps) const noexcept;

private:
    double dt_;
    std::vector<EmpiricalMeasure> snapshots_;
    std::string tag_;
};

// CSV `t,sample_index,value`, samples in sorted order.
void write_flow_csv(std::ostream& os, const MeasureFlow& flow);

}  // namespace mvsde
