#include "mvsde/flow.hpp"

#include "mvsde/csv.hpp"
#include "mvsde/error.hpp"

#include <cmath>
#include <ostream>

namespace mvsde {

MeasureFlow::MeasureFlow(double dt, std::vector<EmpiricalMeasure> snapshots, std::string tag)
    : dt_(dt), snapshots_(std::move(snapshots)), tag_(std::move(tag)) {
    if (!(dt_ > 0.0)) throw DomainError("flow time step must be positive");
    if (snapshots_.empty()) throw DomainError("flow needs at least one snapshot");
    for (const auto& s : snapshots_)
        if (s.size() != snapshots_.front().size()) throw DomainError("flow snapshots must share one sample count");
}

MeasureFlow MeasureFlow::constant(double dt, std::size_t steps, const EmpiricalMeasure& mu, std::string tag) {
    return MeasureFlow(dt, std::vector<EmpiricalMeasure>(steps + 1, mu), std::move(tag));
}

MeasureFlow MeasureFlow::point_masses(double dt, std::size_t steps, const std::function<double(double)>& m,
                                      std::string tag) {
    std::vector<EmpiricalMeasure> snaps;
    snaps.reserve(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) snaps.push_back(EmpiricalMeasure::dirac(m(static_cast<double>(k) * dt)));
    return MeasureFlow(dt, std::move(snaps), std::move(tag));
}

bool MeasureFlow::matches(double dt, std::size_t steps) const noexcept {
    return steps + 1 == snapshots_.size() && std::abs(dt - dt_) <= 1e-12 * dt_;
}

bool MeasureFlow::same_grid(const MeasureFlow& other) const noexcept { return other.matches(dt_, steps()); }

void write_flow_csv(std::ostream& os, const MeasureFlow& flow) {
    os << "t,sample_index,value\n";
    for (std::size_t k = 0; k < flow.size(); ++k) {
        const auto s = flow.at(k).sorted();
        for (std::size_t i = 0; i < s.size(); ++i) os << fmt_num(flow.time(k)) << ',' << i << ',' << fmt_num(s[i]) << '\n';
    }
}

}  // namespace mvsde
