#pragma once

// Explicit Euler-Maruyama time stepping for the N-particle system, for the
// SDE with a frozen measure flow, for the mollified-diffusion variant, and
// for the synchronous coupling of particles with their limit copies.
//
// Noise contract: the Gaussian increment of particle i at step k is a pure
// function of (seed, stream(i), k). Every particle of a step sees the
// empirical measure of the state at the start of that step, so results do not
// depend on thread count or scheduling.

#include "mvsde/flow.hpp"
#include "mvsde/measures.hpp"
#include "mvsde/model.hpp"
#include "mvsde/paths.hpp"
#include "mvsde/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mvsde {

// Seed tags for the independent random streams of one run.
enum SeedTag : std::uint64_t {
    kNoiseTag = 0x6E6F697365,
    kInitialTag = 0x696E6974,
    kReplicaTag = 0x7265706C,
    kPicardTag = 0x70696361,
    kReferenceTag = 0x72656665,
};

struct SimConfig {
    double T = 1.0;
    double dt = 0.01;
    std::size_t N = 100;
    std::uint64_t seed = 1;
    // Delay horizon; 0 means one time step.
    double r = 0.0;

    [[nodiscard]] std::size_t steps() const;  // T / dt, validated
    [[nodiscard]] double delay() const noexcept { return r > 0.0 ? r : dt; }
    void validate() const;
};

enum class InitialKind { constant, gaussian, bounded_pareto };

// Law of the initial segment. Every sampler produces a constant segment
// whose level is drawn from the law.
struct InitialLaw {
    InitialKind kind = InitialKind::constant;
    double value = 0.0;  // constant
    double mean = 0.0;   // gaussian
    double sd = 1.0;
    double shape = 4.0;  // bounded Pareto on [lo, hi]
    double lo = 1.0;
    double hi = 10.0;

    static InitialLaw constant(double c) { return {InitialKind::constant, c}; }
    static InitialLaw gaussian(double mean, double sd) {
        InitialLaw l;
        l.kind = InitialKind::gaussian;
        l.mean = mean;
        l.sd = sd;
        return l;
    }
    static InitialLaw bounded_pareto(double shape, double lo, double hi) {
        InitialLaw l;
        l.kind = InitialKind::bounded_pareto;
        l.shape = shape;
        l.lo = lo;
        l.hi = hi;
        return l;
    }

    void validate() const;
    [[nodiscard]] double expected_value() const;
    // E|X|^p in closed form.
    [[nodiscard]] double abs_moment(double p) const;
    // Level of particle `index` for uniform u in (0, 1).
    [[nodiscard]] double draw(double u) const;
};

[[nodiscard]] InitialKind initial_kind_from_name(const std::string& name);

// Segments for particles first_index .. first_index + count - 1; particle i
// depends only on (seed, i).
[[nodiscard]] std::vector<Segment> sample_initial(std::size_t count, const InitialLaw& law, std::uint64_t seed,
                                                  double r, double h, std::size_t first_index = 0);

class ParticleEnsemble {
public:
    // streams defaults to 0..N-1.
    ParticleEnsemble(std::vector<Segment> segments, CounterRng noise, std::vector<std::uint64_t> streams = {});

    [[nodiscard]] std::size_t size() const noexcept { return segments_.size(); }
    [[nodiscard]] std::size_t step() const noexcept { return step_; }
    [[nodiscard]] const Segment& segment(std::size_t i) const { return segments_[i]; }
    [[nodiscard]] double value(std::size_t i) const { return segments_[i].back(); }
    [[nodiscard]] std::vector<double> values() const;
    [[nodiscard]] EmpiricalMeasure empirical_measure() const { return EmpiricalMeasure(values()); }
    [[nodiscard]] std::uint64_t stream(std::size_t i) const { return streams_[i]; }
    [[nodiscard]] const CounterRng& noise() const noexcept { return noise_; }

    // One Euler-Maruyama step against the given measure and diffusion.
    void step_against(const ModelSpec& model, const EmpiricalMeasure& mu, const DiffusionFn& sigma, double t,
                      double dt);

private:
    std::vector<Segment> segments_;
    CounterRng noise_;
    std::vector<std::uint64_t> streams_;
    std::size_t step_ = 0;
    std::vector<double> next_;
};

// Advances every particle against the empirical measure of the whole ensemble.
void step_interacting(ParticleEnsemble& ensemble, const ModelSpec& model, double t, double dt);

struct PathRecord {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<std::vector<double>> values;  // values[k][i], particle order
    std::vector<EmpiricalMeasure> snapshots;  // snapshots[k] is the law of values[k]

    [[nodiscard]] std::size_t particles() const noexcept { return values.empty() ? 0 : values.front().size(); }
    [[nodiscard]] MeasureFlow flow(std::string tag = {}) const;
};

// CSV `t,particle,value`.
void write_long_csv(std::ostream& os, const PathRecord& record);
// CSV `t,q05,q25,q50,q75,q95,mean`.
void write_wide_csv(std::ostream& os, const PathRecord& record);

[[nodiscard]] PathRecord simulate_interacting(const SimConfig& config, const ModelSpec& model,
                                              const InitialLaw& initial);

// n_paths independent copies driven by the given flow instead of their own law.
[[nodiscard]] PathRecord simulate_frozen(const SimConfig& config, const ModelSpec& model, const InitialLaw& initial,
                                         const MeasureFlow& flow, std::size_t n_paths, std::uint64_t seed);

// The interacting system with sigma replaced by its mollification of index n.
[[nodiscard]] PathRecord simulate_mollified(const SimConfig& config, const ModelSpec& model,
                                            const InitialLaw& initial, int n);

struct CoupledRun {
    std::vector<double> times;
    std::vector<double> pathwise_error;  // mean_i |X^i - X^{i,N}| at t_k
    std::vector<double> w1_particles;    // W1(interacting law, reference) at t_k
    std::vector<double> w1_limit;        // W1(limit-copies law, reference) at t_k
    PathRecord interacting;
    PathRecord limit;

    [[nodiscard]] double sup_pathwise_error() const;
    [[nodiscard]] double sup_w1_particles() const;
    [[nodiscard]] double sup_w1_limit() const;
};

// The interacting system and N limit copies driven by the reference flow,
// sharing initial segments and Brownian increments particle by particle.
[[nodiscard]] CoupledRun simulate_coupled(const SimConfig& config, const ModelSpec& model, const InitialLaw& initial,
                                          const MeasureFlow& reference);

// Thread count for particle-level parallelism; 0 keeps the runtime default.
void set_thread_count(int threads);
[[nodiscard]] int thread_count();

}  // namespace mvsde
