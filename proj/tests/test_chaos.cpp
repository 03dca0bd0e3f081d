#include "mvsde/chaos.hpp"
#include "mvsde/error.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace mvsde;

namespace {

SimConfig sim(std::size_t N, std::uint64_t seed) {
    SimConfig c;
    c.T = 1.0;
    c.dt = 0.01;
    c.N = N;
    c.seed = seed;
    return c;
}

// Number of adjacent pairs where the value goes up.
std::size_t inversions(const std::vector<double>& v) {
    std::size_t n = 0;
    for (std::size_t i = 1; i < v.size(); ++i) n += v[i] > v[i - 1] ? 1 : 0;
    return n;
}

}  // namespace

TEST_CASE("theoretical exponent") {
    CHECK(theoretical_exponent(4.0) == 0.5);
    CHECK(theoretical_exponent(1.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(theoretical_exponent(INFINITY) == 0.5);
    CHECK(theoretical_exponent(1e9) == 0.5);
    CHECK(theoretical_exponent(1.9) < 0.5);
    CHECK_THROWS_AS((void)theoretical_exponent(2.0), DomainError);
    CHECK_THROWS_AS((void)theoretical_exponent(1.0), DomainError);
    CHECK_THROWS_AS((void)theoretical_exponent(0.5), DomainError);
}

TEST_CASE("log-log fit") {
    const std::vector<double> xs{64, 128, 256, 512, 1024};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(3.0 * std::pow(x, -0.5));
    const auto f = fit_loglog(xs, ys);
    CHECK(std::abs(f.slope + 0.5) <= 1e-12);
    CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(f.slope_stderr <= 1e-12);

    const auto flat = fit_loglog(xs, std::vector<double>(5, 0.2));
    CHECK(std::abs(flat.slope) <= 1e-14);

    CHECK_THROWS_AS((void)fit_loglog(std::vector<double>{1, 2}, std::vector<double>{1, 2}), DomainError);
    CHECK_THROWS_AS((void)fit_loglog(xs, std::vector<double>{1, 2, 0, 4, 5}), DomainError);
    CHECK_THROWS_AS((void)fit_loglog(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3}), DomainError);
}

TEST_CASE("log-log fit recovers noisy slopes within three standard errors") {
    testing::Gen g(31);
    int covered = 0;
    const int trials = 400;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> xs;
        std::vector<double> ys;
        for (int i = 0; i < 7; ++i) {
            xs.push_back(std::pow(2.0, 6 + i));
            ys.push_back(2.0 * std::pow(xs.back(), -0.5) * (1.0 + 0.05 * g.normal()));
        }
        const auto f = fit_loglog(xs, ys);
        covered += std::abs(f.slope + 0.5) <= 3.0 * f.slope_stderr ? 1 : 0;
    }
    CHECK(covered >= static_cast<int>(0.95 * trials));
}

TEST_CASE("self-referenced runs have zero error and the fit rejects them") {
    const auto model = linear_model(-1.0, 0.5, 0.2);
    const auto init = InitialLaw::gaussian(1.0, 0.5);
    std::vector<ChaosRun> runs;
    for (const std::size_t N : {8, 16, 32}) {
        const std::uint64_t master = 17;
        SimConfig c = sim(N, replica_seed(master, N, 0));
        const auto own = simulate_interacting(c, model, init).flow();
        const std::vector<std::size_t> Ns{N};
        const auto r = chaos_sweep(sim(1, master), model, init, own, Ns, 1);
        REQUIRE(r.size() == 1);
        CHECK(r[0].sup_w1 == 0.0);
        CHECK(r[0].sup_pairing == 0.0);
        runs.push_back(r[0]);
    }
    CHECK_THROWS_AS((void)summarize_rate(runs, 4.0, 0.0), DomainError);
    const auto cc = summarize_coupling(runs);
    for (double e : cc.error_mean) CHECK(e == 0.0);
}

TEST_CASE("oracle reference reproduces the limit law") {
    const auto model = linear_model(-1.0, 0.5, 0.2);
    const auto ref = build_reference(sim(1, 3), model, InitialLaw::gaussian(1.0, 0.5), 20000, 3);
    CHECK(ref.kind == "oracle");
    CHECK(ref.own_error > 0.0);
    CHECK(ref.own_error < 0.02);
    // the limit law is Gaussian with mean e^{-t/2} and variance
    // 0.25 e^{-2t} + 0.02 (1 - e^{-2t})
    const double var = 0.25 * std::exp(-2.0) + 0.02 * (1.0 - std::exp(-2.0));
    CHECK(ref.flow.at(100).mean() == doctest::Approx(std::exp(-0.5)).epsilon(0.01));
    const double m = ref.flow.at(100).mean();
    CHECK(ref.flow.at(100).abs_moment(2.0) - m * m == doctest::Approx(var).epsilon(0.05));

    const auto delay = delay_model(0.5, 0.2, DelayMeasure::dirac(-0.5));
    SimConfig c = sim(1, 3);
    c.r = 0.5;
    CHECK(build_reference(c, delay, InitialLaw::constant(1.0), 500, 3).kind == "oracle");
}

TEST_CASE("solved reference without an oracle") {
    auto model = linear_model(-1.0, 0.5, 0.2);
    model.mean_oracle = nullptr;
    const auto ref = build_reference(sim(1, 4), model, InitialLaw::gaussian(1.0, 0.5), 4000, 4);
    CHECK(ref.kind == "solved");
    CHECK(ref.flow.at(100).mean() == doctest::Approx(std::exp(-0.5)).epsilon(0.02));
}

TEST_CASE("rate sweep: decreasing errors, coupling slope, triangle inequality, determinism") {
    const auto model = linear_model(-1.0, 0.5, 0.2);
    const auto init = InitialLaw::gaussian(1.0, 0.5);
    const SimConfig base = sim(1, 2024);
    const auto ref = build_reference(base, model, init, 16384, base.seed);
    const std::vector<std::size_t> Ns{64, 128, 256, 512, 1024};
    set_thread_count(1);
    const auto runs = chaos_sweep(base, model, init, ref.flow, Ns, 10);
    set_thread_count(3);
    const auto again = chaos_sweep(base, model, init, ref.flow, Ns, 10);
    set_thread_count(1);
    REQUIRE(runs.size() == 50);
    for (std::size_t i = 0; i < runs.size(); ++i) {
        CHECK(runs[i].triangle_holds());
        CHECK(runs[i].sup_w1 == again[i].sup_w1);
        CHECK(runs[i].sup_pairing == again[i].sup_pairing);
    }
    const auto rate = summarize_rate(runs, 4.0, ref.own_error);
    const auto coupling = summarize_coupling(runs);
    CHECK(inversions(rate.error_mean) <= 1);
    CHECK(inversions(coupling.error_mean) <= 1);
    CHECK(rate.fit.slope < -0.3);
    CHECK(std::abs(coupling.fit.slope - rate.fit.slope) <= 0.15);

    std::ostringstream os;
    write_rate_csv(os, rate);
    CHECK(os.str().rfind("N,error_mean,error_stderr\n64,", 0) == 0);
    std::ostringstream ss;
    write_rate_summary_csv(ss, rate);
    CHECK(ss.str().rfind("slope,stderr,theoretical_exponent\n", 0) == 0);
}

TEST_CASE("rate estimate input checks") {
    const auto model = linear_model(-1.0, 0.5, 0.2);
    const auto init = InitialLaw::gaussian(1.0, 0.5);
    const auto ref = MeasureFlow::constant(0.01, 100, EmpiricalMeasure::dirac(0.0));
    const Reference r{ref, "test", 0.0};
    const std::vector<std::size_t> two{8, 16};
    const std::vector<std::size_t> unsorted{16, 8, 32};
    CHECK_THROWS_AS((void)estimate_chaos_rate(sim(1, 1), model, init, two, 3, r), DomainError);
    CHECK_THROWS_AS((void)estimate_chaos_rate(sim(1, 1), model, init, unsorted, 3, r), ConfigError);
    auto p2 = model;
    p2.moment_order = 2.0;
    const std::vector<std::size_t> three{8, 16, 32};
    CHECK_THROWS_AS((void)estimate_chaos_rate(sim(1, 1), p2, init, three, 3, r), DomainError);
}

TEST_CASE("marginal TV study") {
    const auto init = InitialLaw::gaussian(1.0, 0.5);
    const SimConfig base = sim(1, 5);
    const std::vector<double> times{0.5, 1.0};

    const auto sq = sqrt_model(1.0, 1.0, 0.5, 0.3);
    const auto dummy = MeasureFlow::constant(0.01, 100, EmpiricalMeasure::dirac(0.0));
    const std::vector<std::size_t> Ns{2, 8, 32};
    try {
        (void)marginal_tv_study(base, sq, init, dummy, Ns, 10, times);
        FAIL("expected a precondition error");
    } catch (const PreconditionError& e) {
        CHECK(std::string(e.what()).find("sig") != std::string::npos);
    }

    const auto model = linear_model(-1.0, 0.5, 0.3);
    const auto ref = build_reference(base, model, init, 32768, 5);
    const auto rows = marginal_tv_study(base, model, init, ref.flow, Ns, 6000, std::vector<double>{1.0});
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
        CHECK(r.pinsker_holds);
        CHECK(r.tv >= 0.0);
        CHECK(r.tv <= 1.0);
        CHECK(r.samples == 6000);
    }
    CHECK(rows[0].tv > rows[1].tv);
    CHECK(rows[1].tv > rows[2].tv);

    // a reference drawn from the same particle law leaves only the histogram bias
    std::vector<EmpiricalMeasure> snaps;
    {
        std::vector<std::vector<double>> pooled(101);
        for (std::size_t j = 0; j < 6000; ++j) {
            SimConfig c = base;
            c.N = 8;
            c.seed = derive_seed(999, 1, j);
            const auto rec = simulate_interacting(c, model, init);
            for (std::size_t k = 0; k <= 100; ++k) pooled[k].push_back(rec.values[k][0]);
        }
        for (auto& v : pooled) snaps.emplace_back(std::move(v));
    }
    const MeasureFlow same(0.01, std::move(snaps));
    const std::vector<std::size_t> eight{8};
    const auto floor_rows = marginal_tv_study(base, model, init, same, eight, 6000, std::vector<double>{1.0});
    CHECK(floor_rows[0].tv < rows[1].tv);
    CHECK(floor_rows[0].tv < 0.08);
}

TEST_CASE("stability under shifted initial data") {
    SimConfig c = sim(200, 6);
    const auto init = InitialLaw::gaussian(1.0, 0.5);
    const std::vector<double> deltas{0.0, 1e-3, 1e-2, 1e-1};

    const auto lin = stability_perturbation_test(c, linear_model(-1.0, 0.5, 0.2), init, deltas);
    CHECK(lin[0].ratio == 0.0);
    for (double g : lin[0].mean_gap) CHECK(g == 0.0);
    for (std::size_t i = 1; i < lin.size(); ++i) CHECK(lin[i].ratio == doctest::Approx(1.0).epsilon(1e-9));

    // growing linear system: the shift is amplified by (1 + (a + c) dt)^steps
    const auto grow = stability_perturbation_test(c, linear_model(0.5, 0.5, 0.2), init, deltas);
    for (std::size_t i = 1; i < grow.size(); ++i)
        CHECK(grow[i].ratio == doctest::Approx(std::pow(1.01, 100)).epsilon(1e-9));

    // pilot ratio 1.0, attained at t = 0; pinned at twice that
    const auto sq = stability_perturbation_test(c, sqrt_model(1.0, 1.0, 0.5, 0.3), init, deltas);
    for (std::size_t i = 1; i < sq.size(); ++i) CHECK(sq[i].ratio <= 2.0 * 1.0);

    std::ostringstream os;
    write_stability_csv(os, lin);
    CHECK(os.str().rfind("delta,ratio\n0,0\n", 0) == 0);
}
