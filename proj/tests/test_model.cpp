#include "mvsde/error.hpp"
#include "mvsde/model.hpp"

#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

using namespace mvsde;

namespace {

// RK4 for a scalar autonomous ODE.
template <class F>
double rk4(F f, double y, double T, int steps) {
    const double h = T / steps;
    for (int i = 0; i < steps; ++i) {
        const double k1 = f(y);
        const double k2 = f(y + 0.5 * h * k1);
        const double k3 = f(y + 0.5 * h * k2);
        const double k4 = f(y + h * k3);
        y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return y;
}

// m'(t) = beta m(t - d), m = m0 on [-d, 0], by Heun steps on a fine grid.
double delay_ode(double beta, double d, double m0, double T) {
    const double h = 1e-4;
    const auto lag = static_cast<std::size_t>(std::llround(d / h));
    const auto n = static_cast<std::size_t>(std::llround(T / h));
    std::vector<double> m(lag + n + 1, m0);
    for (std::size_t k = lag; k < lag + n; ++k) m[k + 1] = m[k] + 0.5 * h * beta * (m[k - lag] + m[k + 1 - lag]);
    return m.back();
}

}  // namespace

TEST_CASE("validation rejects out-of-range constants") {
    ModelSpec m = linear_model(-1.0, 0.5, 0.2);
    CHECK_NOTHROW(validate(m));
    m.constants.alpha = 0.3;
    try {
        validate(m);
        FAIL("expected an error");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("[1/2, 1]") != std::string::npos);
    }
    m = linear_model(-1.0, 0.5, 0.2);
    m.constants.K_B = -1.0;
    CHECK_THROWS_AS(validate(m), DomainError);
    m = linear_model(-1.0, 0.5, 0.2);
    m.sigma = nullptr;
    CHECK_THROWS_AS(validate(m), DomainError);
}

TEST_CASE("coefficient evaluation reports non-finite values with their location") {
    ModelSpec m = zero_model();
    m.sigma = [](double, double x) { return std::sqrt(x); };
    CHECK(eval_sigma(m, 0.0, 4.0) == 2.0);
    try {
        (void)eval_sigma(m, 0.5, -1.0);
        FAIL("expected an error");
    } catch (const ModelError& e) {
        const std::string what = e.what();
        CHECK(what.find("x=-1") != std::string::npos);
        CHECK(what.find("t=0.5") != std::string::npos);
    }
}

TEST_CASE("zoo coefficients") {
    const EmpiricalMeasure mu({1.0, 3.0});
    const auto lin = linear_model(-1.0, 0.5, 0.2);
    CHECK(lin.drift(0.0, 2.0, mu) == doctest::Approx(-2.0 + 1.0));
    CHECK(lin.sigma(0.0, 5.0) == 0.2);
    CHECK(lin.constants.K_b == 0.5);
    CHECK(lin.constants.K_sigma == 0.2);
    CHECK(lin.sigma_sq_lower_bound.value() == doctest::Approx(0.04));

    const auto sq = sqrt_model(1.0, 1.0, 0.5, 0.3);
    CHECK(sq.sigma(0.0, -4.0) == doctest::Approx(0.6));
    CHECK(sq.constants.alpha == 0.5);
    CHECK_FALSE(sq.sigma_sq_lower_bound.has_value());

    const auto del = delay_model(2.0, 0.0, DelayMeasure::dirac(-0.5));
    const Segment seg(0.5, 0.25, {7.0, 1.0, 2.0});
    CHECK(del.path_drift(0.0, seg, mu) == 14.0);
    CHECK(del.constants.K_B == 2.0);
}

TEST_CASE("mean oracles solve their mean equations") {
    const auto lin = linear_model(-1.0, 0.5, 0.2);
    CHECK(lin.mean_oracle(1.0, 1.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
    CHECK(lin.mean_oracle(2.0, 3.0) ==
          doctest::Approx(rk4([](double m) { return -0.5 * m; }, 3.0, 2.0, 2000)).epsilon(1e-10));

    for (const double c : {0.5, 1.0, 2.0}) {
        const auto sq = sqrt_model(1.0, 1.5, c, 0.3);
        const double ode = rk4([c](double m) { return 1.5 + (c - 1.0) * m; }, 0.7, 1.3, 4000);
        CHECK(sq.mean_oracle(1.3, 0.7) == doctest::Approx(ode).epsilon(1e-10));
    }

    for (const double beta : {1.0, -0.7, 2.0}) {
        const auto del = delay_model(beta, 0.0, DelayMeasure::dirac(-1.0));
        for (const double T : {0.5, 1.0, 2.3, 3.7})
            CHECK(del.mean_oracle(T, 1.5) == doctest::Approx(delay_ode(beta, 1.0, 1.5, T)).epsilon(1e-6));
    }
    const auto unit = delay_model(1.0, 0.0, DelayMeasure::dirac(-1.0));
    CHECK(unit.mean_oracle(0.4, 1.0) == doctest::Approx(1.4));
}

TEST_CASE("assumption audit passes the zoo at declared constants") {
    AuditSpec spec;
    spec.sample_count = 3000;
    spec.t_grid = {0.0, 0.5, 1.0};
    for (const auto& m : {zero_model(), linear_model(-1.0, 0.5, 0.2), sqrt_model(1.0, 1.0, 0.5, 0.3),
                          delay_model(1.0, 0.2, DelayMeasure::dirac(-1.0))}) {
        const auto rep = check_assumptions(m, spec);
        CHECK_MESSAGE(rep.pass(), m.name);
        CHECK(rep.note.find("not a proof") != std::string::npos);
    }
}

TEST_CASE("linear drift constant is tight") {
    AuditSpec spec;
    spec.sample_count = 3000;
    const auto rep = check_assumptions(linear_model(-1.0, 0.5, 0.2), spec);
    CHECK(rep.drift.estimated <= 0.5 + 1e-12);
    CHECK(rep.drift.estimated > 0.45);
    // the textbook bound max(a, 0) + |c| is valid but looser
    auto loose = linear_model(-1.0, 0.5, 0.2);
    loose.constants.K_b = 0.5;
    CHECK(check_assumptions(loose, spec).pass());
}

TEST_CASE("audit finds violations of understated constants") {
    AuditSpec spec;
    spec.sample_count = 3000;

    auto sq = sqrt_model(1.0, 1.0, 0.5, 0.3);
    sq.constants.alpha = 1.0;
    const auto rep = check_assumptions(sq, spec);
    CHECK_FALSE(rep.diffusion.pass);
    REQUIRE(rep.diffusion.has_witness);
    CHECK(std::abs(rep.diffusion.witness_x - rep.diffusion.witness_y) < 1e-3);
    CHECK(std::min(std::abs(rep.diffusion.witness_x), std::abs(rep.diffusion.witness_y)) < 1e-3);
    CHECK(rep.alpha_hat == doctest::Approx(0.5).epsilon(0.02));
    CHECK(rep.note.find("violation") != std::string::npos);

    auto lin = linear_model(-1.0, 0.5, 0.2);
    lin.constants.K_b = 0.25;
    CHECK_FALSE(check_assumptions(lin, spec).drift.pass);

    auto del = delay_model(2.0, 0.2, DelayMeasure::dirac(-1.0));
    del.constants.K_B = 1.0;
    CHECK_FALSE(check_assumptions(del, spec).path_drift.pass);
}

TEST_CASE("audit is deterministic in its seed") {
    AuditSpec spec;
    spec.sample_count = 500;
    const auto a = check_assumptions(sqrt_model(1.0, 1.0, 0.5, 0.3), spec);
    const auto b = check_assumptions(sqrt_model(1.0, 1.0, 0.5, 0.3), spec);
    CHECK(a.diffusion.estimated == b.diffusion.estimated);
    CHECK(a.alpha_hat == b.alpha_hat);
}
