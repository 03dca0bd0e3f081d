#pragma once

// Yamada-Watanabe regularization of |x| and mollification of a Hoelder
// diffusion coefficient. Both are verification artifacts: the simulator never
// needs V_eps, and the mollified diffusion only backs simulate_mollified.

#include "mvsde/model.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace mvsde {

// psi_eps is a continuous density on [eps e^{-1/eps}, eps] with
// psi_eps(x) <= 2 eps / x, built as c * min(ramp_lo, eps/x, ramp_hi): the
// hyperbola eps/x with linear ramps to zero on the outer 5% of the
// log-support at each end. V_eps(x) = int_0^|x| int_0^y psi_eps(z) dz dy.
//
// Every piece is a line or the hyperbola, so V_eps' and V_eps are evaluated
// from exact antiderivatives anchored at cached values at the piece
// boundaries.
class YamadaFunction {
public:
    explicit YamadaFunction(double epsilon);

    [[nodiscard]] double epsilon() const noexcept { return eps_; }
    [[nodiscard]] double support_lo() const noexcept { return lo_; }
    [[nodiscard]] double support_hi() const noexcept { return eps_; }
    // The constant c normalizing the ramped hyperbola to unit mass.
    [[nodiscard]] double normalization() const noexcept { return c_; }

    [[nodiscard]] double psi(double x) const;
    [[nodiscard]] double V(double x) const;
    [[nodiscard]] double V_prime(double x) const;
    [[nodiscard]] double V_second(double x) const;

private:
    struct Piece {
        double lo;
        double hi;
        bool hyperbola;
        double p;  // line: psi / c = p + q x
        double q;
        double vp_lo;  // V' at lo
        double v_lo;   // V at lo
    };

    [[nodiscard]] const Piece* find(double x) const;
    [[nodiscard]] double unnormalized(const Piece& pc, double x) const;

    double eps_;
    double lo_;
    double c_ = 1.0;
    double vp_end_ = 1.0;
    double v_end_ = 0.0;
    std::vector<Piece> pieces_;
};

// Throws DomainError unless 0.02 <= eps < 1.
[[nodiscard]] YamadaFunction make_yamada(double epsilon);

struct YamadaAuditRow {
    double x;
    double V;
    double V_prime;
    double V_second;
    double bound;  // 2 eps / |x| on the support, 0 off it
    bool r1;       // |x| - eps <= V <= |x| and 0 <= sgn(x) V' <= 1
    bool r2;       // V'' <= bound on the support, V'' = 0 off it
};

struct YamadaAudit {
    double epsilon = 0.0;
    std::vector<YamadaAuditRow> rows;
    std::size_t r1_violations = 0;
    std::size_t r2_violations = 0;

    [[nodiscard]] bool pass() const noexcept { return r1_violations == 0 && r2_violations == 0; }
};

// Symmetric grid of `points` abscissae: half log-spaced through the support
// out to 2 eps, half uniform on [-2 eps, 2 eps].
[[nodiscard]] std::vector<double> yamada_grid(const YamadaFunction& v, std::size_t points);

[[nodiscard]] YamadaAudit audit_yamada(const YamadaFunction& v, std::span<const double> xs, double tol = 1e-12);

// CSV `x,V,V_prime,V_second,bound,r1,r2`.
void write_yamada_csv(std::ostream& os, const YamadaAudit& audit);

// Normalized bump rho(x) = C exp(-1 / (1 - x^2)) on (-1, 1).
[[nodiscard]] double bump(double x);
// int |x|^alpha rho(x) dx.
[[nodiscard]] double bump_moment(double alpha);

// sup |sigma^n - sigma| <= K_sigma n^{-alpha} int |x|^alpha rho(x) dx.
[[nodiscard]] double mollifier_error_bound(double K_sigma, double alpha, int n);

// sigma^n(t, x) = int sigma(t, x - y) n rho(n y) dy, evaluated by adaptive
// Gauss-Kronrod quadrature over the bump support.
class MollifiedSigma {
public:
    MollifiedSigma(DiffusionFn sigma, int n);

    [[nodiscard]] int n() const noexcept { return n_; }
    [[nodiscard]] double operator()(double t, double x) const;

private:
    DiffusionFn sigma_;
    int n_;
};

[[nodiscard]] MollifiedSigma mollify_sigma(const ModelSpec& model, int n);

}  // namespace mvsde
