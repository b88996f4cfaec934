#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace spinloc {

struct NegativeTime : std::domain_error {
    using std::domain_error::domain_error;
};
struct StepTooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BeyondBlowup : std::domain_error {
    using std::domain_error::domain_error;
};
struct EtaZero : std::domain_error {
    using std::domain_error::domain_error;
};

// Tabulated solution of q(z) = source(eta z) + int_0^z q(y)^2 dy on a uniform
// grid, together with the running integral of q (for the tensorization
// constant) and the divergence point when the solution blows up before z_max.
struct QCurve {
    double eta = 0.0;
    double step = 0.0;
    std::vector<double> z;
    std::vector<double> values;
    std::vector<double> integral; // int_0^{z_i} q dy
    std::optional<double> blowup_z;
};

// Gauss-Hermite nodes/weights for E_{g ~ N(0,1)} f(g) = sum w_i f(x_i),
// computed by the Golub-Welsch tridiagonal eigendecomposition.
struct GaussHermite {
    explicit GaussHermite(int order);
    std::vector<double> nodes;   // already scaled to the N(0,1) measure
    std::vector<double> weights; // sum to 1
};

// r(t) = E_{x ~ U{+-1}, g ~ N(0,1)} [1 - tanh^2(t x + sqrt(t) g)], in (0, 1].
// Both x values are evaluated (they agree by symmetry) and averaged.
double r_ising(double t, int quadrature_order = 64);

// Marches q' = eta d/dz[source(eta z)] + q^2 by RK4 from q(0) = source(0).
// Declares blow-up at the first grid point where q exceeds `cap`, then
// refines the crossing by bisection to step * 1e-3 and reports
// blowup_z = crossing + 1/cap (first-order distance to the true pole).
QCurve solve_q_eta(double eta, const std::function<double(double)>& r, double z_max,
                   double step = 1e-4, double cap = 1e6);
QCurve solve_q_eta(double eta, double z_max, double step = 1e-4, double cap = 1e6);

// Same march with source 1/(eta z + 1/rho(eta z)); q(0) = rho(0).
QCurve solve_q_semilogconcave(double eta, const std::function<double(double)>& rho,
                              double z_max, double step = 1e-4, double cap = 1e6);

// Roots of eta L^2 - eta L - 1 = 0; lambda1 > 0 > lambda2.  eta > 0.
std::pair<double, double> q_lambda_roots(double eta);

// Blow-up point of Q_eta.
double s_of_eta(double eta);

// rho * Q_eta(rho z); requires rho z < s(eta).
double q_closed_form(double eta, double rho, double z);

// exp(int_0^z q), linear interpolation between grid points.
double ate_constant(const QCurve& curve, double z);

} // namespace spinloc
