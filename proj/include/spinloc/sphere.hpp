#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "spinloc/model.hpp"
#include "spinloc/rng.hpp"

namespace spinloc {

struct BadDimension : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct InvalidPotential : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// n spins on the unit sphere S^{N-1} with pairwise couplings J_ij <x_i, x_j>
// and per-site fields h_i in R^N.
struct ONModel {
    CouplingMatrix coupling;
    std::vector<Eigen::VectorXd> h;
    int spin_dim = 1;

    ONModel(int n, int N, std::vector<Triplet> triplets, std::vector<Eigen::VectorXd> fields);
    int n() const { return coupling.n(); }
};

// Unit spins with cached fields w_i = h_i + sum_j J_ij x_j.
class ONConfig {
  public:
    ONConfig(const ONModel& model, std::vector<Eigen::VectorXd> spins);
    static ONConfig aligned(const ONModel& model);              // all spins at e_1
    static ONConfig random(const ONModel& model, Rng& rng);     // uniform spins

    const Eigen::VectorXd& spin(int i) const { return spins_[i]; }
    const Eigen::VectorXd& field(int i) const { return fields_[i]; }
    int n() const { return static_cast<int>(spins_.size()); }

    void set_spin(const ONModel& model, int i, const Eigen::VectorXd& value);
    double max_cache_error(const ONModel& model) const;
    double max_norm_error() const;

  private:
    std::vector<Eigen::VectorXd> spins_;
    std::vector<Eigen::VectorXd> fields_;
};

// Potential on [a, b] with V(0) = V'(0) = 0, V'' >= alpha everywhere and
// V'' <= beta on the inner interval where V < V_min + 1/2.
struct Potential1D {
    std::function<double(double)> V;
    double a;
    double b;
    double alpha; // strong convexity lower bound, > 0
    double beta;  // curvature upper bound near the minimum
};

// First point of the doubling grid 2^i / sqrt(kappa), i = 0, 1, ..., at which
// V reaches 1/2, searching toward `limit` (same sign); returns `limit` when
// the grid passes it first.
double first_doubling_point(const std::function<double(double)>& V, double kappa,
                            double limit);

// Draws from the density proportional to exp(-V) by one flat-top
// Gaussian-tail envelope round repeated until acceptance; the number of
// rounds is capped so the output is within eps total variation of the target
// even under the conservative Omega(1) acceptance bound.
double envelope_reject(const Potential1D& pot, double eps, Rng& rng);

// Marginal of the first coordinate of a tilted uniform sphere vector:
// density on [-1, 1] proportional to exp(b y) (1 - y^2)^{(N-3)/2}.
double sample_sphere_marginal(int N, double b, double eps, Rng& rng);

// Uniform point on S^{N-1}.
Eigen::VectorXd uniform_sphere(int N, Rng& rng);

// Sample from density proportional to exp(<w, x>) on S^{N-1}: marginal along
// w/|w|, uniform orthogonal completion, Householder map back.
Eigen::VectorXd sample_conditional_spin(const Eigen::VectorXd& w, double eps, Rng& rng);

// One heat-bath update at a uniform site; eps is the per-step TV budget.
void on_glauber_step(const ONModel& model, ONConfig& config, double eps, Rng& rng);

// Per-step budget eps_total / T with T = n log(n / eps_total).
double on_step_epsilon(int n, double eps_total);

// Fraction of accepted proposals over single envelope rounds (test hook).
double envelope_acceptance_estimate(const Potential1D& pot, int rounds, Rng& rng);

} // namespace spinloc
