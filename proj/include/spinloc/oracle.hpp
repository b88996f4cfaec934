#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "spinloc/model.hpp"

namespace spinloc {

struct TooLarge : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct LengthMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Full probability vector over {-1,+1}^n.  Configuration indexing: bit b of
// the index is the spin of site b, set bit = +1.
struct ExactDistribution {
    int n = 0;
    std::vector<double> p;           // length 2^n, zero off-slice when constrained
    std::vector<double> log_weights; // unnormalized log masses (-inf off-slice)
};

// Exhaustive evaluation with log-sum-exp normalization.  n <= 20, or 22 with
// allow_large.
ExactDistribution exact_distribution(const IsingModel& model, bool allow_large = false);

// Cov = E[x (x)^T] - (E x)(E x)^T over +-1 spin vectors.
Eigen::MatrixXd exact_covariance(const ExactDistribution& dist);
Eigen::VectorXd exact_mean(const ExactDistribution& dist);

enum class ChainKind { Glauber, Polarized, FixedMag };

// Transition matrix of a chain at desk scale (n <= 12).  `states` lists the
// configuration indices forming the state space: all of 2^n, or the slice
// when the model is magnetization-constrained (FixedMag).
struct ExactKernel {
    std::vector<std::uint32_t> states;
    Eigen::MatrixXd P;
};

ExactKernel exact_kernel(ChainKind kind, const IsingModel& model);

// The polarized walk assembled literally from its definition: the down
// operator composed with the up operator, with the target measure evaluated
// by exhaustive enumeration.  Cross-check for exact_kernel(Polarized, ...).
Eigen::MatrixXd polarized_kernel_from_definition(const IsingModel& model);

// Restriction of an exact distribution to a state list, renormalized.
std::vector<double> restrict_distribution(const ExactDistribution& dist,
                                          const std::vector<std::uint32_t>& states);

double tv_distance(const std::vector<double>& p, const std::vector<double>& q);

// ||nu P - nu||_1 for the kernel's state space.
double stationarity_residual(const ExactKernel& kernel, const IsingModel& model);

// Weighted family on k-subsets of [m]: bitmask -> positive weight.
struct SubsetDistribution {
    int m = 0;
    std::vector<std::uint32_t> subsets;
    std::vector<double> weights;
};

// Max-abs-entry residual of
//   Cov(nu0) = E_{a}[Cov(nu0 | a in S)] + (1/k) Cov(nu0) N0^{-1} Cov(nu0)
// where a is drawn with probability marginal(a)/k and N0 = diag(marginals).
// Elements of zero marginal are excluded from pinning and inverted as zero.
double verify_trickledown_pinning(const SubsetDistribution& dist);

// Ising model on n sites encoded as n-subsets of a 2n ground set: element i
// for x_i = +1, element n+i for x_i = -1.
SubsetDistribution homogenize_ising(const IsingModel& model);

std::vector<double> empirical_distribution(const std::vector<std::uint32_t>& samples, int n);
Eigen::MatrixXd empirical_covariance(const std::vector<std::vector<std::int8_t>>& samples);

} // namespace spinloc
