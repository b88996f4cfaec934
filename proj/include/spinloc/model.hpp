#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spinloc/rng.hpp"

namespace spinloc {

struct NonSymmetric : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct IndexOutOfRange : std::out_of_range {
    using std::out_of_range::out_of_range;
};
struct ModelFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConstraintViolation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Triplet {
    int i, j;
    double value;
};

// Sparse symmetric zero-diagonal couplings, stored as (i, j, value) with
// i < j plus a CSR view of both directions for row scans.
class CouplingMatrix {
  public:
    CouplingMatrix() = default;
    CouplingMatrix(int n, std::vector<Triplet> triplets);

    struct Entry {
        int j;
        double v;
    };

    int n() const { return n_; }
    const std::vector<Triplet>& triplets() const { return triplets_; }
    std::span<const Entry> row(int i) const {
        return {entries_.data() + row_ptr_[i], entries_.data() + row_ptr_[i + 1]};
    }
    int max_row_nnz() const { return max_row_nnz_; }
    std::size_t nnz() const { return triplets_.size(); }

    Eigen::MatrixXd dense() const; // zero diagonal

    // sum_{j != i} M_ij x_j for x in {-1,+1}^n (or any reals)
    double row_dot(int i, std::span<const std::int8_t> x) const;
    double row_dot(int i, std::span<const double> x) const;

  private:
    int n_ = 0;
    std::vector<Triplet> triplets_;
    std::vector<int> row_ptr_;
    std::vector<Entry> entries_;
    int max_row_nnz_ = 0;
};

// Measure on {-1,+1}^n proportional to
//     exp( (1/2) <x, J x> + <h, x> - (gamma/2n) (sum_i x_i)^2 ),
// optionally restricted to the slice sum_i x_i = k.  J is the sparse
// off-diagonal part plus a uniform diagonal `diag` (the diagonal never
// affects the measure; it is kept for the spectral bookkeeping).
class IsingModel {
  public:
    IsingModel(int n, std::vector<Triplet> triplets, double diag, std::vector<double> h,
               double gamma, std::optional<int> magnetization = std::nullopt);

    int n() const { return coupling_.n(); }
    double diag() const { return diag_; }
    double gamma() const { return gamma_; }
    std::optional<int> magnetization() const { return magnetization_; }
    const std::vector<double>& field() const { return h_; }
    const CouplingMatrix& coupling() const { return coupling_; }

    IsingModel with_diag(double diag) const;
    IsingModel with_magnetization(std::optional<int> k) const;
    IsingModel truncated(int m) const; // first m sites, same gamma

    std::string to_json() const;
    static IsingModel from_json(const std::string& text);
    void save(const std::string& path) const;
    static IsingModel load(const std::string& path);

  private:
    CouplingMatrix coupling_;
    double diag_ = 0.0;
    std::vector<double> h_;
    double gamma_ = 0.0;
    std::optional<int> magnetization_;
};

// +-1 assignment with cached off-diagonal local fields
// b_i = sum_{j != i} J_ij x_j + h_i (confinement handled separately).
class SpinConfig {
  public:
    SpinConfig(const IsingModel& model, std::vector<std::int8_t> x);

    static SpinConfig all_minus(const IsingModel& model);
    static SpinConfig all_plus(const IsingModel& model);
    static SpinConfig random(const IsingModel& model, Rng& rng);
    // Site b is +1 iff bit b of `bits` is set.
    static SpinConfig from_bits(const IsingModel& model, std::uint32_t bits);

    int n() const { return static_cast<int>(x_.size()); }
    std::int8_t spin(int i) const { return x_[i]; }
    const std::vector<std::int8_t>& spins() const { return x_; }
    long long spin_sum() const { return spin_sum_; }
    double cached_field(int i) const { return local_field_[i]; }
    std::uint32_t bits() const;

    void flip(const IsingModel& model, int i);

    double fresh_field(const IsingModel& model, int i) const;
    double max_cache_error(const IsingModel& model) const;

  private:
    std::vector<std::int8_t> x_;
    std::vector<double> local_field_;
    long long spin_sum_ = 0;
};

// m_i = sum_{j != i} J_ij x_j + h_i - (gamma/n) (spin_sum - x_i).
double local_field(const IsingModel& model, const SpinConfig& config, int i);

struct SpectralSummary {
    double op_norm_J = 0.0;     // alpha + lambda_max of the zero-diagonal part
    double alpha = 0.0;         // uniform diagonal shift
    double eta = 0.0;           // alpha / op_norm_J, 0 when op_norm_J == 0
    double lambda_min_tilde = 0.0;
    double lambda_max_tilde = 0.0;
};

// alpha = max(0, -lambda_min(J_tilde)); requires symmetric zero-diagonal input.
SpectralSummary shift_to_psd(const Eigen::MatrixXd& j_tilde);
SpectralSummary shift_to_psd(const CouplingMatrix& j_tilde);

// Extreme eigenvalues (min, max) of a symmetric operator given by matvec,
// by shifted power iteration with optional deflation of known eigenvectors.
std::pair<double, double> power_extreme_eigenvalues(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& matvec, int n,
    const std::vector<Eigen::VectorXd>& deflate = {}, double tol = 1e-8,
    int max_iter = 10000);

// Ensembles.
IsingModel build_sk(int n, double beta, std::uint64_t seed);
IsingModel build_hopfield(int n, int m, double beta, std::uint64_t seed);
IsingModel build_hopfield_patterns(int n, double beta,
                                   const std::vector<std::vector<std::int8_t>>& patterns);

} // namespace spinloc
