#pragma once

#include <vector>

#include "spinloc/model.hpp"
#include "spinloc/rng.hpp"
#include "spinloc/wtree.hpp"

namespace spinloc {

// Chain state for the polarized walk and the fixed-magnetization down-up
// walk.  The tree holds every minus site keyed by index; the stored weight
// for site j is exp(2 b_j(x) - scale) where b_j is the off-diagonal local
// field including the confinement contribution.  Two log offsets keep the
// stored values in range: `log_scale_` (rebuild offset) and the spin-sum
// dependent confinement term common to all minus sites, tracked separately so
// a flip never touches more than the flipped site's coupling row.
class PolarizedState {
  public:
    PolarizedState(const IsingModel& model, SpinConfig start);

    const SpinConfig& config() const { return config_; }
    const std::vector<int>& plus_set() const { return plus_; }
    const WeightedIndexTree& tree() const { return tree_; }
    std::size_t minus_count() const { return tree_.size(); }

    // log nu(x) up to the model's normalizing constant:
    // (1/2)<x, J_offdiag x> + <h, x> - (gamma/2n)(sum x)^2.
    double log_weight() const { return log_weight_; }
    double fresh_log_weight(const IsingModel& model) const;
    void reanchor(const IsingModel& model) { log_weight_ = fresh_log_weight(model); }

    // Off-diagonal local field with confinement at a minus site, recomputed
    // from the caches (test hook).
    double minus_site_field(const IsingModel& model, int j) const;

    // log of L = sum over minus sites of exp(2 b_j).
    double log_total_weight() const;

    void flip_to_minus(const IsingModel& model, int i); // i currently +1
    void flip_to_plus(const IsingModel& model, int j);  // j currently -1

    long long step_count = 0;

  private:
    void set_tree_weight(int j);
    void rebuild(const IsingModel& model);
    double stored_exponent(int j) const; // 2 * (J,h part of b_j) - log_scale_

    const IsingModel* model_ = nullptr; // referenced, not owned
    SpinConfig config_;
    std::vector<int> plus_;     // members of x_+
    std::vector<int> plus_pos_; // position of site in plus_, -1 if minus
    WeightedIndexTree tree_;
    double log_scale_ = 0.0;
    double log_weight_ = 0.0;
};

// One step of D^pol U^pol: with probability |x_+|/n a uniform plus spin is
// dropped; the up move then either stays at chi_T or adds back one site with
// probability proportional to exp(2 b_j(chi_T)).
void polarized_step(const IsingModel& model, PolarizedState& state, Rng& rng);

// Down-up walk on the slice |x_+| = m: remove a uniform plus spin, then
// resample the vacancy from the conditional law.  Requires the model's
// magnetization to be set; a state on the empty or full slice is a fixed
// point and is returned unchanged.
void fixed_mag_step(const IsingModel& model, PolarizedState& state, Rng& rng);

// The exact law of the up step from T = x_+(config): probability of staying
// and of adding each minus site, computed through the same tree machinery the
// sampler uses.  Kernel-assembly hook.
struct UpStepLaw {
    double stay;
    std::vector<std::pair<int, double>> add; // (site, probability)
};
UpStepLaw up_step_distribution(const IsingModel& model, const SpinConfig& t_config);

// Conditional law of the fixed-magnetization up step (no stay option).
std::vector<std::pair<int, double>> slice_up_distribution(const IsingModel& model,
                                                          const SpinConfig& t_config);

} // namespace spinloc
