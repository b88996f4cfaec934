#include "spinloc/polarized.hpp"

#include <cmath>

namespace spinloc {

namespace {
constexpr double kRebuildExponent = 575.0; // ~1e250 dynamic range
constexpr double kWeightFloor = 1e-300;
} // namespace

PolarizedState::PolarizedState(const IsingModel& model, SpinConfig start)
    : model_(&model), config_(std::move(start)), plus_pos_(model.n(), -1) {
    for (int i = 0; i < model.n(); ++i) {
        if (config_.spin(i) > 0) {
            plus_pos_[i] = static_cast<int>(plus_.size());
            plus_.push_back(i);
        }
    }
    rebuild(model);
    log_weight_ = fresh_log_weight(model);
}

double PolarizedState::fresh_log_weight(const IsingModel& model) const {
    double e = 0.0;
    for (const auto& t : model.coupling().triplets())
        e += t.value * config_.spin(t.i) * config_.spin(t.j);
    for (int i = 0; i < model.n(); ++i) e += model.field()[i] * config_.spin(i);
    const double s = static_cast<double>(config_.spin_sum());
    e -= model.gamma() / (2.0 * model.n()) * s * s;
    return e;
}

double PolarizedState::minus_site_field(const IsingModel& model, int j) const {
    return config_.cached_field(j) -
           model.gamma() / model.n() * static_cast<double>(config_.spin_sum() + 1);
}

double PolarizedState::stored_exponent(int j) const {
    return 2.0 * config_.cached_field(j) - log_scale_;
}

void PolarizedState::rebuild(const IsingModel& model) {
    (void)model;
    tree_.clear();
    double top = 0.0;
    bool any = false;
    for (int j = 0; j < config_.n(); ++j) {
        if (config_.spin(j) < 0) {
            const double e = 2.0 * config_.cached_field(j);
            top = any ? std::max(top, e) : e;
            any = true;
        }
    }
    log_scale_ = any ? top : 0.0;
    for (int j = 0; j < config_.n(); ++j)
        if (config_.spin(j) < 0)
            tree_.update(j, std::max(std::exp(stored_exponent(j)), kWeightFloor));
}

void PolarizedState::set_tree_weight(int j) {
    const double e = stored_exponent(j);
    if (std::abs(e) > kRebuildExponent) {
        rebuild(*model_);
        return;
    }
    tree_.update(j, std::max(std::exp(e), kWeightFloor));
}

double PolarizedState::log_total_weight() const {
    const double common = -2.0 * model_->gamma() / model_->n() *
                          static_cast<double>(config_.spin_sum() + 1);
    return log_scale_ + common + std::log(tree_.sum());
}

void PolarizedState::flip_to_minus(const IsingModel& model, int i) {
    const double b =
        config_.cached_field(i) -
        model.gamma() / model.n() * static_cast<double>(config_.spin_sum() - 1);
    log_weight_ -= 2.0 * b;
    config_.flip(model, i);
    const int pos = plus_pos_[i];
    const int last = plus_.back();
    plus_[pos] = last;
    plus_pos_[last] = pos;
    plus_.pop_back();
    plus_pos_[i] = -1;
    set_tree_weight(i);
    for (const auto& e : model.coupling().row(i))
        if (config_.spin(e.j) < 0) set_tree_weight(e.j);
}

void PolarizedState::flip_to_plus(const IsingModel& model, int j) {
    const double b =
        config_.cached_field(j) -
        model.gamma() / model.n() * static_cast<double>(config_.spin_sum() + 1);
    log_weight_ += 2.0 * b;
    tree_.erase(j);
    config_.flip(model, j);
    plus_pos_[j] = static_cast<int>(plus_.size());
    plus_.push_back(j);
    for (const auto& e : model.coupling().row(j))
        if (config_.spin(e.j) < 0) set_tree_weight(e.j);
}

namespace {

double stay_probability(std::size_t n_minus, double log_total) {
    // (n - |T|) / (L + n - |T|) computed through logs
    const double t = log_total - std::log(static_cast<double>(n_minus));
    if (t > 700.0) return 0.0;
    if (t < -700.0) return 1.0;
    return 1.0 / (1.0 + std::exp(t));
}

} // namespace

void polarized_step(const IsingModel& model, PolarizedState& state, Rng& rng) {
    const int n = model.n();
    const double down = uniform01(rng);
    if (down * n < static_cast<double>(state.plus_set().size())) {
        const int idx = uniform_index(rng, static_cast<int>(state.plus_set().size()));
        state.flip_to_minus(model, state.plus_set()[idx]);
    }
    // up step from T = x_+
    const std::size_t n_minus = state.minus_count();
    const double p_stay = stay_probability(n_minus, state.log_total_weight());
    if (uniform01(rng) >= p_stay) {
        const double pos = uniform01(rng) * state.tree().sum();
        state.flip_to_plus(model, state.tree().select(pos));
    }
    ++state.step_count;
}

void fixed_mag_step(const IsingModel& model, PolarizedState& state, Rng& rng) {
    if (!model.magnetization())
        throw ConstraintViolation("fixed-magnetization walk needs a slice constraint");
    const std::size_t m = state.plus_set().size();
    if (m == 0) {
        ++state.step_count;
        return; // empty slice is a fixed point
    }
    const int i = state.plus_set()[uniform_index(rng, static_cast<int>(m))];
    state.flip_to_minus(model, i);
    const double pos = uniform01(rng) * state.tree().sum();
    state.flip_to_plus(model, state.tree().select(pos));
    ++state.step_count;
}

UpStepLaw up_step_distribution(const IsingModel& model, const SpinConfig& t_config) {
    PolarizedState state(model, t_config);
    UpStepLaw law;
    const std::size_t n_minus = state.minus_count();
    if (n_minus == 0) {
        law.stay = 1.0;
        return law;
    }
    law.stay = stay_probability(n_minus, state.log_total_weight());
    const double total = state.tree().sum();
    state.tree().for_each([&](int j, double w) {
        law.add.emplace_back(j, (1.0 - law.stay) * (w / total));
    });
    return law;
}

std::vector<std::pair<int, double>> slice_up_distribution(const IsingModel& model,
                                                          const SpinConfig& t_config) {
    PolarizedState state(model, t_config);
    std::vector<std::pair<int, double>> law;
    const double total = state.tree().sum();
    state.tree().for_each([&](int j, double w) { law.emplace_back(j, w / total); });
    return law;
}

} // namespace spinloc
