#include "spinloc/glauber.hpp"

#include <cmath>

namespace spinloc {

double glauber_plus_probability(const IsingModel& model, const SpinConfig& config, int i) {
    const double m = local_field(model, config, i);
    return 1.0 / (1.0 + std::exp(-2.0 * m));
}

namespace {

template <typename FieldFn>
void heat_bath_update(const IsingModel& model, ChainState& state, FieldFn field) {
    const int n = model.n();
    const int i = uniform_index(state.rng, n);
    const double m = field(i);
    const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * m));
    const std::int8_t snew = uniform01(state.rng) < p_plus ? 1 : -1;
    if (snew != state.config.spin(i)) state.config.flip(model, i);
    ++state.step_count;
}

} // namespace

void glauber_step(const IsingModel& model, ChainState& state) {
    if (model.magnetization())
        throw ConstraintViolation("Glauber dynamics refuses magnetization-constrained models");
    heat_bath_update(model, state, [&](int i) { return local_field(model, state.config, i); });
}

void glauber_step_nocache(const IsingModel& model, ChainState& state) {
    if (model.magnetization())
        throw ConstraintViolation("Glauber dynamics refuses magnetization-constrained models");
    heat_bath_update(model, state, [&](int i) {
        const double b = state.config.fresh_field(model, i);
        const double gamma_part = model.gamma() / model.n() *
                                  static_cast<double>(state.config.spin_sum() -
                                                      state.config.spin(i));
        return b - gamma_part;
    });
}

long long glauber_schedule(int n, double eps) {
    return static_cast<long long>(std::ceil(n * std::log(n / eps)));
}

void run_chain(const IsingModel& model, ChainState& state, long long steps,
               long long thin, const std::function<void(const SpinConfig&)>& sink) {
    if (steps < 0) throw std::invalid_argument("steps must be >= 0");
    if (thin < 1) thin = 1;
    sink(state.config);
    for (long long s = 1; s <= steps; ++s) {
        glauber_step(model, state);
        if (s % thin == 0) sink(state.config);
    }
}

} // namespace spinloc
