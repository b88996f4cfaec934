#pragma once

#include <functional>

#include "spinloc/model.hpp"
#include "spinloc/rng.hpp"

namespace spinloc {

struct ChainState {
    SpinConfig config;
    long long step_count = 0;
    Rng rng;

    ChainState(SpinConfig c, std::uint64_t seed)
        : config(std::move(c)), rng(make_rng(seed)) {}
};

// P(x_i = +1 | rest) for the heat-bath update, sigma(2 m_i) with m_i the
// confined local field.
double glauber_plus_probability(const IsingModel& model, const SpinConfig& config, int i);

// One heat-bath update at a uniformly random site.  Refuses
// magnetization-constrained models (the chain is not ergodic on a slice).
void glauber_step(const IsingModel& model, ChainState& state);

// Variant recomputing fields from scratch; consumes the identical random
// stream, used to test the incremental cache.
void glauber_step_nocache(const IsingModel& model, ChainState& state);

// Standard schedule T = ceil(n log(n / eps)).
long long glauber_schedule(int n, double eps);

// Runs `steps` updates, invoking `sink` on the initial configuration and then
// after every thin-th step (thin >= 1).
void run_chain(const IsingModel& model, ChainState& state, long long steps,
               long long thin, const std::function<void(const SpinConfig&)>& sink);

} // namespace spinloc
