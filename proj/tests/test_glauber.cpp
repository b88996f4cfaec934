#include "doctest.h"

#include <cmath>

#include "spinloc/glauber.hpp"
#include "spinloc/oracle.hpp"

using namespace spinloc;

namespace {

IsingModel random_model(int n, double coupling_scale, double field_scale, double gamma,
                        std::uint64_t seed) {
    Rng rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Triplet> trips;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) trips.push_back({i, j, coupling_scale * gauss(rng)});
    std::vector<double> h(n);
    for (auto& v : h) v = field_scale * gauss(rng);
    return IsingModel(n, std::move(trips), 0.0, std::move(h), gamma);
}

} // namespace

TEST_CASE("free spins resample fairly") {
    const IsingModel m(4, {}, 0.0, std::vector<double>(4, 0.0), 0.0);
    const SpinConfig c = SpinConfig::all_minus(m);
    for (int i = 0; i < 4; ++i)
        CHECK(glauber_plus_probability(m, c, i) == doctest::Approx(0.5));
}

TEST_CASE("two-spin conditional by hand") {
    const IsingModel m(2, {{0, 1, 0.5}}, 0.0, {0.0, 0.0}, 0.0);
    const SpinConfig c = SpinConfig::all_plus(m);
    const double expect = std::exp(0.5) / (std::exp(0.5) + std::exp(-0.5));
    CHECK(glauber_plus_probability(m, c, 0) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(expect == doctest::Approx(0.7311).epsilon(1e-4));
}

TEST_CASE("kernel is stationary and reversible at desk scale") {
    for (std::uint64_t seed : {3ull, 4ull}) {
        const IsingModel m = random_model(6, 0.4, 0.4, seed == 3 ? 0.0 : 1.5, seed);
        const ExactKernel kernel = exact_kernel(ChainKind::Glauber, m);
        CHECK((kernel.P.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
        CHECK(stationarity_residual(kernel, m) < 1e-10);

        // detailed balance on single-flip pairs
        const auto dist = exact_distribution(m);
        for (std::uint32_t x = 0; x < 64; ++x)
            for (int i = 0; i < 6; ++i) {
                const std::uint32_t y = x ^ (1u << i);
                CHECK(std::abs(dist.p[x] * kernel.P(x, y) - dist.p[y] * kernel.P(y, x)) <
                      1e-10);
            }
    }
}

TEST_CASE("long run matches the exact distribution on 6 sites") {
    const IsingModel m = random_model(6, 0.3, 0.3, 0.0, 9);
    ChainState state(SpinConfig::all_minus(m), 1234);
    std::vector<std::uint32_t> visits;
    for (int s = 0; s < 1000000; ++s) {
        glauber_step(m, state);
        if (s >= 10000) visits.push_back(state.config.bits());
    }
    const auto emp = empirical_distribution(visits, 6);
    const auto exact = exact_distribution(m);
    CHECK(tv_distance(emp, exact.p) < 0.02);
}

TEST_CASE("run_chain emits the initial configuration and is deterministic") {
    const IsingModel m = random_model(8, 0.3, 0.2, 0.0, 10);
    auto run = [&](std::uint64_t seed) {
        ChainState state(SpinConfig::all_minus(m), seed);
        std::vector<std::uint32_t> seen;
        run_chain(m, state, 500, 10,
                  [&](const SpinConfig& c) { seen.push_back(c.bits()); });
        return seen;
    };
    const auto a = run(77);
    const auto b = run(77);
    CHECK(a == b);
    CHECK(a.size() == 51); // initial + 50 thinned

    ChainState still(SpinConfig::all_minus(m), 1);
    int emitted = 0;
    run_chain(m, still, 0, 1, [&](const SpinConfig&) { ++emitted; });
    CHECK(emitted == 1);
}

TEST_CASE("magnetization-constrained models are refused") {
    const IsingModel sliced(4, {}, 0.0, std::vector<double>(4, 0.0), 0.0, 0);
    ChainState state(SpinConfig::from_bits(sliced, 0b0011), 5);
    CHECK_THROWS_AS(glauber_step(sliced, state), ConstraintViolation);
}

TEST_CASE("cached and cache-free updates produce one trajectory") {
    const IsingModel m = random_model(24, 0.3, 0.4, 1.0, 12);
    ChainState cached(SpinConfig::all_minus(m), 99);
    ChainState fresh(SpinConfig::all_minus(m), 99);
    for (int s = 0; s < 100000; ++s) {
        glauber_step(m, cached);
        glauber_step_nocache(m, fresh);
    }
    CHECK(cached.config.spins() == fresh.config.spins());
}

TEST_CASE("zero-field SK chains have vanishing mean magnetization") {
    const int n = 200;
    const IsingModel m = build_sk(n, 0.25, 2025);
    const long long steps = glauber_schedule(n, 0.01);
    std::vector<double> site_mean(n, 0.0);
    const int chains = 50;
    for (int chain = 0; chain < chains; ++chain) {
        ChainState state(SpinConfig::all_minus(m), chain_seed(41, chain));
        for (long long s = 0; s < steps; ++s) glauber_step(m, state);
        for (int i = 0; i < n; ++i) site_mean[i] += state.config.spin(i);
    }
    double total = 0.0;
    for (double v : site_mean) total += v / chains;
    CHECK(std::abs(total) / n < 0.05);
}
