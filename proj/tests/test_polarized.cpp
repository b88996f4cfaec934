#include "doctest.h"

#include <bit>
#include <cmath>
#include <set>

#include "spinloc/oracle.hpp"
#include "spinloc/polarized.hpp"

using namespace spinloc;

namespace {

IsingModel random_model(int n, double coupling_scale, double field_scale, double gamma,
                        std::uint64_t seed, std::optional<int> k = std::nullopt) {
    Rng rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Triplet> trips;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) trips.push_back({i, j, coupling_scale * gauss(rng)});
    std::vector<double> h(n);
    for (auto& v : h) v = field_scale * gauss(rng);
    return IsingModel(n, std::move(trips), 0.0, std::move(h), gamma, k);
}

} // namespace

TEST_CASE("polarized kernel rows are stochastic and stationary") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const double gamma = (seed % 3 == 0) ? 0.0 : (seed % 3 == 1 ? 1.0 : 50.0);
        const IsingModel m = random_model(7, 0.3, 0.4, gamma, 100 + seed);
        const ExactKernel kernel = exact_kernel(ChainKind::Polarized, m);
        CHECK((kernel.P.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
        CHECK(stationarity_residual(kernel, m) < 1e-10);
    }
}

TEST_CASE("step-procedure kernel equals the definition kernel entrywise") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const IsingModel m = random_model(5, 0.3, 0.4, seed % 2 ? 1.0 : 0.0, 200 + seed);
        const ExactKernel impl = exact_kernel(ChainKind::Polarized, m);
        const Eigen::MatrixXd def = polarized_kernel_from_definition(m);
        CHECK((impl.P - def).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("a polarized step moves the plus set by at most one in and one out") {
    const IsingModel m = random_model(12, 0.25, 0.3, 2.0, 301);
    Rng rng = make_rng(302);
    PolarizedState state(m, SpinConfig::all_minus(m));
    std::set<int> prev(state.plus_set().begin(), state.plus_set().end());
    for (int s = 0; s < 20000; ++s) {
        polarized_step(m, state, rng);
        std::set<int> cur(state.plus_set().begin(), state.plus_set().end());
        std::vector<int> sym;
        std::set_symmetric_difference(prev.begin(), prev.end(), cur.begin(), cur.end(),
                                      std::back_inserter(sym));
        CHECK(sym.size() <= 2);
        prev = std::move(cur);
    }
}

TEST_CASE("tree membership and weight ratios stay consistent") {
    const IsingModel m = random_model(14, 0.3, 0.5, 3.0, 303);
    Rng rng = make_rng(304);
    PolarizedState state(m, SpinConfig::all_minus(m));
    for (int s = 0; s < 5000; ++s) polarized_step(m, state, rng);

    std::set<int> tree_keys;
    std::vector<std::pair<int, double>> weights;
    state.tree().for_each([&](int k, double w) {
        tree_keys.insert(k);
        weights.emplace_back(k, w);
    });
    for (int i = 0; i < m.n(); ++i)
        CHECK(tree_keys.count(i) == (state.config().spin(i) < 0 ? 1u : 0u));
    CHECK(state.plus_set().size() + state.minus_count() ==
          static_cast<std::size_t>(m.n()));

    // stored weights are exp(2 b_j) up to one common factor
    for (std::size_t a = 1; a < weights.size(); ++a) {
        const double expect = std::exp(2.0 * (state.minus_site_field(m, weights[a].first) -
                                              state.minus_site_field(m, weights[0].first)));
        const double got = weights[a].second / weights[0].second;
        CHECK(got == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("log-weight bookkeeping drifts below 1e-7") {
    const IsingModel m = random_model(16, 0.25, 0.4, 2.0, 305);
    Rng rng = make_rng(306);
    PolarizedState state(m, SpinConfig::all_minus(m));
    double worst = 0.0;
    for (int block = 0; block < 20; ++block) {
        for (int s = 0; s < 10000; ++s) polarized_step(m, state, rng);
        worst = std::max(worst,
                         std::abs(state.log_weight() - state.fresh_log_weight(m)));
    }
    CHECK(worst < 1e-7);
    state.reanchor(m);
    CHECK(state.log_weight() == state.fresh_log_weight(m));
}

TEST_CASE("strong fields trigger the log-space rebuild without corruption") {
    // fields around +-300 push exp(2b) far outside double range
    const int n = 10;
    std::vector<double> h(n);
    for (int i = 0; i < n; ++i) h[i] = (i % 2 ? 300.0 : -300.0);
    const IsingModel m(n, {{0, 1, 0.4}, {2, 3, -0.4}, {4, 5, 0.2}}, 0.0, h, 1.0);
    Rng rng = make_rng(307);
    PolarizedState state(m, SpinConfig::all_minus(m));
    for (int s = 0; s < 20000; ++s) polarized_step(m, state, rng);
    // plus set should match the field signs almost surely at this strength
    for (int i = 0; i < n; ++i)
        CHECK((state.config().spin(i) > 0) == (h[i] > 0));
    CHECK(std::abs(state.log_weight() - state.fresh_log_weight(m)) < 1e-6);
}

TEST_CASE("curie-weiss antiferro chain reaches the oracle within the schedule") {
    const int n = 10;
    const IsingModel m(n, {}, 0.0, std::vector<double>(n, 0.0), 5.0);
    const ExactKernel kernel = exact_kernel(ChainKind::Polarized, m);
    const auto nu = restrict_distribution(exact_distribution(m), kernel.states);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(kernel.P.rows());
    p[0] = 1.0; // all-minus start
    const int steps = static_cast<int>(std::ceil(n * std::log(n / 0.01)));
    for (int s = 0; s < steps; ++s) p = kernel.P.transpose() * p;
    double tv = 0.0;
    for (int i = 0; i < p.size(); ++i) tv += std::abs(p[i] - nu[i]);
    CHECK(0.5 * tv < 0.02);
}

TEST_CASE("fixed-magnetization kernel is stationary on the slice") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const int n = 7;
        const int k = (seed % 2 == 0) ? 1 : 3;
        const IsingModel m = random_model(n, 0.3, 0.4, 0.0, 400 + seed, k);
        const ExactKernel kernel = exact_kernel(ChainKind::FixedMag, m);
        CHECK((kernel.P.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
        CHECK(stationarity_residual(kernel, m) < 1e-10);
    }
}

TEST_CASE("all-plus slice is a fixed point") {
    const IsingModel m = random_model(5, 0.3, 0.2, 0.0, 401, 5);
    Rng rng = make_rng(402);
    PolarizedState state(m, SpinConfig::all_plus(m));
    for (int s = 0; s < 100; ++s) fixed_mag_step(m, state, rng);
    CHECK(state.plus_set().size() == 5);

    const IsingModel empty = random_model(5, 0.3, 0.2, 0.0, 403, -5);
    PolarizedState bottom(empty, SpinConfig::all_minus(empty));
    fixed_mag_step(empty, bottom, rng);
    CHECK(bottom.plus_set().empty());
}

TEST_CASE("balanced free slice mixes to uniform") {
    const int n = 6;
    const IsingModel m(n, {}, 0.0, std::vector<double>(n, 0.0), 0.0, 0);
    Rng rng = make_rng(404);
    PolarizedState state(m, SpinConfig::from_bits(m, 0b000111));
    std::vector<std::uint32_t> visits;
    for (int s = 0; s < 100000; ++s) {
        fixed_mag_step(m, state, rng);
        visits.push_back(state.config().bits());
    }
    const auto emp = empirical_distribution(visits, n);
    const auto exact = exact_distribution(m);
    CHECK(tv_distance(emp, exact.p) < 0.02);
}

TEST_CASE("fixed-magnetization walk requires the slice constraint") {
    const IsingModel m = random_model(5, 0.3, 0.2, 0.0, 405);
    Rng rng = make_rng(406);
    PolarizedState state(m, SpinConfig::all_plus(m));
    CHECK_THROWS_AS(fixed_mag_step(m, state, rng), ConstraintViolation);
}

TEST_CASE("polarized trajectories are deterministic per seed") {
    const IsingModel m = random_model(9, 0.3, 0.3, 1.0, 407);
    auto run = [&](std::uint64_t seed) {
        Rng rng = make_rng(seed);
        PolarizedState state(m, SpinConfig::all_minus(m));
        std::vector<std::uint32_t> seen;
        for (int s = 0; s < 2000; ++s) {
            polarized_step(m, state, rng);
            seen.push_back(state.config().bits());
        }
        return seen;
    };
    CHECK(run(55) == run(55));
}
