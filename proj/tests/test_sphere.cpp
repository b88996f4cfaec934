#include "doctest.h"

#include <cmath>

#include <boost/math/special_functions/bessel.hpp>

#include "spinloc/sphere.hpp"
#include "test_util.hpp"

using namespace spinloc;

TEST_CASE("first doubling point on V = x^2 with kappa 4") {
    auto v = [](double x) { return x * x; };
    CHECK(first_doubling_point(v, 4.0, 10.0) == doctest::Approx(1.0));
    CHECK(first_doubling_point(v, 4.0, -10.0) == doctest::Approx(-1.0));
    // limit reached before the threshold
    CHECK(first_doubling_point([](double) { return 0.0; }, 4.0, 3.0) == 3.0);
}

TEST_CASE("envelope sampler reproduces the standard gaussian") {
    Potential1D pot{[](double x) { return 0.5 * x * x; }, -1e6, 1e6, 1.0, 1.0};
    Rng rng = make_rng(1);
    std::vector<double> samples;
    for (int s = 0; s < 100000; ++s) samples.push_back(envelope_reject(pot, 1e-4, rng));
    const double ks = testutil::ks_statistic(
        samples, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); });
    CHECK(ks < 0.01);
}

TEST_CASE("envelope acceptance rate is bounded away from zero") {
    Potential1D pot{[](double x) { return 0.5 * x * x; }, -10.0, 10.0, 1.0, 1.0};
    Rng rng = make_rng(2);
    CHECK(envelope_acceptance_estimate(pot, 10000, rng) >= 0.05);
}

TEST_CASE("invalid potentials are rejected") {
    Rng rng = make_rng(3);
    Potential1D shifted{[](double x) { return 0.5 * x * x + 1.0; }, -5.0, 5.0, 1.0, 1.0};
    CHECK_THROWS_AS(envelope_reject(shifted, 1e-3, rng), InvalidPotential);
    Potential1D sloped{[](double x) { return 0.5 * x * x + x; }, -5.0, 5.0, 1.0, 1.0};
    CHECK_THROWS_AS(envelope_reject(sloped, 1e-3, rng), InvalidPotential);
}

TEST_CASE("marginal with no tilt is symmetric and uniform for N = 3") {
    Rng rng = make_rng(4);
    std::vector<double> samples;
    for (int s = 0; s < 100000; ++s)
        samples.push_back(sample_sphere_marginal(3, 0.0, 1e-3, rng));
    const double ks =
        testutil::ks_statistic(samples, [](double y) { return 0.5 * (y + 1.0); });
    CHECK(ks < 0.01);

    for (int N : {1, 2, 4, 7, 12}) {
        double mean = 0.0;
        const int m = 40000;
        for (int s = 0; s < m; ++s) mean += sample_sphere_marginal(N, 0.0, 1e-3, rng);
        mean /= m;
        const double sd = std::sqrt(testutil::sphere_marginal_moment(N, 0.0, 2) / m);
        CHECK(std::abs(mean) < 3.0 * sd + 1e-12);
    }
}

TEST_CASE("exact inverse-cdf path for N = 3 matches F") {
    const double b = 2.0;
    Rng rng = make_rng(5);
    std::vector<double> samples;
    for (int s = 0; s < 100000; ++s)
        samples.push_back(sample_sphere_marginal(3, b, 1e-3, rng));
    std::sort(samples.begin(), samples.end());
    auto cdf = [b](double y) {
        return (std::exp(b * y) - std::exp(-b)) / (std::exp(b) - std::exp(-b));
    };
    for (int q = 1; q <= 20; ++q) {
        const double level = q / 21.0;
        const double quantile = samples[static_cast<std::size_t>(level * samples.size())];
        CHECK(std::abs(cdf(quantile) - level) < 0.01);
    }
}

TEST_CASE("marginal moments match quadrature across dimensions and tilts") {
    Rng rng = make_rng(6);
    for (const auto& [N, b] : std::vector<std::pair<int, double>>{
             {2, 0.5}, {4, 2.0}, {7, 5.0}, {12, 20.0}}) {
        const int m = 30000;
        std::vector<double> ys(m);
        for (int s = 0; s < m; ++s) ys[s] = sample_sphere_marginal(N, b, 1e-4, rng);
        for (int power : {1, 2, 3, 4}) {
            const double expect = testutil::sphere_marginal_moment(N, b, power);
            double emp = 0.0, emp2 = 0.0;
            for (double y : ys) {
                const double v = std::pow(y, power);
                emp += v;
                emp2 += v * v;
            }
            emp /= m;
            emp2 /= m;
            const double se = std::sqrt(std::max(emp2 - emp * emp, 1e-300) / m);
            CHECK(std::abs(emp - expect) < 4.0 * se + 1e-9);
        }
    }
}

TEST_CASE("negative tilt reflects the positive one") {
    Rng rng = make_rng(7);
    double mean = 0.0;
    const int m = 20000;
    for (int s = 0; s < m; ++s) mean += sample_sphere_marginal(4, -3.0, 1e-3, rng);
    mean /= m;
    const double expect = -testutil::sphere_marginal_moment(4, 3.0, 1);
    CHECK(mean == doctest::Approx(expect).epsilon(0.05));
    CHECK_THROWS_AS(sample_sphere_marginal(0, 1.0, 1e-3, rng), BadDimension);
}

TEST_CASE("conditional spin with zero field is uniform") {
    Rng rng = make_rng(8);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
    const int m = 100000;
    for (int s = 0; s < m; ++s) {
        const Eigen::VectorXd v = sample_conditional_spin(Eigen::VectorXd::Zero(4), 1e-3, rng);
        CHECK(std::abs(v.norm() - 1.0) < 1e-12);
        mean += v;
    }
    CHECK((mean / m).norm() < 0.02);
}

TEST_CASE("conditional spin projection matches the tilted marginal") {
    Rng rng = make_rng(9);
    Eigen::VectorXd w(2);
    w << 3.0, 0.0;
    const int m = 50000;
    double emp = 0.0, emp2 = 0.0;
    for (int s = 0; s < m; ++s) {
        const double y = sample_conditional_spin(w, 1e-4, rng)[0];
        emp += y;
        emp2 += y * y;
    }
    emp /= m;
    emp2 /= m;
    const double expect = testutil::sphere_marginal_moment(2, 3.0, 1);
    const double se = std::sqrt((emp2 - emp * emp) / m);
    CHECK(std::abs(emp - expect) < 3.0 * se + 1e-9);
}

TEST_CASE("conditional sampling is rotation-equivariant") {
    Rng rng = make_rng(10);
    const int N = 3;
    // random rotation via QR of a gaussian matrix
    Eigen::MatrixXd g(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) g(i, j) = normal01(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd rot = qr.householderQ();
    if (rot.determinant() < 0) rot.col(0) *= -1.0;

    Eigen::VectorXd w(N);
    w << 1.2, -0.5, 0.7;
    Eigen::VectorXd u(N);
    u << 0.3, 0.9, -0.3;
    u.normalize();

    const int m = 20000;
    std::vector<double> direct, rotated;
    for (int s = 0; s < m; ++s)
        direct.push_back(u.dot(rot * sample_conditional_spin(w, 1e-4, rng)));
    for (int s = 0; s < m; ++s)
        rotated.push_back(u.dot(sample_conditional_spin(rot * w, 1e-4, rng)));
    const double ks = testutil::ks_two_sample(direct, rotated);
    CHECK(testutil::ks_p_value(ks, m / 2.0) > 0.001);
}

TEST_CASE("two xy spins match the bessel-ratio correlation") {
    ONModel model(2, 2, {{0, 1, 0.3}}, {});
    Rng rng = make_rng(11);
    ONConfig config = ONConfig::aligned(model);
    const int steps = 1000000;
    std::vector<double> corr;
    corr.reserve(steps / 2);
    for (int s = 0; s < steps; ++s) {
        on_glauber_step(model, config, 1e-4, rng);
        if (s >= steps / 2) corr.push_back(config.spin(0).dot(config.spin(1)));
    }
    double mean = 0.0;
    for (double c : corr) mean += c;
    mean /= static_cast<double>(corr.size());
    const double expect = boost::math::cyl_bessel_i(1, 0.3) / boost::math::cyl_bessel_i(0, 0.3);
    const double se = testutil::batch_mean_se(corr, 100);
    CHECK(std::abs(mean - expect) < 3.0 * se + 1e-6);
    CHECK(config.max_cache_error(model) < 1e-9);
    CHECK(config.max_norm_error() < 1e-12);
}

TEST_CASE("free spins stay uniform under the chain") {
    ONModel model(3, 4, {}, {});
    Rng rng = make_rng(12);
    ONConfig config = ONConfig::random(model, rng);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
    const int steps = 60000;
    for (int s = 0; s < steps; ++s) {
        on_glauber_step(model, config, 1e-3, rng);
        mean += config.spin(0);
    }
    CHECK((mean / steps).norm() < 0.03);
}

TEST_CASE("chain is deterministic per seed") {
    ONModel model(2, 3, {{0, 1, 0.5}}, {});
    auto run = [&](std::uint64_t seed) {
        Rng rng = make_rng(seed);
        ONConfig config = ONConfig::aligned(model);
        for (int s = 0; s < 500; ++s) on_glauber_step(model, config, 1e-3, rng);
        return config.spin(0);
    };
    CHECK((run(9) - run(9)).norm() == 0.0);
}

TEST_CASE("shrinking eps does not worsen the fit") {
    Rng rng = make_rng(13);
    auto ks_at = [&](double eps) {
        std::vector<double> samples;
        for (int s = 0; s < 30000; ++s)
            samples.push_back(sample_sphere_marginal(4, 2.0, eps, rng));
        boost::math::quadrature::tanh_sinh<double> integ;
        auto density = [](double y) {
            return std::exp(2.0 * y) * std::sqrt(std::max(0.0, 1.0 - y * y));
        };
        const double z = integ.integrate(density, -1.0, 1.0);
        return testutil::ks_statistic(samples, [&](double y) {
            return integ.integrate(density, -1.0, y) / z;
        });
    };
    const double coarse = ks_at(2e-2);
    const double fine = ks_at(1e-2);
    CHECK(fine < coarse + 0.01);
    CHECK(fine < 0.02);
}
