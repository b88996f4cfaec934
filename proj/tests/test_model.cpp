#include "doctest.h"

#include <cmath>

#include "spinloc/graphs.hpp"
#include "spinloc/model.hpp"
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

TEST_CASE("sk with beta zero is the uniform measure") {
    const IsingModel m = build_sk(5, 0.0, 1);
    CHECK(m.coupling().nnz() == 0);
    const auto dist = exact_distribution(m);
    for (double p : dist.p) CHECK(p == doctest::Approx(1.0 / 32).epsilon(1e-12));
}

TEST_CASE("sk off-diagonal variance matches beta^2/n") {
    const int n = 2000;
    const IsingModel m = build_sk(n, 1.0, 42);
    double sum2 = 0.0;
    for (const auto& t : m.coupling().triplets()) sum2 += t.value * t.value;
    const double var = sum2 / static_cast<double>(m.coupling().nnz());
    CHECK(var == doctest::Approx(1.0 / n).epsilon(0.05));
}

TEST_CASE("sk extreme eigenvalues near +-2 beta") {
    const IsingModel m = build_sk(500, 1.0, 7);
    const SpectralSummary s = shift_to_psd(m.coupling());
    CHECK(s.lambda_max_tilde > 1.8);
    CHECK(s.lambda_max_tilde < 2.2);
    CHECK(s.lambda_min_tilde < -1.8);
    CHECK(s.lambda_min_tilde > -2.2);
    CHECK(s.eta > 0.45);
    CHECK(s.eta < 0.55);
}

TEST_CASE("hopfield with one all-ones pattern") {
    const auto m = build_hopfield_patterns(4, 2.0, {{1, 1, 1, 1}});
    CHECK(m.diag() == doctest::Approx(0.25));
    for (const auto& t : m.coupling().triplets()) CHECK(t.value == doctest::Approx(0.25));
    CHECK(m.coupling().nnz() == 6);
}

TEST_CASE("hopfield diagonal is exactly beta m / 2n") {
    const IsingModel m = build_hopfield(1000, 1000, 1.0, 3);
    CHECK(m.diag() == 0.5);
    const IsingModel z = build_hopfield(10, 3, 0.0, 3);
    CHECK(z.coupling().nnz() == 0);
    CHECK(z.diag() == 0.0);
}

TEST_CASE("shift_to_psd on the zero matrix") {
    const SpectralSummary s = shift_to_psd(Eigen::MatrixXd::Zero(4, 4));
    CHECK(s.alpha == 0.0);
    CHECK(s.op_norm_J == 0.0);
    CHECK(s.eta == 0.0);
}

TEST_CASE("shift_to_psd on a 2x2 with eigenvalues {-1, 3}") {
    Eigen::MatrixXd j(2, 2);
    j << 1.0, 2.0, 2.0, 1.0;
    const SpectralSummary s = shift_to_psd(j);
    CHECK(s.alpha == doctest::Approx(1.0));
    CHECK(s.op_norm_J == doctest::Approx(4.0));
    CHECK(s.eta == doctest::Approx(0.25));
}

TEST_CASE("shift_to_psd rejects non-symmetric input") {
    Eigen::MatrixXd j(2, 2);
    j << 0.0, 1.0, 0.5, 0.0;
    CHECK_THROWS_AS(shift_to_psd(j), NonSymmetric);
}

TEST_CASE("power iteration agrees with the dense solver") {
    Rng rng = make_rng(5);
    const int n = 60;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            a(i, j) = normal01(rng);
            a(j, i) = a(i, j);
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    auto matvec = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
        out.noalias() = a * v;
    };
    const auto [lo, hi] = power_extreme_eigenvalues(matvec, n);
    CHECK(lo == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-5));
    CHECK(hi == doctest::Approx(es.eigenvalues()(n - 1)).epsilon(1e-5));
}

TEST_CASE("local field simple cases") {
    // h = 0, J = 0, gamma = 0: field vanishes everywhere
    const IsingModel flat(3, {}, 0.0, {0.0, 0.0, 0.0}, 0.0);
    SpinConfig c = SpinConfig::all_plus(flat);
    for (int i = 0; i < 3; ++i) CHECK(local_field(flat, c, i) == 0.0);

    // n = 2, J12 = beta, x2 = +1: m1 = beta
    const IsingModel pair(2, {{0, 1, 0.7}}, 0.0, {0.0, 0.0}, 0.0);
    SpinConfig cp = SpinConfig::all_plus(pair);
    CHECK(local_field(pair, cp, 0) == doctest::Approx(0.7));

    // n = 3, gamma = 3, J = 0: m1 = -(gamma/n)(x2 + x3)
    const IsingModel conf(3, {}, 0.0, {0.0, 0.0, 0.0}, 3.0);
    SpinConfig c1(conf, {1, 1, -1});
    CHECK(local_field(conf, c1, 0) == doctest::Approx(0.0));
    SpinConfig c2 = SpinConfig::all_plus(conf);
    CHECK(local_field(conf, c2, 0) == doctest::Approx(-2.0));

    CHECK_THROWS_AS(local_field(conf, c2, 5), IndexOutOfRange);
}

TEST_CASE("diagonal shifts leave the measure unchanged") {
    const IsingModel m = random_model(6, 0.4, 0.5, 1.0, 11);
    const auto base = exact_distribution(m);
    for (double c : {-1.0, 0.5, 3.0}) {
        const auto shifted = exact_distribution(m.with_diag(m.diag() + c));
        for (std::size_t s = 0; s < base.p.size(); ++s)
            CHECK(shifted.p[s] == doctest::Approx(base.p[s]).epsilon(1e-12));
    }
}

TEST_CASE("incremental field cache tracks fresh recomputation") {
    const IsingModel m = random_model(64, 0.2, 0.3, 2.0, 13);
    Rng rng = make_rng(14);
    SpinConfig c = SpinConfig::random(m, rng);
    for (int step = 0; step < 5000; ++step) c.flip(m, uniform_index(rng, m.n()));
    CHECK(c.max_cache_error(m) < 1e-9);
    long long s = 0;
    for (int i = 0; i < m.n(); ++i) s += c.spin(i);
    CHECK(s == c.spin_sum());
}

TEST_CASE("model json round trip and loader rejections") {
    const IsingModel m = random_model(5, 0.3, 0.2, 1.5, 17);
    const IsingModel back = IsingModel::from_json(m.to_json());
    CHECK(back.n() == m.n());
    CHECK(back.gamma() == m.gamma());
    CHECK(back.coupling().triplets().size() == m.coupling().triplets().size());
    for (std::size_t k = 0; k < m.coupling().triplets().size(); ++k) {
        CHECK(back.coupling().triplets()[k].i == m.coupling().triplets()[k].i);
        CHECK(back.coupling().triplets()[k].value ==
              m.coupling().triplets()[k].value);
    }
    CHECK_THROWS_AS(
        IsingModel::from_json(R"({"n":2,"triplets":[[0,1,1.0],[1,0,2.0]],"h":[0,0],"gamma":0,"magnetization":null})"),
        ModelFormatError);
    CHECK_THROWS_AS(
        IsingModel::from_json(R"({"n":2,"triplets":[[0,5,1.0]],"h":[0,0],"gamma":0,"magnetization":null})"),
        IndexOutOfRange);
    CHECK_THROWS_AS(IsingModel::from_json("not json"), ModelFormatError);
}

TEST_CASE("magnetization parity is enforced") {
    CHECK_THROWS_AS(IsingModel(3, {}, 0.0, {0, 0, 0}, 0.0, 0), ConstraintViolation);
    CHECK_THROWS_AS(IsingModel(3, {}, 0.0, {0, 0, 0}, 0.0, 5), ConstraintViolation);
    CHECK_NOTHROW(IsingModel(3, {}, 0.0, {0, 0, 0}, 0.0, 1));
}

TEST_CASE("antiferro with beta zero is a product measure") {
    const Graph g = erdos_renyi(6, 0.5, 21);
    std::vector<double> h = {0.3, -0.2, 0.5, 0.0, -0.4, 0.25};
    const auto result = build_antiferro(g, 0.0, h, 0.1);
    CHECK(result.model.gamma() == 0.0);
    CHECK(result.model.coupling().nnz() == 0);
    const auto dist = exact_distribution(result.model);
    for (std::uint32_t idx = 0; idx < (1u << 6); ++idx) {
        double p = 1.0;
        for (int i = 0; i < 6; ++i) {
            const double x = (idx >> i) & 1 ? 1.0 : -1.0;
            p *= std::exp(h[i] * x) / (2.0 * std::cosh(h[i]));
        }
        CHECK(dist.p[idx] == doctest::Approx(p).epsilon(1e-10));
    }
}

TEST_CASE("antiferro decomposition preserves the measure on C4") {
    const Graph c4(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
    const double beta = 0.1;
    std::vector<double> h = {0.2, -0.1, 0.4, 0.05};
    const auto result = build_antiferro(c4, beta, h, 0.1);
    const auto decomposed = exact_distribution(result.model);

    std::vector<Triplet> raw;
    for (const auto& [u, v] : c4.edges) raw.push_back({u, v, -beta});
    const IsingModel raw_model(4, std::move(raw), 0.0, h, 0.0);
    const auto direct = exact_distribution(raw_model);
    for (std::size_t s = 0; s < direct.p.size(); ++s)
        CHECK(decomposed.p[s] == doctest::Approx(direct.p[s]).epsilon(1e-10));
}

TEST_CASE("antiferro applicability flag on a regular expander") {
    const Graph g = random_regular(100, 3, 2024);
    const double beta = 0.9 / (8.0 * std::sqrt(2.0));
    const auto result = build_antiferro(g, beta, {}, 0.1);
    CHECK(result.polarized_guarantee);
    CHECK(result.summary.op_norm_J < 0.5);
    CHECK_THROWS_AS(build_antiferro(Graph(), beta, {}, 0.1), EmptyGraph);
}
