#include "spinloc/verify.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "spinloc/glauber.hpp"
#include "spinloc/graphs.hpp"
#include "spinloc/model.hpp"
#include "spinloc/oracle.hpp"
#include "spinloc/polarized.hpp"
#include "spinloc/sphere.hpp"
#include "spinloc/thresholds.hpp"
#include "spinloc/wtree.hpp"

namespace spinloc {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

IsingModel random_dense_model(int n, double coupling_scale, double field_scale,
                              double gamma, std::uint64_t seed,
                              std::optional<int> k = std::nullopt, bool psd_shift = false) {
    Rng rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Triplet> trips;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) trips.push_back({i, j, coupling_scale * gauss(rng)});
    std::vector<double> h(n);
    for (auto& v : h) v = field_scale * gauss(rng);
    double diag = 0.0;
    if (psd_shift) {
        const IsingModel probe(n, trips, 0.0, std::vector<double>(n, 0.0), 0.0);
        diag = shift_to_psd(probe.coupling().dense()).alpha;
    }
    return IsingModel(n, std::move(trips), diag, std::move(h), gamma, k);
}

// PSD model with uniform diagonal, rescaled so the operator norm is `target`.
IsingModel random_psd_model(int n, double target_norm, double field_scale,
                            double gamma, std::uint64_t seed, double& eta_out) {
    Rng rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Triplet> trips;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            trips.push_back({i, j, gauss(rng) / std::sqrt(static_cast<double>(n))});
    const IsingModel probe(n, trips, 0.0, std::vector<double>(n, 0.0), 0.0);
    const SpectralSummary s = shift_to_psd(probe.coupling().dense());
    const double scale = target_norm / s.op_norm_J;
    for (auto& t : trips) t.value *= scale;
    eta_out = s.eta;
    std::vector<double> h(n);
    for (auto& v : h) v = field_scale * gauss(rng);
    return IsingModel(n, std::move(trips), scale * s.alpha, std::move(h), gamma);
}

json check(json& failures, const std::string& what, bool ok, const json& measured) {
    json entry{{"check", what}, {"pass", ok}, {"measured", measured}};
    if (!ok) failures.push_back(entry);
    return entry;
}

// ---------------------------------------------------------------- criterion 1
SuiteResult suite_thresholds() {
    SuiteResult result{"thresholds", true, {}};
    json failures = json::array();
    const struct {
        double eta, lo, hi;
    } anchors[] = {{0.0, 0.998, 1.002}, {0.5, 1.18, 1.20}, {1.0, 1.38, 1.42}};
    for (const auto& a : anchors) {
        const auto start = Clock::now();
        const QCurve curve = solve_q_eta(a.eta, 2.0, 1e-4, 1e6);
        const double elapsed = seconds_since(start);
        const double z = curve.blowup_z.value_or(-1.0);
        check(failures, "blowup eta=" + std::to_string(a.eta),
              z > a.lo && z < a.hi && elapsed < 10.0,
              {{"blowup_z", z}, {"seconds", elapsed}});
        result.details["eta_" + std::to_string(a.eta)] = {{"blowup_z", z},
                                                          {"seconds", elapsed}};
    }
    result.pass = failures.empty();
    result.details["failures"] = failures;
    return result;
}

// ---------------------------------------------------------------- criterion 2
SuiteResult suite_closed_form() {
    SuiteResult result{"closed-form", true, {}};
    json failures = json::array();
    const auto start = Clock::now();
    double worst_rel = 0.0;
    for (double eta : {0.25, 0.5, 0.75, 1.0}) {
        for (double rho : {0.5, 1.0}) {
            const double zmax = 0.9 * s_of_eta(eta) / rho;
            const QCurve curve = solve_q_semilogconcave(
                eta, [rho](double) { return rho; }, zmax, 1e-4, 1e6);
            for (std::size_t k = 0; k < curve.z.size(); k += 25) {
                const double expect = q_closed_form(eta, rho, curve.z[k]);
                worst_rel = std::max(worst_rel,
                                     std::abs(curve.values[k] - expect) / expect);
            }
        }
    }
    const double s_half = s_of_eta(0.5);
    const double elapsed = seconds_since(start);
    check(failures, "solver matches rho Q_eta(rho z)", worst_rel < 1e-4,
          {{"worst_relative_error", worst_rel}});
    check(failures, "s(1/2) anchor", std::abs(s_half - 1.1748) < 1e-4,
          {{"s_half", s_half}});
    check(failures, "runtime", elapsed < 30.0, {{"seconds", elapsed}});
    result.details = {{"worst_relative_error", worst_rel},
                      {"s_half", s_half},
                      {"seconds", elapsed},
                      {"failures", failures}};
    result.pass = failures.empty();
    return result;
}

// ---------------------------------------------------------------- criterion 3
double on_glauber_two_spin_residual(double j12, const Eigen::Vector2d& h1,
                                    const Eigen::Vector2d& h2) {
    // Exact one-step stationarity of the ideal XY heat-bath kernel on two
    // spins, checked on a periodic grid: the identity
    //   nu(t1,t2) = 1/2 nu2(t2) pi(t1|t2) + 1/2 nu1(t1) pi(t2|t1)
    // integrated by the trapezoidal rule.
    const int K = 256;
    const double step = 2.0 * M_PI / K;
    auto spin = [&](int a) {
        return Eigen::Vector2d{std::cos(a * step), std::sin(a * step)};
    };
    Eigen::MatrixXd nu(K, K);
    for (int a = 0; a < K; ++a)
        for (int b = 0; b < K; ++b) {
            const Eigen::Vector2d xa = spin(a), xb = spin(b);
            nu(a, b) = std::exp(j12 * xa.dot(xb) + h1.dot(xa) + h2.dot(xb));
        }
    nu /= nu.sum();
    Eigen::VectorXd nu1 = nu.rowwise().sum();
    Eigen::VectorXd nu2 = nu.colwise().sum();

    std::vector<double> z1(K, 0.0), z2(K, 0.0);
    for (int b = 0; b < K; ++b) {
        const Eigen::Vector2d w1 = h1 + j12 * spin(b);
        for (int c = 0; c < K; ++c) z1[b] += std::exp(w1.dot(spin(c)));
    }
    for (int a = 0; a < K; ++a) {
        const Eigen::Vector2d w2 = h2 + j12 * spin(a);
        for (int c = 0; c < K; ++c) z2[a] += std::exp(w2.dot(spin(c)));
    }
    double residual = 0.0;
    for (int a = 0; a < K; ++a)
        for (int b = 0; b < K; ++b) {
            const Eigen::Vector2d w1 = h1 + j12 * spin(b);
            const Eigen::Vector2d w2 = h2 + j12 * spin(a);
            const double rhs = 0.5 * nu2(b) * std::exp(w1.dot(spin(a))) / z1[b] +
                               0.5 * nu1(a) * std::exp(w2.dot(spin(b))) / z2[a];
            residual += std::abs(nu(a, b) - rhs);
        }
    return residual;
}

SuiteResult suite_stationarity() {
    SuiteResult result{"stationarity", true, {}};
    json failures = json::array();
    const auto start = Clock::now();
    double worst = 0.0;
    const double gammas[] = {0.0, 1.0, 50.0};
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 4 + trial % 5;
        const double gamma = gammas[trial % 3];
        const bool psd = trial % 2 == 0;
        const IsingModel m = random_dense_model(n, 0.4 / std::sqrt(n), 0.5, gamma,
                                                9000 + trial, std::nullopt, psd);
        const double g = stationarity_residual(exact_kernel(ChainKind::Glauber, m), m);
        const double p = stationarity_residual(exact_kernel(ChainKind::Polarized, m), m);
        const int k = (trial % (n + 1)) * 2 - n; // same parity as n, |k| <= n
        const IsingModel sliced = m.with_magnetization(k);
        const double f = stationarity_residual(exact_kernel(ChainKind::FixedMag, sliced),
                                               sliced);
        worst = std::max({worst, g, p, f});
    }
    check(failures, "discrete chains nuP=nu", worst < 1e-9, {{"worst_residual", worst}});

    Rng rng = make_rng(9100);
    double worst_on = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        const double j12 = 0.8 * (uniform01(rng) - 0.3);
        const Eigen::Vector2d h1{normal01(rng) * 0.5, normal01(rng) * 0.5};
        const Eigen::Vector2d h2{normal01(rng) * 0.5, normal01(rng) * 0.5};
        worst_on = std::max(worst_on, on_glauber_two_spin_residual(j12, h1, h2));
    }
    check(failures, "on-glauber two-spin surrogate", worst_on < 1e-9,
          {{"worst_residual", worst_on}});
    const double elapsed = seconds_since(start);
    check(failures, "runtime", elapsed < 120.0, {{"seconds", elapsed}});
    result.details = {{"worst_chain_residual", worst},
                      {"worst_on_glauber_residual", worst_on},
                      {"seconds", elapsed},
                      {"failures", failures}};
    result.pass = failures.empty();
    return result;
}

// ---------------------------------------------------------------- criterion 4
SuiteResult suite_polarized_kernel() {
    SuiteResult result{"polarized-kernel", true, {}};
    json failures = json::array();
    const auto start = Clock::now();
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 3 + trial % 3;
        const double gamma = (trial % 3 == 0) ? 0.0 : (trial % 3 == 1 ? 1.0 : 3.0);
        const IsingModel m =
            random_dense_model(n, 0.3, 0.4, gamma, 9400 + trial);
        const ExactKernel impl = exact_kernel(ChainKind::Polarized, m);
        const Eigen::MatrixXd def = polarized_kernel_from_definition(m);
        worst = std::max(worst, (impl.P - def).cwiseAbs().maxCoeff());
    }
    const double elapsed = seconds_since(start);
    check(failures, "entrywise agreement", worst < 1e-12, {{"worst_abs", worst}});
    check(failures, "runtime", elapsed < 30.0, {{"seconds", elapsed}});
    result.details = {{"worst_abs", worst}, {"seconds", elapsed}, {"failures", failures}};
    result.pass = failures.empty();
    return result;
}

// ---------------------------------------------------------------- criterion 5
SuiteResult suite_trickledown() {
    SuiteResult result{"trickledown", true, {}};
    json failures = json::array();
    const auto start = Clock::now();
    Rng rng = make_rng(9500);
    double worst = 0.0;
    const std::pair<int, int> shapes[] = {{5, 2}, {6, 3}, {7, 2}, {8, 3}};
    for (int trial = 0; trial < 50; ++trial) {
        const auto [m, k] = shapes[trial % 4];
        SubsetDistribution dist;
        dist.m = m;
        for (std::uint32_t s = 0; s < (1u << m); ++s)
            if (std::popcount(s) == k) {
                dist.subsets.push_back(s);
                dist.weights.push_back(0.02 + uniform01(rng));
            }
        worst = std::max(worst, verify_trickledown_pinning(dist));
    }
    const double elapsed = seconds_since(start);
    check(failures, "pinning identity residual", worst < 1e-10, {{"worst", worst}});
    check(failures, "runtime", elapsed < 60.0, {{"seconds", elapsed}});
    result.details = {{"worst_residual", worst}, {"seconds", elapsed}, {"failures", failures}};
    result.pass = failures.empty();
    return result;
}

// ---------------------------------------------------------------- criterion 6
SuiteResult suite_covariance() {
    SuiteResult result{"covariance", true, {}};
    json failures = json::array();
    const auto start = Clock::now();
    double worst_q_slack = 1e300, worst_l_slack = 1e300;
    bool ok = true;
    for (int trial = 0; trial < 20; ++trial) {
        Rng rng = make_rng(9600 + trial);
        const bool small_norm = trial % 2 == 0;
        const double target = small_norm ? 0.1 + 0.35 * uniform01(rng)
                                         : 0.1 + 0.75 * uniform01(rng);
        double eta = 0.0;
        const IsingModel m = random_psd_model(8, target, 0.6, 0.0, 9600 + trial, eta);

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> cov_eigs(
            exact_covariance(exact_distribution(m)), Eigen::EigenvaluesOnly);
        const double cov_norm = cov_eigs.eigenvalues()(7);

        const QCurve curve = solve_q_eta(eta, target * 1.0000001, 1e-4, 1e6);
        if (!curve.blowup_z) {
            const double bound = curve.values.back();
            ok = ok && cov_norm <= bound;
            worst_q_slack = std::min(worst_q_slack, bound - cov_norm);
        } else {
            ok = false;
        }

        if (small_norm) {
            const double gamma = 0.5 + 10.0 * uniform01(rng);
            const IsingModel confined(m.n(), m.coupling().triplets(), m.diag(),
                                      m.field(), gamma);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ce(
                exact_covariance(exact_distribution(confined)), Eigen::EigenvaluesOnly);
            const double bound = 2.0 / (1.0 - 2.0 * target);
            ok = ok && ce.eigenvalues()(7) <= bound;
            worst_l_slack = std::min(worst_l_slack, bound - ce.eigenvalues()(7));
        }
    }
    const double elapsed = seconds_since(start);
    check(failures, "covariance bounds", ok,
          {{"min_q_slack", worst_q_slack}, {"min_lemma_slack", worst_l_slack}});
    check(failures, "runtime", elapsed < 60.0, {{"seconds", elapsed}});
    result.details = {{"min_q_slack", worst_q_slack},
                      {"min_lemma_slack", worst_l_slack},
                      {"seconds", elapsed},
                      {"failures", failures}};
    result.pass = failures.empty();
    return result;
}

// ---------------------------------------------------------------- criterion 7
SuiteResult suite_mixing() {
    SuiteResult result{"mixing", true, {}};
    json failures = json::array();
    const auto start = Clock::now();

    // Curie-Weiss antiferro: the model and chain are site-exchangeable, so
    // total variation is measured on the magnetization marginal (the
    // full-state empirical distance has a sampling-noise floor of about 0.13
    // at 1e4 trajectories).
    {
        const int n = 10;
        const IsingModel m(n, {}, 0.0, std::vector<double>(n, 0.0), 5.0);
        const int steps = static_cast<int>(std::ceil(n * std::log(n / 0.01)));
        const int trajectories = 10000;
        std::map<long long, double> marginal;
        for (int t = 0; t < trajectories; ++t) {
            Rng rng = make_rng(chain_seed(9700, t));
            PolarizedState state(m, SpinConfig::all_minus(m));
            for (int s = 0; s < steps; ++s) polarized_step(m, state, rng);
            marginal[state.config().spin_sum()] += 1.0 / trajectories;
        }
        const auto dist = exact_distribution(m);
        std::map<long long, double> exact;
        for (std::uint32_t idx = 0; idx < (1u << n); ++idx)
            exact[2 * std::popcount(idx) - n] += dist.p[idx];
        double tv = 0.0;
        for (const auto& [mag, p] : exact) {
            const auto it = marginal.find(mag);
            tv += std::abs(p - (it == marginal.end() ? 0.0 : it->second));
        }
        for (const auto& [mag, p] : marginal)
            if (!exact.count(mag)) tv += p;
        tv *= 0.5;
        check(failures, "curie-weiss polarized mixing", tv < 0.02,
              {{"tv", tv}, {"steps", steps}});
        result.details["curie_weiss"] = {{"tv", tv}, {"steps", steps}};
    }

    // Fixed-magnetization walk on a random |J| = 0.3 model, n = 8, k = 0.
    {
        const int n = 8, k = 0, m_plus = (n + k) / 2;
        double eta = 0.0;
        IsingModel base = random_psd_model(n, 0.3, 0.4, 0.0, 9701, eta);
        const IsingModel m = base.with_magnetization(k);
        const int steps =
            static_cast<int>(std::ceil(4.0 * m_plus * std::log(m_plus / 0.01)));
        const int trajectories = 200000;
        const ExactKernel kernel = exact_kernel(ChainKind::FixedMag, m);
        std::map<std::uint32_t, std::size_t> index_of;
        for (std::size_t i = 0; i < kernel.states.size(); ++i)
            index_of[kernel.states[i]] = i;
        std::vector<double> emp(kernel.states.size(), 0.0);
        const SpinConfig start_config = SpinConfig::from_bits(m, 0b00001111);
        for (int t = 0; t < trajectories; ++t) {
            Rng rng = make_rng(chain_seed(9702, t));
            PolarizedState state(m, start_config);
            for (int s = 0; s < steps; ++s) fixed_mag_step(m, state, rng);
            emp[index_of.at(state.config().bits())] += 1.0 / trajectories;
        }
        const auto nu = restrict_distribution(exact_distribution(m), kernel.states);
        const double tv = tv_distance(emp, nu);
        check(failures, "fixed-magnetization mixing", tv < 0.02,
              {{"tv", tv}, {"steps", steps}});
        result.details["fixed_magnetization"] = {{"tv", tv}, {"steps", steps}};
    }

    const double elapsed = seconds_since(start);
    check(failures, "runtime", elapsed < 300.0, {{"seconds", elapsed}});
    result.details["seconds"] = elapsed;
    result.details["failures"] = failures;
    result.pass = failures.empty();
    return result;
}

// ---------------------------------------------------------------- criterion 8
SuiteResult suite_tree() {
    SuiteResult result{"tree", true, {}};
    json failures = json::array();
    const auto start = Clock::now();

    // Correctness against the shadow prefix-scan array; dyadic weights keep
    // every prefix sum exact so results must match bit for bit.
    Rng rng = make_rng(9800);
    WeightedIndexTree tree;
    std::map<int, double> shadow;
    const int universe = 1 << 12;
    long long mismatches = 0;
    int searches = 0;
    for (int op = 0; op < 100000; ++op) {
        const int key = uniform_index(rng, universe);
        const double roll = uniform01(rng);
        if (roll < 0.6 || shadow.empty()) {
            const double w = (1 + static_cast<int>(uniform01(rng) * 4096)) / 32.0;
            tree.update(key, w);
            shadow[key] = w;
        } else if (roll < 0.85) {
            if (shadow.count(key)) {
                tree.erase(key);
                shadow.erase(key);
            }
        } else if (!shadow.empty()) {
            double total = 0.0;
            for (const auto& [k2, w] : shadow) total += w;
            if (std::abs(total - tree.sum()) > 1e-12 * std::max(total, 1.0)) ++mismatches;
            const double ell = uniform01(rng) * total;
            double prefix = 0.0;
            int expect = shadow.rbegin()->first;
            for (const auto& [k2, w] : shadow) {
                if (prefix >= ell) {
                    expect = k2;
                    break;
                }
                prefix += w;
            }
            if (tree.range_search(ell) != expect) ++mismatches;
            ++searches;
        }
    }
    while (searches < 10000 && !shadow.empty()) {
        const double ell = uniform01(rng) * tree.sum();
        double prefix = 0.0;
        int expect = shadow.rbegin()->first;
        for (const auto& [k2, w] : shadow) {
            if (prefix >= ell) {
                expect = k2;
                break;
            }
            prefix += w;
        }
        if (tree.range_search(ell) != expect) ++mismatches;
        ++searches;
    }
    check(failures, "shadow-array agreement", mismatches == 0,
          {{"mismatches", mismatches}, {"searches", searches}});

    // Amortized scaling: mean per-op time should grow well below 2x per
    // doubling of the key universe.
    std::vector<double> per_op;
    for (int logn = 10; logn <= 16; ++logn) {
        const int n = 1 << logn;
        double best = 1e300;
        for (int rep = 0; rep < 3; ++rep) {
            WeightedIndexTree t;
            Rng r = make_rng(9801 + rep);
            for (int k = 0; k < n / 2; ++k) t.update(2 * k, 1.0 + (k % 7));
            const int ops = 200000;
            const auto t0 = Clock::now();
            for (int op = 0; op < ops; ++op) {
                const int key = uniform_index(r, n);
                const double roll = uniform01(r);
                if (roll < 0.5 || t.empty()) {
                    t.update(key, 1.0 + (op % 13));
                } else if (roll < 0.75) {
                    if (t.contains(key)) t.erase(key);
                } else {
                    (void)t.select(uniform01(r) * t.sum());
                }
            }
            best = std::min(best, seconds_since(t0) / ops);
        }
        per_op.push_back(best);
    }
    bool scaling_ok = true;
    for (std::size_t k = 1; k < per_op.size(); ++k)
        scaling_ok = scaling_ok && per_op[k] < 2.0 * per_op[k - 1];
    check(failures, "per-op growth under doubling", scaling_ok,
          {{"per_op_seconds", per_op}});

    const double elapsed = seconds_since(start);
    check(failures, "runtime", elapsed < 60.0, {{"seconds", elapsed}});
    result.details = {{"mismatches", mismatches},
                      {"per_op_seconds", per_op},
                      {"seconds", elapsed},
                      {"failures", failures}};
    result.pass = failures.empty();
    return result;
}

// ---------------------------------------------------------------- criterion 9
SuiteResult suite_sphere() {
    SuiteResult result{"sphere", true, {}};
    json failures = json::array();
    const auto start = Clock::now();
    boost::math::quadrature::tanh_sinh<double> integrator;

    auto moment = [&](int N, double b, int power) {
        if (N == 1) {
            // discrete marginal on {-1, +1}
            return power % 2 ? std::tanh(b) : 1.0;
        }
        const double expo = 0.5 * (N - 3);
        auto density = [&](double y) {
            return std::exp(b * y) * std::pow(std::max(1.0 - y * y, 0.0), expo);
        };
        const double z = integrator.integrate(density, -1.0, 1.0);
        auto num = [&](double y) { return std::pow(y, power) * density(y); };
        return integrator.integrate(num, -1.0, 1.0) / z;
    };

    Rng rng = make_rng(9900);
    double worst_sigma = 0.0;
    for (int N : {1, 2, 3, 4, 7, 12}) {
        for (double b : {0.0, 0.5, 2.0, 20.0}) {
            const int samples = 100000;
            std::vector<double> ys(samples);
            for (int s = 0; s < samples; ++s)
                ys[s] = sample_sphere_marginal(N, b, 1e-4, rng);
            for (int power : {1, 2, 3, 4}) {
                const double expect = moment(N, b, power);
                double emp = 0.0, emp2 = 0.0;
                for (double y : ys) {
                    const double v = std::pow(y, power);
                    emp += v;
                    emp2 += v * v;
                }
                emp /= samples;
                emp2 /= samples;
                const double se = std::sqrt(std::max(emp2 - emp * emp, 0.0) / samples);
                const double sigmas = std::abs(emp - expect) / std::max(se, 1e-9);
                worst_sigma = std::max(worst_sigma, sigmas);
                if (sigmas >= 4.0)
                    check(failures,
                          "moment N=" + std::to_string(N) + " b=" + std::to_string(b) +
                              " p=" + std::to_string(power),
                          false, {{"sigmas", sigmas}, {"emp", emp}, {"expect", expect}});
            }
        }
    }

    // N = 3 exact-CDF anchors at 20 quantiles.
    double worst_cdf = 0.0;
    for (double b : {0.5, 2.0, 20.0}) {
        const int samples = 100000;
        std::vector<double> ys(samples);
        for (int s = 0; s < samples; ++s) ys[s] = sample_sphere_marginal(3, b, 1e-4, rng);
        std::sort(ys.begin(), ys.end());
        auto cdf = [b](double y) {
            // (exp(b y) - exp(-b)) / (exp(b) - exp(-b)), overflow-free
            return (std::exp(b * (y - 1.0)) - std::exp(-2.0 * b)) / -std::expm1(-2.0 * b);
        };
        for (int q = 1; q <= 20; ++q) {
            const double level = q / 21.0;
            const double quant = ys[static_cast<std::size_t>(level * samples)];
            worst_cdf = std::max(worst_cdf, std::abs(cdf(quant) - level));
        }
    }
    check(failures, "N=3 cdf quantiles", worst_cdf < 0.01, {{"worst", worst_cdf}});

    const double elapsed = seconds_since(start);
    check(failures, "runtime", elapsed < 180.0, {{"seconds", elapsed}});
    result.details = {{"worst_moment_sigmas", worst_sigma},
                      {"worst_cdf_gap", worst_cdf},
                      {"seconds", elapsed},
                      {"failures", failures}};
    result.pass = failures.empty();
    return result;
}

// --------------------------------------------------------------- criterion 10
SuiteResult suite_slice_limit() {
    SuiteResult result{"slice-limit", true, {}};
    json failures = json::array();
    const auto start = Clock::now();
    double worst_mass = 0.0, worst_tv = 0.0;
    const double gamma = 200.0;
    for (const auto& [n, k] : std::vector<std::pair<int, int>>{{8, 2}, {10, 0}, {9, 3}}) {
        const IsingModel base = random_dense_model(n, 0.3, 0.4, 0.0, 9950 + n);
        // confine around the slice: absorb the cross term of
        // -(gamma/2n)(S - k)^2 into the field
        std::vector<double> h = base.field();
        for (auto& v : h) v += gamma * k / n;
        const IsingModel confined(n, base.coupling().triplets(), 0.0, h, gamma);
        const auto dist = exact_distribution(confined);

        double off_mass = 0.0;
        std::vector<std::uint32_t> slice;
        for (std::uint32_t idx = 0; idx < (1u << n); ++idx) {
            if (2 * std::popcount(idx) - n == k)
                slice.push_back(idx);
            else
                off_mass += dist.p[idx];
        }
        worst_mass = std::max(worst_mass, off_mass);

        const auto conditional = restrict_distribution(dist, slice);
        const IsingModel sliced = base.with_magnetization(k);
        const auto exact_slice = restrict_distribution(exact_distribution(sliced), slice);
        worst_tv = std::max(worst_tv, tv_distance(conditional, exact_slice));
    }
    const double elapsed = seconds_since(start);
    check(failures, "off-slice mass", worst_mass < 1e-8, {{"worst", worst_mass}});
    check(failures, "on-slice conditional", worst_tv < 1e-8, {{"worst_tv", worst_tv}});
    check(failures, "runtime", elapsed < 30.0, {{"seconds", elapsed}});
    result.details = {{"worst_off_slice_mass", worst_mass},
                      {"worst_conditional_tv", worst_tv},
                      {"seconds", elapsed},
                      {"failures", failures}};
    result.pass = failures.empty();
    return result;
}

// --------------------------------------------------------------- criterion 11
SuiteResult suite_spectra() {
    SuiteResult result{"spectra", true, {}};
    json failures = json::array();
    const auto start = Clock::now();

    int sk_hits = 0;
    for (int seed = 0; seed < 100; ++seed) {
        const IsingModel m = build_sk(500, 1.0, chain_seed(9990, seed));
        const SpectralSummary s = shift_to_psd(m.coupling().dense());
        if (s.lambda_max_tilde > 2.0 * 0.85 && s.lambda_max_tilde < 2.0 * 1.15) ++sk_hits;
    }
    check(failures, "sk top eigenvalue near 2 beta", sk_hits >= 95, {{"hits", sk_hits}});

    int reg_hits = 0;
    const double bound = 2.0 * std::sqrt(3.0) + 0.3;
    for (int seed = 0; seed < 100; ++seed) {
        const Graph g = random_regular(1000, 4, chain_seed(9991, seed));
        const auto adj = g.adjacency_list();
        auto matvec = [&](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
            out.setZero(g.n);
            for (int v = 0; v < g.n; ++v) {
                double s = 0.0;
                for (int u : adj[v]) s += x[u];
                out[v] = s;
            }
        };
        const auto [lo, hi] =
            power_extreme_eigenvalues(matvec, g.n, {Eigen::VectorXd::Ones(g.n)});
        if (std::max(std::abs(lo), std::abs(hi)) <= bound) ++reg_hits;
    }
    check(failures, "regular graph deflated spectrum", reg_hits >= 95,
          {{"hits", reg_hits}, {"bound", bound}});

    const double elapsed = seconds_since(start);
    check(failures, "runtime", elapsed < 300.0, {{"seconds", elapsed}});
    result.details = {{"sk_hits", sk_hits},
                      {"regular_hits", reg_hits},
                      {"seconds", elapsed},
                      {"failures", failures}};
    result.pass = failures.empty();
    return result;
}

} // namespace

std::vector<std::string> suite_names() {
    return {"thresholds", "closed-form",     "stationarity", "polarized-kernel",
            "trickledown", "covariance",     "mixing",       "tree",
            "sphere",      "slice-limit",    "spectra"};
}

SuiteResult run_suite(const std::string& name) {
    if (name == "thresholds") return suite_thresholds();
    if (name == "closed-form") return suite_closed_form();
    if (name == "stationarity") return suite_stationarity();
    if (name == "polarized-kernel") return suite_polarized_kernel();
    if (name == "trickledown") return suite_trickledown();
    if (name == "covariance") return suite_covariance();
    if (name == "mixing") return suite_mixing();
    if (name == "tree") return suite_tree();
    if (name == "sphere") return suite_sphere();
    if (name == "slice-limit") return suite_slice_limit();
    if (name == "spectra") return suite_spectra();
    throw UnknownSuite("unknown verification suite: " + name);
}

} // namespace spinloc
