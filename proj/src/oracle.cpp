#include "spinloc/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "spinloc/glauber.hpp"
#include "spinloc/polarized.hpp"

namespace spinloc {

namespace {

double log_sum_exp(const std::vector<double>& v) {
    double top = -std::numeric_limits<double>::infinity();
    for (double x : v) top = std::max(top, x);
    if (!std::isfinite(top)) return top;
    double s = 0.0;
    for (double x : v) s += std::exp(x - top);
    return top + std::log(s);
}

void check_size(int n, int cap, const char* what) {
    if (n > cap)
        throw TooLarge(std::string(what) + " limited to n <= " + std::to_string(cap));
}

} // namespace

ExactDistribution exact_distribution(const IsingModel& model, bool allow_large) {
    const int n = model.n();
    check_size(n, allow_large ? 22 : 20, "exact enumeration");
    const std::size_t states = std::size_t{1} << n;
    ExactDistribution dist;
    dist.n = n;
    dist.log_weights.assign(states, -std::numeric_limits<double>::infinity());

    const auto& trips = model.coupling().triplets();
    const auto& h = model.field();
    const double gamma = model.gamma();
    std::vector<double> x(n);
    for (std::size_t idx = 0; idx < states; ++idx) {
        long long s = 0;
        for (int b = 0; b < n; ++b) {
            x[b] = (idx >> b) & 1 ? 1.0 : -1.0;
            s += (idx >> b) & 1 ? 1 : -1;
        }
        if (model.magnetization() && s != *model.magnetization()) continue;
        double e = 0.5 * model.diag() * n;
        for (const auto& t : trips) e += t.value * x[t.i] * x[t.j];
        for (int b = 0; b < n; ++b) e += h[b] * x[b];
        e -= gamma / (2.0 * n) * static_cast<double>(s) * static_cast<double>(s);
        dist.log_weights[idx] = e;
    }
    const double lz = log_sum_exp(dist.log_weights);
    dist.p.resize(states);
    for (std::size_t idx = 0; idx < states; ++idx)
        dist.p[idx] = std::exp(dist.log_weights[idx] - lz);
    return dist;
}

Eigen::VectorXd exact_mean(const ExactDistribution& dist) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dist.n);
    for (std::size_t idx = 0; idx < dist.p.size(); ++idx) {
        if (dist.p[idx] == 0.0) continue;
        for (int b = 0; b < dist.n; ++b)
            mean[b] += dist.p[idx] * ((idx >> b) & 1 ? 1.0 : -1.0);
    }
    return mean;
}

Eigen::MatrixXd exact_covariance(const ExactDistribution& dist) {
    const int n = dist.n;
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd x(n);
    for (std::size_t idx = 0; idx < dist.p.size(); ++idx) {
        const double p = dist.p[idx];
        if (p == 0.0) continue;
        for (int b = 0; b < n; ++b) x[b] = (idx >> b) & 1 ? 1.0 : -1.0;
        second.noalias() += p * x * x.transpose();
        mean.noalias() += p * x;
    }
    return second - mean * mean.transpose();
}

namespace {

std::vector<std::uint32_t> slice_states(int n, int k) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t idx = 0; idx < (1u << n); ++idx) {
        const int plus = std::popcount(idx);
        if (2 * plus - n == k) out.push_back(idx);
    }
    return out;
}

} // namespace

ExactKernel exact_kernel(ChainKind kind, const IsingModel& model) {
    const int n = model.n();
    check_size(n, 12, "exact kernels");
    ExactKernel kernel;

    if (kind == ChainKind::Glauber) {
        if (model.magnetization())
            throw ConstraintViolation("Glauber kernel undefined on a slice");
        const std::size_t states = std::size_t{1} << n;
        kernel.states.resize(states);
        for (std::size_t i = 0; i < states; ++i)
            kernel.states[i] = static_cast<std::uint32_t>(i);
        kernel.P = Eigen::MatrixXd::Zero(states, states);
        for (std::size_t idx = 0; idx < states; ++idx) {
            SpinConfig c = SpinConfig::from_bits(model, static_cast<std::uint32_t>(idx));
            for (int i = 0; i < n; ++i) {
                const double p_plus = glauber_plus_probability(model, c, i);
                const std::size_t up = idx | (std::size_t{1} << i);
                const std::size_t down = idx & ~(std::size_t{1} << i);
                kernel.P(idx, up) += p_plus / n;
                kernel.P(idx, down) += (1.0 - p_plus) / n;
            }
        }
        return kernel;
    }

    if (kind == ChainKind::Polarized) {
        if (model.magnetization())
            throw ConstraintViolation("polarized kernel runs on the full hypercube");
        const std::size_t states = std::size_t{1} << n;
        kernel.states.resize(states);
        for (std::size_t i = 0; i < states; ++i)
            kernel.states[i] = static_cast<std::uint32_t>(i);
        kernel.P = Eigen::MatrixXd::Zero(states, states);
        std::unordered_map<std::uint32_t, UpStepLaw> up_laws;
        auto up_law = [&](std::uint32_t t) -> const UpStepLaw& {
            auto it = up_laws.find(t);
            if (it == up_laws.end())
                it = up_laws.emplace(t, up_step_distribution(
                                            model, SpinConfig::from_bits(model, t)))
                         .first;
            return it->second;
        };
        for (std::size_t idx = 0; idx < states; ++idx) {
            std::vector<std::pair<double, std::uint32_t>> downs;
            const int plus = std::popcount(static_cast<std::uint32_t>(idx));
            if (plus < n)
                downs.emplace_back(static_cast<double>(n - plus) / n,
                                   static_cast<std::uint32_t>(idx));
            for (int i = 0; i < n; ++i)
                if ((idx >> i) & 1)
                    downs.emplace_back(1.0 / n,
                                       static_cast<std::uint32_t>(idx & ~(std::size_t{1} << i)));
            for (const auto& [pd, t] : downs) {
                const UpStepLaw& law = up_law(t);
                kernel.P(idx, t) += pd * law.stay;
                for (const auto& [j, pa] : law.add)
                    kernel.P(idx, t | (1u << j)) += pd * pa;
            }
        }
        return kernel;
    }

    // FixedMag
    if (!model.magnetization())
        throw ConstraintViolation("fixed-magnetization kernel needs a slice");
    const int k = *model.magnetization();
    kernel.states = slice_states(n, k);
    const std::size_t states = kernel.states.size();
    kernel.P = Eigen::MatrixXd::Zero(states, states);
    std::unordered_map<std::uint32_t, std::size_t> index_of;
    for (std::size_t i = 0; i < states; ++i) index_of[kernel.states[i]] = i;
    const int m = (n + k) / 2;
    if (m == 0) {
        kernel.P.setIdentity();
        return kernel;
    }
    std::unordered_map<std::uint32_t, std::vector<std::pair<int, double>>> laws;
    for (std::size_t row = 0; row < states; ++row) {
        const std::uint32_t idx = kernel.states[row];
        for (int i = 0; i < n; ++i) {
            if (!((idx >> i) & 1)) continue;
            const std::uint32_t t = idx & ~(1u << i);
            auto it = laws.find(t);
            if (it == laws.end())
                it = laws.emplace(t, slice_up_distribution(
                                         model, SpinConfig::from_bits(model, t)))
                         .first;
            for (const auto& [j, pa] : it->second)
                kernel.P(row, index_of.at(t | (1u << j))) += pa / m;
        }
    }
    return kernel;
}

Eigen::MatrixXd polarized_kernel_from_definition(const IsingModel& model) {
    const int n = model.n();
    check_size(n, 12, "exact kernels");
    const std::size_t states = std::size_t{1} << n;
    const ExactDistribution dist = exact_distribution(model);

    // D^pol as a states x states matrix (subsets indexed by the same bitmask),
    // U^pol from the explicit transition probabilities, composed literally.
    Eigen::MatrixXd down = Eigen::MatrixXd::Zero(states, states);
    for (std::size_t idx = 0; idx < states; ++idx) {
        const int plus = std::popcount(static_cast<std::uint32_t>(idx));
        down(idx, idx) += static_cast<double>(n - plus) / n;
        for (int i = 0; i < n; ++i)
            if ((idx >> i) & 1) down(idx, idx & ~(std::size_t{1} << i)) += 1.0 / n;
    }
    Eigen::VectorXd nu(states);
    for (std::size_t idx = 0; idx < states; ++idx) nu[idx] = dist.p[idx];
    Eigen::VectorXd nu_down = down.transpose() * nu;

    Eigen::MatrixXd up = Eigen::MatrixXd::Zero(states, states);
    for (std::size_t t = 0; t < states; ++t) {
        if (nu_down[t] == 0.0) continue;
        const int plus = std::popcount(static_cast<std::uint32_t>(t));
        up(t, t) += static_cast<double>(n - plus) / n * nu[t] / nu_down[t];
        for (int j = 0; j < n; ++j) {
            if ((t >> j) & 1) continue;
            const std::size_t xp = t | (std::size_t{1} << j);
            up(t, xp) += (1.0 / n) * nu[xp] / nu_down[t];
        }
    }
    return down * up;
}

std::vector<double> restrict_distribution(const ExactDistribution& dist,
                                          const std::vector<std::uint32_t>& states) {
    std::vector<double> out(states.size());
    double total = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        out[i] = dist.p[states[i]];
        total += out[i];
    }
    if (total <= 0.0) throw std::invalid_argument("state list has zero mass");
    for (double& v : out) v /= total;
    return out;
}

double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw LengthMismatch("probability vectors differ in length");
    double sp = 0.0, sq = 0.0, l1 = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        sp += p[i];
        sq += q[i];
        l1 += std::abs(p[i] - q[i]);
    }
    if (std::abs(sp - 1.0) > 1e-9 || std::abs(sq - 1.0) > 1e-9)
        throw std::invalid_argument("inputs must sum to 1");
    return 0.5 * l1;
}

double stationarity_residual(const ExactKernel& kernel, const IsingModel& model) {
    const ExactDistribution dist = exact_distribution(model);
    const std::vector<double> nu = restrict_distribution(dist, kernel.states);
    Eigen::Map<const Eigen::VectorXd> v(nu.data(), nu.size());
    Eigen::VectorXd after = kernel.P.transpose() * v;
    return (after - v).cwiseAbs().sum();
}

double verify_trickledown_pinning(const SubsetDistribution& dist) {
    const int m = dist.m;
    if (m < 1 || m > 24) throw TooLarge("trickle-down check limited to m <= 24");
    if (dist.subsets.empty() || dist.subsets.size() != dist.weights.size())
        throw std::invalid_argument("need matching subsets and weights");
    const int k = std::popcount(dist.subsets.front());
    if (k < 1) throw std::invalid_argument("need subsets of size k >= 1");
    double total = 0.0;
    for (std::size_t r = 0; r < dist.subsets.size(); ++r) {
        if (std::popcount(dist.subsets[r]) != k)
            throw std::invalid_argument("subsets must share one size k");
        if (!(dist.weights[r] > 0.0))
            throw std::invalid_argument("weights must be positive");
        total += dist.weights[r];
    }

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t r = 0; r < dist.subsets.size(); ++r) {
        const double p = dist.weights[r] / total;
        for (int a = 0; a < m; ++a) {
            if (!((dist.subsets[r] >> a) & 1)) continue;
            mean[a] += p;
            for (int b = 0; b < m; ++b)
                if ((dist.subsets[r] >> b) & 1) second(a, b) += p;
        }
    }
    const Eigen::MatrixXd cov0 = second - mean * mean.transpose();

    // E over the pinned element a (law mean_a / k) of the pinned covariance.
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(m, m);
    for (int a = 0; a < m; ++a) {
        if (mean[a] <= 0.0) continue; // zero-marginal elements never pinned
        double za = 0.0;
        Eigen::VectorXd ma = Eigen::VectorXd::Zero(m);
        Eigen::MatrixXd sa = Eigen::MatrixXd::Zero(m, m);
        for (std::size_t r = 0; r < dist.subsets.size(); ++r) {
            if (!((dist.subsets[r] >> a) & 1)) continue;
            const double w = dist.weights[r];
            za += w;
            for (int i = 0; i < m; ++i) {
                if (!((dist.subsets[r] >> i) & 1)) continue;
                ma[i] += w;
                for (int j = 0; j < m; ++j)
                    if ((dist.subsets[r] >> j) & 1) sa(i, j) += w;
            }
        }
        ma /= za;
        sa /= za;
        expected += (mean[a] / k) * (sa - ma * ma.transpose());
    }

    Eigen::MatrixXd ninv_cov = Eigen::MatrixXd::Zero(m, m);
    for (int a = 0; a < m; ++a)
        if (mean[a] > 0.0) ninv_cov.row(a) = cov0.row(a) / mean[a];
    const Eigen::MatrixXd correction = cov0 * ninv_cov / k;

    return (cov0 - expected - correction).cwiseAbs().maxCoeff();
}

SubsetDistribution homogenize_ising(const IsingModel& model) {
    const int n = model.n();
    check_size(n, 12, "homogenized encoding");
    const ExactDistribution dist = exact_distribution(model);
    SubsetDistribution out;
    out.m = 2 * n;
    for (std::uint32_t idx = 0; idx < (1u << n); ++idx) {
        if (dist.p[idx] <= 0.0) continue;
        std::uint32_t subset = idx; // +1 sites as elements i
        for (int i = 0; i < n; ++i)
            if (!((idx >> i) & 1)) subset |= (1u << (n + i)); // -1 sites as n+i
        out.subsets.push_back(subset);
        out.weights.push_back(dist.p[idx]);
    }
    return out;
}

std::vector<double> empirical_distribution(const std::vector<std::uint32_t>& samples, int n) {
    check_size(n, 20, "empirical distribution");
    std::vector<double> p(std::size_t{1} << n, 0.0);
    for (auto s : samples) p.at(s) += 1.0;
    for (double& v : p) v /= static_cast<double>(samples.size());
    return p;
}

Eigen::MatrixXd empirical_covariance(const std::vector<std::vector<std::int8_t>>& samples) {
    if (samples.empty()) throw std::invalid_argument("need at least one sample");
    const int n = static_cast<int>(samples.front().size());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd x(n);
    for (const auto& s : samples) {
        for (int i = 0; i < n; ++i) x[i] = s[i];
        mean += x;
        second.noalias() += x * x.transpose();
    }
    mean /= static_cast<double>(samples.size());
    second /= static_cast<double>(samples.size());
    return second - mean * mean.transpose();
}

} // namespace spinloc
