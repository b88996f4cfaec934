#include "spinloc/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <nlohmann/json.hpp>

namespace spinloc {

using json = nlohmann::json;

CouplingMatrix::CouplingMatrix(int n, std::vector<Triplet> triplets) : n_(n) {
    if (n < 1) throw std::invalid_argument("site count must be >= 1");
    for (auto& t : triplets) {
        if (t.i == t.j) throw ModelFormatError("diagonal triplet not allowed");
        if (t.i > t.j) std::swap(t.i, t.j);
        if (t.i < 0 || t.j >= n)
            throw IndexOutOfRange("triplet index out of range");
    }
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return std::pair{a.i, a.j} < std::pair{b.i, b.j};
    });
    for (std::size_t k = 1; k < triplets.size(); ++k)
        if (triplets[k - 1].i == triplets[k].i && triplets[k - 1].j == triplets[k].j)
            throw ModelFormatError("duplicate coupling pair");
    triplets_ = std::move(triplets);

    std::vector<int> count(n, 0);
    for (const auto& t : triplets_) {
        ++count[t.i];
        ++count[t.j];
    }
    row_ptr_.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) row_ptr_[i + 1] = row_ptr_[i] + count[i];
    entries_.resize(triplets_.size() * 2);
    std::vector<int> fill(row_ptr_.begin(), row_ptr_.end() - 1);
    for (const auto& t : triplets_) {
        entries_[fill[t.i]++] = {t.j, t.value};
        entries_[fill[t.j]++] = {t.i, t.value};
    }
    max_row_nnz_ = *std::max_element(count.begin(), count.end());
}

Eigen::MatrixXd CouplingMatrix::dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_, n_);
    for (const auto& t : triplets_) {
        m(t.i, t.j) = t.value;
        m(t.j, t.i) = t.value;
    }
    return m;
}

double CouplingMatrix::row_dot(int i, std::span<const std::int8_t> x) const {
    double s = 0.0;
    for (const auto& e : row(i)) s += e.v * x[e.j];
    return s;
}

double CouplingMatrix::row_dot(int i, std::span<const double> x) const {
    double s = 0.0;
    for (const auto& e : row(i)) s += e.v * x[e.j];
    return s;
}

IsingModel::IsingModel(int n, std::vector<Triplet> triplets, double diag,
                       std::vector<double> h, double gamma,
                       std::optional<int> magnetization)
    : coupling_(n, std::move(triplets)), diag_(diag), h_(std::move(h)), gamma_(gamma),
      magnetization_(magnetization) {
    if (static_cast<int>(h_.size()) != n)
        throw ModelFormatError("field length must equal site count");
    if (!(gamma_ >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
    if (magnetization_) {
        const int k = *magnetization_;
        if (k < -n || k > n || ((k % 2 + 2) % 2) != (n % 2))
            throw ConstraintViolation("magnetization must satisfy |k| <= n, k = n mod 2");
    }
}

IsingModel IsingModel::with_diag(double diag) const {
    return IsingModel(n(), coupling_.triplets(), diag, h_, gamma_, magnetization_);
}

IsingModel IsingModel::with_magnetization(std::optional<int> k) const {
    return IsingModel(n(), coupling_.triplets(), diag_, h_, gamma_, k);
}

IsingModel IsingModel::truncated(int m) const {
    if (m < 1 || m > n()) throw std::invalid_argument("bad truncation size");
    std::vector<Triplet> kept;
    for (const auto& t : coupling_.triplets())
        if (t.j < m) kept.push_back(t);
    std::vector<double> h(h_.begin(), h_.begin() + m);
    return IsingModel(m, std::move(kept), diag_, std::move(h), gamma_, std::nullopt);
}

std::string IsingModel::to_json() const {
    json j;
    j["n"] = n();
    json trips = json::array();
    for (const auto& t : coupling_.triplets()) trips.push_back({t.i, t.j, t.value});
    j["triplets"] = std::move(trips);
    j["h"] = h_;
    j["gamma"] = gamma_;
    j["magnetization"] = magnetization_ ? json(*magnetization_) : json(nullptr);
    return j.dump();
}

IsingModel IsingModel::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ModelFormatError(std::string("bad model json: ") + e.what());
    }
    try {
        const int n = j.at("n").get<int>();
        std::vector<Triplet> trips;
        for (const auto& t : j.at("triplets")) {
            if (!t.is_array() || t.size() != 3)
                throw ModelFormatError("triplet must be [i, j, value]");
            trips.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<double>()});
        }
        std::vector<double> h = j.at("h").get<std::vector<double>>();
        const double gamma = j.at("gamma").get<double>();
        std::optional<int> k;
        if (j.contains("magnetization") && !j["magnetization"].is_null())
            k = j["magnetization"].get<int>();
        return IsingModel(n, std::move(trips), 0.0, std::move(h), gamma, k);
    } catch (const json::exception& e) {
        throw ModelFormatError(std::string("bad model json: ") + e.what());
    }
}

void IsingModel::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << to_json() << "\n";
}

IsingModel IsingModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

SpinConfig::SpinConfig(const IsingModel& model, std::vector<std::int8_t> x)
    : x_(std::move(x)) {
    if (static_cast<int>(x_.size()) != model.n())
        throw std::invalid_argument("configuration length mismatch");
    for (auto s : x_)
        if (s != 1 && s != -1) throw std::invalid_argument("spins must be +-1");
    local_field_.resize(x_.size());
    spin_sum_ = 0;
    for (int i = 0; i < model.n(); ++i) {
        local_field_[i] = model.coupling().row_dot(i, x_) + model.field()[i];
        spin_sum_ += x_[i];
    }
}

SpinConfig SpinConfig::all_minus(const IsingModel& model) {
    return SpinConfig(model, std::vector<std::int8_t>(model.n(), -1));
}

SpinConfig SpinConfig::all_plus(const IsingModel& model) {
    return SpinConfig(model, std::vector<std::int8_t>(model.n(), 1));
}

SpinConfig SpinConfig::random(const IsingModel& model, Rng& rng) {
    std::vector<std::int8_t> x(model.n());
    for (auto& s : x) s = (rng() & 1) ? 1 : -1;
    return SpinConfig(model, std::move(x));
}

SpinConfig SpinConfig::from_bits(const IsingModel& model, std::uint32_t bits) {
    std::vector<std::int8_t> x(model.n());
    for (int i = 0; i < model.n(); ++i) x[i] = (bits >> i) & 1 ? 1 : -1;
    return SpinConfig(model, std::move(x));
}

std::uint32_t SpinConfig::bits() const {
    std::uint32_t b = 0;
    for (std::size_t i = 0; i < x_.size(); ++i)
        if (x_[i] > 0) b |= (1u << i);
    return b;
}

void SpinConfig::flip(const IsingModel& model, int i) {
    if (i < 0 || i >= n()) throw IndexOutOfRange("site index out of range");
    const double delta = -2.0 * x_[i];
    for (const auto& e : model.coupling().row(i)) local_field_[e.j] += delta * e.v;
    spin_sum_ += static_cast<long long>(delta);
    x_[i] = static_cast<std::int8_t>(-x_[i]);
}

double SpinConfig::fresh_field(const IsingModel& model, int i) const {
    return model.coupling().row_dot(i, x_) + model.field()[i];
}

double SpinConfig::max_cache_error(const IsingModel& model) const {
    double worst = 0.0;
    for (int i = 0; i < n(); ++i)
        worst = std::max(worst, std::abs(local_field_[i] - fresh_field(model, i)));
    return worst;
}

double local_field(const IsingModel& model, const SpinConfig& config, int i) {
    if (i < 0 || i >= model.n()) throw IndexOutOfRange("site index out of range");
    const double gamma_part =
        model.gamma() / model.n() * static_cast<double>(config.spin_sum() - config.spin(i));
    return config.cached_field(i) - gamma_part;
}

namespace {

SpectralSummary summary_from_extremes(double lo, double hi) {
    SpectralSummary s;
    s.lambda_min_tilde = lo;
    s.lambda_max_tilde = hi;
    s.alpha = lo < 0.0 ? -lo : 0.0;
    s.op_norm_J = s.alpha + hi;
    s.eta = s.op_norm_J > 0.0 ? s.alpha / s.op_norm_J : 0.0;
    return s;
}

} // namespace

SpectralSummary shift_to_psd(const Eigen::MatrixXd& j_tilde) {
    if (j_tilde.rows() != j_tilde.cols())
        throw NonSymmetric("matrix must be square");
    const double scale = std::max(1.0, j_tilde.cwiseAbs().maxCoeff());
    if ((j_tilde - j_tilde.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw NonSymmetric("matrix must be symmetric");
    const int n = static_cast<int>(j_tilde.rows());
    if (n <= 2000) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j_tilde,
                                                          Eigen::EigenvaluesOnly);
        return summary_from_extremes(es.eigenvalues()(0), es.eigenvalues()(n - 1));
    }
    auto matvec = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
        out.noalias() = j_tilde * v;
    };
    auto [lo, hi] = power_extreme_eigenvalues(matvec, n);
    return summary_from_extremes(lo, hi);
}

SpectralSummary shift_to_psd(const CouplingMatrix& j_tilde) {
    const int n = j_tilde.n();
    if (n <= 2000) return shift_to_psd(j_tilde.dense());
    auto matvec = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
        out.setZero(n);
        for (const auto& t : j_tilde.triplets()) {
            out[t.i] += t.value * v[t.j];
            out[t.j] += t.value * v[t.i];
        }
    };
    auto [lo, hi] = power_extreme_eigenvalues(matvec, n);
    return summary_from_extremes(lo, hi);
}

std::pair<double, double> power_extreme_eigenvalues(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& matvec, int n,
    const std::vector<Eigen::VectorXd>& deflate, double tol, int max_iter) {
    // Gershgorin-free shift: ||A||_2 <= bound from a few matvecs on random
    // vectors is unreliable, so use power iteration on A and -A with a shift
    // sigma that makes the target end dominant.  sigma = |lambda|_max bound
    // estimated first by plain power iteration.
    Rng rng = make_rng(0x5eedULL);
    auto project = [&](Eigen::VectorXd& v) {
        for (const auto& d : deflate) v -= d.dot(v) / d.squaredNorm() * d;
    };
    auto dominant = [&](const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& mv)
        -> double {
        Eigen::VectorXd v(n), w(n);
        for (int i = 0; i < n; ++i) v[i] = normal01(rng);
        project(v);
        v.normalize();
        double lambda = 0.0;
        for (int it = 0; it < max_iter; ++it) {
            mv(v, w);
            project(w);
            const double next = v.dot(w);
            const double nw = w.norm();
            if (nw == 0.0) return 0.0;
            w /= nw;
            if (it > 0 && std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next))) {
                return next;
            }
            lambda = next;
            v.swap(w);
        }
        return lambda;
    };
    const double radius = std::abs(dominant(matvec)) + tol;
    // lambda_max via A + radius*I, lambda_min via radius*I - A
    auto shifted_up = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
        matvec(v, out);
        out += radius * v;
    };
    auto shifted_down = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
        matvec(v, out);
        out = radius * v - out;
    };
    const double hi = dominant(shifted_up) - radius;
    const double lo = radius - dominant(shifted_down);
    return {lo, hi};
}

IsingModel build_sk(int n, double beta, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (beta < 0.0) throw std::invalid_argument("beta must be >= 0");
    Rng rng = make_rng(seed);
    std::vector<Triplet> trips;
    if (beta > 0.0) {
        const double sd = beta / std::sqrt(static_cast<double>(n));
        trips.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
        std::normal_distribution<double> gauss(0.0, sd);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) trips.push_back({i, j, gauss(rng)});
    }
    return IsingModel(n, std::move(trips), 0.0, std::vector<double>(n, 0.0), 0.0);
}

IsingModel build_hopfield_patterns(int n, double beta,
                                   const std::vector<std::vector<std::int8_t>>& patterns) {
    if (n < 1 || patterns.empty()) throw std::invalid_argument("need n >= 1 and m >= 1");
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd eta(n);
    for (const auto& p : patterns) {
        if (static_cast<int>(p.size()) != n)
            throw std::invalid_argument("pattern length mismatch");
        for (int i = 0; i < n; ++i) eta[i] = p[i];
        j.noalias() += eta * eta.transpose();
    }
    j *= beta / (2.0 * n);
    std::vector<Triplet> trips;
    for (int i = 0; i < n; ++i)
        for (int k = i + 1; k < n; ++k)
            if (j(i, k) != 0.0) trips.push_back({i, k, j(i, k)});
    const double diag = beta * static_cast<double>(patterns.size()) / (2.0 * n);
    return IsingModel(n, std::move(trips), diag, std::vector<double>(n, 0.0), 0.0);
}

IsingModel build_hopfield(int n, int m, double beta, std::uint64_t seed) {
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    Rng rng = make_rng(seed);
    std::vector<std::vector<std::int8_t>> patterns(m, std::vector<std::int8_t>(n));
    for (auto& p : patterns)
        for (auto& s : p) s = (rng() & 1) ? 1 : -1;
    return build_hopfield_patterns(n, beta, patterns);
}

} // namespace spinloc
