#include "spinloc/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>

namespace spinloc {

namespace {

const boost::math::normal_distribution<double> unit_normal;

double norm_cdf(double x) { return boost::math::cdf(unit_normal, x); }
double norm_quantile(double p) { return boost::math::quantile(unit_normal, p); }

} // namespace

ONModel::ONModel(int n, int N, std::vector<Triplet> triplets,
                 std::vector<Eigen::VectorXd> fields)
    : coupling(n, std::move(triplets)), h(std::move(fields)), spin_dim(N) {
    if (N < 1) throw BadDimension("spin dimension must be >= 1");
    if (h.empty()) h.assign(n, Eigen::VectorXd::Zero(N));
    if (static_cast<int>(h.size()) != n) throw std::invalid_argument("field count mismatch");
    for (const auto& f : h)
        if (f.size() != N) throw std::invalid_argument("field dimension mismatch");
}

ONConfig::ONConfig(const ONModel& model, std::vector<Eigen::VectorXd> spins)
    : spins_(std::move(spins)) {
    if (static_cast<int>(spins_.size()) != model.n())
        throw std::invalid_argument("spin count mismatch");
    for (auto& s : spins_) {
        if (s.size() != model.spin_dim) throw std::invalid_argument("spin dimension mismatch");
        if (std::abs(s.norm() - 1.0) > 1e-9) throw std::invalid_argument("spins must be unit");
        s /= s.norm();
    }
    fields_.resize(spins_.size());
    for (int i = 0; i < model.n(); ++i) {
        fields_[i] = model.h[i];
        for (const auto& e : model.coupling.row(i)) fields_[i] += e.v * spins_[e.j];
    }
}

ONConfig ONConfig::aligned(const ONModel& model) {
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(model.spin_dim);
    e1[0] = 1.0;
    return ONConfig(model, std::vector<Eigen::VectorXd>(model.n(), e1));
}

ONConfig ONConfig::random(const ONModel& model, Rng& rng) {
    std::vector<Eigen::VectorXd> spins(model.n());
    for (auto& s : spins) s = uniform_sphere(model.spin_dim, rng);
    return ONConfig(model, std::move(spins));
}

void ONConfig::set_spin(const ONModel& model, int i, const Eigen::VectorXd& value) {
    const Eigen::VectorXd delta = value - spins_[i];
    for (const auto& e : model.coupling.row(i)) fields_[e.j] += e.v * delta;
    spins_[i] = value;
}

double ONConfig::max_cache_error(const ONModel& model) const {
    double worst = 0.0;
    for (int i = 0; i < model.n(); ++i) {
        Eigen::VectorXd fresh = model.h[i];
        for (const auto& e : model.coupling.row(i)) fresh += e.v * spins_[e.j];
        worst = std::max(worst, (fresh - fields_[i]).cwiseAbs().maxCoeff());
    }
    return worst;
}

double ONConfig::max_norm_error() const {
    double worst = 0.0;
    for (const auto& s : spins_) worst = std::max(worst, std::abs(s.norm() - 1.0));
    return worst;
}

double first_doubling_point(const std::function<double(double)>& V, double kappa,
                            double limit) {
    if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
    const double sign = limit < 0.0 ? -1.0 : 1.0;
    const double bound = std::abs(limit);
    double x = 1.0 / std::sqrt(kappa);
    while (x < bound) {
        if (V(sign * x) >= 0.5) return sign * x;
        x *= 2.0;
    }
    return limit;
}

namespace {

struct Envelope {
    // q is 1 on [x_minus, x_plus] and exp(-(x - xe)/(2 xe) - (x - xe)^2 / 2)
    // beyond the end xe of the flat part, truncated to [a, b].
    double a, b, x_minus, x_plus;
    double mass_left, mass_flat, mass_right;

    double log_q(double x) const {
        if (x >= x_minus && x <= x_plus) return 0.0;
        const double xe = x > x_plus ? x_plus : x_minus;
        const double u = std::abs(x - xe);
        return -u / (2.0 * std::abs(xe)) - 0.5 * u * u;
    }
};

double tail_mass(double xe, double extent) {
    // int_0^extent exp(-u/(2|xe|) - u^2/2) du via the normal cdf
    if (extent <= 0.0) return 0.0;
    const double mu = 1.0 / (2.0 * std::abs(xe));
    return std::exp(0.5 * mu * mu) * std::sqrt(2.0 * M_PI) *
           (norm_cdf(std::min(extent, 40.0) + mu) - norm_cdf(mu));
}

double sample_tail_offset(double xe, double extent, Rng& rng) {
    // u in [0, extent] with density prop. to exp(-u/(2|xe|) - u^2/2)
    const double mu = 1.0 / (2.0 * std::abs(xe));
    const double lo = norm_cdf(mu);
    const double hi = norm_cdf(std::min(extent, 40.0) + mu);
    const double p = lo + uniform01(rng) * (hi - lo);
    return std::max(0.0, norm_quantile(p) - mu);
}

Envelope build_envelope(const Potential1D& pot, const std::function<double(double)>& Vt,
                        double a, double b, double kappa) {
    (void)pot;
    Envelope env;
    env.a = a;
    env.b = b;
    env.x_plus = first_doubling_point(Vt, kappa, b);
    env.x_minus = first_doubling_point(Vt, kappa, a);
    env.mass_flat = env.x_plus - env.x_minus;
    env.mass_right = env.x_plus < b ? tail_mass(env.x_plus, b - env.x_plus) : 0.0;
    env.mass_left = env.x_minus > a ? tail_mass(env.x_minus, env.x_minus - a) : 0.0;
    return env;
}

double draw_envelope(const Envelope& env, Rng& rng) {
    const double total = env.mass_flat + env.mass_left + env.mass_right;
    const double u = uniform01(rng) * total;
    if (u < env.mass_flat) return env.x_minus + uniform01(rng) * env.mass_flat;
    if (u < env.mass_flat + env.mass_right)
        return env.x_plus + sample_tail_offset(env.x_plus, env.b - env.x_plus, rng);
    return env.x_minus - sample_tail_offset(env.x_minus, env.x_minus - env.a, rng);
}

} // namespace

double envelope_reject(const Potential1D& pot, double eps, Rng& rng) {
    if (!(pot.alpha > 0.0)) throw InvalidPotential("need V'' >= alpha > 0");
    if (!(pot.a < 0.0 && pot.b > 0.0)) throw InvalidPotential("need a < 0 < b");
    if (std::abs(pot.V(0.0)) > 1e-9) throw InvalidPotential("need V(0) = 0");
    {
        const double h = 1e-6;
        const double d0 = (pot.V(h) - pot.V(-h)) / (2.0 * h);
        if (std::abs(d0) > 1e-9 * std::max(1.0, pot.beta))
            throw InvalidPotential("need V'(0) = 0");
    }
    // Rescale so the curvature lower bound is 1.
    const double s = std::sqrt(pot.alpha);
    auto Vt = [&](double x) { return pot.V(x / s); };
    const double a = pot.a * s;
    const double b = pot.b * s;
    const double kappa = std::max(pot.beta / pot.alpha, 1.0);
    Envelope env = build_envelope(pot, Vt, a, b, kappa);

    // Conservative lower bound on the acceptance rate; the loop count makes
    // the fallback branch contribute at most eps in total variation.
    constexpr double kAcceptFloor = 0.05;
    const int rounds = std::max(
        1, static_cast<int>(std::ceil(std::log(1.0 / std::min(std::max(eps, 1e-300), 1.0)) /
                                      -std::log1p(-kAcceptFloor))));
    for (int round = 0; round < rounds; ++round) {
        const double x = draw_envelope(env, rng);
        const double log_ratio = -Vt(x) - env.log_q(x);
        // The envelope dominates exp(-Vt) by construction; tolerate rounding.
        if (log_ratio > 1e-9) throw InvalidPotential("envelope domination violated");
        if (std::log(std::max(uniform01(rng), 1e-300)) < log_ratio) return x / s;
    }
    // Fallback (probability <= eps): uniform over the flat region.
    return (env.x_minus + uniform01(rng) * env.mass_flat) / s;
}

Eigen::VectorXd uniform_sphere(int N, Rng& rng) {
    if (N < 1) throw BadDimension("spin dimension must be >= 1");
    Eigen::VectorXd v(N);
    double norm2 = 0.0;
    do {
        for (int i = 0; i < N; ++i) v[i] = normal01(rng);
        norm2 = v.squaredNorm();
    } while (norm2 == 0.0);
    return v / std::sqrt(norm2);
}

namespace {

// y ~ (1 - y^2)^{(N-3)/2} via the symmetric Beta((N-1)/2, (N-1)/2).
double beta_symmetric(int N, Rng& rng) {
    const double shape = 0.5 * (N - 1);
    std::gamma_distribution<double> gamma(shape, 1.0);
    double u = gamma(rng), v = gamma(rng);
    while (u + v == 0.0) {
        u = gamma(rng);
        v = gamma(rng);
    }
    return 2.0 * u / (u + v) - 1.0;
}

double marginal_n2(double b, double eps, Rng& rng) {
    // theta density exp(b cos theta) on [-pi, pi): quadrant rejection around
    // the restriction to [-pi/4, pi/4).
    Potential1D pot;
    pot.V = [b](double t) { return b * (1.0 - std::cos(t)); };
    pot.a = -M_PI / 4.0;
    pot.b = M_PI / 4.0;
    pot.alpha = b / std::sqrt(2.0);
    pot.beta = b;
    const int rounds =
        std::max(1, static_cast<int>(std::ceil(std::log(2.0 / eps) / -std::log1p(-0.25))));
    double theta = 0.0;
    bool accepted = false;
    for (int round = 0; round < rounds && !accepted; ++round) {
        const double tilde = envelope_reject(pot, eps / (2.0 * rounds), rng);
        const int u = uniform_index(rng, 4);
        theta = tilde + u * M_PI / 2.0;
        if (theta >= M_PI) theta -= 2.0 * M_PI;
        const double log_acc = b * (std::cos(theta) - std::cos(tilde));
        if (std::log(std::max(uniform01(rng), 1e-300)) < log_acc) accepted = true;
    }
    if (!accepted) theta = (uniform01(rng) * 2.0 - 1.0) * M_PI;
    return std::cos(theta);
}

double marginal_n3(double b, Rng& rng) {
    // Inverse of F(y) = (exp(b y) - exp(-b)) / b, written so exp(b) never
    // overflows: y = 1 + log(u + (1 - u) exp(-2b)) / b for u ~ U(0, 1].
    const double u = 1.0 - uniform01(rng);
    return 1.0 + std::log(u + (1.0 - u) * std::exp(-2.0 * b)) / b;
}

double marginal_high(int N, double b, double eps, Rng& rng) {
    const double nm3 = static_cast<double>(N - 3);
    const double c = nm3 / b;
    const double y0 = 0.5 * (std::sqrt(c * c + 4.0) - c);
    auto V = [&](double y) {
        if (y <= -1.0 || y >= 1.0) return std::numeric_limits<double>::infinity();
        return -b * y - 0.5 * nm3 * std::log1p(-y * y);
    };
    const double v0 = V(y0);
    const double scale = std::sqrt(nm3);
    Potential1D pot;
    pot.V = [&, v0](double x) { return V(x / scale + y0) - v0; };
    pot.a = scale * (-1.0 - y0);
    pot.b = scale * (1.0 - y0);
    pot.alpha = 1.0; // V'' >= N-3 absorbed by the scale substitution
    // Level points where V - v0 reaches 1/2, by bisection toward each end;
    // the curvature bound beta is V''/(N-3) at those points.
    auto level_point = [&](double side_end) {
        double lo = 0.0, hi = std::abs(side_end);
        const double sgn = side_end < 0.0 ? -1.0 : 1.0;
        if (pot.V(sgn * hi * (1.0 - 1e-12)) < 0.5) return side_end;
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            (pot.V(sgn * mid) >= 0.5 ? hi : lo) = mid;
        }
        return sgn * hi;
    };
    const double bp = level_point(pot.b);
    const double ap = level_point(pot.a);
    auto curvature = [&](double x) {
        const double y = x / scale + y0;
        return (1.0 + y * y) / ((1.0 - y * y) * (1.0 - y * y));
    };
    pot.beta = std::max({curvature(ap * (1.0 - 1e-9)), curvature(bp * (1.0 - 1e-9)), 1.0});
#ifndef NDEBUG
    // The level points must bracket the sub-1/2 region.
    for (int t = 0; t <= 100; ++t) {
        const double x = pot.a + (pot.b - pot.a) * t / 100.0;
        if ((x < ap || x > bp) && pot.V(x) < 0.5 - 1e-9)
            throw std::logic_error("level points do not enclose the V < 1/2 region");
    }
#endif
    const double x = envelope_reject(pot, eps, rng);
    return std::clamp(x / scale + y0, -1.0, 1.0);
}

} // namespace

double sample_sphere_marginal(int N, double b, double eps, Rng& rng) {
    if (N < 1) throw BadDimension("spin dimension must be >= 1");
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (b < 0.0) return -sample_sphere_marginal(N, -b, eps, rng); // antipodal symmetry
    if (N == 1) {
        const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * b));
        return uniform01(rng) < p_plus ? 1.0 : -1.0;
    }
    if (b < 1e-12) return beta_symmetric(N, rng);
    if (N == 2) return marginal_n2(b, eps, rng);
    if (N == 3) return marginal_n3(b, rng);
    return marginal_high(N, b, eps, rng);
}

Eigen::VectorXd sample_conditional_spin(const Eigen::VectorXd& w, double eps, Rng& rng) {
    const int N = static_cast<int>(w.size());
    if (N < 1) throw BadDimension("spin dimension must be >= 1");
    const double b = w.norm();
    if (b == 0.0) return uniform_sphere(N, rng);
    const double y = sample_sphere_marginal(N, b, eps, rng);

    Eigen::VectorXd s = Eigen::VectorXd::Zero(N);
    s[0] = y;
    if (N > 1) {
        Eigen::VectorXd v(N - 1);
        double norm2 = 0.0;
        do {
            for (int i = 0; i + 1 < N; ++i) v[i] = normal01(rng);
            norm2 = v.squaredNorm();
        } while (norm2 == 0.0);
        v /= std::sqrt(norm2);
        const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
        s.tail(N - 1) = r * v;
    }

    // Householder reflection taking e_1 to w/|w|.
    Eigen::VectorXd what = w / b;
    Eigen::VectorXd u = what;
    u[0] -= 1.0;
    const double un2 = u.squaredNorm();
    if (un2 > 1e-24) s -= (2.0 * u.dot(s) / un2) * u;
    const double norm = s.norm();
    return norm > 0.0 ? Eigen::VectorXd(s / norm) : what;
}

void on_glauber_step(const ONModel& model, ONConfig& config, double eps, Rng& rng) {
    const int i = uniform_index(rng, model.n());
    config.set_spin(model, i, sample_conditional_spin(config.field(i), eps, rng));
}

double on_step_epsilon(int n, double eps_total) {
    const double t = std::ceil(n * std::log(n / eps_total));
    return eps_total / std::max(t, 1.0);
}

double envelope_acceptance_estimate(const Potential1D& pot, int rounds, Rng& rng) {
    const double s = std::sqrt(pot.alpha);
    auto Vt = [&](double x) { return pot.V(x / s); };
    const double kappa = std::max(pot.beta / pot.alpha, 1.0);
    Envelope env = build_envelope(pot, Vt, pot.a * s, pot.b * s, kappa);
    int accepted = 0;
    for (int round = 0; round < rounds; ++round) {
        const double x = draw_envelope(env, rng);
        const double log_ratio = -Vt(x) - env.log_q(x);
        if (std::log(std::max(uniform01(rng), 1e-300)) < log_ratio) ++accepted;
    }
    return static_cast<double>(accepted) / rounds;
}

} // namespace spinloc
