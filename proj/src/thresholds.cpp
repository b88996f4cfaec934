#include "spinloc/thresholds.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace spinloc {

GaussHermite::GaussHermite(int order) {
    if (order < 1) throw std::invalid_argument("quadrature order must be >= 1");
    // Jacobi matrix of the probabilists' Hermite polynomials: zero diagonal,
    // off-diagonal sqrt(k).
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        const double b = std::sqrt(static_cast<double>(k));
        jacobi(k, k - 1) = b;
        jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    nodes.resize(order);
    weights.resize(order);
    for (int k = 0; k < order; ++k) {
        nodes[k] = es.eigenvalues()(k);
        const double v0 = es.eigenvectors()(0, k);
        weights[k] = v0 * v0;
    }
}

double r_ising(double t, int quadrature_order) {
    if (t < 0.0) throw NegativeTime("r(t) needs t >= 0");
    if (t == 0.0) return 1.0;
    static thread_local int cached_order = 64;
    static thread_local GaussHermite quad(64);
    if (quadrature_order != cached_order) {
        quad = GaussHermite(quadrature_order);
        cached_order = quadrature_order;
    }
    const double sqrt_t = std::sqrt(t);
    double plus = 0.0, minus = 0.0;
    for (std::size_t k = 0; k < quad.nodes.size(); ++k) {
        const double g = sqrt_t * quad.nodes[k];
        const double tp = std::tanh(t + g);
        const double tm = std::tanh(-t + g);
        plus += quad.weights[k] * (1.0 - tp * tp);
        minus += quad.weights[k] * (1.0 - tm * tm);
    }
    // The two spin values agree by symmetry; averaging keeps the cross-check.
    return 0.5 * (plus + minus);
}

namespace {

// d/dz of source(z) by centered differences, one-sided at the left edge.
double source_derivative(const std::function<double(double)>& source, double z) {
    const double h = 1e-5;
    if (z >= h)
        return (source(z + h) - source(z - h)) / (2.0 * h);
    return (-3.0 * source(z) + 4.0 * source(z + h) - source(z + 2.0 * h)) / (2.0 * h);
}

QCurve march(double eta, const std::function<double(double)>& source, double z_max,
             double step, double cap) {
    if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
    if (!(cap >= 1e3)) throw std::invalid_argument("divergence cap must be >= 1e3");
    if (!(z_max > 0.0)) throw std::invalid_argument("z_max must be positive");

    auto rhs = [&](double z, double q) {
        return source_derivative(source, z) + q * q;
    };
    auto rk4 = [&](double z, double q, double h) {
        const double k1 = rhs(z, q);
        const double k2 = rhs(z + 0.5 * h, q + 0.5 * h * k1);
        const double k3 = rhs(z + 0.5 * h, q + 0.5 * h * k2);
        const double k4 = rhs(z + h, q + h * k3);
        return q + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    };
    // Accurate integration over a sub-interval, shrinking the internal step
    // as q grows; used by the blow-up bisection.
    auto advance = [&](double z, double q, double length) {
        double done = 0.0;
        while (done < length) {
            if (q > cap || !std::isfinite(q)) return cap * 2.0;
            const double h = std::min({step, length - done, 0.05 / std::max(q, 1.0)});
            q = rk4(z + done, q, h);
            done += h;
        }
        return q;
    };

    QCurve curve;
    curve.eta = eta;
    curve.step = step;
    double z = 0.0;
    double q = source(0.0);
    double integral = 0.0;
    curve.z.push_back(z);
    curve.values.push_back(q);
    curve.integral.push_back(0.0);

    const auto steps = static_cast<long long>(std::ceil(z_max / step - 1e-9));
    for (long long k = 0; k < steps; ++k) {
        const double qn = rk4(z, q, step);
        if (qn > cap || !std::isfinite(qn)) {
            // Bisect the crossing of `cap` inside [z, z + step].
            double lo = 0.0, hi = step;
            while (hi - lo > step * 1e-3) {
                const double mid = 0.5 * (lo + hi);
                (advance(z, q, mid) > cap ? hi : lo) = mid;
            }
            curve.blowup_z = z + hi + 1.0 / cap;
            return curve;
        }
        if (qn > 2.0 * q && q * step < 0.25)
            throw StepTooLarge("q doubled within one step away from blow-up; rerun "
                               "with a smaller step");
        integral += 0.5 * step * (q + qn);
        q = qn;
        z += step;
        curve.z.push_back(z);
        curve.values.push_back(q);
        curve.integral.push_back(integral);
    }
    return curve;
}

} // namespace

QCurve solve_q_eta(double eta, const std::function<double(double)>& r, double z_max,
                   double step, double cap) {
    if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("eta must be in [0, 1]");
    if (eta == 0.0) {
        const double r0 = r(0.0);
        return march(eta, [r0](double) { return r0; }, z_max, step, cap);
    }
    return march(eta, [&, eta](double z) { return r(eta * z); }, z_max, step, cap);
}

QCurve solve_q_eta(double eta, double z_max, double step, double cap) {
    return solve_q_eta(eta, [](double t) { return r_ising(t); }, z_max, step, cap);
}

QCurve solve_q_semilogconcave(double eta, const std::function<double(double)>& rho,
                              double z_max, double step, double cap) {
    if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("eta must be in [0, 1]");
    auto source = [&, eta](double z) {
        const double t = eta * z;
        return 1.0 / (t + 1.0 / rho(t));
    };
    return march(eta, source, z_max, step, cap);
}

std::pair<double, double> q_lambda_roots(double eta) {
    if (!(eta > 0.0)) throw EtaZero("lambda roots are undefined at eta = 0");
    const double disc = std::sqrt(eta * eta + 4.0 * eta);
    return {(eta + disc) / (2.0 * eta), (eta - disc) / (2.0 * eta)};
}

double s_of_eta(double eta) {
    if (!(eta > 0.0)) throw EtaZero("s(eta) is undefined at eta = 0");
    const auto [l1, l2] = q_lambda_roots(eta);
    return (std::pow(std::abs(l1 / l2), 2.0 / (l1 - l2)) - 1.0) / eta;
}

double q_closed_form(double eta, double rho, double z) {
    if (!(eta > 0.0))
        throw EtaZero("closed form needs eta > 0; at eta = 0 the solution is "
                      "1/(1/rho - z)");
    if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
    if (z < 0.0) throw std::invalid_argument("z must be >= 0");
    if (rho * z >= s_of_eta(eta))
        throw BeyondBlowup("rho z beyond the divergence point s(eta)");
    const auto [l1, l2] = q_lambda_roots(eta);
    const double u = eta * rho * z + 1.0;
    const double num = -l1 * l2 * l2 * std::pow(u, l1 - l2) + l1 * l1 * l2;
    const double den = l2 * l2 * std::pow(u, l1 - l2 + 1.0) - l1 * l1 * u;
    return eta * rho * num / den;
}

double ate_constant(const QCurve& curve, double z) {
    if (z < 0.0) throw std::invalid_argument("z must be >= 0");
    if (curve.z.empty() || z > curve.z.back() + 1e-12)
        throw BeyondBlowup("z beyond the last finite grid point");
    if (z >= curve.z.back()) return std::exp(curve.integral.back());
    const double pos = z / curve.step;
    auto k = static_cast<std::size_t>(pos);
    if (k + 1 >= curve.integral.size()) k = curve.integral.size() - 2;
    const double frac = pos - static_cast<double>(k);
    const double value =
        curve.integral[k] + frac * (curve.integral[k + 1] - curve.integral[k]);
    return std::exp(value);
}

} // namespace spinloc
