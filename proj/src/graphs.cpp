#include "spinloc/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "spinloc/model.hpp"
#include "spinloc/rng.hpp"

namespace spinloc {

Graph::Graph(int n_, std::vector<std::pair<int, int>> edges_) : n(n_), edges(std::move(edges_)) {
    if (n < 1) throw EmptyGraph("graph must have at least one vertex");
    for (auto& [a, b] : edges) {
        if (a == b) throw std::invalid_argument("self-loop not allowed");
        if (a > b) std::swap(a, b);
        if (a < 0 || b >= n) throw std::out_of_range("edge endpoint out of range");
    }
    std::sort(edges.begin(), edges.end());
    for (std::size_t k = 1; k < edges.size(); ++k)
        if (edges[k - 1] == edges[k]) throw std::invalid_argument("duplicate edge");
    degree.assign(n, 0);
    for (const auto& [a, b] : edges) {
        ++degree[a];
        ++degree[b];
    }
}

int Graph::d_max() const { return *std::max_element(degree.begin(), degree.end()); }
int Graph::d_min() const { return *std::min_element(degree.begin(), degree.end()); }

std::vector<std::vector<int>> Graph::adjacency_list() const {
    std::vector<std::vector<int>> adj(n);
    for (const auto& [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    return adj;
}

Graph random_regular(int n, int d, std::uint64_t seed) {
    if (n < 1 || d < 0 || d >= n) throw Infeasible("need 0 <= d < n");
    if ((static_cast<long long>(n) * d) % 2 != 0)
        throw Infeasible("n * d must be even");
    Rng rng = make_rng(seed);
    std::vector<int> stubs(static_cast<std::size_t>(n) * d);
    for (int v = 0; v < n; ++v)
        for (int s = 0; s < d; ++s) stubs[static_cast<std::size_t>(v) * d + s] = v;
    for (int attempt = 0; attempt < 100000; ++attempt) {
        std::shuffle(stubs.begin(), stubs.end(), rng);
        std::set<std::pair<int, int>> seen;
        bool ok = true;
        for (std::size_t k = 0; k + 1 < stubs.size(); k += 2) {
            int a = stubs[k], b = stubs[k + 1];
            if (a == b) { ok = false; break; }
            if (a > b) std::swap(a, b);
            if (!seen.insert({a, b}).second) { ok = false; break; }
        }
        if (ok)
            return Graph(n, {seen.begin(), seen.end()});
    }
    throw std::runtime_error("pairing model failed to produce a simple graph");
}

Graph erdos_renyi(int n, double p, std::uint64_t seed) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("p must be in [0, 1]");
    Rng rng = make_rng(seed);
    std::vector<std::pair<int, int>> edges;
    std::bernoulli_distribution coin(p);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (coin(rng)) edges.emplace_back(i, j);
    return Graph(n, std::move(edges));
}

namespace {

Eigen::MatrixXd adjacency_dense(const Graph& g) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.n, g.n);
    for (const auto& [u, v] : g.edges) {
        a(u, v) = 1.0;
        a(v, u) = 1.0;
    }
    return a;
}

} // namespace

SpectralLambda spectral_lambda(const Graph& g) {
    if (g.n == 0) throw EmptyGraph("empty graph");
    for (int v = 0; v < g.n; ++v)
        if (g.degree[v] == 0)
            throw IsolatedVertex("normalized Laplacian undefined at degree-0 vertex " +
                                 std::to_string(v));
    if (g.n > 3000) return spectral_lambda_iterative(g);
    Eigen::MatrixXd a = adjacency_dense(g);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues(); // ascending
    SpectralLambda out;
    out.lambda2 = ev(g.n - 2 >= 0 ? g.n - 2 : 0);
    out.lambda_min = ev(0);

    Eigen::VectorXd dinv(g.n);
    for (int v = 0; v < g.n; ++v) dinv[v] = 1.0 / std::sqrt(static_cast<double>(g.degree[v]));
    Eigen::MatrixXd na = dinv.asDiagonal() * a * dinv.asDiagonal(); // I - L
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(na, Eigen::EigenvaluesOnly);
    const auto& beta = es2.eigenvalues(); // ascending, top is 1 for connected graphs
    out.lambda_G = std::max(std::abs(beta(0)),
                            g.n >= 2 ? std::abs(beta(g.n - 2)) : 0.0);
    return out;
}

SpectralLambda spectral_lambda_iterative(const Graph& g, double tol) {
    for (int v = 0; v < g.n; ++v)
        if (g.degree[v] == 0)
            throw IsolatedVertex("normalized Laplacian undefined at degree-0 vertex " +
                                 std::to_string(v));
    const auto adj = g.adjacency_list();
    auto matvec = [&](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
        out.setZero(g.n);
        for (int v = 0; v < g.n; ++v) {
            double s = 0.0;
            for (int u : adj[v]) s += x[u];
            out[v] = s;
        }
    };
    // Perron vector deflation; exact only for regular graphs, which is the
    // regime this path serves (lambda2 of near-regular expanders).
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.n);
    Eigen::VectorXd top(g.n);
    for (int v = 0; v < g.n; ++v) top[v] = std::sqrt(static_cast<double>(g.degree[v]));
    auto [lo, hi] = power_extreme_eigenvalues(matvec, g.n, {ones}, tol);
    SpectralLambda out;
    out.lambda2 = hi;
    out.lambda_min = lo;

    Eigen::VectorXd dinv(g.n);
    for (int v = 0; v < g.n; ++v) dinv[v] = 1.0 / std::sqrt(static_cast<double>(g.degree[v]));
    auto nmatvec = [&](const Eigen::VectorXd& x, Eigen::VectorXd& out2) {
        Eigen::VectorXd y = dinv.cwiseProduct(x);
        matvec(y, out2);
        out2 = dinv.cwiseProduct(out2);
    };
    auto [nlo, nhi] = power_extreme_eigenvalues(nmatvec, g.n, {top}, tol);
    out.lambda_G = std::max(std::abs(nlo), std::abs(nhi));
    return out;
}

AntiferroResult build_antiferro(const Graph& g, double beta, std::vector<double> h,
                                double delta_check) {
    if (g.n == 0) throw EmptyGraph("empty graph");
    if (beta < 0.0) throw std::invalid_argument("beta must be >= 0");
    if (h.empty()) h.assign(g.n, 0.0);
    if (static_cast<int>(h.size()) != g.n)
        throw std::invalid_argument("field length mismatch");
    const double dmax = g.edges.empty() ? 0.0 : g.d_max();
    const double dmin = g.edges.empty() ? 0.0 : g.d_min();
    const int n = g.n;

    // Off-diagonal part of (1-delta)/4 I + beta ((d_max/n) 11^T - A):
    // beta (d_max/n) on non-edges, beta (d_max/n - 1) on edges.
    std::set<std::pair<int, int>> edge_set(g.edges.begin(), g.edges.end());
    std::vector<Triplet> trips;
    const double shift = beta * dmax / n;
    if (beta > 0.0) {
        trips.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const double v = shift - (edge_set.count({i, j}) ? beta : 0.0);
                if (v != 0.0) trips.push_back({i, j, v});
            }
    }
    const double alpha = (1.0 - delta_check) / 4.0 + shift;
    IsingModel model(n, std::move(trips), alpha, std::move(h), beta * dmax);

    double lambda_G = 0.0;
    bool isolated = false;
    for (int v = 0; v < n; ++v)
        if (g.degree[v] == 0) isolated = true;
    if (!isolated && !g.edges.empty()) lambda_G = spectral_lambda(g).lambda_G;

    SpectralSummary s;
    s.alpha = alpha;
    // ||beta(U+V)|| <= beta (d_max - d_min + d_max lambda(G)); the stored
    // bound is (1-delta)/4 + that, the PSD-shifted operator norm bound.
    const double off_norm_bound = beta * (dmax - dmin + dmax * lambda_G);
    s.op_norm_J = (1.0 - delta_check) / 4.0 + off_norm_bound;
    s.lambda_max_tilde = off_norm_bound - shift;   // about the uniform diagonal
    s.lambda_min_tilde = -off_norm_bound - shift;
    s.eta = s.op_norm_J > 0.0 ? s.alpha / s.op_norm_J : 0.0;

    AntiferroResult out{std::move(model), s, false, 0.0};
    const double denom = dmax - dmin + dmax * lambda_G;
    out.beta_threshold =
        denom > 0.0 ? (1.0 - delta_check) / 4.0 / denom
                    : std::numeric_limits<double>::infinity();
    out.polarized_guarantee = beta <= out.beta_threshold;
    return out;
}

void save_edge_list(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "# n " << g.n << "\n";
    for (const auto& [u, v] : g.edges) out << u << " " << v << "\n";
}

Graph load_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::vector<std::pair<int, int>> edges;
    int n = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ss(line.substr(1));
            std::string tag;
            if (ss >> tag >> n && tag == "n") continue;
            continue;
        }
        std::istringstream ss(line);
        int u, v;
        if (!(ss >> u >> v)) throw std::runtime_error("bad edge line: " + line);
        edges.emplace_back(u, v);
        n = std::max({n, u + 1, v + 1});
    }
    return Graph(n, std::move(edges));
}

} // namespace spinloc
