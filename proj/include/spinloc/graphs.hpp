#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinloc/model.hpp"

namespace spinloc {

struct Infeasible : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct IsolatedVertex : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyGraph : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Simple undirected graph: sorted unique edge pairs (i < j).
struct Graph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<int> degree;

    Graph() = default;
    Graph(int n, std::vector<std::pair<int, int>> edges);

    int d_max() const;
    int d_min() const;
    std::vector<std::vector<int>> adjacency_list() const;
};

// Configuration-model pairing, restarted until simple; every degree exactly d.
Graph random_regular(int n, int d, std::uint64_t seed);

// Each pair independently present with probability p.
Graph erdos_renyi(int n, double p, std::uint64_t seed);

struct SpectralLambda {
    double lambda2;     // second largest adjacency eigenvalue
    double lambda_min;  // smallest adjacency eigenvalue
    double lambda_G;    // max_{i != 1} |1 - lambda_i(normalized Laplacian)|
};

SpectralLambda spectral_lambda(const Graph& g);

// Iterative counterpart used for cross-validation and n > 3000:
// deflates the top eigenvector before power iteration.
SpectralLambda spectral_lambda_iterative(const Graph& g, double tol = 1e-8);

// Edge-list text format: one "i j" pair per line, 0-based.
void save_edge_list(const Graph& g, const std::string& path);
Graph load_edge_list(const std::string& path);

// Antiferromagnetic Ising measure exp(-(beta/2)<x,Ax> + <h,x>) rewritten with
// J = ((1-delta)/4) I + beta ((d_max/n) 11^T - A) and gamma = beta d_max,
// which leaves the measure unchanged and makes J PSD whenever
// beta <= ((1-delta)/4) / (d_max - d_min + d_max lambda(G)).
struct AntiferroResult {
    IsingModel model;
    SpectralSummary summary;
    bool polarized_guarantee; // beta within the threshold above
    double beta_threshold;
};

AntiferroResult build_antiferro(const Graph& adjacency, double beta,
                                std::vector<double> h, double delta_check);

} // namespace spinloc
