#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spinloc/glauber.hpp"
#include "spinloc/graphs.hpp"
#include "spinloc/model.hpp"
#include "spinloc/oracle.hpp"
#include "spinloc/polarized.hpp"
#include "spinloc/sphere.hpp"
#include "spinloc/thresholds.hpp"
#include "spinloc/verify.hpp"

using namespace spinloc;
using nlohmann::json;

namespace {

int thread_cap() {
    if (const char* env = std::getenv("SPINLOC_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

struct GenSpec {
    std::string kind;
    std::map<std::string, double> params;
};

GenSpec parse_gen(const std::string& text) {
    GenSpec spec;
    const auto colon = text.find(':');
    spec.kind = text.substr(0, colon);
    if (colon != std::string::npos) {
        std::stringstream rest(text.substr(colon + 1));
        std::string item;
        while (std::getline(rest, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos)
                throw CLI::ValidationError("--gen", "expected key=value in " + item);
            spec.params[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
        }
    }
    return spec;
}

double param(const GenSpec& spec, const std::string& key, std::optional<double> fallback = {}) {
    const auto it = spec.params.find(key);
    if (it != spec.params.end()) return it->second;
    if (fallback) return *fallback;
    throw CLI::ValidationError("--gen", spec.kind + " needs parameter " + key);
}

IsingModel build_from_spec(const GenSpec& spec, std::uint64_t seed) {
    const std::uint64_t model_seed = chain_seed(seed, 0x6d6f64656cULL);
    if (spec.kind == "sk")
        return build_sk(static_cast<int>(param(spec, "n")), param(spec, "beta"), model_seed);
    if (spec.kind == "hopfield")
        return build_hopfield(static_cast<int>(param(spec, "n")),
                              static_cast<int>(param(spec, "m")), param(spec, "beta"),
                              model_seed);
    if (spec.kind == "antiferro-regular") {
        const Graph g = random_regular(static_cast<int>(param(spec, "n")),
                                       static_cast<int>(param(spec, "d")), model_seed);
        return build_antiferro(g, param(spec, "beta"), {}, param(spec, "delta", 0.1)).model;
    }
    if (spec.kind == "antiferro-gnp") {
        const Graph g = erdos_renyi(static_cast<int>(param(spec, "n")),
                                    param(spec, "p"), model_seed);
        return build_antiferro(g, param(spec, "beta"), {}, param(spec, "delta", 0.1)).model;
    }
    if (spec.kind == "confined") {
        const int n = static_cast<int>(param(spec, "n"));
        std::optional<int> k;
        if (spec.params.count("k")) k = static_cast<int>(param(spec, "k"));
        return IsingModel(n, {}, 0.0, std::vector<double>(n, param(spec, "h", 0.0)),
                          param(spec, "gamma", 0.0), k);
    }
    throw CLI::ValidationError("--gen", "unknown generator kind " + spec.kind);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

void write_spins_csv(std::ostream& out, const std::vector<std::vector<std::int8_t>>& rows) {
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << static_cast<int>(row[i]);
        out << "\n";
    }
}

// ----------------------------------------------------------------- threshold
int cmd_threshold(double eta, const std::string& mode, double rho, double z_max,
                  double step, double cap, const std::string& out_path) {
    if (eta < 0.0 || eta > 1.0) {
        std::cerr << "error: eta must lie in [0, 1]\n";
        return 2;
    }
    std::ostringstream body;
    body << "z,q,integral\n";
    std::optional<double> blowup;
    if (mode == "ising") {
        const QCurve curve = solve_q_eta(eta, z_max, step, cap);
        for (std::size_t k = 0; k < curve.z.size(); ++k)
            body << curve.z[k] << "," << curve.values[k] << "," << curve.integral[k]
                 << "\n";
        blowup = curve.blowup_z;
    } else if (mode == "semilogconcave") {
        const QCurve curve = solve_q_semilogconcave(
            eta, [rho](double) { return rho; }, z_max, step, cap);
        for (std::size_t k = 0; k < curve.z.size(); ++k)
            body << curve.z[k] << "," << curve.values[k] << "," << curve.integral[k]
                 << "\n";
        blowup = curve.blowup_z;
    } else if (mode == "closed-form") {
        if (eta == 0.0) {
            std::cerr << "error: closed form is undefined at eta = 0\n";
            return 2;
        }
        const double pole = s_of_eta(eta) / rho;
        double integral = 0.0, prev = q_closed_form(eta, rho, 0.0);
        body << 0.0 << "," << prev << "," << 0.0 << "\n";
        for (double z = step; z < std::min(z_max, pole); z += step) {
            const double q = q_closed_form(eta, rho, z);
            integral += 0.5 * step * (prev + q);
            body << z << "," << q << "," << integral << "\n";
            prev = q;
            if (q > cap) break;
        }
        if (pole <= z_max) blowup = pole;
    } else {
        std::cerr << "error: unknown mode " << mode << "\n";
        return 2;
    }
    body << "# blowup_z=";
    if (blowup)
        body << *blowup << "\n";
    else
        body << "none\n";
    if (out_path.empty()) {
        std::cout << body.str();
    } else {
        open_out(out_path) << body.str();
    }
    return 0;
}

// -------------------------------------------------------------------- sample
struct SampleArgs {
    std::string chain;
    std::string model_path;
    std::string gen;
    std::string out_path;
    std::string start = "allminus";
    long long steps = 0;
    long long thin = 1;
    std::uint64_t seed = 0;
    double eps = 0.01;
    int chains = 1;
    int spin_dim = 1;
    bool verify = false;
    bool verify_stationarity_small = false;
    std::string kernel_dump;
};

SpinConfig make_start(const IsingModel& model, const std::string& start, Rng& rng) {
    if (start == "allplus") return SpinConfig::all_plus(model);
    if (start == "random") {
        if (!model.magnetization()) return SpinConfig::random(model, rng);
        // random on-slice start: shuffle a parity-consistent assignment
        const int n = model.n();
        const int m = (n + *model.magnetization()) / 2;
        std::vector<std::int8_t> x(n, -1);
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        for (int i = 0; i < m; ++i) x[order[i]] = 1;
        return SpinConfig(model, std::move(x));
    }
    if (!model.magnetization()) return SpinConfig::all_minus(model);
    const int n = model.n();
    const int m = (n + *model.magnetization()) / 2;
    std::vector<std::int8_t> x(n, -1);
    for (int i = 0; i < m; ++i) x[i] = 1;
    return SpinConfig(model, std::move(x));
}

int cmd_sample(const SampleArgs& args) {
    if (args.eps <= 0.0 || args.eps >= 1.0) {
        std::cerr << "error: eps must lie in (0, 1)\n";
        return 2;
    }
    const auto wall_start = std::chrono::steady_clock::now();

    std::optional<IsingModel> model;
    if (!args.model_path.empty())
        model = IsingModel::load(args.model_path);
    else if (!args.gen.empty())
        model = build_from_spec(parse_gen(args.gen), args.seed);
    else {
        std::cerr << "error: sample needs --model or --gen\n";
        return 2;
    }

    const bool on_glauber = args.chain == "on-glauber";
    if (!on_glauber && args.chain != "glauber" && args.chain != "polarized" &&
        args.chain != "fixedmag") {
        std::cerr << "error: unknown chain " << args.chain << "\n";
        return 2;
    }
    if (args.chain == "glauber" && model->magnetization()) {
        std::cerr << "error: glauber refuses magnetization-constrained models\n";
        return 2;
    }
    if (args.chain == "fixedmag" && !model->magnetization()) {
        std::cerr << "error: fixedmag needs a model with magnetization set\n";
        return 2;
    }

    json summary;
    summary["chain"] = args.chain;
    summary["steps"] = args.steps;
    summary["thin"] = args.thin;
    summary["seed"] = args.seed;
    summary["chains"] = args.chains;
    summary["n"] = model->n();

    std::ostringstream csv;
    double magnetization_sum = 0.0;
    long long magnetization_count = 0;

    if (on_glauber) {
        // couplings reused; scalar fields embed along e_1
        std::vector<Eigen::VectorXd> fields(model->n(),
                                            Eigen::VectorXd::Zero(args.spin_dim));
        for (int i = 0; i < model->n(); ++i) fields[i][0] = model->field()[i];
        const ONModel on(model->n(), args.spin_dim, model->coupling().triplets(),
                         std::move(fields));
        const double step_eps = on_step_epsilon(on.n(), args.eps);
        for (int c = 0; c < args.chains; ++c) {
            Rng rng = make_rng(chain_seed(args.seed, c));
            ONConfig config = ONConfig::aligned(on);
            for (long long s = 0; s < args.steps; ++s) {
                on_glauber_step(on, config, step_eps, rng);
                if ((s + 1) % std::max<long long>(args.thin, 1) == 0) {
                    for (int i = 0; i < on.n(); ++i)
                        for (int d = 0; d < args.spin_dim; ++d)
                            csv << ((i + d) ? "," : "") << config.spin(i)[d];
                    csv << "\n";
                }
            }
        }
        summary["spin_dim"] = args.spin_dim;
        summary["per_step_eps"] = step_eps;
    } else {
        std::vector<std::vector<std::vector<std::int8_t>>> outputs(args.chains);
        const int pool = std::min(args.chains, thread_cap());
        std::vector<std::thread> workers;
        std::atomic<int> next{0};
        auto work = [&]() {
            for (int c = next++; c < args.chains; c = next++) {
                Rng rng = make_rng(chain_seed(args.seed, c));
                SpinConfig start = make_start(*model, args.start, rng);
                auto emit = [&](const SpinConfig& cfg) {
                    outputs[c].push_back(cfg.spins());
                };
                if (args.chain == "glauber") {
                    ChainState state(std::move(start), chain_seed(args.seed, c) ^ 1);
                    run_chain(*model, state, args.steps, args.thin, emit);
                } else {
                    PolarizedState state(*model, std::move(start));
                    emit(state.config());
                    for (long long s = 1; s <= args.steps; ++s) {
                        if (args.chain == "polarized")
                            polarized_step(*model, state, rng);
                        else
                            fixed_mag_step(*model, state, rng);
                        if (s % std::max<long long>(args.thin, 1) == 0)
                            emit(state.config());
                    }
                }
            }
        };
        for (int t = 0; t < pool; ++t) workers.emplace_back(work);
        for (auto& w : workers) w.join();
        for (const auto& rows : outputs) {
            write_spins_csv(csv, rows);
            for (const auto& row : rows) {
                long long s = 0;
                for (auto v : row) s += v;
                magnetization_sum += static_cast<double>(s) / row.size();
                ++magnetization_count;
            }
        }
        if (magnetization_count)
            summary["empirical_magnetization"] = magnetization_sum / magnetization_count;
    }

    if (args.verify && !on_glauber && model->n() <= 20) {
        // TV between the last emitted states across chains and the oracle
        const auto dist = exact_distribution(*model);
        summary["oracle_note"] =
            "tv computed from final states of all chains against the exact law";
        std::vector<std::uint32_t> finals;
        std::istringstream reread(csv.str());
        std::string line, last;
        std::vector<std::string> lines;
        while (std::getline(reread, line)) lines.push_back(line);
        const std::size_t rows_per_chain = lines.size() / std::max(args.chains, 1);
        for (int c = 0; c < args.chains; ++c) {
            const std::string& row = lines[(c + 1) * rows_per_chain - 1];
            std::uint32_t bits = 0;
            std::stringstream ss(row);
            std::string cell;
            int idx = 0;
            while (std::getline(ss, cell, ','))
                bits |= (std::stoi(cell) > 0 ? 1u : 0u) << idx++;
            finals.push_back(bits);
        }
        summary["tv_to_oracle"] =
            tv_distance(empirical_distribution(finals, model->n()), dist.p);
    }
    if (args.verify_stationarity_small && !on_glauber) {
        const IsingModel small =
            model->n() <= 8 ? *model : model->truncated(8);
        const ChainKind kind = args.chain == "glauber"
                                   ? ChainKind::Glauber
                                   : (args.chain == "polarized" ? ChainKind::Polarized
                                                                : ChainKind::FixedMag);
        const IsingModel checked =
            kind == ChainKind::FixedMag
                ? small.with_magnetization(small.n() % 2 ? 1 : 0)
                : small;
        summary["stationarity_residual_small"] =
            stationarity_residual(exact_kernel(kind, checked), checked);
    }
    if (!args.kernel_dump.empty() && !on_glauber) {
        if (model->n() > 12) {
            std::cerr << "error: --kernel-dump needs n <= 12\n";
            return 2;
        }
        const ChainKind kind = args.chain == "glauber"
                                   ? ChainKind::Glauber
                                   : (args.chain == "polarized" ? ChainKind::Polarized
                                                                : ChainKind::FixedMag);
        const ExactKernel kernel = exact_kernel(kind, *model);
        auto out = open_out(args.kernel_dump);
        out << "state";
        for (auto s : kernel.states) out << "," << s;
        out << "\n";
        for (Eigen::Index r = 0; r < kernel.P.rows(); ++r) {
            out << kernel.states[r];
            for (Eigen::Index c = 0; c < kernel.P.cols(); ++c) out << "," << kernel.P(r, c);
            out << "\n";
        }
    }

    summary["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start)
            .count();

    if (args.out_path.empty()) {
        std::cout << csv.str();
        std::cerr << summary.dump(2) << "\n";
    } else {
        open_out(args.out_path) << csv.str();
        open_out(args.out_path + ".summary.json") << summary.dump(2) << "\n";
    }
    return 0;
}

// --------------------------------------------------------------------- bench
int cmd_bench(const std::string& what) {
    if (what == "tree" || what == "all") {
        WeightedIndexTree t;
        Rng rng = make_rng(1);
        const int n = 1 << 14;
        for (int k = 0; k < n; ++k) t.update(k, 1.0 + (k % 5));
        const int ops = 2000000;
        const auto start = std::chrono::steady_clock::now();
        for (int op = 0; op < ops; ++op) {
            const int key = uniform_index(rng, n);
            if (op % 2)
                t.update(key, 1.0 + (op % 9));
            else
                (void)t.select(uniform01(rng) * t.sum());
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << "tree_ops_per_sec," << static_cast<long long>(ops / secs) << "\n";
    }
    if (what == "chain" || what == "all") {
        const IsingModel m = build_sk(1024, 0.2, 7);
        Rng rng = make_rng(2);
        PolarizedState state(m, SpinConfig::all_minus(m));
        const int steps = 20000;
        const auto start = std::chrono::steady_clock::now();
        for (int s = 0; s < steps; ++s) polarized_step(m, state, rng);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << "polarized_steps_per_sec," << static_cast<long long>(steps / secs)
                  << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spin-system sampling toolkit"};
    app.require_subcommand(1);

    // threshold
    auto* threshold = app.add_subcommand("threshold", "mixing-threshold curves as CSV");
    double eta = 0.0, rho = 1.0, z_max = 2.0, step = 1e-4, cap = 1e6;
    std::string mode = "ising", out_path;
    threshold->add_option("--eta", eta)->required();
    threshold->add_option("--mode", mode)->check(CLI::IsMember({"ising", "closed-form", "semilogconcave"}));
    threshold->add_option("--rho", rho);
    threshold->add_option("--z-max", z_max);
    threshold->add_option("--step", step);
    threshold->add_option("--cap", cap);
    threshold->add_option("--out", out_path);

    // graph gen
    auto* graph = app.add_subcommand("graph", "graph utilities");
    auto* graph_gen = graph->add_subcommand("gen", "generate a random graph");
    std::string graph_kind = "regular", graph_out;
    int graph_n = 0, graph_d = 3;
    double graph_p = 0.1;
    std::uint64_t graph_seed = 0;
    graph_gen->add_option("--kind", graph_kind)->check(CLI::IsMember({"regular", "gnp"}));
    graph_gen->add_option("--n", graph_n)->required();
    graph_gen->add_option("--d", graph_d);
    graph_gen->add_option("--p", graph_p);
    graph_gen->add_option("--seed", graph_seed)->required();
    graph_gen->add_option("--out", graph_out);

    // model gen
    auto* model_cmd = app.add_subcommand("model", "model utilities");
    auto* model_gen = model_cmd->add_subcommand("gen", "generate a model file");
    std::string model_spec, model_out;
    std::uint64_t model_seed = 0;
    model_gen->add_option("--gen", model_spec)->required();
    model_gen->add_option("--seed", model_seed)->required();
    model_gen->add_option("--out", model_out)->required();

    // sample
    auto* sample = app.add_subcommand("sample", "run a Markov chain");
    SampleArgs sargs;
    sample->add_option("--chain", sargs.chain)->required();
    sample->add_option("--model", sargs.model_path);
    sample->add_option("--gen", sargs.gen);
    sample->add_option("--steps", sargs.steps);
    sample->add_option("--thin", sargs.thin);
    sample->add_option("--seed", sargs.seed)->required();
    sample->add_option("--eps", sargs.eps);
    sample->add_option("--chains", sargs.chains);
    sample->add_option("--spin-dim", sargs.spin_dim);
    sample->add_option("--start", sargs.start)
        ->check(CLI::IsMember({"allminus", "allplus", "random"}));
    sample->add_option("--out", sargs.out_path);
    sample->add_flag("--verify", sargs.verify);
    sample->add_flag("--verify-stationarity-small", sargs.verify_stationarity_small);
    sample->add_option("--kernel-dump", sargs.kernel_dump);

    // verify
    auto* verify = app.add_subcommand("verify", "run a named acceptance suite");
    std::string suite;
    verify->add_option("suite", suite)->required();

    // bench
    auto* bench = app.add_subcommand("bench", "micro-benchmarks");
    std::string bench_what = "all";
    bench->add_option("--what", bench_what)->check(CLI::IsMember({"tree", "chain", "all"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (threshold->parsed())
            return cmd_threshold(eta, mode, rho, z_max, step, cap, out_path);
        if (graph_gen->parsed()) {
            const Graph g = graph_kind == "regular"
                                ? random_regular(graph_n, graph_d, graph_seed)
                                : erdos_renyi(graph_n, graph_p, graph_seed);
            if (graph_out.empty()) {
                for (const auto& [u, v] : g.edges) std::cout << u << " " << v << "\n";
            } else {
                save_edge_list(g, graph_out);
            }
            return 0;
        }
        if (model_gen->parsed()) {
            build_from_spec(parse_gen(model_spec), model_seed).save(model_out);
            return 0;
        }
        if (sample->parsed()) return cmd_sample(sargs);
        if (verify->parsed()) {
            if (suite == "all") {
                bool all_pass = true;
                json report = json::array();
                for (const auto& name : suite_names()) {
                    const SuiteResult r = run_suite(name);
                    all_pass = all_pass && r.pass;
                    report.push_back({{"suite", r.name}, {"pass", r.pass},
                                      {"details", r.details}});
                    std::cerr << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << "\n";
                }
                std::cout << report.dump(2) << "\n";
                return all_pass ? 0 : 1;
            }
            const SuiteResult r = run_suite(suite);
            std::cout << json({{"suite", r.name}, {"pass", r.pass}, {"details", r.details}})
                             .dump(2)
                      << "\n";
            return r.pass ? 0 : 1;
        }
        if (bench->parsed()) return cmd_bench(bench_what);
    } catch (const UnknownSuite& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
