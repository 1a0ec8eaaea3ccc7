#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tanova/anova.hpp"
#include "tanova/error.hpp"
#include "tanova/io.hpp"
#include "tanova/report.hpp"
#include "tanova/rng.hpp"
#include "tanova/simgen.hpp"
#include "tanova/tangent_pca.hpp"
#include "tanova/transport.hpp"

namespace {

using namespace tanova;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_between(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

const char* norm_name(MatNorm n) {
    switch (n) {
        case MatNorm::op: return "op";
        case MatNorm::hs: return "hs";
        case MatNorm::trace: return "trace";
    }
    return "?";
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create directory '" + dir + "': " + ec.message());
    }
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

RunReport make_report(const std::string& command, std::uint64_t seed) {
    RunReport rep;
    rep.command = command;
    rep.seed = seed;
    rep.version = version_string();
    return rep;
}

// --rank M / --energy TAU (mutually exclusive; energy keeps essentially all
// variance by default).
struct RankFlags {
    int rank = 0;
    double energy = 1.0 - 1e-8;
    bool rank_given = false;

    RankPolicy policy() const {
        return rank_given ? RankPolicy::fixed(rank) : RankPolicy::energy_frac(energy);
    }
    void attach(CLI::App* cmd) {
        CLI::Option* r = cmd->add_option("--rank", rank, "Reduce to a fixed basis rank");
        CLI::Option* e = cmd->add_option("--energy", energy,
                                         "Reduce to the smallest rank keeping this "
                                         "fraction of pooled variance");
        r->excludes(e);
        r->each([this](const std::string&) { rank_given = true; });
    }
    void echo(nlohmann::json& config) const {
        if (rank_given) {
            config["rank"] = rank;
        } else {
            config["energy"] = energy;
        }
    }
};

struct ReducedInput {
    CurveGroupSet groups;
    Matrix basis;
    bool rank_capped;
    Index original_dim;
};

ReducedInput load_and_reduce(const std::string& input, const RankFlags& flags) {
    CurveGroupSet raw = load_curves(input);
    BasisReduction red = basis_reduce(raw, flags.policy());
    return ReducedInput{std::move(red.reduced), std::move(red.basis), red.rank_capped,
                        raw.dim()};
}

void echo_groups(nlohmann::json& results, const CurveGroupSet& groups) {
    results["group_labels"] = groups.labels();
    results["group_sizes"] = groups.group_sizes();
}

// The descent reports rank problems relative to its inputs; at the CLI level
// the actionable fix is a smaller basis.
TransportResult descend_or_suggest_rank(const std::vector<CovOperator>& covs,
                                        const DescentConfig& cfg) {
    try {
        return frechet_mean(covs, cfg);
    } catch (const RankDeficientMean&) {
    } catch (const RankDeficientInputs&) {
    }
    throw BasisReductionRequired(
        "group covariances are rank-deficient; re-run with --rank at most "
        "(smallest group size - 1)");
}

std::vector<CovOperator> group_covariances(const CurveGroupSet& groups) {
    std::vector<CovOperator> covs;
    covs.reserve(static_cast<size_t>(groups.n_groups()));
    for (const Matrix& g : groups.curves()) covs.push_back(empirical_covariance(g));
    return covs;
}

// Flatten row-major with a leading t column: one covariance snapshot per row.
Matrix flatten_trace(const std::vector<double>& ts, const std::vector<CovOperator>& covs) {
    const Index m = covs.empty() ? 0 : covs.front().dim();
    Matrix out(static_cast<Index>(ts.size()), 1 + m * m);
    for (size_t p = 0; p < ts.size(); ++p) {
        const Index row = static_cast<Index>(p);
        out(row, 0) = ts[p];
        const Matrix& c = covs[p].mat();
        for (Index i = 0; i < m; ++i) {
            for (Index j = 0; j < m; ++j) out(row, 1 + i * m + j) = c(i, j);
        }
    }
    return out;
}

struct SimulateArgs {
    std::string model = "generative";
    Index dim = 50;
    int groups = 3;
    Index curves = 20;
    double concentration = 20.0;
    double kappa = 1.0;
    int n_terms = 10;
    double gamma = 0.0;
    PerturbKind kind = PerturbKind::additive;
    int k1 = 1;
    std::uint64_t seed = 0;
    std::string out;
};

int run_simulate(const SimulateArgs& args) {
    const auto t0 = Clock::now();
    ensure_dir(args.out);

    GenModelConfig gcfg;
    gcfg.dim = args.dim;
    gcfg.concentration = args.concentration;
    gcfg.vonmises_kappa = args.kappa;
    gcfg.n_terms = args.n_terms;
    gcfg.groups = args.groups;

    std::mt19937_64 rng = rng_stream(args.seed);
    std::vector<CovOperator> covs;
    if (args.model == "generative") {
        // Each group has its own random transport of a common origin.
        CovOperator origin = origin_covariance(args.dim, rng);
        for (int j = 0; j < args.groups; ++j) {
            SymMatrix t = generative_map(gcfg, rng);
            covs.push_back(CovOperator(t.mat() * origin.mat() * t.mat()));
        }
    } else {
        // Two-population scenario: k1 groups draw from a perturbation of the
        // base covariance, the rest from the base itself.  The two synthetic
        // bases stand in for the usual male/female growth covariances.
        if (args.k1 < 1 || args.k1 >= args.groups) {
            throw InvalidInput("--k1 must lie in [1, groups-1]");
        }
        CovOperator base_m = origin_covariance(args.dim, rng);
        SymMatrix t = generative_map(gcfg, rng);
        CovOperator base_f(t.mat() * base_m.mat() * t.mat());
        PerturbConfig pcfg;
        pcfg.gamma = args.gamma;
        pcfg.kind = args.kind;
        pcfg.k1 = args.k1;
        CovOperator perturbed = perturb(base_m, base_f, pcfg);
        for (int j = 0; j < args.groups; ++j) {
            covs.push_back(j < args.k1 ? perturbed : base_m);
        }
    }

    std::vector<std::string> labels;
    std::vector<Matrix> curves;
    for (int j = 0; j < args.groups; ++j) {
        labels.push_back("g" + std::to_string(j + 1));
        curves.push_back(sample_gaussian_curves(covs[static_cast<size_t>(j)], args.curves, rng));
    }
    CurveGroupSet set(labels, curves);
    write_curves_csv(join(args.out, "curves.csv"), set);
    const auto t1 = Clock::now();

    RunReport rep = make_report("simulate", args.seed);
    rep.config = {{"model", args.model},
                  {"dim", args.dim},
                  {"groups", args.groups},
                  {"curves", args.curves},
                  {"concentration", args.concentration},
                  {"kappa", args.kappa},
                  {"terms", args.n_terms},
                  {"out", args.out}};
    if (args.model != "generative") {
        rep.config["gamma"] = args.gamma;
        rep.config["kind"] = args.kind == PerturbKind::geodesic ? "geodesic" : "additive";
        rep.config["k1"] = args.k1;
    }
    echo_groups(rep.results, set);
    rep.results["files"] = {"curves.csv"};
    nlohmann::json traces = nlohmann::json::array();
    for (const CovOperator& c : covs) traces.push_back(c.trace());
    rep.results["population_traces"] = traces;
    rep.timings["total_s"] = seconds_between(t0, t1);
    write_report(rep, args.out);
    return 0;
}

struct FrechetArgs {
    std::string input;
    RankFlags rank;
    double tol = 1e-9;
    int max_iters = 100;
    std::string out;
};

int run_frechet(const FrechetArgs& args) {
    const auto t0 = Clock::now();
    ensure_dir(args.out);
    ReducedInput in = load_and_reduce(args.input, args.rank);
    const auto t1 = Clock::now();

    DescentConfig dc;
    dc.grad_tol = args.tol;
    dc.max_iters = args.max_iters;
    TransportResult tr = descend_or_suggest_rank(group_covariances(in.groups), dc);
    const auto t2 = Clock::now();

    std::vector<std::string> files;
    write_matrix_csv(join(args.out, "mean.csv"), tr.mean.mat());
    files.push_back("mean.csv");
    write_matrix_csv(join(args.out, "basis.csv"), in.basis);
    files.push_back("basis.csv");
    for (size_t j = 0; j < tr.maps.size(); ++j) {
        const std::string map_name = "map_" + std::to_string(j + 1) + ".csv";
        const std::string delta_name = "delta_" + std::to_string(j + 1) + ".csv";
        write_matrix_csv(join(args.out, map_name), tr.maps[j].mat());
        write_matrix_csv(join(args.out, delta_name), tr.deviations[j].mat());
        files.push_back(map_name);
        files.push_back(delta_name);
    }
    const auto t3 = Clock::now();

    RunReport rep = make_report("frechet", 0);
    rep.config = {{"input", args.input},
                  {"tol", args.tol},
                  {"max_iters", args.max_iters},
                  {"out", args.out}};
    args.rank.echo(rep.config);
    echo_groups(rep.results, in.groups);
    rep.results["original_dim"] = in.original_dim;
    rep.results["reduced_dim"] = in.groups.dim();
    if (in.rank_capped) {
        rep.results["warnings"] = {"requested rank exceeds the pooled rank; capped"};
    }
    rep.results["converged"] = tr.converged;
    rep.results["iterations"] = tr.iterations;
    rep.results["grad_norm"] = tr.grad_norm;
    rep.results["functional_trace"] = tr.functional_trace;
    rep.results["files"] = files;
    rep.timings["load_s"] = seconds_between(t0, t1);
    rep.timings["descent_s"] = seconds_between(t1, t2);
    rep.timings["write_s"] = seconds_between(t2, t3);
    write_report(rep, args.out);

    if (!tr.converged) {
        std::cerr << "tanova: descent stopped at the iteration cap (grad_norm "
                  << format_double(tr.grad_norm) << ")\n";
    }
    return 0;
}

struct AnovaArgs {
    std::string input;
    MatNorm norm = MatNorm::hs;
    int permutations = 200;
    std::uint64_t seed = 0;
    std::string baseline = "none";
    RankFlags rank;
    std::string out;
};

void write_stats_csv(const std::string& path, const std::vector<double>& stats) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write '" + path + "'");
    }
    for (double s : stats) out << format_double(s) << '\n';
    if (!out) {
        throw IoError("failed writing '" + path + "'");
    }
}

nlohmann::json anova_payload(const AnovaResult& res) {
    return {{"statistic", res.statistic},
            {"p_value", res.p_value},
            {"norm", norm_name(res.norm)},
            {"permutations", res.perm_statistics.size()},
            {"converged_fraction", res.converged_fraction},
            {"observed_converged", res.observed_converged},
            {"observed_iterations", res.observed_iterations}};
}

int run_anova(const AnovaArgs& args) {
    const auto t0 = Clock::now();
    ensure_dir(args.out);
    ReducedInput in = load_and_reduce(args.input, args.rank);
    const auto t1 = Clock::now();

    AnovaConfig cfg;
    cfg.norm = args.norm;
    cfg.permutations = args.permutations;
    cfg.seed = args.seed;
    AnovaResult res = permutation_test(in.groups, cfg);
    const auto t2 = Clock::now();

    std::vector<std::string> files;
    write_stats_csv(join(args.out, "perm_stats.csv"), res.perm_statistics);
    files.push_back("perm_stats.csv");

    RunReport rep = make_report("anova", args.seed);
    rep.config = {{"input", args.input},
                  {"norm", norm_name(args.norm)},
                  {"permutations", args.permutations},
                  {"baseline", args.baseline},
                  {"out", args.out}};
    args.rank.echo(rep.config);
    echo_groups(rep.results, in.groups);
    rep.results["original_dim"] = in.original_dim;
    rep.results["reduced_dim"] = in.groups.dim();
    if (in.rank_capped) {
        rep.results["warnings"] = {"requested rank exceeds the pooled rank; capped"};
    }
    rep.results.update(anova_payload(res));

    if (args.baseline == "sqrt") {
        AnovaResult base = baseline_sqrt_test(in.groups, cfg);
        rep.results["baseline"] = anova_payload(base);
        write_stats_csv(join(args.out, "baseline_perm_stats.csv"), base.perm_statistics);
        files.push_back("baseline_perm_stats.csv");
    }
    const auto t3 = Clock::now();

    rep.results["files"] = files;
    rep.timings["load_s"] = seconds_between(t0, t1);
    rep.timings["test_s"] = seconds_between(t1, t2);
    rep.timings["baseline_s"] = seconds_between(t2, t3);
    write_report(rep, args.out);

    std::cout << "T_" << norm_name(args.norm) << " = " << format_double(res.statistic)
              << ", p = " << format_double(res.p_value) << " (" << args.permutations
              << " permutations)\n";
    return 0;
}

struct PcaArgs {
    std::string input;
    int components = 0;  // 0 = all retained
    int mode_steps = 9;
    double mode_range = 0.0;  // 0 = widest admissible, scaled by 0.9
    RankFlags rank;
    double tol = 1e-9;
    int max_iters = 100;
    std::string out;
};

int run_pca(const PcaArgs& args) {
    const auto t0 = Clock::now();
    ensure_dir(args.out);
    ReducedInput in = load_and_reduce(args.input, args.rank);
    const auto t1 = Clock::now();

    DescentConfig dc;
    dc.grad_tol = args.tol;
    dc.max_iters = args.max_iters;
    TransportResult tr = descend_or_suggest_rank(group_covariances(in.groups), dc);
    TangentPcaResult pca = tangent_pca(tr.deviations, tr.mean);
    const auto t2 = Clock::now();

    const int retained = static_cast<int>(pca.components.size());
    int written = retained;
    nlohmann::json warnings = nlohmann::json::array();
    if (in.rank_capped) {
        warnings.push_back("requested rank exceeds the pooled rank; capped");
    }
    if (args.components > 0 && args.components < written) {
        written = args.components;
    } else if (args.components > retained) {
        warnings.push_back("requested " + std::to_string(args.components) +
                           " components, but only " + std::to_string(retained) +
                           " carry variance (at most K-1); writing " +
                           std::to_string(retained));
    }

    std::vector<std::string> files;
    write_matrix_csv(join(args.out, "eigenvalues.csv"), pca.eigenvalues);
    files.push_back("eigenvalues.csv");
    write_matrix_csv(join(args.out, "scores.csv"), pca.scores.leftCols(written));
    files.push_back("scores.csv");

    nlohmann::json mode_ranges = nlohmann::json::array();
    for (int k = 0; k < written; ++k) {
        // Widest PSD-admissible symmetric-ish range for this direction, kept
        // strictly inside the cone; an explicit --mode-range overrides.
        const Vector mu = sym_eig(pca.components[static_cast<size_t>(k)]).values;
        const double mu_max = mu(0);
        const double mu_min = mu(mu.size() - 1);
        double t_pos = args.mode_range;
        double t_neg = args.mode_range;
        if (args.mode_range <= 0.0) {
            t_pos = mu_min < 0.0 ? 0.9 / (-mu_min) : 1.0;
            t_neg = mu_max > 0.0 ? 0.9 / mu_max : 1.0;
        }
        std::vector<double> ts(static_cast<size_t>(args.mode_steps));
        for (int p = 0; p < args.mode_steps; ++p) {
            const double frac =
                args.mode_steps == 1 ? 0.5
                                     : static_cast<double>(p) /
                                           static_cast<double>(args.mode_steps - 1);
            ts[static_cast<size_t>(p)] = -t_neg + frac * (t_neg + t_pos);
        }
        std::vector<CovOperator> trace = principal_mode_samples(pca, k, ts);
        const std::string name = "mode_" + std::to_string(k + 1) + ".csv";
        write_matrix_csv(join(args.out, name), flatten_trace(ts, trace));
        files.push_back(name);
        mode_ranges.push_back({{"component", k + 1}, {"t_min", -t_neg}, {"t_max", t_pos}});
    }
    const auto t3 = Clock::now();

    RunReport rep = make_report("pca", 0);
    rep.config = {{"input", args.input},
                  {"components", args.components},
                  {"mode_steps", args.mode_steps},
                  {"mode_range", args.mode_range},
                  {"tol", args.tol},
                  {"max_iters", args.max_iters},
                  {"out", args.out}};
    args.rank.echo(rep.config);
    echo_groups(rep.results, in.groups);
    rep.results["original_dim"] = in.original_dim;
    rep.results["reduced_dim"] = in.groups.dim();
    rep.results["converged"] = tr.converged;
    rep.results["iterations"] = tr.iterations;
    rep.results["eigenvalues"] = std::vector<double>(
        pca.eigenvalues.data(), pca.eigenvalues.data() + pca.eigenvalues.size());
    rep.results["variance_proportions"] = std::vector<double>(
        pca.variance_proportions.data(),
        pca.variance_proportions.data() + pca.variance_proportions.size());
    rep.results["components_retained"] = retained;
    rep.results["components_written"] = written;
    rep.results["mode_ranges"] = mode_ranges;
    if (!warnings.empty()) {
        rep.results["warnings"] = warnings;
    }
    rep.results["files"] = files;
    rep.timings["load_s"] = seconds_between(t0, t1);
    rep.timings["descent_s"] = seconds_between(t1, t2);
    rep.timings["write_s"] = seconds_between(t2, t3);
    write_report(rep, args.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Covariance-operator ANOVA via optimal transport"};
    app.require_subcommand(1);

    const std::map<std::string, MatNorm> norm_map{
        {"op", MatNorm::op}, {"hs", MatNorm::hs}, {"trace", MatNorm::trace}};
    const std::map<std::string, PerturbKind> kind_map{{"geodesic", PerturbKind::geodesic},
                                                      {"additive", PerturbKind::additive}};

    SimulateArgs sim;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "Generate synthetic curve groups");
    sim_cmd->add_option("--model", sim.model, "Population model")
        ->check(CLI::IsMember({"generative", "berkeley-style"}));
    sim_cmd->add_option("--dim", sim.dim, "Grid size q")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--groups", sim.groups, "Number of groups K")
        ->check(CLI::Range(1, 1 << 20));
    sim_cmd->add_option("--curves", sim.curves, "Curves per group")
        ->check(CLI::Range(2, 1 << 20));
    sim_cmd->add_option("--concentration", sim.concentration,
                        "Chi-square degrees of freedom of the map amplitudes")
        ->check(CLI::PositiveNumber);
    sim_cmd->add_option("--kappa", sim.kappa, "Von Mises phase concentration")
        ->check(CLI::NonNegativeNumber);
    sim_cmd->add_option("--terms", sim.n_terms, "Sine terms in the generative maps")
        ->check(CLI::PositiveNumber);
    sim_cmd->add_option("--gamma", sim.gamma, "Perturbation size (berkeley-style)")
        ->check(CLI::NonNegativeNumber);
    sim_cmd->add_option("--kind", sim.kind, "Perturbation kind (berkeley-style)")
        ->transform(CLI::CheckedTransformer(kind_map, CLI::ignore_case));
    sim_cmd->add_option("--k1", sim.k1, "Groups receiving the perturbed covariance");
    sim_cmd->add_option("--seed", sim.seed, "RNG seed");
    sim_cmd->add_option("--out", sim.out, "Output directory")->required();

    FrechetArgs fre;
    CLI::App* fre_cmd = app.add_subcommand("frechet", "Transport mean and maps of the groups");
    fre_cmd->add_option("--input", fre.input, "Wide curves CSV")->required();
    fre.rank.attach(fre_cmd);
    fre_cmd->add_option("--tol", fre.tol, "Descent gradient tolerance")
        ->check(CLI::PositiveNumber);
    fre_cmd->add_option("--max-iters", fre.max_iters, "Descent iteration cap")
        ->check(CLI::PositiveNumber);
    fre_cmd->add_option("--out", fre.out, "Output directory")->required();

    AnovaArgs an;
    CLI::App* an_cmd = app.add_subcommand("anova", "Permutation test of covariance equality");
    an_cmd->add_option("--input", an.input, "Wide curves CSV")->required();
    an_cmd->add_option("--norm", an.norm, "Deviation norm")
        ->transform(CLI::CheckedTransformer(norm_map, CLI::ignore_case));
    an_cmd->add_option("--permutations", an.permutations, "Permutation replicates B")
        ->check(CLI::PositiveNumber);
    an_cmd->add_option("--seed", an.seed, "Permutation RNG seed");
    an_cmd->add_option("--baseline", an.baseline, "Also run the square-root-distance baseline")
        ->check(CLI::IsMember({"none", "sqrt"}));
    an.rank.attach(an_cmd);
    an_cmd->add_option("--out", an.out, "Output directory")->required();

    PcaArgs pca;
    CLI::App* pca_cmd = app.add_subcommand("pca", "Tangent-space PCA at the transport mean");
    pca_cmd->add_option("--input", pca.input, "Wide curves CSV")->required();
    pca_cmd->add_option("--components", pca.components,
                        "Components to write (default: all retained)");
    pca_cmd->add_option("--mode-steps", pca.mode_steps, "Samples per principal-mode trace")
        ->check(CLI::PositiveNumber);
    pca_cmd->add_option("--mode-range", pca.mode_range,
                        "Half-width of the mode traces in t (default: widest admissible)");
    pca.rank.attach(pca_cmd);
    pca_cmd->add_option("--tol", pca.tol, "Descent gradient tolerance")
        ->check(CLI::PositiveNumber);
    pca_cmd->add_option("--max-iters", pca.max_iters, "Descent iteration cap")
        ->check(CLI::PositiveNumber);
    pca_cmd->add_option("--out", pca.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim_cmd->parsed()) return run_simulate(sim);
        if (fre_cmd->parsed()) return run_frechet(fre);
        if (an_cmd->parsed()) return run_anova(an);
        if (pca_cmd->parsed()) return run_pca(pca);
    } catch (const Error& e) {
        std::cerr << "tanova: " << e.what() << '\n';
        return e.kind() == ErrorKind::data ? 3 : 4;
    } catch (const std::exception& e) {
        std::cerr << "tanova: " << e.what() << '\n';
        return 4;
    }
    return 2;
}
