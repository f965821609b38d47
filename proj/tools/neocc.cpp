// neocc - non-exhaustive overlapping co-clustering CLI.
//
// Subcommands:
//   run       co-cluster a matrix and write U.tsv/V.tsv/trace.csv/summary.json
//   eval      best-match F1 between a result and ground-truth labels
//   spy       permutation, cluster intervals, and optional SVG spy plot
//   estimate  suggest (alpha, beta) per side from a disjoint pre-clustering
//
// Exit codes: 0 success, 2 input/parse error, 3 validation or semantic error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "neocc/core.hpp"
#include "neocc/eval.hpp"
#include "neocc/io.hpp"
#include "neocc/objective.hpp"
#include "neocc/parallel.hpp"
#include "neocc/solver.hpp"

namespace fs = std::filesystem;

namespace {

struct RunConfig {
    std::string input;
    std::string format = "auto";
    std::string output;
    std::string truth;
    std::string init_u;
    std::string init_v;
    neocc::NeoParams params;
    std::string objective = "M";
    bool emit_svg = false;
    bool dense_output = false;
};

neocc::MatrixFormat parse_format(const std::string& s) {
    if (s == "auto") return neocc::MatrixFormat::Auto;
    if (s == "dense-csv") return neocc::MatrixFormat::DenseCsv;
    if (s == "matrix-market") return neocc::MatrixFormat::MatrixMarket;
    throw neocc::ValidationError("unknown format '" + s + "'");
}

int cmd_run(RunConfig& cfg) {
    cfg.params.objective =
        cfg.objective == "RCM" ? neocc::Objective::RCM : neocc::Objective::M;

    const neocc::DataMatrix x = neocc::read_matrix(cfg.input, parse_format(cfg.format));
    neocc::validate(cfg.params, x.rows(), x.cols());

    std::optional<std::pair<neocc::AssignmentMatrix, neocc::AssignmentMatrix>> init;
    if (!cfg.init_u.empty()) {
        init = std::make_pair(neocc::read_assignment_tsv(cfg.init_u, cfg.params.k),
                              neocc::read_assignment_tsv(cfg.init_v, cfg.params.l));
    }

    std::optional<neocc::GroundTruth> truth;
    if (!cfg.truth.empty()) {
        const auto t = neocc::read_assignment_tsv(cfg.truth);
        neocc::GroundTruth gt;
        gt.n_points = t.points();
        for (neocc::Index p = 0; p < t.points(); ++p)
            gt.labels.push_back(t.point_clusters(p));
        truth = std::move(gt);
    }

    const neocc::CoClusterResult result = neocc::neo_cc(x, cfg.params, std::move(init));

    fs::create_directories(cfg.output);
    const fs::path out(cfg.output);
    neocc::write_assignment_tsv((out / "U.tsv").string(), result.U);
    neocc::write_assignment_tsv((out / "V.tsv").string(), result.V);
    neocc::write_trace_csv((out / "trace.csv").string(), result.trace);
    nlohmann::json summary = neocc::summary_json(result, x.rows(), x.cols());

    if (truth) {
        if (truth->n_points != x.cols())
            throw neocc::ValidationError("truth labels cover " +
                                         std::to_string(truth->n_points) +
                                         " points but the matrix has " +
                                         std::to_string(x.cols()) + " columns");
        const double f1 = neocc::f1_score(neocc::clusters_of(result.V), truth->clusters());
        summary["f1_col"] = f1;
        std::printf("F1 (columns vs truth): %.1f\n", 100.0 * f1);
    }
    neocc::write_summary_json((out / "summary.json").string(), summary);

    if (cfg.dense_output) {
        neocc::write_dense_assignment_tsv((out / "U_dense.tsv").string(), result.U);
        neocc::write_dense_assignment_tsv((out / "V_dense.tsv").string(), result.V);
    }
    if (cfg.emit_svg) {
        const neocc::SpyLayout layout = neocc::spy_permutation(result);
        neocc::write_spy_svg((out / "spy.svg").string(), x, layout);
    }

    std::printf("objective=%s k=%lld l=%lld iterations=%d converged=%s\n",
                neocc::objective_name(cfg.params.objective),
                static_cast<long long>(cfg.params.k), static_cast<long long>(cfg.params.l),
                result.iterations, result.converged ? "yes" : "no");
    std::printf("final objective: %.6g\n", result.trace.back());
    std::printf("row outliers: %zu  col outliers: %zu\n", result.row_outliers.size(),
                result.col_outliers.size());
    std::printf("results written to %s\n", cfg.output.c_str());
    return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& truth_path,
             const std::string& side) {
    std::string pred_file = pred_path;
    if (fs::is_directory(pred_path))
        pred_file = (fs::path(pred_path) / (side == "row" ? "U.tsv" : "V.tsv")).string();

    const auto pred = neocc::read_assignment_tsv(pred_file);
    const auto truth = neocc::read_assignment_tsv(truth_path);
    if (pred.points() != truth.points())
        throw neocc::ValidationError("index universes differ: predicted has " +
                                     std::to_string(pred.points()) + " points, truth has " +
                                     std::to_string(truth.points()));
    const double f1 = neocc::f1_score(neocc::clusters_of(pred), neocc::clusters_of(truth));
    std::printf("%.1f\n", 100.0 * f1);
    return 0;
}

int cmd_spy(const std::string& result_dir, const std::string& input,
            const std::string& format, const std::string& output, bool emit_svg) {
    const fs::path rdir(result_dir);
    const auto summary = neocc::read_json((rdir / "summary.json").string());
    const auto k = summary.at("params").at("k").get<neocc::Index>();
    const auto l = summary.at("params").at("l").get<neocc::Index>();

    neocc::CoClusterResult result;
    result.U = neocc::read_assignment_tsv((rdir / "U.tsv").string(), k);
    result.V = neocc::read_assignment_tsv((rdir / "V.tsv").string(), l);
    const neocc::DataMatrix x = neocc::read_matrix(input, parse_format(format));
    if (x.rows() != result.U.points() || x.cols() != result.V.points())
        throw neocc::ValidationError("matrix dimensions do not match the result files");

    const neocc::SpyLayout layout = neocc::spy_permutation(result);
    const fs::path out = output.empty() ? rdir : fs::path(output);
    fs::create_directories(out);
    neocc::write_order_txt((out / "row_order.txt").string(), layout.rows.order);
    neocc::write_order_txt((out / "col_order.txt").string(), layout.cols.order);
    neocc::write_summary_json((out / "intervals.json").string(), neocc::intervals_json(layout));
    if (emit_svg) neocc::write_spy_svg((out / "spy.svg").string(), x, layout);
    std::printf("spy artifacts written to %s\n", out.string().c_str());
    return 0;
}

int cmd_estimate(const std::string& input, const std::string& format, neocc::Index k,
                 neocc::Index l, double delta, double gamma, std::uint64_t seed) {
    const neocc::DataMatrix x = neocc::read_matrix(input, parse_format(format));
    const neocc::ParamEstimate est = neocc::estimate_params(x, k, l, delta, gamma, seed);
    std::printf("%.6g %.6g %.6g %.6g\n", est.alpha_r, est.beta_r, est.alpha_c, est.beta_c);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"non-exhaustive overlapping co-clustering"};
    app.require_subcommand(1);

    int threads = 0;

    RunConfig run;
    auto* run_cmd_p = app.add_subcommand("run", "co-cluster a matrix");
    run_cmd_p->add_option("input", run.input, "input matrix file")->required();
    run_cmd_p->add_option("--format", run.format, "auto | dense-csv | matrix-market")
        ->default_str("auto");
    run_cmd_p->add_option("--k", run.params.k, "row cluster count")->required();
    run_cmd_p->add_option("--l", run.params.l, "column cluster count")->required();
    run_cmd_p->add_option("--alpha-r", run.params.alpha_r, "row overlap ratio");
    run_cmd_p->add_option("--beta-r", run.params.beta_r, "row outlier ratio");
    run_cmd_p->add_option("--alpha-c", run.params.alpha_c, "column overlap ratio");
    run_cmd_p->add_option("--beta-c", run.params.beta_c, "column outlier ratio");
    run_cmd_p->add_option("--objective", run.objective, "M | RCM")->default_str("M");
    run_cmd_p->add_option("--t-max", run.params.t_max, "maximum iterations");
    run_cmd_p->add_option("--tol", run.params.tol, "relative objective-change threshold");
    run_cmd_p->add_option("--seed", run.params.seed, "random seed");
    run_cmd_p->add_option("--output", run.output, "output directory")->required();
    run_cmd_p->add_option("--truth", run.truth, "column ground-truth labels (TSV)");
    auto* init_u_opt = run_cmd_p->add_option("--init-u", run.init_u, "initial U (TSV)");
    auto* init_v_opt = run_cmd_p->add_option("--init-v", run.init_v, "initial V (TSV)");
    init_u_opt->needs(init_v_opt);
    init_v_opt->needs(init_u_opt);
    run_cmd_p->add_flag("--emit-svg", run.emit_svg, "also write spy.svg");
    run_cmd_p->add_flag("--dense-output", run.dense_output, "also write dense 0/1 grids");

    std::string eval_pred, eval_truth, eval_side = "col";
    auto* eval_cmd_p = app.add_subcommand("eval", "F1 against ground truth");
    eval_cmd_p->add_option("pred", eval_pred, "result directory or assignment TSV")->required();
    eval_cmd_p->add_option("truth", eval_truth, "ground-truth labels (TSV)")->required();
    eval_cmd_p->add_option("--side", eval_side, "col | row (when pred is a directory)")
        ->check(CLI::IsMember({"col", "row"}));

    std::string spy_dir, spy_input, spy_format = "auto", spy_output;
    bool spy_svg = false;
    auto* spy_cmd_p = app.add_subcommand("spy", "reorder rows/columns by cluster");
    spy_cmd_p->add_option("result", spy_dir, "result directory from `run`")->required();
    spy_cmd_p->add_option("input", spy_input, "the clustered matrix file")->required();
    spy_cmd_p->add_option("--format", spy_format, "auto | dense-csv | matrix-market");
    spy_cmd_p->add_option("--output", spy_output, "output directory (default: result dir)");
    spy_cmd_p->add_flag("--emit-svg", spy_svg, "also write spy.svg");

    std::string est_input, est_format = "auto";
    neocc::Index est_k = 1, est_l = 1;
    double est_delta = 3.0, est_gamma = 1.2;
    std::uint64_t est_seed = 0;
    auto* est_cmd_p = app.add_subcommand("estimate", "suggest alpha/beta per side");
    est_cmd_p->add_option("input", est_input, "input matrix file")->required();
    est_cmd_p->add_option("--k", est_k, "row cluster count")->required();
    est_cmd_p->add_option("--l", est_l, "column cluster count")->required();
    est_cmd_p->add_option("--delta", est_delta, "outlier threshold in std units");
    est_cmd_p->add_option("--gamma", est_gamma, "near-tie distance ratio");
    est_cmd_p->add_option("--seed", est_seed, "random seed");
    est_cmd_p->add_option("--format", est_format, "auto | dense-csv | matrix-market");

    for (auto* sub : {run_cmd_p, eval_cmd_p, spy_cmd_p, est_cmd_p})
        sub->add_option("--threads", threads, "worker threads (0 = all cores)")
            ->envname("NEOCC_THREADS");

    CLI11_PARSE(app, argc, argv);
    neocc::set_num_threads(threads);

    try {
        if (app.got_subcommand(run_cmd_p)) return cmd_run(run);
        if (app.got_subcommand(eval_cmd_p)) return cmd_eval(eval_pred, eval_truth, eval_side);
        if (app.got_subcommand(spy_cmd_p))
            return cmd_spy(spy_dir, spy_input, spy_format, spy_output, spy_svg);
        if (app.got_subcommand(est_cmd_p))
            return cmd_estimate(est_input, est_format, est_k, est_l, est_delta, est_gamma,
                                est_seed);
    } catch (const neocc::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const neocc::ValidationError& e) {
        std::cerr << "error: invalid configuration:\n";
        for (const auto& v : e.violations) std::cerr << "  - " << v << "\n";
        return 3;
    } catch (const neocc::EmptyClustering& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const neocc::DimensionMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const neocc::DuplicateAssignment& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const neocc::IndexError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const neocc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
