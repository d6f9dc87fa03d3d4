// Command-line driver: fit, select, simulate, influence, benchmark.

#include "coclust/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

std::pair<int, int> parse_range(const std::string& text) {
    const auto colon = text.find(':');
    try {
        if (colon == std::string::npos) {
            const int v = std::stoi(text);
            return {v, v};
        }
        return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
    } catch (const std::exception&) {
        throw CLI::ValidationError("range", "expected A:B, got '" + text + "'");
    }
}

} // namespace

int main(int argc, char** argv) {
    using coclust::Command;
    CLI::App app{"Co-clustering of binary data with Gaussian co-variables (Block-EM)"};
    app.require_subcommand(1);

    coclust::RunConfig cfg;
    std::string g_range = "1:3", d_range = "1:3", cov_weight = "1", init = "kmeans";

    auto add_bem = [&](CLI::App* sub) {
        sub->add_option("--out", cfg.out_dir, "Output directory")->default_val(".");
        sub->add_option("--seed", cfg.bem.seed, "Random seed")->default_val(0);
        sub->add_option("--restarts", cfg.bem.n_restarts, "Independent initializations")
            ->default_val(10)->check(CLI::PositiveNumber);
        sub->add_option("--max-iters", cfg.bem.max_outer_iters, "Maximum BEM cycles")
            ->default_val(200)->check(CLI::PositiveNumber);
        sub->add_option("--tol", cfg.bem.free_energy_rel_tol,
                        "Relative free-energy change that stops a run")
            ->default_val(1e-8)->check(CLI::PositiveNumber);
        sub->add_option("--cov-weight", cov_weight,
                        "Co-variable density weight: m (per cell) or 1 (per row)")
            ->default_val("1")->check(CLI::IsMember({"m", "1"}));
        sub->add_option("--init", init, "Initialization: kmeans or random-soft")
            ->default_val("kmeans")->check(CLI::IsMember({"kmeans", "random-soft"}));
    };
    auto add_data = [&](CLI::App* sub) {
        sub->add_option("--x", cfg.x_path, "Binary matrix CSV")->required()->check(CLI::ExistingFile);
        sub->add_option("--y", cfg.y_path, "Co-variable CSV (omit for none)")->check(CLI::ExistingFile);
    };
    auto add_gd = [&](CLI::App* sub) {
        sub->add_option("--g", cfg.g, "Row clusters")->default_val(2)->check(CLI::PositiveNumber);
        sub->add_option("--d", cfg.d, "Column clusters")->default_val(2)->check(CLI::PositiveNumber);
    };

    auto* fit = app.add_subcommand("fit", "Fit the model for fixed (g, d)");
    add_data(fit);
    add_gd(fit);
    add_bem(fit);

    auto* sel = app.add_subcommand("select", "BIC grid search over (g, d)");
    add_data(sel);
    add_bem(sel);
    sel->add_option("--g-range", g_range, "Row cluster range A:B")->default_val("1:3");
    sel->add_option("--d-range", d_range, "Column cluster range A:B")->default_val("1:3");

    auto* inf = app.add_subcommand("influence", "Fit, then rank columns by influence");
    add_data(inf);
    add_gd(inf);
    add_bem(inf);

    auto* sim = app.add_subcommand("simulate", "Draw a dataset from a parameters JSON");
    sim->add_option("--params", cfg.params_path, "Parameters JSON")->required()->check(CLI::ExistingFile);
    sim->add_option("--n", cfg.n, "Rows")->required()->check(CLI::PositiveNumber);
    sim->add_option("--m", cfg.m, "Columns")->required()->check(CLI::PositiveNumber);
    sim->add_option("--out", cfg.out_dir, "Output directory")->default_val(".");
    sim->add_option("--seed", cfg.bem.seed, "Random seed")->default_val(0);

    auto* bench = app.add_subcommand("benchmark", "Time Block-EM against n");
    bench->add_option("--out", cfg.out_dir, "Output directory")->default_val(".");
    bench->add_option("--seed", cfg.bench.seed, "Random seed")->default_val(0);
    bench->add_option("--n-list", cfg.bench.ns, "Row counts")->delimiter(',');
    bench->add_option("--m", cfg.bench.m, "Columns")->default_val(100);
    bench->add_option("--g", cfg.bench.g, "Row clusters")->default_val(2);
    bench->add_option("--d-list", cfg.bench.ds, "Column cluster counts")->delimiter(',');
    bench->add_option("--iters", cfg.bench.iters, "BEM cycles per timed fit")->default_val(30);
    bench->add_option("--reps", cfg.bench.reps, "Repetitions (median reported)")->default_val(3);

    CLI11_PARSE(app, argc, argv);

    try {
        cfg.g_range = parse_range(g_range);
        cfg.d_range = parse_range(d_range);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    }
    cfg.bem.cov_weight = cov_weight == "1" ? coclust::CovWeight::PerRow : coclust::CovWeight::PerCell;
    cfg.bem.init_strategy = init == "random-soft" ? coclust::InitStrategy::RandomSoft
                                                  : coclust::InitStrategy::KMeansLike;
    if (fit->parsed())
        cfg.command = Command::Fit;
    else if (sel->parsed())
        cfg.command = Command::Select;
    else if (inf->parsed())
        cfg.command = Command::Influence;
    else if (sim->parsed())
        cfg.command = Command::Simulate;
    else
        cfg.command = Command::Benchmark;

    return coclust::run(cfg, std::cout, std::cerr);
}
