#pragma once

#include "coclust/bem.hpp"
#include "coclust/benchmark.hpp"
#include "coclust/influence.hpp"
#include "coclust/io.hpp"
#include "coclust/selection.hpp"
#include "coclust/simulate.hpp"

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace coclust {

inline constexpr const char* version = "0.1.0";

enum class Command { Fit, Select, Simulate, Influence, Benchmark };

inline const char* command_name(Command c) {
    switch (c) {
    case Command::Fit: return "fit";
    case Command::Select: return "select";
    case Command::Simulate: return "simulate";
    case Command::Influence: return "influence";
    case Command::Benchmark: return "benchmark";
    }
    return "?";
}

struct RunConfig {
    Command command = Command::Fit;
    std::string x_path;
    std::string y_path;
    std::string params_path;
    std::string out_dir = ".";
    int g = 2;
    int d = 2;
    std::pair<int, int> g_range{1, 3};
    std::pair<int, int> d_range{1, 3};
    BemConfig bem;
    // simulate
    Index n = 0;
    Index m = 0;
    // benchmark
    BenchmarkSpec bench;
};

namespace detail {

inline io::Json bem_config_json(const BemConfig& c) {
    io::Json j;
    j["max_outer_iters"] = c.max_outer_iters;
    j["free_energy_rel_tol"] = c.free_energy_rel_tol;
    j["nr_max_iters"] = c.nr_max_iters;
    j["nr_grad_tol"] = c.nr_grad_tol;
    j["n_restarts"] = c.n_restarts;
    j["init_strategy"] = c.init_strategy == InitStrategy::RandomSoft ? "random-soft" : "kmeans";
    j["ridge"] = c.ridge;
    j["min_cluster_mass"] = c.min_cluster_mass;
    j["seed"] = c.seed;
    j["cov_weight"] = c.cov_weight == CovWeight::PerCell ? "m" : "1";
    return j;
}

inline io::Json manifest(const RunConfig& cfg) {
    io::Json j;
    j["tool"] = "coclust";
    j["version"] = version;
    j["command"] = command_name(cfg.command);
    io::Json in;
    in["x"] = cfg.x_path;
    in["y"] = cfg.y_path;
    in["params"] = cfg.params_path;
    j["inputs"] = std::move(in);
    j["bem"] = bem_config_json(cfg.bem);
    return j;
}

inline io::Json fit_summary(const FitResult& f) {
    io::Json j;
    j["free_energy"] = f.free_energy();
    j["converged"] = f.converged;
    j["n_iters"] = f.n_iters;
    j["restart"] = f.restart;
    j["failed_restarts"] = f.failed_restarts;
    j["separation_flagged"] = f.separation_flagged;
    return j;
}

inline std::string path_in(const RunConfig& cfg, const char* name) {
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

inline void write_fit_outputs(const RunConfig& cfg, const FitResult& f) {
    io::write_text(path_in(cfg, "labels.csv"), io::labels_csv(f.map_labels));
    io::write_text(path_in(cfg, "params.json"), io::dump(io::params_to_json(f.params)));
    io::write_text(path_in(cfg, "free_energy.csv"), io::free_energy_csv(f.free_energy_trace));
}

inline std::string influence_csv(const InfluenceReport& rep, const HardLabels& labels) {
    std::vector<int> rank(rep.ranking.size());
    for (std::size_t pos = 0; pos < rep.ranking.size(); ++pos)
        rank[static_cast<std::size_t>(rep.ranking[pos])] = static_cast<int>(pos + 1);
    std::string s = "j,influence,column_cluster,rank\n";
    for (std::size_t j = 0; j < rank.size(); ++j)
        s += std::to_string(j + 1) + "," + io::format_double(rep.scores[static_cast<Index>(j)]) +
             "," + std::to_string(labels.w[j] + 1) + "," + std::to_string(rank[j]) + "\n";
    return s;
}

} // namespace detail

inline int run_fit(const RunConfig& cfg, std::ostream& out) {
    const auto data = io::load_dataset(cfg.x_path, cfg.y_path);
    const FitResult f = fit(data.x, data.y, cfg.g, cfg.d, cfg.bem);
    detail::write_fit_outputs(cfg, f);
    auto man = detail::manifest(cfg);
    man["g"] = cfg.g;
    man["d"] = cfg.d;
    man["result"] = detail::fit_summary(f);
    io::write_text(detail::path_in(cfg, "manifest.json"), io::dump(man));
    out << "fit g=" << cfg.g << " d=" << cfg.d
        << " free_energy=" << io::format_double(f.free_energy())
        << " converged=" << (f.converged ? "true" : "false") << "\n";
    return 0;
}

inline int run_select(const RunConfig& cfg, std::ostream& out) {
    const auto data = io::load_dataset(cfg.x_path, cfg.y_path);
    const BicGrid grid = select(data.x, data.y, cfg.g_range, cfg.d_range, cfg.bem);
    std::string csv = "g,d,bic,converged\n";
    for (const auto& [gd, e] : grid.entries)
        csv += std::to_string(gd.first) + "," + std::to_string(gd.second) + "," +
               io::format_double(e.bic) + "," + (e.fit.converged ? "true" : "false") + "\n";
    io::write_text(detail::path_in(cfg, "bic_grid.csv"), csv);
    const auto& best = grid.entries.at(grid.best);
    detail::write_fit_outputs(cfg, best.fit);

    auto man = detail::manifest(cfg);
    man["g_range"] = {cfg.g_range.first, cfg.g_range.second};
    man["d_range"] = {cfg.d_range.first, cfg.d_range.second};
    io::Json failed = io::Json::array();
    for (const auto& [gd, why] : grid.failures)
        failed.push_back({{"g", gd.first}, {"d", gd.second}, {"error", why}});
    man["failed_cells"] = std::move(failed);
    man["best"] = {{"g", grid.best.first}, {"d", grid.best.second}, {"bic", best.bic}};
    man["result"] = detail::fit_summary(best.fit);
    io::write_text(detail::path_in(cfg, "manifest.json"), io::dump(man));
    out << "best g=" << grid.best.first << " d=" << grid.best.second
        << " bic=" << io::format_double(best.bic) << "\n";
    return 0;
}

inline int run_influence(const RunConfig& cfg, std::ostream& out) {
    const auto data = io::load_dataset(cfg.x_path, cfg.y_path);
    const FitResult f = fit(data.x, data.y, cfg.g, cfg.d, cfg.bem);
    const InfluenceReport rep = influence_report(data.x, data.y, f);
    detail::write_fit_outputs(cfg, f);
    io::write_text(detail::path_in(cfg, "influence.csv"), detail::influence_csv(rep, f.map_labels));
    auto man = detail::manifest(cfg);
    man["g"] = cfg.g;
    man["d"] = cfg.d;
    man["result"] = detail::fit_summary(f);
    io::write_text(detail::path_in(cfg, "manifest.json"), io::dump(man));
    out << "most influential column: " << rep.ranking.front() + 1 << "\n";
    return 0;
}

inline int run_simulate(const RunConfig& cfg, std::ostream& out) {
    const ModelParams params = io::read_params(cfg.params_path);
    const SimOutput sim = generate({cfg.n, cfg.m, params, cfg.bem.seed});
    io::write_text(detail::path_in(cfg, "x.csv"), io::binary_csv(sim.x));
    io::write_text(detail::path_in(cfg, "y.csv"), io::covariate_csv(sim.y));
    io::write_text(detail::path_in(cfg, "truth_labels.csv"), io::labels_csv(sim.truth));
    auto man = detail::manifest(cfg);
    man["n"] = cfg.n;
    man["m"] = cfg.m;
    man["seed"] = cfg.bem.seed;
    io::write_text(detail::path_in(cfg, "manifest.json"), io::dump(man));
    out << "simulated n=" << cfg.n << " m=" << cfg.m << " p=" << params.p() << "\n";
    return 0;
}

/// Timing output is wall-clock and therefore not reproducible byte-for-byte.
inline int run_benchmark(const RunConfig& cfg, std::ostream& out) {
    const auto points = run_timing(cfg.bench);
    std::string csv = "n,m,g,d,seconds\n";
    for (const auto& pt : points)
        csv += std::to_string(pt.n) + "," + std::to_string(cfg.bench.m) + "," +
               std::to_string(cfg.bench.g) + "," + std::to_string(pt.d) + "," +
               io::format_double(pt.seconds) + "\n";
    io::write_text(detail::path_in(cfg, "timing.csv"), csv);
    std::string summary = "d,slope,intercept,r2\n";
    for (int d : cfg.bench.ds) {
        const auto tr = timing_trend(points, d);
        summary += std::to_string(d) + "," + io::format_double(tr.slope) + "," +
                   io::format_double(tr.intercept) + "," + io::format_double(tr.r2) + "\n";
        out << "d=" << d << " slope=" << tr.slope << " s/row r2=" << tr.r2 << "\n";
    }
    io::write_text(detail::path_in(cfg, "timing_trend.csv"), summary);
    return 0;
}

inline const char* error_class(const Error& e) {
    if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
    if (dynamic_cast<const DimensionMismatch*>(&e)) return "DimensionMismatch";
    if (dynamic_cast<const NonBinaryValue*>(&e)) return "NonBinaryValue";
    if (dynamic_cast<const ParamValidationError*>(&e)) return "ParamValidationError";
    if (dynamic_cast<const AllRestartsFailed*>(&e)) return "AllRestartsFailed";
    if (dynamic_cast<const NotPositiveDefinite*>(&e)) return "NotPositiveDefinite";
    if (dynamic_cast<const EmptyCluster*>(&e)) return "EmptyCluster";
    if (dynamic_cast<const InstanceTooLarge*>(&e)) return "InstanceTooLarge";
    if (dynamic_cast<const LengthMismatch*>(&e)) return "LengthMismatch";
    if (dynamic_cast<const NonFinite*>(&e)) return "NonFinite";
    if (dynamic_cast<const InvalidArgument*>(&e)) return "InvalidArgument";
    return "Error";
}

/// Dispatches a command; library errors become a one-line diagnostic on
/// `err` and exit status 1.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        std::filesystem::create_directories(cfg.out_dir);
        switch (cfg.command) {
        case Command::Fit: return run_fit(cfg, out);
        case Command::Select: return run_select(cfg, out);
        case Command::Simulate: return run_simulate(cfg, out);
        case Command::Influence: return run_influence(cfg, out);
        case Command::Benchmark: return run_benchmark(cfg, out);
        }
    } catch (const Error& e) {
        err << "error: " << error_class(e) << ": " << e.what() << "\n";
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: IOError: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace coclust
