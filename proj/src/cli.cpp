#include "noma/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "noma/channel_model.hpp"
#include "noma/config.hpp"
#include "noma/dataset_io.hpp"
#include "noma/orchestrator.hpp"
#include "noma/parallel.hpp"

namespace noma::cli {

namespace {

using ojson = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

NetworkConfig resolve_config(const std::string& path, std::ostream& err) {
    NetworkConfig cfg = path.empty() ? NetworkConfig{} : load_config(path);
    cfg.validate();
    err << "# resolved config" << (path.empty() ? " (defaults)" : " from " + path) << '\n';
    write_config(err, cfg);
    return cfg;
}

ojson report_json(const SolveResult& res) {
    const RateReport& r = res.report;
    ojson j;
    j["sum_rate"] = r.sum_rate;
    j["schedule_valid"] = r.schedule_valid;
    j["carrier_cap_ok"] = r.carrier_cap_ok;
    j["powers_valid"] = r.powers_valid;
    j["beams_unit_norm"] = r.beams_unit_norm;
    j["budget_slack"] = r.budget_slack;
    ojson qos = ojson::array();
    for (const auto& q : r.qos_slack)
        qos.push_back(ojson{{"bs", q.link.bs}, {"user", q.link.user}, {"carrier", q.link.carrier}, {"slack", q.slack}});
    j["qos_slack"] = std::move(qos);
    j["sinr"] = r.sinr.flat();
    j["rate"] = r.rate.flat();
    j["rounds"] = res.rounds;
    j["outer_trace"] = res.outer_trace;
    return j;
}

void write_trace_csv(const SolveResult& res, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "round,stage,iteration,objective\n";
    char buf[64];
    for (const auto& stage : res.stages)
        for (std::size_t i = 0; i < stage.values.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", stage.values[i]);
            out << stage.round << ',' << stage.stage << ',' << i << ',' << buf << '\n';
        }
}

int cmd_generate(const std::string& config_path, std::size_t samples, const std::string& out_path,
                 std::uint64_t seed, std::size_t workers, std::ostream& out, std::ostream& err) {
    const NetworkConfig cfg = resolve_config(config_path, err);
    if (cfg.sic_mode) throw UsageError("generate: sic_mode datasets are not supported (cfg_digest cannot record it)");

    std::vector<SampleRecord> records(samples);
    parallel_for(samples, workers, [&](std::size_t i) {
        const std::uint64_t sample_seed = derive_seed(seed, i);
        const ChannelState ch = generate_network(cfg, sample_seed);
        const SolveResult res = solve_baseline(ch, cfg);
        records[i] = make_record(sample_seed, cfg, ch, res.alloc, res.report.sum_rate);
    });
    const std::size_t written = write_dataset(records, out_path);
    const DatasetMeta meta = split_sizes(written);
    out << "wrote " << written << " records to " << out_path << " (train " << meta.train << ", val " << meta.val
        << ")\n";
    return kExitOk;
}

int cmd_solve(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& trace_path,
              std::ostream& out, std::ostream& err) {
    const NetworkConfig cfg = resolve_config(config_path, err);
    const std::uint64_t sample_seed = derive_seed(seed.value_or(cfg.rng_seed), 0);
    const ChannelState ch = generate_network(cfg, sample_seed);
    const SolveResult res = solve_baseline(ch, cfg);
    err << "# solved in " << res.wall_time << " s, " << res.rounds << " round(s)\n";
    if (!trace_path.empty()) write_trace_csv(res, trace_path);
    out << report_json(res).dump(2) << '\n';
    return kExitOk;
}

int cmd_evaluate(const std::string& config_path, std::optional<std::size_t> samples, const std::string& predictions,
                 const std::string& solver, const std::string& out_path, std::optional<std::uint64_t> seed,
                 std::size_t workers, std::ostream& out, std::ostream& err) {
    const NetworkConfig cfg = resolve_config(config_path, err);
    std::vector<double> rates;
    if (!predictions.empty()) {
        auto records = read_records(predictions);
        if (samples && *samples < records.size()) records.resize(*samples);
        rates = score_predictions(records, workers);
    } else {
        if (!samples) throw UsageError("evaluate: --samples is required without --predictions");
        const SolverKind kind = solver == "heuristic" ? SolverKind::heuristic : SolverKind::baseline;
        rates = sample_sum_rates(cfg, *samples, seed.value_or(cfg.rng_seed), kind, workers);
    }
    const auto rows = empirical_cdf(std::move(rates));
    write_cdf_csv(rows, out_path);
    out << "wrote " << rows.size() << " CDF rows to " << out_path << '\n';
    return kExitOk;
}

int cmd_validate(const std::string& config_path, const std::string& dataset, std::ostream& out, std::ostream& err) {
    const NetworkConfig cfg = resolve_config(config_path, err);
    const auto records = read_records(dataset);
    std::size_t labels = 0, predictions = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        if (!rec.is_prediction()) {
            validate_label(rec, i + 1, i);
            ++labels;
            continue;
        }
        RateContext ctx = rec.cfg_digest.rate_context();
        ctx.max_users_per_carrier = cfg.max_users_per_carrier;
        const Allocation alloc = project_prediction(rec, cfg.max_users_per_carrier);
        const RateReport report = check_feasibility(channel_of(rec), alloc, ctx);
        if (!report.feasible(ctx.power_budget))
            throw DatasetError("record " + std::to_string(i) + ": projected prediction is infeasible", i + 1, i);
        ++predictions;
    }
    if (std::filesystem::exists(dataset + ".meta.json")) {
        const DatasetMeta meta = read_meta(dataset);
        if (meta.count != records.size())
            throw DatasetError("meta count " + std::to_string(meta.count) + " != " + std::to_string(records.size()) +
                                   " records",
                               0, 0);
    }
    out << "ok: " << records.size() << " records (" << labels << " labels, " << predictions << " predictions)\n";
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-cell multi-carrier NOMA resource management toolkit", "nomarm"};
    app.require_subcommand(1);

    std::string config_path;
    std::size_t samples = 0;
    std::string out_path, trace_path, predictions, dataset, solver = "baseline";
    std::uint64_t seed = 0;
    std::size_t workers = default_workers();

    auto* gen = app.add_subcommand("generate", "Generate a labelled dataset with the baseline solver");
    gen->add_option("--config", config_path, "Scenario file (key = value)");
    gen->add_option("--samples", samples, "Number of records")->required();
    gen->add_option("--out", out_path, "Output JSONL path")->required();
    gen->add_option("--seed", seed, "Base seed")->required();
    gen->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

    auto* solve = app.add_subcommand("solve", "Solve one network draw and print its rate report");
    solve->add_option("--config", config_path, "Scenario file (key = value)");
    auto* solve_seed = solve->add_option("--seed", seed, "Seed (defaults to rng_seed)");
    solve->add_option("--trace-out", trace_path, "Per-iteration objective trace CSV");

    auto* eval = app.add_subcommand("evaluate", "Empirical sum-rate CDF");
    eval->add_option("--config", config_path, "Scenario file (key = value)");
    auto* eval_samples = eval->add_option("--samples", samples, "Number of network draws");
    eval->add_option("--predictions", predictions, "Prediction JSONL to project and re-score");
    eval->add_option("--solver", solver, "Solver for fresh draws")->check(CLI::IsMember({"baseline", "heuristic"}));
    eval->add_option("--out", out_path, "Output CSV path")->required();
    auto* eval_seed = eval->add_option("--seed", seed, "Base seed (defaults to rng_seed)");
    eval->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

    auto* val = app.add_subcommand("validate", "Check every invariant of a dataset or prediction file");
    val->add_option("--dataset", dataset, "JSONL path")->required();
    val->add_option("--config", config_path, "Scenario file for the carrier cap");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) return cmd_generate(config_path, samples, out_path, seed, workers, out, err);
        if (solve->parsed())
            return cmd_solve(config_path, solve_seed->count() ? std::optional(seed) : std::nullopt, trace_path, out,
                             err);
        if (eval->parsed())
            return cmd_evaluate(config_path, eval_samples->count() ? std::optional(samples) : std::nullopt, predictions,
                                solver, out_path, eval_seed->count() ? std::optional(seed) : std::nullopt, workers,
                                out, err);
        if (val->parsed()) return cmd_validate(config_path, dataset, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DatasetError& e) {
        err << "dataset error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

} // namespace noma::cli
