// Command-line front end: decompose | extract | forecast | evaluate.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sslstm/config.hpp"
#include "sslstm/csv.hpp"
#include "sslstm/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOptions {
    std::string input;
    std::string output = ".";
    std::string config_path;
    std::string column = "0";
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& opt, bool needs_input = true) {
    auto* in = cmd->add_option("--input", opt.input, "input CSV file");
    if (needs_input) in->required();
    cmd->add_option("--output", opt.output, "output directory (default: current)");
    cmd->add_option("--config", opt.config_path, "configuration file");
    cmd->add_option("--column", opt.column, "column to read: zero-based index or header name");
    cmd->add_option("--seed", opt.seed, "override the configured random seed");
}

sslstm::PipelineConfig load_config(const CommonOptions& opt) {
    sslstm::ConfigValues values;
    if (!opt.config_path.empty()) {
        std::ifstream in(opt.config_path);
        if (!in) throw sslstm::IoError("cannot open config file " + opt.config_path);
        values = sslstm::parse_config(in);
    }
    sslstm::apply_env_overrides(values);
    sslstm::PipelineConfig cfg = sslstm::build_pipeline_config(values);
    if (opt.seed) cfg.seed = *opt.seed;
    return cfg;
}

sslstm::TimeSeries load_series(const CommonOptions& opt) {
    std::ifstream in(opt.input);
    if (!in) throw sslstm::IoError("cannot open input file " + opt.input);
    const sslstm::CsvTable table = sslstm::read_csv(in);
    return sslstm::read_series_column(table, opt.column);
}

json config_echo(const sslstm::PipelineConfig& cfg) {
    std::ostringstream text;
    sslstm::write_config(text, cfg);
    std::istringstream back(text.str());
    json echo = json::object();
    for (const auto& [key, value] : sslstm::parse_config(back)) echo[key] = value;
    return echo;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw sslstm::IoError("cannot write " + path.string());
    out << text;
}

void write_column_csv(const fs::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns) {
    std::ostringstream buffer;
    sslstm::write_csv(buffer, header, columns);
    write_text_file(path, buffer.str());
}

double projected_energy(const std::vector<double>& part, const std::vector<double>& whole) {
    double acc = 0.0;
    for (std::size_t t = 0; t < part.size(); ++t) acc += part[t] * whole[t];
    return acc;
}

int cmd_decompose(const CommonOptions& opt) {
    const sslstm::PipelineConfig cfg = load_config(opt);
    const sslstm::TimeSeries series = load_series(opt);
    const sslstm::Decomposition dec = sslstm::decompose(series.values, cfg.sgvmd);

    fs::create_directories(opt.output);
    json summary;
    summary["config_echo"] = config_echo(cfg);
    summary["input_rows"] = series.values.size();
    double input_energy = 0.0;
    for (double v : series.values) input_energy += v * v;
    summary["input_energy"] = input_energy;

    json mode_entries = json::array();
    for (std::size_t k = 0; k < dec.modes.size(); ++k) {
        const auto& mode = dec.modes[k];
        const std::string name = "mode_" + std::to_string(k) + ".csv";
        write_column_csv(fs::path(opt.output) / name, {"value"}, {mode.samples});
        json entry;
        entry["file"] = name;
        entry["center_frequency"] = mode.center_frequency;
        entry["energy"] = mode.sample_energy();
        // projection onto the input; these shares sum to the input energy
        entry["energy_projected"] = projected_energy(mode.samples, series.values);
        entry["converged"] = mode.converged;
        entry["iterations"] = mode.iterations;
        mode_entries.push_back(entry);
    }
    summary["modes"] = mode_entries;
    write_column_csv(fs::path(opt.output) / "residual.csv", {"value"}, {dec.residual});
    double residual_energy = 0.0;
    for (double v : dec.residual) residual_energy += v * v;
    summary["residual"] = {{"file", "residual.csv"},
                           {"energy", residual_energy},
                           {"energy_projected", projected_energy(dec.residual, series.values)}};
    write_text_file(fs::path(opt.output) / "decompose_summary.json", summary.dump(2) + "\n");
    std::cout << "wrote " << dec.modes.size() << " modes + residual to " << opt.output << "\n";
    return 0;
}

int cmd_extract(const CommonOptions& opt) {
    const sslstm::PipelineConfig cfg = load_config(opt);
    const sslstm::TimeSeries series = load_series(opt);

    const auto traj = sslstm::build_trajectory_matrix(series, cfg.embedding);
    const auto snaps = sslstm::build_snapshots(traj, cfg.snapshot_window, 1);
    sslstm::ExtractionConfig ext = cfg.extraction;
    ext.dt = series.dt;
    const auto feature_series = sslstm::extract_feature_series(snaps, ext);

    fs::create_directories(opt.output);
    json summary;
    summary["config_echo"] = config_echo(cfg);
    summary["snapshot_count"] = snaps.size();

    std::vector<std::string> label_names;
    json series_entries = json::array();
    for (std::size_t i = 0; i < feature_series.size(); ++i) {
        const auto& fsr = feature_series[i];
        std::vector<double> re(fsr.values.size()), im(fsr.values.size());
        for (std::size_t t = 0; t < fsr.values.size(); ++t) {
            re[t] = fsr.values[t].real();
            im[t] = fsr.values[t].imag();
        }
        const std::string name = "feature_" + std::to_string(i) + ".csv";
        write_column_csv(fs::path(opt.output) / name, {"real", "imag"}, {re, im});
        const sslstm::SeriesLabel label =
            sslstm::classify_feature_series(fsr.values, cfg.sgvmd, cfg.classify);
        label_names.push_back(sslstm::to_string(label));
        json entry;
        entry["file"] = name;
        entry["label"] = sslstm::to_string(label);
        series_entries.push_back(entry);
    }
    summary["series"] = series_entries;
    write_text_file(fs::path(opt.output) / "extract_summary.json", summary.dump(2) + "\n");
    {
        std::ostringstream labels;
        labels << "series,label\n";
        for (std::size_t i = 0; i < label_names.size(); ++i)
            labels << i << ',' << label_names[i] << '\n';
        write_text_file(fs::path(opt.output) / "labels.csv", labels.str());
    }
    std::cout << "wrote " << feature_series.size() << " feature series to " << opt.output << "\n";
    return 0;
}

json report_json(const sslstm::ForecastReport& report) {
    json j;
    j["model"] = report.model_name;
    j["metrics"] = {{"rmse", report.rmse},
                    {"mae", report.mae},
                    {"r2", report.r2},
                    {"r2_valid", report.r2_valid},
                    {"mape", report.mape},
                    {"mape_valid", report.mape_valid}};
    json diagnostics = json::array();
    for (const auto& d : report.diagnostics)
        diagnostics.push_back({{"series", d.row_index},
                               {"label", sslstm::to_string(d.label)},
                               {"sgvmd_converged", d.sgvmd_converged}});
    j["diagnostics"] = diagnostics;
    return j;
}

int cmd_forecast(const CommonOptions& opt, const std::string& model, int trials) {
    const sslstm::PipelineConfig cfg = load_config(opt);
    const sslstm::TimeSeries series = load_series(opt);
    const sslstm::ModelKind kind =
        model == "lstm" ? sslstm::ModelKind::Lstm : sslstm::ModelKind::SsLstm;

    fs::create_directories(opt.output);
    json report;
    report["config_echo"] = config_echo(cfg);
    report["trials"] = trials;

    const sslstm::ForecastReport* final_run = nullptr;
    sslstm::AggregateReport agg;
    sslstm::ForecastReport single;
    if (trials > 1) {
        agg = sslstm::repeat_experiment(series, cfg, trials, kind);
        json runs = json::array();
        for (const auto& r : agg.runs) runs.push_back(report_json(r));
        report["runs"] = runs;
        report["aggregate"] = {
            {"rmse", {{"mean", agg.rmse.mean}, {"stddev", agg.rmse.stddev}}},
            {"mae", {{"mean", agg.mae.mean}, {"stddev", agg.mae.stddev}}},
            {"mape", {{"mean", agg.mape.mean}, {"stddev", agg.mape.stddev}}},
            {"r2", {{"mean", agg.r2.mean}, {"stddev", agg.r2.stddev}}},
            {"mape_valid", agg.mape_valid}};
        final_run = &agg.runs.front();
    } else {
        single = kind == sslstm::ModelKind::SsLstm ? sslstm::run_ss_lstm(series, cfg)
                                                   : sslstm::run_lstm_baseline(series, cfg);
        report["run"] = report_json(single);
        final_run = &single;
    }

    std::vector<double> index(final_run->actual.size());
    const double start = static_cast<double>(series.values.size() - final_run->actual.size());
    for (std::size_t t = 0; t < index.size(); ++t) index[t] = start + static_cast<double>(t);
    write_column_csv(fs::path(opt.output) / "predictions.csv", {"t", "actual", "predicted"},
                     {index, final_run->actual, final_run->predicted});
    write_text_file(fs::path(opt.output) / "forecast_report.json", report.dump(2) + "\n");
    std::cout << final_run->model_name << " test rmse " << final_run->rmse << "\n";
    return 0;
}

std::vector<double> evaluation_column(const std::string& path, const std::string& preferred,
                                      const std::string& fallback) {
    std::ifstream in(path);
    if (!in) throw sslstm::IoError("cannot open " + path);
    const sslstm::CsvTable table = sslstm::read_csv(in);
    std::string selector = fallback;
    for (const auto& name : table.header)
        if (name == preferred) selector = preferred;
    const std::size_t col = sslstm::resolve_column(table, selector);
    std::vector<double> values;
    for (const auto& row : table.rows) values.push_back(row[col]);
    return values;
}

int cmd_evaluate(const std::string& actual_path, const std::string& predicted_path,
                 const std::string& column, const std::string& output) {
    const std::vector<double> actual = evaluation_column(actual_path, "actual", column);
    const std::vector<double> predicted = evaluation_column(predicted_path, "predicted", column);

    sslstm::ForecastReport report;
    report.actual = actual;
    report.predicted = predicted;
    sslstm::detail::fill_metrics(report);

    json j;
    j["rmse"] = report.rmse;
    j["mae"] = report.mae;
    j["r2"] = report.r2;
    j["r2_valid"] = report.r2_valid;
    j["mape"] = report.mape;
    j["mape_valid"] = report.mape_valid;
    j["points"] = actual.size();
    const std::string text = j.dump(2) + "\n";
    if (output.empty() || output == "-") {
        std::cout << text;
    } else {
        write_text_file(output, text);
        std::cout << "wrote metrics to " << output << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Subspace-feature combination forecasting pipeline"};
    app.require_subcommand(1);

    CommonOptions decompose_opt, extract_opt, forecast_opt;
    auto* decompose = app.add_subcommand("decompose", "split a series into narrowband modes");
    add_common(decompose, decompose_opt);

    auto* extract = app.add_subcommand("extract", "extract and label dynamic feature series");
    add_common(extract, extract_opt);

    auto* forecast = app.add_subcommand("forecast", "train, predict, and report test metrics");
    add_common(forecast, forecast_opt);
    std::string model = "ss-lstm";
    int trials = 1;
    forecast->add_option("--model", model, "forecasting model")
        ->check(CLI::IsMember({"ss-lstm", "lstm"}));
    forecast->add_option("--trials", trials, "number of seeded trials")->check(CLI::PositiveNumber);

    auto* evaluate = app.add_subcommand("evaluate", "compute metrics from actual/predicted CSVs");
    std::string actual_path, predicted_path, eval_column = "0", eval_output;
    evaluate->add_option("--input", actual_path, "CSV with actual values")->required();
    evaluate->add_option("--predicted", predicted_path, "CSV with predicted values")->required();
    evaluate->add_option("--column", eval_column,
                         "column selector used when no actual/predicted header is present");
    evaluate->add_option("--output", eval_output, "metrics JSON path ('-' for stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (decompose->parsed()) return cmd_decompose(decompose_opt);
        if (extract->parsed()) return cmd_extract(extract_opt);
        if (forecast->parsed()) return cmd_forecast(forecast_opt, model, trials);
        if (evaluate->parsed())
            return cmd_evaluate(actual_path, predicted_path, eval_column, eval_output);
    } catch (const sslstm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
