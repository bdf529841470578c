// Command-line surface for the hyperbolic-growth analysis library:
// fits finite-time-singularity growth models to long-run GDP and
// population series, composes income-per-capita trajectories and runs
// the stagnation/takeoff/divergence battery.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hypergrowth/report.hpp"

namespace fs = std::filesystem;
using namespace hypergrowth;

namespace {

int exit_code_for(const Error& e) {
    if (dynamic_cast<const NonHyperbolic*>(&e)) return 3;
    if (dynamic_cast<const IoError*>(&e)) return 4;
    return 2;  // data / schema / taxonomy errors
}

YearInterval parse_window(const std::string& text) {
    const auto colon = text.find(':', 1);  // offset 1 tolerates a negative lo
    if (colon == std::string::npos)
        throw ValueError("window must be LO:HI, got '" + text + "'");
    const auto lo = detail::parse_number(text.substr(0, colon));
    const auto hi = detail::parse_number(text.substr(colon + 1));
    if (!lo || !hi) throw ValueError("window must be numeric LO:HI, got '" + text + "'");
    YearInterval w{*lo, *hi};
    if (!w.valid()) throw ValueError("window must satisfy lo <= hi");
    return w;
}

std::string data_dir() {
    const char* env = std::getenv("HYPERGROWTH_DATA");
    return env ? env : "";
}

void emit(const RunConfig& config, const std::string& content) {
    if (config.output_path.empty())
        std::cout << content;
    else
        write_text_file(config.output_path, content);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hyperbolic growth model fitting and diagnostics for long-run "
                 "GDP/population series"};
    app.require_subcommand(1);

    RunConfig config;
    std::string window_text, breakpoint_text, regions_path;
    double grid_step = 0.0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--input", config.input_path, "tidy CSV input (region,kind,year,value)");
        cmd->add_option("--output", config.output_path, "output path (default stdout)");
        cmd->add_option("--format", config.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        cmd->add_option("--regions", regions_path, "per-region analysis config (JSON)");
    };
    auto add_analysis = [&](CLI::App* cmd) {
        cmd->add_option("--pop-input", config.pop_input_path, "separate population CSV");
        cmd->add_option("--region", config.region, "region name as in the data");
        cmd->add_option("--window", window_text, "fit window LO:HI (astronomical years)");
        cmd->add_option("--breakpoint", breakpoint_text, "auto or a year, for two-segment fits");
        cmd->add_option("--bridge-width", config.bridge_width, "transition width in years");
        cmd->add_option("--bridge-degree", config.bridge_degree, "1 (linear) or 3 (cubic Hermite)");
        cmd->add_option("--threshold", config.diagnostics.divergence_threshold,
                        "relative divergence threshold");
        cmd->add_option("--persistence", config.diagnostics.persistence,
                        "consecutive observations required for divergence");
        cmd->add_option("--flatness", config.diagnostics.flatness_threshold,
                        "trend flatness bound for the stagnation test");
        cmd->add_option("--candidate", config.candidates, "takeoff candidate year (repeatable)");
        cmd->add_option("--post-window", config.post_window, "years examined after a candidate");
        cmd->add_option("--grid-step", grid_step, "extra evaluation grid step for tables");
    };

    std::string kind_text = "gdp";
    auto* fit = app.add_subcommand("fit", "fit one region/kind series");
    add_common(fit);
    add_analysis(fit);
    fit->add_option("--kind", kind_text, "population, gdp or gdp_per_capita");
    fit->add_flag("--refine", config.refine, "polish with a relative-residual pass");

    auto* ratio = app.add_subcommand("ratio", "compose the income-per-capita trajectory");
    add_common(ratio);
    add_analysis(ratio);
    ratio->add_flag("--all-regions", config.all_regions, "summary table over every region");

    auto* diagnose = app.add_subcommand("diagnose", "stagnation, takeoff and divergence battery");
    add_common(diagnose);
    add_analysis(diagnose);
    diagnose->add_flag("--all-regions", config.all_regions, "diagnose every region");

    auto* report = app.add_subcommand("report", "write per-year CSV and JSON summary files");
    add_common(report);
    add_analysis(report);
    report->add_option("--kind", kind_text, "population, gdp or gdp_per_capita");

    auto* convert = app.add_subcommand("convert", "horizontal-layout CSV to the tidy schema");
    add_common(convert);
    convert->add_option("--kind", kind_text, "population or gdp")->required();
    convert->add_option("--value-scale", config.convert_scale,
                        "multiply source values (1e-3 for thousands-based sheets)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(fit)) config.command = Command::Fit;
        if (app.got_subcommand(ratio)) config.command = Command::Ratio;
        if (app.got_subcommand(diagnose)) config.command = Command::Diagnose;
        if (app.got_subcommand(report)) config.command = Command::Report;
        if (app.got_subcommand(convert)) config.command = Command::Convert;
        config.kind = parse_kind(kind_text);
        if (!window_text.empty()) config.window = parse_window(window_text);
        if (!breakpoint_text.empty()) {
            if (breakpoint_text == "auto") {
                config.breakpoint_auto = true;
            } else {
                const auto b = detail::parse_number(breakpoint_text);
                if (!b) throw ValueError("breakpoint must be 'auto' or a year");
                config.breakpoint = *b;
            }
        }
        if (grid_step > 0.0) config.grid_step = grid_step;
        if (config.input_path.empty() && config.command != Command::Convert) {
            const auto dir = data_dir();
            if (dir.empty())
                throw IoError("no --input given and HYPERGROWTH_DATA is not set");
            config.input_path = (fs::path(dir) / "maddison_excerpt.csv").string();
        }
        config.regions_config_path = regions_path;
        if (config.regions_config_path.empty() && !data_dir().empty()) {
            const auto fallback = fs::path(data_dir()) / "regions.json";
            if (fs::exists(fallback)) config.regions_config_path = fallback.string();
        }
        config.validate();

        if (config.command == Command::Convert) {
            std::ifstream in(config.input_path);
            if (!in) throw IoError("cannot open input " + config.input_path);
            const auto series = convert_maddison_horizontal(in, config.kind, config.convert_scale);
            std::ostringstream out;
            serialize_series_csv(series, out);
            emit(config, out.str());
            return 0;
        }

        RegionAnalysisMap analyses;
        if (!config.regions_config_path.empty())
            analyses = load_region_analyses(config.regions_config_path);

        Dataset data = Dataset::from_file(config.input_path);
        if (!config.pop_input_path.empty()) {
            std::ifstream pop_in(config.pop_input_path);
            if (!pop_in) throw IoError("cannot open input " + config.pop_input_path);
            data.merge(parse_series_csv(pop_in));
        }
        if (config.region.empty() && !config.all_regions)
            throw ValueError("--region is required (or --all-regions where supported)");

        switch (config.command) {
            case Command::Fit:
                emit(config, render({cmd_fit(config, data, analyses)}, config.format));
                break;
            case Command::Ratio:
                emit(config, render(cmd_ratio(config, data, analyses), config.format));
                break;
            case Command::Diagnose:
                emit(config, render(cmd_diagnose(config, data, analyses), config.format));
                break;
            case Command::Report: {
                if (config.output_path.empty())
                    throw ValueError("report needs --output as the base path for its files");
                cmd_report(config, data, analyses, config.output_path);
                break;
            }
            case Command::Convert:
                break;
        }
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
