// Command-line front end: scenario runs, the buffer-energy sweep,
// capacitor sizing, curve calibration and model-table printing.

#include <cinttypes>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "edtn/link_models.hpp"
#include "edtn/scenario.hpp"
#include "edtn/sim_engine.hpp"
#include "edtn/trace.hpp"

namespace {

using namespace edtn;

// All command output is fixed at six significant digits so reruns are
// byte-identical across platforms.
std::string fmt6(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", value);
    return buf;
}

std::string metrics_document(const RunResult& result) {
    std::string out = "{\n";
    auto add_int = [&out](const char* key, std::int64_t value, bool last = false) {
        out += "  \"";
        out += key;
        out += "\": ";
        out += std::to_string(value);
        out += last ? "\n" : ",\n";
    };
    auto add_num = [&out](const char* key, double value, bool last = false) {
        out += "  \"";
        out += key;
        out += "\": ";
        out += fmt6(value);
        out += last ? "\n" : ",\n";
    };
    add_int("seed", static_cast<std::int64_t>(result.seed));
    add_int("bundles_offered", result.metrics.bundles_offered);
    add_int("bundles_delivered", result.metrics.bundles_delivered);
    add_num("delivery_latency_mean_s", result.metrics.delivery_latency_mean_s);
    add_num("delivery_latency_max_s", result.metrics.delivery_latency_max_s);
    add_int("rounds_executed", result.metrics.rounds_executed);
    add_num("fan_energy_j", result.metrics.fan_energy_j);
    add_num("dm_energy_j", result.metrics.dm_energy_j);
    add_num("energy_per_delivered_byte_j", result.metrics.energy_per_delivered_byte_j);
    add_num("dm_chain_time_s", result.dm_chain.time_s);
    add_num("dm_chain_energy_j", result.dm_chain.energy_j);
    add_num("fan_initial_stored_j", result.fan.initial_stored_j);
    add_num("fan_final_stored_j", result.fan.final_stored_j);
    add_num("fan_harvested_j", result.fan.ledger.harvested_j);
    add_num("fan_shed_j", result.fan.ledger.shed_j);
    add_num("dm_initial_stored_j", result.dm.initial_stored_j);
    add_num("dm_final_stored_j", result.dm.final_stored_j);
    add_num("dm_harvested_j", result.dm.ledger.harvested_j);
    add_num("dm_shed_j", result.dm.ledger.shed_j, true);
    out += "}\n";
    return out;
}

int cmd_run(const std::string& scenario_path, std::optional<std::uint64_t> seed_flag,
            const std::string& trace_path, const std::string& metrics_path) {
    const Scenario scenario = load_scenario(scenario_path);
    const std::uint64_t seed = seed_flag.value_or(scenario.seed);
    const RunResult result = run(scenario, seed);
    write_file(trace_path, trace_to_csv(result.trace));
    write_file(metrics_path, metrics_document(result));
    std::cout << "delivered " << result.metrics.bundles_delivered << "/"
              << scenario.workload.size() << " bundles in " << result.metrics.rounds_executed
              << " rounds (seed " << seed << ")\n"
              << "trace   -> " << trace_path << "\n"
              << "metrics -> " << metrics_path << "\n";
    return 0;
}

int cmd_sweep_buffer(std::int64_t b_min, std::int64_t b_max, const std::string& out_path,
                     const GprsModel& gprs) {
    if (b_min < 1 || b_min > b_max)
        throw ConfigError("sweep range: need 1 <= min <= max");
    std::string csv = "buffer_packets,energy_per_packet_j,total_time_s,total_energy_j\n";
    for (std::int64_t b = b_min; b <= b_max; ++b) {
        const double epp = gprs_energy_per_packet(gprs, b);
        const BufferCost cost = gprs_buffer_cost(gprs, b);
        csv += std::to_string(b) + "," + fmt6(epp) + "," + fmt6(cost.time_s) + "," +
               fmt6(cost.energy_j) + "\n";
    }
    write_file(out_path, csv);
    const std::int64_t best = optimal_gprs_buffer(gprs, b_min, b_max);
    std::cout << "argmin buffer_packets: " << best
              << " energy_per_packet_j: " << fmt6(gprs_energy_per_packet(gprs, best)) << "\n"
              << "sweep -> " << out_path << "\n";
    return 0;
}

int cmd_size_capacitor(double target_j, double v_max, double v_cutoff) {
    if (target_j < 0.0)
        throw ConfigError("target-energy: must be >= 0");
    if (!(v_max > v_cutoff) || v_cutoff < 0.0)
        throw ConfigError("v_max: must exceed v_cutoff >= 0");
    const double capacitance = 2.0 * target_j / (v_max * v_max - v_cutoff * v_cutoff);
    std::cout << "target_energy_j: " << fmt6(target_j) << "\n"
              << "v_max: " << fmt6(v_max) << "\n"
              << "v_cutoff: " << fmt6(v_cutoff) << "\n"
              << "capacitance_f: " << fmt6(capacitance) << "\n";
    return 0;
}

std::vector<std::pair<double, double>> parse_samples_csv(const std::string& text) {
    std::vector<std::pair<double, double>> samples;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    bool saw_header = false;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos)
            eol = text.size();
        const std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (line.empty())
            continue;
        if (!saw_header) {
            if (line.rfind("buffer_packets,energy_per_packet_j", 0) != 0)
                throw ConfigError("samples: header must start with "
                                  "'buffer_packets,energy_per_packet_j'");
            saw_header = true;
            continue;
        }
        const std::size_t c1 = line.find(',');
        if (c1 == std::string::npos)
            throw ConfigError("samples line " + std::to_string(line_no) +
                              ": expected at least two columns");
        std::size_t c2 = line.find(',', c1 + 1);
        if (c2 == std::string::npos)
            c2 = line.size();
        try {
            samples.emplace_back(std::stod(line.substr(0, c1)),
                                 std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
        } catch (const std::exception&) {
            throw ConfigError("samples line " + std::to_string(line_no) + ": bad number");
        }
    }
    return samples;
}

int cmd_calibrate(const std::string& samples_path, const std::string& out_path) {
    const auto samples = parse_samples_csv(read_file(samples_path));
    const GprsFit fit = fit_gprs_curve(samples);

    GprsModel fitted;
    fitted.epp_a_j = fit.epp_a_j;
    fitted.epp_b_j = fit.epp_b_j;
    fitted.epp_c_j = fit.epp_c_j;
    std::int64_t argmin = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::int64_t b = 1; b <= 10'000; ++b) {
        const double epp = fitted.epp_a_j / static_cast<double>(b) + fitted.epp_b_j +
                           fitted.epp_c_j * static_cast<double>(b);
        if (epp < best) {
            best = epp;
            argmin = b;
        }
    }

    std::cout << "epp_a_j: " << fmt6(fit.epp_a_j) << "\n"
              << "epp_b_j: " << fmt6(fit.epp_b_j) << "\n"
              << "epp_c_j: " << fmt6(fit.epp_c_j) << "\n"
              << "residual_norm: " << fmt6(fit.residual_norm) << "\n"
              << "fitted_argmin: " << argmin << "\n";

    if (!out_path.empty()) {
        std::string fragment = "{\n  \"gprs\": {\n";
        fragment += "    \"epp_a\": " + fmt6(fit.epp_a_j) + ",\n";
        fragment += "    \"epp_b\": " + fmt6(fit.epp_b_j) + ",\n";
        fragment += "    \"epp_c\": " + fmt6(fit.epp_c_j) + "\n  }\n}\n";
        write_file(out_path, fragment);
        std::cout << "config fragment -> " << out_path << "\n";
    }
    return 0;
}

int cmd_link_table(const ModelSuite& models) {
    auto print_link = [](const char* name, const LinkModel& link) {
        std::cout << name << " anchors (size_bytes -> time_s):";
        for (const Anchor& anchor : link.anchors)
            std::cout << " " << fmt6(anchor.size_bytes) << " -> " << fmt6(anchor.time_s);
        std::cout << "\n" << name << " active_watts: " << fmt6(link.active_watts) << "\n";
    };
    print_link("bluetooth", models.links.bluetooth);
    print_link("wifi", models.links.wifi);
    const GprsModel& g = models.gprs;
    std::cout << "gprs packet_bytes: " << g.packet_bytes
              << " epp_a: " << fmt6(g.epp_a_j) << " epp_b: " << fmt6(g.epp_b_j)
              << " epp_c: " << fmt6(g.epp_c_j) << " t_setup_s: " << fmt6(g.t_setup_s)
              << " t_per_packet_s: " << fmt6(g.t_per_packet_s)
              << " buffer_packets: " << g.buffer_packets << "\n";
    std::cout << "phase table (label | joules | seconds | role):\n";
    for (const auto& row : models.phases.rows)
        std::cout << "  " << row.label << " | " << fmt6(row.energy_j) << " | "
                  << fmt6(row.time_s) << " | " << to_string(row.role) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"energy-negotiated DTN simulator and model toolbox"};
    app.require_subcommand(1);

    // run
    auto* run_cmd = app.add_subcommand("run", "execute a scenario file");
    std::string scenario_path;
    std::optional<std::uint64_t> seed_flag;
    std::string trace_path = "trace.csv";
    std::string metrics_path = "metrics.json";
    run_cmd->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    run_cmd->add_option("--seed", seed_flag, "override the scenario seed");
    run_cmd->add_option("--trace", trace_path, "trace CSV output path");
    run_cmd->add_option("--metrics", metrics_path, "metrics JSON output path");

    // sweep-buffer
    auto* sweep_cmd = app.add_subcommand("sweep-buffer",
                                         "energy per packet over a buffer-size range");
    std::int64_t b_min = 1;
    std::int64_t b_max = 200;
    std::string sweep_out = "sweep.csv";
    std::string sweep_scenario;
    sweep_cmd->add_option("min", b_min, "smallest buffer (packets)")->required();
    sweep_cmd->add_option("max", b_max, "largest buffer (packets)")->required();
    sweep_cmd->add_option("--out", sweep_out, "CSV output path");
    sweep_cmd->add_option("--scenario", sweep_scenario, "take the GPRS model from a scenario");

    // size-capacitor
    auto* size_cmd = app.add_subcommand("size-capacitor",
                                        "smallest capacitance holding a target energy");
    double target_j = 0.0;
    double v_max = 5.0;
    double v_cutoff = 2.0;
    size_cmd->add_option("--target-energy", target_j, "usable energy target (J)")->required();
    size_cmd->add_option("--v-max", v_max, "maximum voltage (V)");
    size_cmd->add_option("--v-cutoff", v_cutoff, "cutoff voltage (V)");

    // calibrate
    auto* cal_cmd = app.add_subcommand("calibrate",
                                       "fit the buffer-energy curve from samples");
    std::string samples_path;
    std::string cal_out;
    cal_cmd->add_option("--samples", samples_path, "CSV of buffer_packets,energy_per_packet_j")
        ->required();
    cal_cmd->add_option("--out", cal_out, "write a scenario config fragment");

    // link-table
    auto* table_cmd = app.add_subcommand("link-table", "print the active link models");
    std::string table_scenario;
    table_cmd->add_option("--scenario", table_scenario, "take models from a scenario");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)
            return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    try {
        if (run_cmd->parsed())
            return cmd_run(scenario_path, seed_flag, trace_path, metrics_path);
        if (sweep_cmd->parsed()) {
            GprsModel gprs;
            if (!sweep_scenario.empty())
                gprs = load_scenario(sweep_scenario).models.gprs;
            return cmd_sweep_buffer(b_min, b_max, sweep_out, gprs);
        }
        if (size_cmd->parsed())
            return cmd_size_capacitor(target_j, v_max, v_cutoff);
        if (cal_cmd->parsed())
            return cmd_calibrate(samples_path, cal_out);
        if (table_cmd->parsed()) {
            ModelSuite models = default_models();
            if (!table_scenario.empty())
                models = load_scenario(table_scenario).models;
            return cmd_link_table(models);
        }
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
