// ecosom — batch front door for the eco-driving SOM pipeline:
//   ingest | train | cluster | advise | emulate

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "ecosom/accelemu.hpp"
#include "ecosom/advisor.hpp"
#include "ecosom/features.hpp"
#include "ecosom/fuelmodel.hpp"
#include "ecosom/model_io.hpp"
#include "ecosom/somanalysis.hpp"
#include "ecosom/somcore.hpp"
#include "ecosom/telemetry.hpp"

namespace {

using namespace ecosom;

struct RunConfig {
    std::string input, model, clusters, vehicle, out;
    std::uint64_t seed = 1;
    int scheme = 3;
    double threshold = 0.0;  // 0 -> scheme default (0.55 for 3, 0.40 for 5)
    double interval_s = 100.0;
    double min_speed = 60.0;
    std::size_t window = 256;
    std::size_t shift = 128;
    double rate = 32.0;
    std::size_t grid_rows = 11;
    std::size_t grid_cols = 11;
    double alpha0 = 0.5;
    std::uint64_t iterations = 0;  // 0 -> 200·K
    double sigma0 = 0.0;           // 0 -> max(rows, cols)/2
    double sigma_final = 0.5;
    std::string rom, trace;

    double effective_threshold() const {
        if (threshold > 0) return threshold;
        return scheme == 5 ? 0.40 : 0.55;
    }
};

void apply_config_file(RunConfig& cfg) {
    const char* path = std::getenv("ECOSOM_CONFIG");
    if (!path) return;
    std::ifstream in(path);
    if (!in) throw std::runtime_error(std::string("cannot open ECOSOM_CONFIG file: ") + path);
    nlohmann::json j;
    in >> j;
    auto str = [&](const char* k, std::string& v) { if (j.contains(k)) v = j[k].get<std::string>(); };
    auto num = [&](const char* k, auto& v) { if (j.contains(k)) v = j[k].get<std::decay_t<decltype(v)>>(); };
    str("input", cfg.input);
    str("model", cfg.model);
    str("clusters", cfg.clusters);
    str("vehicle", cfg.vehicle);
    str("out", cfg.out);
    num("seed", cfg.seed);
    num("scheme", cfg.scheme);
    num("threshold", cfg.threshold);
    num("interval_s", cfg.interval_s);
    num("min_speed", cfg.min_speed);
    num("window", cfg.window);
    num("shift", cfg.shift);
    num("rate", cfg.rate);
    num("grid_rows", cfg.grid_rows);
    num("grid_cols", cfg.grid_cols);
    num("alpha0", cfg.alpha0);
    num("iterations", cfg.iterations);
    num("sigma0", cfg.sigma0);
    num("sigma_final", cfg.sigma_final);
}

VehicleParams vehicle_of(const RunConfig& cfg) {
    return cfg.vehicle.empty() ? VehicleParams::defaults() : load_vehicle_params(cfg.vehicle);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    return out;
}

int cmd_ingest(const RunConfig& cfg) {
    std::ifstream in(cfg.input);
    if (!in) throw std::runtime_error("cannot open telemetry file: " + cfg.input);
    const auto vehicle = vehicle_of(cfg);

    std::vector<FeatureWindow> kept;
    for (const auto& raw : parse_sessions(in)) {
        const auto session = resample(raw, cfg.rate);
        const auto trace = simulate_session(session, vehicle);
        auto windows = make_windows(session, cfg.window, cfg.shift);
        attach_fuel_labels(windows, session, trace, cfg.window);
        for (auto& w : windows)
            if (w.mean_speed >= cfg.min_speed) kept.push_back(std::move(w));
    }
    std::cerr << "ingest: " << kept.size() << " windows above " << cfg.min_speed << " km/h\n";
    if (cfg.out.empty()) {
        write_feature_csv(std::cout, kept);
    } else {
        auto out = open_out(cfg.out);
        write_feature_csv(out, kept);
    }
    return 0;
}

int cmd_train(const RunConfig& cfg) {
    std::ifstream in(cfg.input);
    if (!in) throw std::runtime_error("cannot open feature file: " + cfg.input);
    const auto windows = read_feature_csv(in);
    if (windows.size() < cfg.grid_rows * cfg.grid_cols)
        std::cerr << "train: warning: fewer windows (" << windows.size() << ") than neurons ("
                  << cfg.grid_rows * cfg.grid_cols << ")\n";
    auto [data, scaler] = normalize_features(windows);

    TrainSchedule schedule;
    schedule.alpha0 = cfg.alpha0;
    schedule.iterations = cfg.iterations == 0 ? TrainSchedule::kAutoIterations : cfg.iterations;
    schedule.sigma0 = cfg.sigma0;
    schedule.sigma_final = cfg.sigma_final;
    schedule.seed = cfg.seed;
    auto model = train(data, cfg.grid_rows, cfg.grid_cols, schedule);
    model.scaler = scaler;

    std::cerr << "train: " << model.n_neurons() << " neurons, " << data.size()
              << " samples, quantization error " << quantization_error(model, data) << "\n";
    save_model(cfg.out.empty() ? cfg.model : cfg.out, model);
    return 0;
}

int cmd_cluster(const RunConfig& cfg) {
    const auto model = load_model_file(cfg.model);
    std::ifstream in(cfg.input);
    if (!in) throw std::runtime_error("cannot open feature file: " + cfg.input);
    const auto windows = read_feature_csv(in);

    auto map = threshold_clusters(u_matrix(model), cfg.effective_threshold());
    label_clusters(map, model, windows);
    if (static_cast<int>(map.clusters.size()) != cfg.scheme)
        std::cerr << "cluster: warning: found " << map.clusters.size() << " clusters, expected "
                  << cfg.scheme << " — generic labels in use\n";
    for (const auto& c : map.clusters)
        std::cerr << "cluster: " << c.label << " avg " << c.fuel_avg << " var " << c.fuel_var
                  << " max " << c.fuel_max << " (" << c.members.size() << " neurons, "
                  << c.window_count << " windows)\n";
    save_clustermap(cfg.out.empty() ? cfg.clusters : cfg.out, map);
    return 0;
}

int cmd_advise(const RunConfig& cfg) {
    const auto model = load_model_file(cfg.model);
    const auto map = load_clustermap_file(cfg.clusters);
    const auto vehicle = vehicle_of(cfg);
    std::ifstream in(cfg.input);
    if (!in) throw std::runtime_error("cannot open telemetry file: " + cfg.input);

    AdvisorConfig advisor_cfg;
    advisor_cfg.interval_s = cfg.interval_s;
    advisor_cfg.min_mean_speed_kmh = cfg.min_speed;
    advisor_cfg.window_size = cfg.window;
    advisor_cfg.shift = cfg.shift;

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!cfg.out.empty()) {
        file = open_out(cfg.out);
        out = &file;
    }
    for (const auto& raw : parse_sessions(in)) {
        const auto session = resample(raw, cfg.rate);
        const auto report = session_report(session, model, map, vehicle, advisor_cfg);
        write_report_jsonl(*out, report);
        if (report.status != "ok")
            std::cerr << "advise: " << session.driver_id << ": " << report.status << "\n";
    }
    return 0;
}

int cmd_emulate(const RunConfig& cfg) {
    const auto model = load_model_file(cfg.model);
    const auto map = load_clustermap_file(cfg.clusters);
    auto core = AccelCore::load_model(model, map);

    // replay set: every stored weight, seeded random vectors, plus any
    // feature-file windows normalized through the model scaler
    std::vector<std::vector<double>> inputs;
    for (std::size_t i = 0; i < core.n_neurons(); ++i) {
        std::vector<double> w(core.n_inputs());
        for (std::size_t j = 0; j < w.size(); ++j) w[j] = dequantize(core.weight_of(i)[j]);
        inputs.push_back(std::move(w));
    }
    const std::size_t weights_end = inputs.size();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, kNormalizedMax);
    for (std::size_t k = 0; k < 256; ++k) {
        std::vector<double> v(core.n_inputs());
        for (auto& x : v) x = unit(rng);
        inputs.push_back(std::move(v));
    }
    if (!cfg.input.empty()) {
        std::ifstream in(cfg.input);
        if (!in) throw std::runtime_error("cannot open feature file: " + cfg.input);
        for (const auto& w : read_feature_csv(in)) {
            auto arr = w.vector.to_array();
            std::vector<double> raw(arr.begin(), arr.end());
            inputs.push_back(model.scaler.empty() ? raw
                                                  : model.scaler.normalize_clamped(raw, nullptr));
        }
    }

    const auto report = crosscheck_float(core, model, map, inputs);
    std::uint64_t expected_cycles = 3 + ceil_log2(core.n_inputs()) + ceil_log2(core.n_neurons());
    bool cycles_ok = true;
    for (const auto& x : inputs) cycles_ok &= core.run_inference(x).cycles_elapsed == expected_cycles;

    std::size_t weight_matches = 0;
    for (std::size_t k = 0; k < weights_end; ++k) weight_matches += report.entries[k].bmu_match;

    nlohmann::ordered_json j;
    j["n_inputs"] = core.n_inputs();
    j["n_neurons"] = core.n_neurons();
    j["cycles_per_inference"] = expected_cycles;
    j["cycles_uniform"] = cycles_ok;
    j["inputs"] = report.total;
    j["bmu_matches"] = report.bmu_matches;
    j["cluster_matches"] = report.cluster_matches;
    j["weight_replay_matches"] = weight_matches;
    j["weight_replay_total"] = weights_end;
    j["margin_guaranteed"] = report.guaranteed;
    j["guaranteed_mismatches"] = report.guaranteed_mismatches;
    j["near_tie_mismatches"] = report.mismatched_inputs;

    if (!cfg.rom.empty()) {
        std::ofstream rom(cfg.rom, std::ios::binary);
        if (!rom) throw std::runtime_error("cannot write ROM image: " + cfg.rom);
        write_rom_image(rom, core);
        j["rom"] = cfg.rom;
    }
    if (!cfg.trace.empty()) {
        core.enable_trace();
        core.run_inference(inputs.front());
        auto out = open_out(cfg.trace);
        write_trace_csv(out, core.trace());
        core.enable_trace(false);
        j["trace"] = cfg.trace;
    }

    if (cfg.out.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        auto out = open_out(cfg.out);
        out << j.dump(2) << '\n';
    }
    return report.guaranteed_mismatches == 0 && cycles_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    try {
        apply_config_file(cfg);
    } catch (const std::exception& e) {
        std::cerr << "ecosom: " << e.what() << "\n";
        return 1;
    }

    CLI::App app{"Driving-style SOM toolkit: telemetry ingestion, map training, "
                 "U-matrix clustering, eco-driving advice and accelerator emulation"};
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--input", cfg.input, "input file");
        sub->add_option("--model", cfg.model, "model JSON file");
        sub->add_option("--clusters", cfg.clusters, "cluster map JSON file");
        sub->add_option("--vehicle", cfg.vehicle, "vehicle parameter JSON file");
        sub->add_option("--out", cfg.out, "output file (default stdout where applicable)");
        sub->add_option("--seed", cfg.seed, "RNG seed");
        sub->add_option("--scheme", cfg.scheme, "cluster scheme (3 or 5)")
            ->check(CLI::IsMember({3, 5}));
        sub->add_option("--threshold", cfg.threshold, "U-matrix threshold fraction");
        sub->add_option("--interval-s", cfg.interval_s, "advice interval seconds");
        sub->add_option("--min-speed", cfg.min_speed, "segment filter mean speed, km/h");
        sub->add_option("--window", cfg.window, "window size in samples");
        sub->add_option("--shift", cfg.shift, "window shift in samples");
        sub->add_option("--rate", cfg.rate, "resampling rate, Hz");
    };

    auto* ingest = app.add_subcommand("ingest", "telemetry CSV -> filtered feature windows");
    auto* train_cmd = app.add_subcommand("train", "feature windows -> trained SOM model");
    auto* cluster = app.add_subcommand("cluster", "model + labeled windows -> cluster map");
    auto* advise_cmd = app.add_subcommand("advise", "telemetry -> JSON-lines advice reports");
    auto* emulate = app.add_subcommand("emulate", "model + map -> accelerator agreement report");
    for (auto* sub : {ingest, train_cmd, cluster, advise_cmd, emulate}) add_common(sub);
    emulate->add_option("--rom", cfg.rom, "write the accelerator ROM image here");
    emulate->add_option("--trace", cfg.trace, "write a per-cycle trace CSV here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(ingest)) return cmd_ingest(cfg);
        if (app.got_subcommand(train_cmd)) return cmd_train(cfg);
        if (app.got_subcommand(cluster)) return cmd_cluster(cfg);
        if (app.got_subcommand(advise_cmd)) return cmd_advise(cfg);
        if (app.got_subcommand(emulate)) return cmd_emulate(cfg);
    } catch (const std::exception& e) {
        std::cerr << "ecosom: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
