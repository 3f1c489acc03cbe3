// Operator entry points: seeded simulations and sweeps, chain audit, and
// the long-running node daemon.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "edgebal/consensus/consensus.hpp"
#include "edgebal/daemon/daemon.hpp"
#include "edgebal/simnet/config_io.hpp"
#include "edgebal/simnet/simulation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};
void on_signal(int) { g_stop = true; }

json summary_of(const edgebal::simnet::SimConfig& cfg, const edgebal::simnet::SimResult& r) {
    auto crossover = edgebal::simnet::crossover_block(r.metrics, cfg.node_count);
    double mean_sd = 0, max_sd = 0;
    for (const auto& row : r.metrics.rows) {
        mean_sd += row.stddev_load;
        max_sd = std::max(max_sd, row.stddev_load);
    }
    if (!r.metrics.rows.empty()) mean_sd /= static_cast<double>(r.metrics.rows.size());

    json doc{{"nodes", cfg.node_count},
             {"blocks", cfg.blocks},
             {"seed", cfg.seed},
             {"final_height", r.final_height},
             {"chains_identical", r.chains_identical},
             {"mean_stddev", mean_sd},
             {"max_stddev", max_sd},
             {"migrations", r.migrations_total},
             {"messages", r.messages_total},
             {"payload_bytes", r.payload_bytes_total}};
    if (crossover) {
        doc["crossover_block"] = *crossover;
        doc["post_crossover_mean_stddev"] =
            edgebal::simnet::mean_stddev_after(r.metrics, *crossover);
    } else {
        doc["crossover_block"] = nullptr;
    }
    return doc;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::string gnuplot_script(const std::string& csv_name) {
    std::string gp;
    gp += "set datafile separator ','\n";
    gp += "set key autotitle columnhead\n";
    gp += "set xlabel 'block'\n";
    gp += "set ylabel 'std dev of CPU load'\n";
    gp += "plot '" + csv_name + "' using 1:3 with lines title 'stddev'\n";
    return gp;
}

int run_one_sim(const edgebal::simnet::SimConfig& cfg, const fs::path& out_dir, bool emit_gnuplot,
                bool overwrite) {
    fs::create_directories(out_dir);
    fs::path csv = out_dir / "metrics.csv";
    fs::path summary = out_dir / "summary.json";
    fs::path chain = out_dir / "chain.bin";
    if (!overwrite && (fs::exists(csv) || fs::exists(summary) || fs::exists(chain)))
        throw std::runtime_error("refusing to overwrite existing outputs in " + out_dir.string());

    edgebal::simnet::SimResult result = edgebal::simnet::run(cfg);
    write_file(csv, result.metrics.to_csv());
    write_file(summary, summary_of(cfg, result).dump(2) + "\n");

    edgebal::consensus::ConsensusParams params;
    params.block_time_ms = cfg.block_time_ms;
    params.planner.migration_enabled = cfg.migration_enabled;
    edgebal::consensus::ChainState persisted;
    for (const auto& b : result.chain)
        if (b->height > 0) persisted.append(b, params);
    persisted.save(chain.string());

    if (emit_gnuplot) write_file(out_dir / "plot.gp", gnuplot_script("metrics.csv"));

    std::cout << "wrote " << csv.string() << " (" << result.metrics.rows.size() << " rows), "
              << summary.string() << ", " << chain.string() << "\n";
    return 0;
}

edgebal::daemon::DaemonConfig daemon_config_from_json(const json& doc, const fs::path& base) {
    edgebal::daemon::DaemonConfig cfg;
    std::string listen = doc.value("listen", std::string("127.0.0.1:0"));
    auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw std::invalid_argument("listen must be host:port");
    cfg.listen_host = listen.substr(0, colon);
    cfg.listen_port = std::stoi(listen.substr(colon + 1));

    std::string seed_hex;
    if (doc.contains("key_seed_hex")) {
        seed_hex = doc["key_seed_hex"].get<std::string>();
    } else if (doc.contains("key_file")) {
        fs::path p = doc["key_file"].get<std::string>();
        if (p.is_relative()) p = base / p;
        std::ifstream in(p);
        if (!in) throw std::runtime_error("cannot read key file " + p.string());
        in >> seed_hex;
    } else {
        throw std::invalid_argument("config needs key_seed_hex or key_file");
    }
    if (!edgebal::from_hex(seed_hex, cfg.key_seed.data(), cfg.key_seed.size()))
        throw std::invalid_argument("key seed must be 64 hex digits");

    for (const auto& p : doc.value("peers", std::vector<std::string>{})) cfg.peer_addrs.push_back(p);
    cfg.block_time_ms = doc.value("block_time_ms", cfg.block_time_ms);
    cfg.delta_st_ms = doc.value("delta_st_ms", cfg.delta_st_ms);
    cfg.collect_interval_ms = doc.value("collect_interval_ms", cfg.collect_interval_ms);
    cfg.admission_threshold_ppm = doc.value("admission_threshold_ppm", cfg.admission_threshold_ppm);
    if (doc.contains("chain_file")) {
        fs::path p = doc["chain_file"].get<std::string>();
        if (p.is_relative()) p = base / p;
        cfg.chain_file = p.string();
    }
    for (const auto& a : doc.value("initial_apps", json::array())) {
        edgebal::planner::AppDescriptor d;
        d.app_id = a.at("app_id").get<std::string>();
        d.cpu = edgebal::ResourceFraction::checked(a.value("cpu_ppm", std::int64_t{0}));
        d.ram = edgebal::ResourceFraction::checked(a.value("ram_ppm", std::int64_t{0}));
        d.disk = edgebal::ResourceFraction::checked(a.value("disk_ppm", std::int64_t{0}));
        d.network = edgebal::ResourceFraction::checked(a.value("network_ppm", std::int64_t{0}));
        cfg.initial_apps.push_back(std::move(d));
    }
    return cfg;
}

json load_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return json::parse(in);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"decentralized edge load balancer"};
    app.require_subcommand(1);

    // ---- sim ----
    auto* sim = app.add_subcommand("sim", "run one seeded simulation");
    std::string sim_config_path, sim_preset, sim_out = "sim-out";
    std::uint64_t sim_seed = 0;
    int sim_nodes = 0, sim_blocks = 0;
    bool sim_gnuplot = false, sim_overwrite = false;
    sim->add_option("--config", sim_config_path, "config JSON path");
    sim->add_option("--preset", sim_preset, "preset name (n5, n25, n50, n100)");
    sim->add_option("--out", sim_out, "output directory");
    sim->add_option("--seed", sim_seed, "override seed");
    sim->add_option("--nodes", sim_nodes, "override node count");
    sim->add_option("--blocks", sim_blocks, "override block count");
    sim->add_flag("--gnuplot", sim_gnuplot, "also write a gnuplot script");
    sim->add_flag("--overwrite", sim_overwrite, "allow overwriting outputs");

    // ---- sweep ----
    auto* sweep = app.add_subcommand("sweep", "run a family of simulations");
    std::string sweep_spec_path, sweep_out = "sweep-out";
    sweep->add_option("--spec", sweep_spec_path, "sweep spec JSON path")->required();
    sweep->add_option("--out", sweep_out, "output directory");

    // ---- node ----
    auto* node = app.add_subcommand("node", "run the daemon");
    std::string node_config_path;
    node->add_option("--config", node_config_path, "daemon config JSON path")->required();

    // ---- audit ----
    auto* audit = app.add_subcommand("audit", "re-verify a persisted chain");
    std::string audit_chain_path;
    std::int64_t audit_block_time = 1000;
    bool audit_no_migration = false;
    audit->add_option("chain", audit_chain_path, "chain file")->required();
    audit->add_option("--block-time-ms", audit_block_time, "chain block time parameter");
    audit->add_flag("--no-migration", audit_no_migration, "chain ran with migrations disabled");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            json doc = json::object();
            if (!sim_preset.empty()) {
                fs::path self(argv[0]);
                fs::path preset =
                    self.parent_path().parent_path() / "configs" / (sim_preset + ".json");
                if (!fs::exists(preset)) preset = fs::path("configs") / (sim_preset + ".json");
                doc = load_json(preset);
            } else if (!sim_config_path.empty()) {
                doc = load_json(sim_config_path);
            }
            edgebal::simnet::SimConfig cfg = edgebal::simnet::config_from_json(doc.dump());
            if (sim_seed != 0) cfg.seed = sim_seed;
            if (sim_nodes != 0) cfg.node_count = sim_nodes;
            if (sim_blocks != 0) cfg.blocks = sim_blocks;
            cfg.validate();
            return run_one_sim(cfg, sim_out, sim_gnuplot, sim_overwrite);
        }

        if (sweep->parsed()) {
            json spec = load_json(sweep_spec_path);
            json base = spec.value("base", json::object());
            int rc = 0;
            for (const auto& variation : spec.at("runs")) {
                json merged = base;
                merged.update(variation);
                edgebal::simnet::SimConfig cfg = edgebal::simnet::config_from_json(merged.dump());
                cfg.validate();
                std::string name = merged.value(
                    "name", "n" + std::to_string(cfg.node_count) + "-s" + std::to_string(cfg.seed));
                rc |= run_one_sim(cfg, fs::path(sweep_out) / name, false, false);
            }
            return rc;
        }

        if (node->parsed()) {
            json doc = load_json(node_config_path);
            auto cfg = daemon_config_from_json(doc, fs::path(node_config_path).parent_path());
            edgebal::daemon::Daemon daemon(cfg);
            std::signal(SIGTERM, on_signal);
            std::signal(SIGINT, on_signal);
            daemon.start();
            std::cout << "node " << daemon.id().hex() << " listening on " << daemon.address()
                      << std::endl;
            while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
            daemon.stop();
            return 0;
        }

        if (audit->parsed()) {
            edgebal::consensus::ConsensusParams params;
            params.block_time_ms = audit_block_time;
            params.planner.migration_enabled = !audit_no_migration;
            try {
                auto chain = edgebal::consensus::ChainState::load(audit_chain_path, params);
                std::cout << "full-pass: " << chain.height() + 1 << " blocks, head "
                          << chain.head_hash().hex() << "\n";
                return 0;
            } catch (const edgebal::CodecError& e) {
                std::cerr << "parse error: " << e.what() << "\n";
                return 2;
            } catch (const std::exception& e) {
                std::cerr << "audit failed: " << e.what() << "\n";
                return 1;
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
