#include "edgebal/simnet/config_io.hpp"

#include <json.hpp>

#include <fstream>

namespace edgebal::simnet {

SimConfig config_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config is not valid json: ") + e.what());
    }
    SimConfig cfg;
    try {
        cfg.node_count = doc.value("nodes", cfg.node_count);
        cfg.blocks = doc.value("blocks", cfg.blocks);
        cfg.block_time_ms = doc.value("block_time_ms", cfg.block_time_ms);
        cfg.delta_st_ms = doc.value("delta_st_ms", cfg.delta_st_ms);
        cfg.collect_interval_ms = doc.value("collect_interval_ms", cfg.collect_interval_ms);
        if (doc.contains("app_cpu_ppm")) {
            cfg.app_cpu_min_ppm = doc["app_cpu_ppm"].at(0).get<std::int64_t>();
            cfg.app_cpu_max_ppm = doc["app_cpu_ppm"].at(1).get<std::int64_t>();
        }
        if (doc.contains("app_duration_blocks")) {
            cfg.app_duration_min_blocks = doc["app_duration_blocks"].at(0).get<int>();
            cfg.app_duration_max_blocks = doc["app_duration_blocks"].at(1).get<int>();
        }
        cfg.arrival_prob_ppm = doc.value("arrival_prob_ppm", cfg.arrival_prob_ppm);
        cfg.admission_threshold_ppm =
            doc.value("admission_threshold_ppm", cfg.admission_threshold_ppm);
        if (doc.contains("latency_ms")) {
            cfg.latency_min_ms = doc["latency_ms"].at(0).get<std::int64_t>();
            cfg.latency_max_ms = doc["latency_ms"].at(1).get<std::int64_t>();
        }
        cfg.seed = doc.value("seed", cfg.seed);
        cfg.migration_enabled = doc.value("migration_enabled", cfg.migration_enabled);
        std::string transport = doc.value("transport", std::string("flooded"));
        if (transport == "direct")
            cfg.transport = SimConfig::Transport::direct;
        else if (transport != "flooded")
            throw std::invalid_argument("transport must be flooded or direct");
        cfg.skew_arrivals = doc.value("skew_arrivals", cfg.skew_arrivals);
        cfg.crash_leader_at_height =
            doc.value("crash_leader_at_height", cfg.crash_leader_at_height);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config field malformed: ") + e.what());
    }
    return cfg;
}

SimConfig config_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return config_from_json(text);
}

}  // namespace edgebal::simnet
