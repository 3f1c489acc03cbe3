#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace edgebal::simnet {

// One row per consensus round. Loads are ppm integers; the standard
// deviation is reported in fraction units (1.0 == one full node) and is
// the population form over live nodes.
struct MetricsRow {
    std::uint64_t height = 0;
    std::int64_t mean_load_ppm = 0;
    double stddev_load = 0.0;
    std::uint64_t queue_len = 0;
    std::uint64_t running_apps = 0;
    std::uint64_t migrations = 0;      // executed by this round's block
    std::uint64_t messages_sent = 0;   // wire messages during this round
    std::uint64_t payload_bytes = 0;   // full score payload bytes during this round
    std::vector<std::int64_t> node_load_ppm;  // per node index; -1 marks a dead node
};

struct MetricsSeries {
    std::vector<MetricsRow> rows;

    // Versioned schema: fixed columns, then one load column per node.
    static constexpr int kCsvSchemaVersion = 1;
    static std::string csv_header(int node_count);
    [[nodiscard]] std::string to_csv() const;
};

// First block at which running apps outnumber nodes, if any.
std::optional<std::uint64_t> crossover_block(const MetricsSeries& metrics, int node_count);

// Mean of stddev_load over rows with height > from_height (exclusive).
double mean_stddev_after(const MetricsSeries& metrics, std::uint64_t from_height);

// Population variance of the stddev series over a height range.
double stddev_series_variance(const MetricsSeries& metrics, std::uint64_t from_height,
                              std::uint64_t to_height);

}  // namespace edgebal::simnet
