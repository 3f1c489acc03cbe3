#include "edgebal/simnet/metrics.hpp"

#include <cmath>
#include <cstdio>

namespace edgebal::simnet {

std::string MetricsSeries::csv_header(int node_count) {
    std::string h = "height,mean_load_ppm,stddev_load,queue_len,running_apps,migrations,"
                    "messages_sent,payload_bytes";
    for (int i = 0; i < node_count; ++i) h += ",load_ppm_" + std::to_string(i);
    h += "\n";
    return h;
}

std::string MetricsSeries::to_csv() const {
    std::string out = csv_header(rows.empty() ? 0 : static_cast<int>(rows[0].node_load_ppm.size()));
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%llu,%lld,%.6f,%llu,%llu,%llu,%llu,%llu",
                      static_cast<unsigned long long>(r.height),
                      static_cast<long long>(r.mean_load_ppm), r.stddev_load,
                      static_cast<unsigned long long>(r.queue_len),
                      static_cast<unsigned long long>(r.running_apps),
                      static_cast<unsigned long long>(r.migrations),
                      static_cast<unsigned long long>(r.messages_sent),
                      static_cast<unsigned long long>(r.payload_bytes));
        out += buf;
        for (auto v : r.node_load_ppm) {
            std::snprintf(buf, sizeof(buf), ",%lld", static_cast<long long>(v));
            out += buf;
        }
        out += "\n";
    }
    return out;
}

std::optional<std::uint64_t> crossover_block(const MetricsSeries& metrics, int node_count) {
    for (const auto& r : metrics.rows)
        if (r.running_apps > static_cast<std::uint64_t>(node_count)) return r.height;
    return std::nullopt;
}

double mean_stddev_after(const MetricsSeries& metrics, std::uint64_t from_height) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : metrics.rows) {
        if (r.height <= from_height) continue;
        sum += r.stddev_load;
        ++n;
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double stddev_series_variance(const MetricsSeries& metrics, std::uint64_t from_height,
                              std::uint64_t to_height) {
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (const auto& r : metrics.rows) {
        if (r.height < from_height || r.height > to_height) continue;
        sum += r.stddev_load;
        sq += r.stddev_load * r.stddev_load;
        ++n;
    }
    if (n == 0) return 0.0;
    double mean = sum / static_cast<double>(n);
    return sq / static_cast<double>(n) - mean * mean;
}

}  // namespace edgebal::simnet
