#include "edgebal/daemon/runtime_adapter.hpp"

#include <stdexcept>

namespace edgebal::daemon {

std::vector<AppRecord> MockRuntime::list_apps() {
    if (fail_listing_) throw std::runtime_error("container engine unreachable");
    std::vector<AppRecord> out;
    for (const auto& [id, e] : apps_) {
        if (!e.running) continue;
        // The mock reports exactly the declared consumption; a real
        // adapter would measure.
        out.push_back({id, e.descriptor.cpu, e.descriptor.ram, e.descriptor.disk,
                       e.descriptor.network, 0});
    }
    return out;
}

void MockRuntime::start(const planner::AppDescriptor& app) {
    apps_[app.app_id] = Entry{app, true};
}

void MockRuntime::pause(const std::string& app_id) {
    auto it = apps_.find(app_id);
    if (it == apps_.end()) throw std::runtime_error("pause: unknown app " + app_id);
    it->second.running = false;
}

Bytes MockRuntime::dump(const std::string& app_id) {
    auto it = apps_.find(app_id);
    if (it == apps_.end()) throw std::runtime_error("dump: unknown app " + app_id);
    Encoder e;
    it->second.descriptor.encode_into(e);
    return e.take();
}

void MockRuntime::resume(const std::string& app_id, const Bytes& context) {
    Decoder d{std::span<const std::uint8_t>(context)};
    planner::AppDescriptor desc = planner::AppDescriptor::decode_from(d);
    d.expect_end();
    if (desc.app_id != app_id)
        throw std::runtime_error("resume: context blob is for app " + desc.app_id);
    apps_[app_id] = Entry{desc, true};
}

void MockRuntime::remove(const std::string& app_id) { apps_.erase(app_id); }

bool MockRuntime::running(const std::string& app_id) const {
    auto it = apps_.find(app_id);
    return it != apps_.end() && it->second.running;
}

bool MockRuntime::has(const std::string& app_id) const { return apps_.contains(app_id); }

std::size_t MockRuntime::app_count() const {
    std::size_t n = 0;
    for (const auto& [id, e] : apps_)
        if (e.running) ++n;
    return n;
}

}  // namespace edgebal::daemon
