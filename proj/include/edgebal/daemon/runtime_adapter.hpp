#pragma once

#include <map>
#include <string>
#include <vector>

#include "edgebal/core/codec.hpp"
#include "edgebal/core/score.hpp"
#include "edgebal/planner/planner.hpp"

namespace edgebal::daemon {

// Boundary to the container engine: list running apps with their measured
// consumption, and drive the pause/dump/transfer/resume migration cycle.
// The mock below stands in for a real engine adapter, which is an
// extension point rather than a deliverable here.
class RuntimeAdapter {
public:
    virtual ~RuntimeAdapter() = default;

    virtual std::vector<AppRecord> list_apps() = 0;
    virtual void start(const planner::AppDescriptor& app) = 0;
    virtual void pause(const std::string& app_id) = 0;
    virtual Bytes dump(const std::string& app_id) = 0;
    virtual void resume(const std::string& app_id, const Bytes& context) = 0;
    virtual void remove(const std::string& app_id) = 0;
};

class MockRuntime : public RuntimeAdapter {
public:
    std::vector<AppRecord> list_apps() override;
    void start(const planner::AppDescriptor& app) override;
    void pause(const std::string& app_id) override;
    Bytes dump(const std::string& app_id) override;
    void resume(const std::string& app_id, const Bytes& context) override;
    void remove(const std::string& app_id) override;

    [[nodiscard]] bool running(const std::string& app_id) const;
    [[nodiscard]] bool has(const std::string& app_id) const;
    [[nodiscard]] std::size_t app_count() const;

    // Test hook: make list_apps() fail like an unreachable engine socket.
    void set_introspection_failure(bool fail) { fail_listing_ = fail; }

private:
    struct Entry {
        planner::AppDescriptor descriptor;
        bool running = false;
    };
    std::map<std::string, Entry> apps_;
    bool fail_listing_ = false;
};

}  // namespace edgebal::daemon
