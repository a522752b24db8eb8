#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qnet/capability.hpp"
#include "qnet/linklayer.hpp"
#include "qnet/resources.hpp"
#include "qnet/routing.hpp"
#include "qnet/sim.hpp"

namespace qnet {

enum class ConnectionModel { ConnectionOriented, Connectionless, Hybrid };
std::string_view to_string(ConnectionModel m);
std::optional<ConnectionModel> parse_connection_model(std::string_view s);  // co | cl | hybrid

// Fast: areas run connectionless sessions to the anchors, which then swap.
// Alternate: a single one-by-one session on a reserved path through the anchors.
enum class HybridMode { Fast, Alternate };
std::string_view to_string(HybridMode m);
std::optional<HybridMode> parse_hybrid_mode(std::string_view s);

struct ConnectionRequest {
    std::uint64_t id = 0;
    NodeIndex src = 0;
    NodeIndex dst = 0;
    RepeaterClass cls = RepeaterClass::FirstClass;
    LinkProtocol protocol = LinkProtocol::SimultaneousLink;
    ConnectionModel model = ConnectionModel::ConnectionOriented;
    double f_min = 0.25;
    double deadline = kInfinity;  // relative to submission
    int retry_limit = 0;
    std::vector<NodeIndex> waypoints;
    HybridMode hybrid_mode = HybridMode::Fast;
};

struct NetworkConfig {
    LinkConfig link;
    CostMetric metric = CostMetric::HopCount;
    std::optional<NodeIndex> controller;  // node hosting the controller; first node if unset
    double cl_timeout = 0.0;              // 0 selects three times the zero-load estimate
    std::uint8_t ttl = 32;
};

struct RequestOutcome {
    std::uint64_t request_id = 0;
    OwnerId owner = 0;
    ConnectionModel model = ConnectionModel::ConnectionOriented;
    RepeaterClass cls = RepeaterClass::FirstClass;
    LinkProtocol protocol = LinkProtocol::SimultaneousLink;
    bool success = false;
    FailureReason reason = FailureReason::None;
    std::string detail;
    std::optional<WernerLink> link;
    double issued_at = 0.0;
    double finished_at = 0.0;
    int attempts_total = 0;
    int purification_rounds = 0;
    int retries = 0;
    int frames_emitted = 0;
    double occupancy_s = 0.0;  // slot-seconds on interior nodes
    std::vector<NodeIndex> path;
    std::vector<double> area_w;  // hybrid fast mode, one entry per area
    std::vector<FailureReason> drops;

    double latency() const { return finished_at - issued_at; }
};

class Network {
public:
    using Callback = std::function<void(const RequestOutcome&)>;

    Network(Simulator& sim, const Graph& graph, NetworkConfig config = {});
    ~Network();
    Network(const Network&) = delete;
    Network& operator=(const Network&) = delete;

    // Issues the request at the current simulation time.
    void submit(const ConnectionRequest& request, Callback on_done = {});
    // Submits and runs the simulator until this request terminates.
    RequestOutcome establish(const ConnectionRequest& request);

    MemoryLedger& ledger();
    const NetworkConfig& config() const;
    const RoutingTables& routes(RepeaterClass cls);
    NodeIndex controller() const;

    // Zero-load estimate of a connectionless establishment along the routing
    // tables; infinite when unreachable.
    double expected_cl_time(NodeIndex src, NodeIndex dst, RepeaterClass cls);

    // Test hook: every frame in flight is dropped past its first hop.
    void set_forced_payload_loss(bool on);

    std::size_t in_flight() const;
    std::size_t queued() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace qnet
