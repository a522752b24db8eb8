#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qnet/capability.hpp"
#include "qnet/core.hpp"
#include "qnet/physics.hpp"
#include "qnet/resources.hpp"
#include "qnet/sim.hpp"

namespace qnet {

enum class SwapPolicy { Hierarchical, LeftToRight };
std::string_view to_string(SwapPolicy p);

enum class FailureReason {
    None,
    CapabilityViolation,
    InvalidRequest,
    NoPath,
    ResourceExhausted,
    Timeout,
    HopFailure,
    FidelityBelowMinimum,
    RetriesExhausted,
    TtlExpired,
    NoRoute,
    CrcFail,
    NoResource,
    ForcedLoss,
};
std::string_view to_string(FailureReason r);

// Swap rounds over path positions 1..n-2. Hierarchical pairs segments in
// doubling rounds; LeftToRight swaps one node per round in path order.
std::vector<std::vector<std::size_t>> swap_schedule(std::size_t path_nodes, SwapPolicy policy);

enum class ResourceMode {
    Upfront,      // session reserves its whole path at start
    PreReserved,  // caller owns the reservation
    PerHop,       // slots taken per segment and freed right after each swap
};

struct LinkConfig {
    PhysicsParams physics;
    AllPhotonicOptions allphotonic;
    SwapPolicy swap_policy = SwapPolicy::Hierarchical;  // simultaneous link only
    bool pipelining = true;                             // one-by-one, first/second class
    double deadline = kInfinity;                        // relative to session start
    ResourceMode resources = ResourceMode::Upfront;
    BellState target = BellState::PsiPlus;
};

enum class SessionPhase { Generating, Purifying, Swapping, Hopping, Done, Failed };

struct SessionStats {
    std::vector<int> attempts_per_segment;
    int purification_rounds = 0;
    double start_time = 0.0;
    double finish_time = 0.0;

    int attempts_total() const;
};

struct ChannelResult {
    bool success = false;
    FailureReason reason = FailureReason::None;
    std::string detail;
    int failing_segment = -1;
    std::optional<WernerLink> link;  // end-to-end pair on success
    double latency = 0.0;
    std::vector<NodeIndex> path;
    SessionStats stats;
};

struct HopDecision {
    enum class Kind { Forward, Deliver, Drop };
    Kind kind = Kind::Deliver;
    NodeIndex next = 0;
    FailureReason drop_reason = FailureReason::None;
};

struct SessionHooks {
    // Consulted when the frontier reaches path position `position`. When
    // unset the session follows its fixed path.
    std::function<HopDecision(NodeIndex at, std::size_t position)> next_hop;
    std::function<void(const ChannelResult&)> on_done;
};

struct LinkRequest {
    std::vector<NodeIndex> path;  // full path, or just {src} when next_hop routes
    NodeIndex destination = 0;
    RepeaterClass cls = RepeaterClass::FirstClass;
    LinkProtocol protocol = LinkProtocol::SimultaneousLink;
    OwnerId owner = 0;
};

class LinkSession {
public:
    virtual ~LinkSession() = default;

    virtual bool finished() const = 0;
    virtual SessionPhase phase() const = 0;
    virtual const std::vector<NodeIndex>& path() const = 0;
    virtual const SessionStats& stats() const = 0;
    // Stops the session and frees what it holds; on_done is not invoked.
    virtual void abort(FailureReason reason, std::string detail) = 0;
};

// True when the class purifies and the configured target is above the fresh
// pair fidelity.
bool pumping_enabled(RepeaterClass cls, const LinkConfig& config);

// Slots a node needs per segment end it hosts (0 for memoryless classes).
int slots_per_segment_end(RepeaterClass cls, const LinkConfig& config);
std::vector<SlotDemand> path_demand(const std::vector<NodeIndex>& path, RepeaterClass cls,
                                    const LinkConfig& config);

// Adjacency and class homogeneity of interior nodes; returns a reason on error.
std::optional<std::string> check_path(const Graph& graph, const std::vector<NodeIndex>& path,
                                      RepeaterClass cls);

// Event-driven entry point. Capability and path checks are the caller's job.
std::shared_ptr<LinkSession> start_link_session(Simulator& sim, const Graph& graph,
                                                MemoryLedger& ledger, LinkRequest request,
                                                LinkConfig config, SessionHooks hooks);

// Run one session to completion on `sim` and return its result.
ChannelResult simultaneous_link(Simulator& sim, const Graph& graph, MemoryLedger& ledger,
                                const std::vector<NodeIndex>& path, RepeaterClass cls,
                                const LinkConfig& config);
ChannelResult one_by_one_link(Simulator& sim, const Graph& graph, MemoryLedger& ledger,
                              const std::vector<NodeIndex>& path, RepeaterClass cls,
                              const LinkConfig& config);

} // namespace qnet
