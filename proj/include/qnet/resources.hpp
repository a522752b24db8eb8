#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qnet/core.hpp"

namespace qnet {

using OwnerId = std::uint64_t;

struct Reservation {
    OwnerId owner;
    NodeIndex node;
    int slots_held;
    double acquired_at;
    std::optional<double> released_at;
};

struct SlotDemand {
    NodeIndex node;
    int slots;
};

// Memory-slot bookkeeping shared by every protocol running in one simulator.
// Acquisitions never push a node past its memory_count.
class MemoryLedger {
public:
    using Observer = std::function<void(const MemoryLedger&, NodeIndex)>;

    explicit MemoryLedger(const Graph& graph);

    int capacity(NodeIndex n) const { return capacity_.at(n); }
    int held(NodeIndex n) const { return held_.at(n); }
    int free(NodeIndex n) const { return capacity_.at(n) - held_.at(n); }
    int held_by(OwnerId owner, NodeIndex n) const;
    int held_by(OwnerId owner) const;

    bool can_acquire(std::span<const SlotDemand> demand) const;

    // All-or-nothing. Returns false and changes nothing when any node lacks room.
    bool acquire(OwnerId owner, std::span<const SlotDemand> demand, double now);
    bool acquire(OwnerId owner, NodeIndex node, int slots, double now);

    void release_node(OwnerId owner, NodeIndex node, double now);
    // Releases up to `slots` of the owner's slots at `node`, newest first.
    void release_slots(OwnerId owner, NodeIndex node, int slots, double now);
    void release_owner(OwnerId owner, double now);

    // Summed slot-seconds of the owner's reservations on nodes accepted by
    // `filter`; open reservations count up to `now`.
    double slot_seconds(OwnerId owner, const std::function<bool(NodeIndex)>& filter,
                        double now) const;

    const std::vector<Reservation>& records() const { return records_; }
    void set_observer(Observer observer) { observer_ = std::move(observer); }

private:
    void close(std::size_t record, double now);

    std::vector<int> capacity_;
    std::vector<int> held_;
    std::vector<Reservation> records_;
    std::unordered_map<OwnerId, std::vector<std::size_t>> open_;  // owner -> open records
    Observer observer_;
};

} // namespace qnet
