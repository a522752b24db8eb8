#include "qnet/resources.hpp"

#include <algorithm>
#include <map>

namespace qnet {

MemoryLedger::MemoryLedger(const Graph& graph) {
    capacity_.reserve(graph.node_count());
    for (NodeIndex n = 0; n < graph.node_count(); ++n)
        capacity_.push_back(graph.node(n).memory_count);
    held_.assign(capacity_.size(), 0);
}

int MemoryLedger::held_by(OwnerId owner, NodeIndex n) const {
    auto it = open_.find(owner);
    if (it == open_.end()) return 0;
    int total = 0;
    for (auto r : it->second)
        if (records_[r].node == n) total += records_[r].slots_held;
    return total;
}

int MemoryLedger::held_by(OwnerId owner) const {
    auto it = open_.find(owner);
    if (it == open_.end()) return 0;
    int total = 0;
    for (auto r : it->second) total += records_[r].slots_held;
    return total;
}

bool MemoryLedger::can_acquire(std::span<const SlotDemand> demand) const {
    std::map<NodeIndex, int> need;
    for (const auto& d : demand) need[d.node] += d.slots;
    for (auto [node, slots] : need)
        if (held_.at(node) + slots > capacity_.at(node)) return false;
    return true;
}

bool MemoryLedger::acquire(OwnerId owner, std::span<const SlotDemand> demand, double now) {
    if (!can_acquire(demand)) return false;
    for (const auto& d : demand) {
        if (d.slots <= 0) continue;
        held_[d.node] += d.slots;
        open_[owner].push_back(records_.size());
        records_.push_back({owner, d.node, d.slots, now, std::nullopt});
        if (observer_) observer_(*this, d.node);
    }
    return true;
}

bool MemoryLedger::acquire(OwnerId owner, NodeIndex node, int slots, double now) {
    SlotDemand d{node, slots};
    return acquire(owner, std::span<const SlotDemand>(&d, 1), now);
}

void MemoryLedger::close(std::size_t record, double now) {
    auto& r = records_[record];
    if (r.released_at)
        throw Error(ErrorKind::InvalidArgument, "reservation released twice");
    r.released_at = now;
    held_[r.node] -= r.slots_held;
    if (observer_) observer_(*this, r.node);
}

void MemoryLedger::release_node(OwnerId owner, NodeIndex node, double now) {
    auto it = open_.find(owner);
    if (it == open_.end()) return;
    auto& list = it->second;
    std::vector<std::size_t> keep;
    for (auto r : list) {
        if (records_[r].node == node)
            close(r, now);
        else
            keep.push_back(r);
    }
    list = std::move(keep);
    if (list.empty()) open_.erase(it);
}

void MemoryLedger::release_slots(OwnerId owner, NodeIndex node, int slots, double now) {
    auto it = open_.find(owner);
    if (it == open_.end() || slots <= 0) return;
    auto& list = it->second;
    for (auto pos = list.size(); pos-- > 0 && slots > 0;) {
        std::size_t r = list[pos];
        if (records_[r].node != node) continue;
        if (records_[r].slots_held <= slots) {
            slots -= records_[r].slots_held;
            close(r, now);
            list.erase(list.begin() + static_cast<std::ptrdiff_t>(pos));
        } else {
            // Split: close the released part, keep the remainder open.
            auto rest = records_[r];
            records_[r].slots_held = slots;
            close(r, now);
            rest.slots_held -= slots;
            list[pos] = records_.size();
            records_.push_back(rest);
            slots = 0;
        }
    }
    if (list.empty()) open_.erase(it);
}

void MemoryLedger::release_owner(OwnerId owner, double now) {
    auto it = open_.find(owner);
    if (it == open_.end()) return;
    auto list = std::move(it->second);
    open_.erase(it);
    for (auto r : list) close(r, now);
}

double MemoryLedger::slot_seconds(OwnerId owner, const std::function<bool(NodeIndex)>& filter,
                                  double now) const {
    double total = 0.0;
    for (const auto& r : records_) {
        if (r.owner != owner || !filter(r.node)) continue;
        total += r.slots_held * (r.released_at.value_or(now) - r.acquired_at);
    }
    return total;
}

} // namespace qnet
