#include "qnet/sim.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace qnet {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ (index * 0xd1b54a32d192ed03ULL));
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

RngStream::RngStream(std::uint64_t global_seed, std::string_view label)
    : label_(label), gen_(splitmix64(global_seed ^ splitmix64(fnv1a(label)))) {}

double RngStream::uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

bool RngStream::bernoulli(double p) { return uniform() < p; }

double RngStream::exponential(double rate) {
    if (!(rate > 0.0)) throw Error(ErrorKind::InvalidArgument, "exponential rate must be > 0");
    return -std::log1p(-uniform()) / rate;
}

std::uint8_t RngStream::two_bits() { return static_cast<std::uint8_t>(gen_() >> 62); }

std::size_t RngStream::index(std::size_t n) {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "index over empty range");
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
}

std::string_view to_string(EventKind k) {
    switch (k) {
    case EventKind::ClassicalDelivery: return "ClassicalDelivery";
    case EventKind::AttemptTick: return "AttemptTick";
    case EventKind::Timeout: return "Timeout";
    case EventKind::ProtocolStep: return "ProtocolStep";
    }
    return "?";
}

Simulator::Simulator(std::uint64_t seed, SimConfig config) : seed_(seed), config_(config) {
    if (!(config_.c_fiber_km_s > 0.0))
        throw Error(ErrorKind::InvalidArgument, "c_fiber must be positive");
}

std::uint64_t Simulator::schedule(double time, EventKind kind, std::string summary,
                                  Action action) {
    if (!(time >= now_))
        throw Error(ErrorKind::PastEvent, "event '" + summary + "' scheduled in the past");
    std::uint64_t seq = next_seq_++;
    queue_.push_back({time, seq, kind, std::move(summary), std::move(action)});
    std::push_heap(queue_.begin(), queue_.end(), Later{});
    return seq;
}

std::uint64_t Simulator::schedule_after(double delay, EventKind kind, std::string summary,
                                        Action action) {
    return schedule(now_ + delay, kind, std::move(summary), std::move(action));
}

double Simulator::classical_delay(const NodeSpec& dst, double path_length_km) const {
    return path_length_km / config_.c_fiber_km_s + dst.proc_delay;
}

double Simulator::send_classical(const NodeSpec& src, const NodeSpec& dst, std::string_view msg,
                                 double path_length_km, Action on_delivery) {
    double at = now_ + classical_delay(dst, path_length_km);
    std::string summary;
    if (config_.record_trace) {
        summary.reserve(src.id.size() + dst.id.size() + msg.size() + 4);
        summary.append(src.id).append("->").append(dst.id).append(" ").append(msg);
    }
    schedule(at, EventKind::ClassicalDelivery, std::move(summary), std::move(on_delivery));
    return at;
}

RngStream& Simulator::stream(std::string_view label) {
    auto it = streams_.find(label);
    if (it == streams_.end())
        it = streams_.emplace(std::string(label), RngStream(seed_, label)).first;
    return it->second;
}

std::span<const TraceEntry> Simulator::run_until(const StopCondition& stop) {
    const std::size_t first = trace_.size();
    if (stop.done && stop.done()) return {};
    while (!queue_.empty()) {
        if (queue_.front().time > stop.time_limit) break;
        std::pop_heap(queue_.begin(), queue_.end(), Later{});
        SimEvent ev = std::move(queue_.back());
        queue_.pop_back();
        if (++processed_ > config_.max_events)
            throw Error(ErrorKind::LivelockGuard,
                        "processed-event ceiling of " + std::to_string(config_.max_events) +
                            " exceeded");
        now_ = ev.time;
        if (config_.record_trace)
            trace_.push_back({ev.time, ev.seq, ev.kind, std::move(ev.summary)});
        if (ev.action) ev.action();
        if (stop.done && stop.done()) break;
    }
    return std::span<const TraceEntry>(trace_).subspan(first);
}

void write_trace_line(std::ostream& os, const TraceEntry& e) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g\t%" PRIu64 "\t", e.time, e.seq);
    os << buf << to_string(e.kind) << '\t' << e.summary << '\n';
}

void Simulator::write_trace(std::ostream& os) const {
    for (const auto& e : trace_) write_trace_line(os, e);
}

} // namespace qnet
