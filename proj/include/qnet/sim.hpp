#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qnet/core.hpp"

namespace qnet {

// splitmix64 finalizer; also the documented per-trial seed derivation.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// Labelled generator. Streams with the same (seed, label) produce identical
// draws; conversions to floating point are done here so results do not depend
// on the standard library's distribution implementations.
class RngStream {
public:
    RngStream(std::uint64_t global_seed, std::string_view label);

    const std::string& label() const { return label_; }

    std::uint64_t next() { return gen_(); }
    double uniform();                  // [0, 1)
    bool bernoulli(double p);          // true with probability p
    double exponential(double rate);   // mean 1/rate
    std::uint8_t two_bits();
    std::size_t index(std::size_t n);  // uniform in [0, n)

private:
    std::string label_;
    std::mt19937_64 gen_;
};

enum class EventKind { ClassicalDelivery, AttemptTick, Timeout, ProtocolStep };
std::string_view to_string(EventKind k);

using Action = std::function<void()>;

struct SimEvent {
    double time = 0.0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::ProtocolStep;
    std::string summary;
    Action action;
};

struct TraceEntry {
    double time;
    std::uint64_t seq;
    EventKind kind;
    std::string summary;
};

struct SimConfig {
    double c_fiber_km_s = 2.0e5;
    std::uint64_t max_events = 50'000'000;
    bool record_trace = true;
};

struct StopCondition {
    double time_limit = kInfinity;
    std::function<bool()> done;  // optional, checked after every event
};

class Simulator {
public:
    explicit Simulator(std::uint64_t seed, SimConfig config = {});

    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;

    double now() const { return now_; }
    std::uint64_t seed() const { return seed_; }
    bool tracing() const { return config_.record_trace; }
    std::uint64_t fresh_id() { return ++last_id_; }
    const SimConfig& config() const { return config_; }

    // Dequeue order is (time, seq): FIFO among equal timestamps.
    std::uint64_t schedule(double time, EventKind kind, std::string summary, Action action);
    std::uint64_t schedule_after(double delay, EventKind kind, std::string summary,
                                 Action action);

    // Delivery at now + length/c_fiber + dst.proc_delay. Returns delivery time.
    double send_classical(const NodeSpec& src, const NodeSpec& dst, std::string_view msg,
                          double path_length_km, Action on_delivery);
    double classical_delay(const NodeSpec& dst, double path_length_km) const;

    RngStream& stream(std::string_view label);

    // Processes events until the queue drains, the next event lies beyond the
    // time limit, or `done` reports true. Returns the entries traced by this
    // call (empty when tracing is disabled).
    std::span<const TraceEntry> run_until(const StopCondition& stop = {});

    std::size_t pending() const { return queue_.size(); }
    std::uint64_t processed() const { return processed_; }
    const std::vector<TraceEntry>& trace() const { return trace_; }
    void write_trace(std::ostream& os) const;

private:
    struct Later {
        bool operator()(const SimEvent& x, const SimEvent& y) const {
            if (x.time != y.time) return x.time > y.time;
            return x.seq > y.seq;
        }
    };

    std::uint64_t seed_;
    SimConfig config_;
    double now_ = 0.0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t processed_ = 0;
    std::uint64_t last_id_ = 0;
    std::vector<SimEvent> queue_;  // binary heap under Later
    std::map<std::string, RngStream, std::less<>> streams_;
    std::vector<TraceEntry> trace_;
};

void write_trace_line(std::ostream& os, const TraceEntry& e);

} // namespace qnet
