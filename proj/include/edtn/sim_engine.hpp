#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "edtn/contact.hpp"
#include "edtn/energy_store.hpp"
#include "edtn/protocol.hpp"
#include "edtn/trace.hpp"

namespace edtn {

struct RideLeg {
    double speed_kmh = 0.0;
    double duration_s = 0.0;
};

struct ContactSpec {
    double start_s = 0.0;
    double max_duration_s = 0.0;
    std::optional<PerTech> channel_quality; // overrides the scenario default
};

struct WorkloadItem {
    std::int64_t id = 0;
    std::int64_t size_bytes = 0;
    double created_at_s = 0.0;
};

/// Complete description of one run: stores, models, the mule's ride and
/// contact schedule, the FAN workload and the loss process.
struct Scenario {
    Supercapacitor dm_capacitor{100.0, 5.0, 5.0, 2.0};
    std::optional<Supercapacitor> fan_capacitor; // absent: effectively unlimited
    Dynamo dynamo;
    ModelSuite models = default_models();
    ProtocolConfig protocol;
    PerTech channel_quality{1.0, 1.0};
    std::vector<RideLeg> rides;        // ridden back to back from t = 0
    std::vector<ContactSpec> contacts; // absolute starts, non-overlapping
    std::vector<Blackout> gprs_blackouts;
    std::vector<WorkloadItem> workload;
    double loss_probability = 0.0;
    std::uint64_t seed = 0;

    void validate() const; // throws ConfigError naming the offending key
};

struct Metrics {
    std::int64_t bundles_offered = 0;   // distinct bundles that hit the wire
    std::int64_t bundles_delivered = 0; // distinct bundles that reached the server
    double delivery_latency_mean_s = 0.0;
    double delivery_latency_max_s = 0.0;
    double fan_energy_j = 0.0; // total consumed
    double dm_energy_j = 0.0;
    double energy_per_delivered_byte_j = 0.0;
    std::int64_t rounds_executed = 0;

    bool operator==(const Metrics&) const = default;
};

/// Pure fold over trace records. Latency counts from the send that
/// preceded the first server delivery. Bundle sizes cannot be encoded
/// in the fixed trace schema, so the byte-normalized figure takes them
/// as a side input.
Metrics compute_metrics(std::span<const TraceRecord> trace,
                        const std::map<std::int64_t, std::int64_t>& bundle_sizes);

enum class LossOutcome { Delivered, Lost };

/// One Bernoulli draw; advances the generator exactly once per message.
LossOutcome apply_loss(std::mt19937_64& rng, double probability);

struct NodeSummary {
    double initial_stored_j = 0.0;
    double final_stored_j = 0.0;
    EnergyLedger ledger;
};

struct RunResult {
    std::vector<TraceRecord> trace; // (time, seq)-sorted
    Metrics metrics;
    NodeSummary fan;
    NodeSummary dm;
    ChainCost dm_chain; // duty-cycle table cost summed over delivered bundles
    std::vector<std::string> message_log;
    std::uint64_t seed = 0;
    std::map<std::int64_t, std::int64_t> bundle_sizes;
    std::int64_t fan_queue_remaining = 0; // undelivered bundles left at the FAN
};

/// Deterministic run: identical (scenario, seed) pairs produce identical
/// traces, byte for byte once serialized.
RunResult run(const Scenario& scenario, std::uint64_t seed);

inline RunResult run(const Scenario& scenario) { return run(scenario, scenario.seed); }

} // namespace edtn
