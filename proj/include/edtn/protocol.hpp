#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edtn/energy_store.hpp"
#include "edtn/link_models.hpp"

namespace edtn {

enum class NodeId { Fan, Dm };

std::string_view to_string(NodeId node);

/// One unit of application data offered by the aggregation node.
struct Bundle {
    std::int64_t id = 0;
    std::int64_t size_bytes = 0;
    std::int64_t packets = 0; // ceil(size_bytes / packet_bytes)
    double created_at_s = 0.0;
};

Bundle make_bundle(std::int64_t id, std::int64_t size_bytes, double created_at_s,
                   const GprsModel& gprs);

struct EnergyEstimate {
    NodeId node = NodeId::Dm;
    double available_j = 0.0; // usable minus reserve, clamped at zero
};

EnergyEstimate estimate_energy(NodeId node, const EnergyStore& store, double reserve_j);

/// Per-local-technology scalar (channel quality, data-rate hints, ...).
struct PerTech {
    double bluetooth = 1.0;
    double wifi = 1.0;

    double get(Technology tech) const;
    double& ref(Technology tech);
};

/// Everything a negotiation round looks at: both energy estimates plus
/// the advertised rate, power and channel-state scalars.
struct NegotiationInputs {
    double e_dm_j = 0.0;
    double e_fan_j = 0.0;
    PerTech data_rate_hint_bps{0.0, 0.0}; // informational, not used by the default models
    double transmit_power = 1.0;          // carried through; unused by the default models
    PerTech channel_quality{1.0, 1.0};    // in [0, 1]; linearly scales effective data rate
};

/// Per-bundle price of moving one bundle end to end over a technology.
struct BundleCosts {
    double fan_j = 0.0;     // transmit cost at the aggregation node
    double dm_j = 0.0;      // receive + handoff + flush cost at the mule
    double transfer_time_s = 0.0;
};

struct CommittedBundle {
    std::int64_t id = 0;
    double fan_cost_j = 0.0;
    double dm_cost_j = 0.0;
    double transfer_time_s = 0.0;
};

struct NegotiationOutcome {
    std::int64_t n = 0;
    std::optional<Technology> tech; // empty when n == 0
    double per_bundle_fan_cost_j = 0.0; // first committed bundle
    double per_bundle_dm_cost_j = 0.0;
    double total_fan_cost_j = 0.0;
    double total_dm_cost_j = 0.0;
    double total_transfer_time_s = 0.0;
    std::vector<CommittedBundle> committed;
};

struct ProtocolConfig {
    double negotiation_latency_s = 6.0;
    double dm_reserve_j = 85.0; // shutdown + modem-startup rows of the phase table
    double fan_reserve_j = 0.0;
    double eligibility_threshold = 0.2; // minimum channel quality to consider a link
};

/// The calibrated models a negotiation prices against.
struct ModelSuite {
    LinkSuite links;
    GprsModel gprs;
    PhaseCostTable phases;
};

ModelSuite default_models();

/// Mule-side cost of relaying one received bundle to the server:
/// the controller-to-modem handoff plus every buffer flush.
struct RelayCost {
    double handoff_j = 0.0;
    double handoff_time_s = 0.0;
    std::vector<BufferCost> flushes;

    double flush_energy_j() const;
    double total_energy_j() const;
};

RelayCost relay_cost(const ModelSuite& models, std::int64_t packets);

BundleCosts bundle_costs(const ModelSuite& models, Technology tech, const Bundle& bundle,
                         double channel_quality);

/// Greedy prefix commit against both budgets for a fixed technology.
NegotiationOutcome commit_greedy(double e_dm_j, double e_fan_j, Technology tech,
                                 std::span<const BundleCosts> costs,
                                 std::span<const Bundle> pending);

/// Price every eligible technology, rank by how far the two budgets
/// stretch (ties by per-bundle transfer time, then Wi-Fi first), then
/// commit a greedy prefix of the queue for the winner. Infeasibility is
/// the n = 0 outcome, never an error.
NegotiationOutcome negotiate(const NegotiationInputs& inputs,
                             std::span<const Bundle> pending, const ModelSuite& models,
                             const ProtocolConfig& config = {});

/// Aggregation-node state machine.
struct FanState {
    std::deque<Bundle> queue;
    std::vector<Bundle> awaiting_ack; // send order == age order
    EnergyStore store;
    std::int64_t unknown_ack_count = 0;

    bool is_awaiting(std::int64_t bundle_id) const;
    bool is_queued(std::int64_t bundle_id) const;
};

/// Mule state machine.
struct DmState {
    EnergyStore store;
    std::vector<Bundle> inbox;          // received during the current contact
    std::int64_t gprs_pending_packets = 0; // buffered, not yet flushed
    double reserve_j = 85.0;

    void mark_flushed(std::int64_t packets);
};

struct SendAction {
    Bundle bundle;
    double cost_j = 0.0;
    double fan_voltage_after_v = 0.0;
};

/// Move the committed prefix to awaiting_ack and debit the FAN store per
/// bundle. Throws InsufficientEnergy if the store cannot cover a
/// committed send (an accounting bug; the caller aborts the contact).
std::vector<SendAction> fan_begin_contact(FanState& fan, const NegotiationOutcome& outcome);

struct FlushAction {
    std::int64_t packets = 0;
    double energy_j = 0.0;
    double duration_s = 0.0;
    double dm_voltage_after_v = 0.0;
};

struct ReceiveOutcome {
    std::int64_t ack_bundle_id = 0;
    double receive_cost_j = 0.0;
    double dm_voltage_after_receive_v = 0.0;
    double handoff_cost_j = 0.0;
    double handoff_time_s = 0.0;
    double dm_voltage_after_handoff_v = 0.0;
    std::vector<FlushAction> flushes; // partial buffers flush at bundle end
};

/// Accept one bundle on the mule: debit the receive and handoff costs,
/// enqueue its packets and debit one flush per buffer batch. The caller
/// schedules the flushes and emits the ACK after the last one lands.
ReceiveOutcome dm_receive_bundle(DmState& dm, const Bundle& bundle,
                                 const ModelSuite& models, Technology tech,
                                 double channel_quality);

/// Delete an acknowledged bundle. Unknown or duplicate ids are ignored
/// (counted as warnings). Returns true when a deletion happened.
bool fan_on_ack(FanState& fan, std::int64_t bundle_id);

/// Contact ended: unacknowledged bundles return to the head of the
/// queue in age order.
void fan_requeue_unacked(FanState& fan);

} // namespace edtn
