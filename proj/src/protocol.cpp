#include "edtn/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace edtn {

std::string_view to_string(NodeId node) {
    return node == NodeId::Fan ? "fan" : "dm";
}

Bundle make_bundle(std::int64_t id, std::int64_t size_bytes, double created_at_s,
                   const GprsModel& gprs) {
    if (size_bytes <= 0)
        throw ConfigError("workload: bundle size must be positive");
    return Bundle{id, size_bytes, packets_for_bytes(size_bytes, gprs), created_at_s};
}

EnergyEstimate estimate_energy(NodeId node, const EnergyStore& store, double reserve_j) {
    if (reserve_j < 0.0)
        throw ConfigError("reserve: must be >= 0");
    return {node, std::max(0.0, store.usable_energy_j() - reserve_j)};
}

double PerTech::get(Technology tech) const {
    switch (tech) {
    case Technology::Bluetooth: return bluetooth;
    case Technology::WiFi: return wifi;
    case Technology::Gprs:
        throw UnknownTechnology("gprs carries no per-local-link scalar");
    }
    throw UnknownTechnology("unknown technology");
}

double& PerTech::ref(Technology tech) {
    switch (tech) {
    case Technology::Bluetooth: return bluetooth;
    case Technology::WiFi: return wifi;
    default:
        throw UnknownTechnology("gprs carries no per-local-link scalar");
    }
}

ModelSuite default_models() {
    return {default_links(), GprsModel{}, default_phase_table()};
}

double RelayCost::flush_energy_j() const {
    double total = 0.0;
    for (const auto& flush : flushes)
        total += flush.energy_j;
    return total;
}

double RelayCost::total_energy_j() const {
    return handoff_j + flush_energy_j();
}

RelayCost relay_cost(const ModelSuite& models, std::int64_t packets) {
    RelayCost cost;
    cost.handoff_j = models.phases.energy_for(PhaseRole::SomToGprs);
    cost.handoff_time_s = models.phases.time_for(PhaseRole::SomToGprs);
    for (std::int64_t batch : flush_plan(packets, models.gprs.buffer_packets))
        cost.flushes.push_back(gprs_buffer_cost(models.gprs, batch));
    return cost;
}

BundleCosts bundle_costs(const ModelSuite& models, Technology tech, const Bundle& bundle,
                         double channel_quality) {
    if (!(channel_quality > 0.0))
        throw ConfigError("channel_quality: must be > 0 for a priced link");
    // Quality scales the effective data rate, so time and link energy
    // both grow by 1/quality. Relay costs are unaffected.
    const double time = transfer_time(models.links, tech, static_cast<double>(bundle.size_bytes)) /
                        channel_quality;
    const double link_energy = models.links.local_link(tech).active_watts * time;
    BundleCosts costs;
    costs.transfer_time_s = time;
    costs.fan_j = link_energy;
    costs.dm_j = link_energy + relay_cost(models, bundle.packets).total_energy_j();
    return costs;
}

NegotiationOutcome commit_greedy(double e_dm_j, double e_fan_j, Technology tech,
                                 std::span<const BundleCosts> costs,
                                 std::span<const Bundle> pending) {
    NegotiationOutcome outcome;
    double dm_left = e_dm_j;
    double fan_left = e_fan_j;
    for (std::size_t i = 0; i < pending.size(); ++i) {
        const BundleCosts& c = costs[i];
        if (c.dm_j > dm_left || c.fan_j > fan_left)
            break;
        dm_left -= c.dm_j;
        fan_left -= c.fan_j;
        outcome.committed.push_back({pending[i].id, c.fan_j, c.dm_j, c.transfer_time_s});
        outcome.total_fan_cost_j += c.fan_j;
        outcome.total_dm_cost_j += c.dm_j;
        outcome.total_transfer_time_s += c.transfer_time_s;
    }
    outcome.n = static_cast<std::int64_t>(outcome.committed.size());
    if (outcome.n > 0) {
        outcome.tech = tech;
        outcome.per_bundle_fan_cost_j = outcome.committed.front().fan_cost_j;
        outcome.per_bundle_dm_cost_j = outcome.committed.front().dm_cost_j;
    }
    return outcome;
}

namespace {

// How far the two budgets stretch over this technology, measured against
// the first pending bundle. Scale-free ranking: multiplying both budgets
// by the same factor multiplies the score by it, so the selected
// technology is invariant under joint scaling.
double budget_score(double e_dm_j, double e_fan_j, const BundleCosts& first) {
    const double inf = std::numeric_limits<double>::infinity();
    const double dm_ratio = first.dm_j > 0.0 ? e_dm_j / first.dm_j : inf;
    const double fan_ratio = first.fan_j > 0.0 ? e_fan_j / first.fan_j : inf;
    return std::min(dm_ratio, fan_ratio);
}

} // namespace

NegotiationOutcome negotiate(const NegotiationInputs& inputs,
                             std::span<const Bundle> pending, const ModelSuite& models,
                             const ProtocolConfig& config) {
    if (pending.empty())
        return {};

    struct Candidate {
        Technology tech;
        double score;
        double first_time_s;
        std::vector<BundleCosts> costs;
    };

    std::vector<Candidate> candidates;
    for (Technology tech : {Technology::WiFi, Technology::Bluetooth}) {
        const double quality = inputs.channel_quality.get(tech);
        if (quality < config.eligibility_threshold || quality <= 0.0)
            continue;
        Candidate cand{tech, 0.0, 0.0, {}};
        cand.costs.reserve(pending.size());
        for (const Bundle& bundle : pending)
            cand.costs.push_back(bundle_costs(models, tech, bundle, quality));
        cand.score = budget_score(inputs.e_dm_j, inputs.e_fan_j, cand.costs.front());
        cand.first_time_s = cand.costs.front().transfer_time_s;
        candidates.push_back(std::move(cand));
    }
    if (candidates.empty())
        return {};

    // Rank: highest score, then faster first bundle, then Wi-Fi first.
    // Candidates are built Wi-Fi first, so stable ordering settles ties.
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                         if (a.score != b.score)
                             return a.score > b.score;
                         return a.first_time_s < b.first_time_s;
                     });

    const Candidate& best = candidates.front();
    return commit_greedy(inputs.e_dm_j, inputs.e_fan_j, best.tech, best.costs, pending);
}

bool FanState::is_awaiting(std::int64_t bundle_id) const {
    return std::any_of(awaiting_ack.begin(), awaiting_ack.end(),
                       [bundle_id](const Bundle& b) { return b.id == bundle_id; });
}

bool FanState::is_queued(std::int64_t bundle_id) const {
    return std::any_of(queue.begin(), queue.end(),
                       [bundle_id](const Bundle& b) { return b.id == bundle_id; });
}

void DmState::mark_flushed(std::int64_t packets) {
    gprs_pending_packets = std::max<std::int64_t>(0, gprs_pending_packets - packets);
}

std::vector<SendAction> fan_begin_contact(FanState& fan, const NegotiationOutcome& outcome) {
    if (outcome.n > static_cast<std::int64_t>(fan.queue.size()))
        throw ConfigError("negotiated n exceeds the FAN queue length");

    std::vector<SendAction> actions;
    actions.reserve(static_cast<std::size_t>(outcome.n));
    for (const CommittedBundle& committed : outcome.committed) {
        const Bundle bundle = fan.queue.front();
        if (bundle.id != committed.id)
            throw ConfigError("negotiation commitment does not match the queue prefix");
        fan.store.discharge(committed.fan_cost_j, "dtn_send");
        fan.queue.pop_front();
        fan.awaiting_ack.push_back(bundle);
        actions.push_back({bundle, committed.fan_cost_j, fan.store.voltage_v()});
    }
    return actions;
}

ReceiveOutcome dm_receive_bundle(DmState& dm, const Bundle& bundle,
                                 const ModelSuite& models, Technology tech,
                                 double channel_quality) {
    const BundleCosts costs = bundle_costs(models, tech, bundle, channel_quality);
    const RelayCost relay = relay_cost(models, bundle.packets);

    ReceiveOutcome outcome;
    outcome.ack_bundle_id = bundle.id;
    outcome.receive_cost_j = costs.fan_j; // same radio time as the sender
    dm.store.discharge(outcome.receive_cost_j, "dtn_receive");
    outcome.dm_voltage_after_receive_v = dm.store.voltage_v();

    outcome.handoff_cost_j = relay.handoff_j;
    outcome.handoff_time_s = relay.handoff_time_s;
    if (relay.handoff_j > 0.0)
        dm.store.discharge(relay.handoff_j, "som_to_gprs");
    outcome.dm_voltage_after_handoff_v = dm.store.voltage_v();

    dm.inbox.push_back(bundle);
    dm.gprs_pending_packets += bundle.packets;

    std::int64_t remaining = bundle.packets;
    for (const BufferCost& flush : relay.flushes) {
        const std::int64_t batch = std::min(remaining, models.gprs.buffer_packets);
        dm.store.discharge(flush.energy_j, "gprs_flush");
        outcome.flushes.push_back({batch, flush.energy_j, flush.time_s, dm.store.voltage_v()});
        remaining -= batch;
    }
    return outcome;
}

bool fan_on_ack(FanState& fan, std::int64_t bundle_id) {
    auto it = std::find_if(fan.awaiting_ack.begin(), fan.awaiting_ack.end(),
                           [bundle_id](const Bundle& b) { return b.id == bundle_id; });
    if (it == fan.awaiting_ack.end()) {
        ++fan.unknown_ack_count;
        return false;
    }
    fan.awaiting_ack.erase(it); // permanent deletion
    return true;
}

void fan_requeue_unacked(FanState& fan) {
    for (auto it = fan.awaiting_ack.rbegin(); it != fan.awaiting_ack.rend(); ++it)
        fan.queue.push_front(*it);
    fan.awaiting_ack.clear();
}

} // namespace edtn
