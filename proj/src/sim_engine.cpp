#include "edtn/sim_engine.hpp"

#include <algorithm>
#include <set>

namespace edtn {

void Scenario::validate() const {
    dm_capacitor.validate();
    if (fan_capacitor)
        fan_capacitor->validate();
    dynamo.validate();
    models.links.validate();
    models.gprs.validate();
    models.phases.validate();

    if (protocol.negotiation_latency_s < 0.0)
        throw ConfigError("protocol.negotiation_latency_s: must be >= 0");
    if (protocol.dm_reserve_j < 0.0)
        throw ConfigError("protocol.dm_reserve_j: must be >= 0");
    if (protocol.fan_reserve_j < 0.0)
        throw ConfigError("protocol.fan_reserve_j: must be >= 0");
    if (protocol.eligibility_threshold < 0.0 || protocol.eligibility_threshold > 1.0)
        throw ConfigError("protocol.eligibility_threshold: must be in [0, 1]");

    auto check_quality = [](const PerTech& q, const std::string& key) {
        if (q.bluetooth < 0.0 || q.bluetooth > 1.0)
            throw ConfigError(key + ".bluetooth: must be in [0, 1]");
        if (q.wifi < 0.0 || q.wifi > 1.0)
            throw ConfigError(key + ".wifi: must be in [0, 1]");
    };
    check_quality(channel_quality, "channel_quality");

    for (std::size_t i = 0; i < rides.size(); ++i) {
        if (rides[i].speed_kmh < 0.0)
            throw ConfigError("rides[" + std::to_string(i) + "].speed_kmh: must be >= 0");
        if (rides[i].duration_s < 0.0)
            throw ConfigError("rides[" + std::to_string(i) + "].duration_s: must be >= 0");
    }

    double prev_end = -1.0;
    for (std::size_t i = 0; i < contacts.size(); ++i) {
        const auto& c = contacts[i];
        const std::string key = "contacts[" + std::to_string(i) + "]";
        if (c.start_s < 0.0)
            throw ConfigError(key + ".start_s: must be >= 0");
        if (c.max_duration_s < 0.0)
            throw ConfigError(key + ".max_duration_s: must be >= 0");
        if (c.start_s < prev_end)
            throw ConfigError(key + ": contacts must be sorted and non-overlapping");
        prev_end = c.start_s + c.max_duration_s;
        if (c.channel_quality)
            check_quality(*c.channel_quality, key + ".channel_quality");
    }

    for (std::size_t i = 0; i < gprs_blackouts.size(); ++i) {
        if (!(gprs_blackouts[i].end_s > gprs_blackouts[i].start_s))
            throw ConfigError("gprs_blackouts[" + std::to_string(i) +
                              "]: end_s must exceed start_s");
    }

    std::set<std::int64_t> ids;
    for (std::size_t i = 0; i < workload.size(); ++i) {
        const auto& item = workload[i];
        const std::string key = "workload[" + std::to_string(i) + "]";
        if (item.size_bytes <= 0)
            throw ConfigError(key + ".size_bytes: must be > 0");
        if (item.created_at_s < 0.0)
            throw ConfigError(key + ".created_at_s: must be >= 0");
        if (!ids.insert(item.id).second)
            throw ConfigError(key + ".id: duplicate bundle id " + std::to_string(item.id));
    }

    if (loss_probability < 0.0 || loss_probability > 1.0)
        throw ConfigError("loss_probability: must be in [0, 1]");
}

LossOutcome apply_loss(std::mt19937_64& rng, double probability) {
    if (probability < 0.0 || probability > 1.0)
        throw ConfigError("loss probability must be in [0, 1]");
    // One generator word per message, mapped to [0, 1).
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return u < probability ? LossOutcome::Lost : LossOutcome::Delivered;
}

Metrics compute_metrics(std::span<const TraceRecord> trace,
                        const std::map<std::int64_t, std::int64_t>& bundle_sizes) {
    Metrics metrics;
    std::set<std::int64_t> offered;
    std::set<std::int64_t> delivered;
    std::map<std::int64_t, double> last_sent_at;
    std::map<std::int64_t, double> first_latency;

    double prev_time = -std::numeric_limits<double>::infinity();
    for (const TraceRecord& rec : trace) {
        if (rec.time_s < prev_time)
            throw MalformedTrace("trace times must be non-decreasing");
        prev_time = rec.time_s;

        if (rec.bundle_id)
            offered.insert(*rec.bundle_id);

        switch (rec.event) {
        case EventKind::BundleSent:
            if (!rec.bundle_id)
                throw MalformedTrace("BundleSent without a bundle id");
            last_sent_at[*rec.bundle_id] = rec.time_s;
            break;
        case EventKind::ServerDelivered: {
            if (!rec.bundle_id)
                throw MalformedTrace("ServerDelivered without a bundle id");
            const auto sent = last_sent_at.find(*rec.bundle_id);
            if (sent == last_sent_at.end())
                throw MalformedTrace("ServerDelivered before any BundleSent for bundle " +
                                     std::to_string(*rec.bundle_id));
            if (delivered.insert(*rec.bundle_id).second)
                first_latency[*rec.bundle_id] = rec.time_s - sent->second;
            break;
        }
        case EventKind::AckDelivered:
            if (!rec.bundle_id)
                throw MalformedTrace("AckDelivered without a bundle id");
            if (delivered.find(*rec.bundle_id) == delivered.end())
                throw MalformedTrace("AckDelivered before ServerDelivered for bundle " +
                                     std::to_string(*rec.bundle_id));
            break;
        case EventKind::NegotiationDone:
            ++metrics.rounds_executed;
            break;
        default:
            break;
        }

        if (rec.energy_delta_j < 0.0) {
            if (rec.node == NodeId::Fan)
                metrics.fan_energy_j += -rec.energy_delta_j;
            else
                metrics.dm_energy_j += -rec.energy_delta_j;
        }
    }

    metrics.bundles_offered = static_cast<std::int64_t>(offered.size());
    metrics.bundles_delivered = static_cast<std::int64_t>(delivered.size());

    double latency_sum = 0.0;
    for (const auto& [id, latency] : first_latency) {
        latency_sum += latency;
        metrics.delivery_latency_max_s = std::max(metrics.delivery_latency_max_s, latency);
    }
    if (!first_latency.empty())
        metrics.delivery_latency_mean_s = latency_sum / static_cast<double>(first_latency.size());

    std::int64_t delivered_bytes = 0;
    for (std::int64_t id : delivered) {
        const auto it = bundle_sizes.find(id);
        if (it != bundle_sizes.end())
            delivered_bytes += it->second;
    }
    if (delivered_bytes > 0)
        metrics.energy_per_delivered_byte_j =
            (metrics.fan_energy_j + metrics.dm_energy_j) / static_cast<double>(delivered_bytes);
    return metrics;
}

namespace {

// A FAN with no configured store runs from a practically bottomless one.
Supercapacitor unlimited_fan_capacitor() {
    Supercapacitor cap;
    cap.capacitance_f = 1e6;
    cap.voltage_v = 5.0;
    cap.v_max_v = 5.0;
    cap.v_cutoff_v = 0.0;
    return cap; // 12.5 MJ usable
}

struct ScheduleItem {
    double start_s = 0.0;
    bool is_ride = false;
    std::size_t index = 0;
};

} // namespace

RunResult run(const Scenario& scenario, std::uint64_t seed) {
    scenario.validate();

    RunResult result;
    result.seed = seed;

    FanState fan;
    fan.store = EnergyStore(scenario.fan_capacitor ? *scenario.fan_capacitor
                                                   : unlimited_fan_capacitor());
    for (const WorkloadItem& item : scenario.workload) {
        fan.queue.push_back(
            make_bundle(item.id, item.size_bytes, item.created_at_s, scenario.models.gprs));
        result.bundle_sizes[item.id] = item.size_bytes;
    }

    DmState dm;
    dm.store = EnergyStore(scenario.dm_capacitor);
    dm.reserve_j = scenario.protocol.dm_reserve_j;

    result.fan.initial_stored_j = fan.store.stored_energy_j();
    result.dm.initial_stored_j = dm.store.stored_energy_j();

    std::mt19937_64 rng(seed);
    auto draw_loss = [&rng, &scenario]() {
        return apply_loss(rng, scenario.loss_probability) == LossOutcome::Lost;
    };

    // Rides run back to back from t = 0; contacts carry absolute starts.
    std::vector<ScheduleItem> schedule;
    double ride_clock = 0.0;
    for (std::size_t i = 0; i < scenario.rides.size(); ++i) {
        schedule.push_back({ride_clock, true, i});
        ride_clock += scenario.rides[i].duration_s;
    }
    for (std::size_t i = 0; i < scenario.contacts.size(); ++i)
        schedule.push_back({scenario.contacts[i].start_s, false, i});
    std::stable_sort(schedule.begin(), schedule.end(),
                     [](const ScheduleItem& a, const ScheduleItem& b) {
                         if (a.start_s != b.start_s)
                             return a.start_s < b.start_s;
                         return a.is_ride && !b.is_ride; // harvest before contacting
                     });

    Tracer tracer;
    std::vector<double> ride_starts(scenario.rides.size(), 0.0);
    double ride_cursor = 0.0;
    for (std::size_t i = 0; i < scenario.rides.size(); ++i) {
        ride_starts[i] = ride_cursor;
        ride_cursor += scenario.rides[i].duration_s;
    }

    for (const ScheduleItem& item : schedule) {
        if (item.is_ride) {
            const RideLeg& leg = scenario.rides[item.index];
            const double t0 = ride_starts[item.index];
            const double t1 = t0 + leg.duration_s;
            tracer.emit(t0, NodeId::Dm, EventKind::RideStart, std::nullopt, std::nullopt,
                        0.0, dm.store.voltage_v());
            const ChargeResult charged =
                dm.store.charge(scenario.dynamo.power_at(leg.speed_kmh), leg.duration_s,
                                scenario.dynamo.efficiency, "dynamo");
            tracer.emit(t1, NodeId::Dm, EventKind::RideEnd, std::nullopt, std::nullopt,
                        charged.stored_j, dm.store.voltage_v());
        } else {
            const ContactSpec& spec = scenario.contacts[item.index];
            ContactSession session(fan, dm, scenario.models, scenario.protocol,
                                   ContactWindow{spec.start_s, spec.max_duration_s},
                                   spec.channel_quality.value_or(scenario.channel_quality),
                                   draw_loss, tracer, scenario.gprs_blackouts);
            session.run_all();
        }
    }

    std::sort(tracer.records.begin(), tracer.records.end(),
              [](const TraceRecord& a, const TraceRecord& b) {
                  if (a.time_s != b.time_s)
                      return a.time_s < b.time_s;
                  return a.seq < b.seq;
              });
    for (std::size_t i = 0; i < tracer.records.size(); ++i)
        tracer.records[i].seq = static_cast<std::int64_t>(i);

    result.trace = std::move(tracer.records);
    result.fan_queue_remaining = static_cast<std::int64_t>(fan.queue.size());
    result.message_log = std::move(tracer.messages);
    result.metrics = compute_metrics(result.trace, result.bundle_sizes);

    std::set<std::int64_t> delivered;
    for (const TraceRecord& rec : result.trace)
        if (rec.event == EventKind::ServerDelivered && rec.bundle_id)
            delivered.insert(*rec.bundle_id);
    for (std::int64_t id : delivered) {
        const std::int64_t packets =
            packets_for_bytes(result.bundle_sizes.at(id), scenario.models.gprs);
        const ChainCost chain =
            bundle_chain_cost(packets, scenario.models.phases, scenario.models.gprs);
        result.dm_chain.time_s += chain.time_s;
        result.dm_chain.energy_j += chain.energy_j;
    }

    result.fan.final_stored_j = fan.store.stored_energy_j();
    result.dm.final_stored_j = dm.store.stored_energy_j();
    result.fan.ledger = fan.store.ledger();
    result.dm.ledger = dm.store.ledger();
    return result;
}

} // namespace edtn
