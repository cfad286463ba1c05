#include "edtn/contact.hpp"

#include <algorithm>

#include "edtn/messages.hpp"

namespace edtn {

void Tracer::emit(double time_s, NodeId node, EventKind kind,
                  std::optional<std::int64_t> bundle_id, std::optional<Technology> tech,
                  double energy_delta_j, double cap_voltage_v) {
    TraceRecord rec;
    rec.time_s = time_s;
    rec.seq = next_seq++;
    rec.node = node;
    rec.event = kind;
    rec.bundle_id = bundle_id;
    rec.tech = tech;
    rec.energy_delta_j = energy_delta_j;
    rec.cap_voltage_v = cap_voltage_v;
    records.push_back(std::move(rec));
}

ContactSession::ContactSession(FanState& fan, DmState& dm, const ModelSuite& models,
                               const ProtocolConfig& config, ContactWindow window,
                               PerTech channel_quality, LossDraw draw_loss, Tracer& tracer,
                               std::vector<Blackout> gprs_blackouts)
    : fan_(fan), dm_(dm), models_(models), config_(config), window_(window),
      quality_(channel_quality), draw_loss_(std::move(draw_loss)), tracer_(tracer),
      blackouts_(std::move(gprs_blackouts)) {
    std::sort(blackouts_.begin(), blackouts_.end(),
              [](const Blackout& a, const Blackout& b) { return a.start_s < b.start_s; });
}

double ContactSession::defer_blackouts(double t) const {
    for (const Blackout& b : blackouts_) {
        if (t >= b.start_s && t < b.end_s)
            t = b.end_s;
    }
    return t;
}

bool ContactSession::begin() {
    begun_ = true;
    som_free_s_ = window_.start_s;
    modem_free_s_ = window_.start_s;
    last_activity_s_ = window_.start_s;
    end_time_s_ = window_.start_s;
    tracer_.emit(window_.start_s, NodeId::Dm, EventKind::ContactStart, std::nullopt,
                 std::nullopt, 0.0, dm_.store.voltage_v());

    const double boot_energy = models_.phases.energy_for(PhaseRole::Startup);
    if (dm_.store.usable_energy_j() < boot_energy)
        return false; // mule cannot power on; contact stays inert

    for (const auto& row : models_.phases.rows) {
        if (row.role != PhaseRole::Startup)
            continue;
        som_free_s_ += row.time_s;
        if (row.energy_j > 0.0)
            dm_.store.discharge(row.energy_j, row.label);
        tracer_.emit(som_free_s_, NodeId::Dm, EventKind::PhaseCost, std::nullopt,
                     std::nullopt, -row.energy_j, dm_.store.voltage_v());
    }
    last_activity_s_ = som_free_s_;
    booted_ = true;
    return true;
}

RoundResult ContactSession::run_round() {
    RoundResult result;
    if (!begun_ || !booted_ || finished_)
        return result;
    if (som_free_s_ + config_.negotiation_latency_s > window_end()) {
        result.window_closed = true;
        return result;
    }

    const EnergyEstimate dm_estimate =
        estimate_energy(NodeId::Dm, dm_.store, dm_.reserve_j);
    const EnergyEstimate fan_estimate =
        estimate_energy(NodeId::Fan, fan_.store, config_.fan_reserve_j);

    NegotiationInputs inputs;
    inputs.e_dm_j = dm_estimate.available_j;
    inputs.e_fan_j = fan_estimate.available_j;
    inputs.channel_quality = quality_;
    tracer_.log(NegReq{inputs.e_dm_j, quality_}.wire());

    std::vector<Bundle> pending(fan_.queue.begin(), fan_.queue.end());
    NegotiationOutcome outcome = negotiate(inputs, pending, models_, config_);

    const double t_neg = som_free_s_ + config_.negotiation_latency_s;
    som_free_s_ = t_neg;
    ++rounds_;

    // Keep only the committed prefix whose sends complete in the window.
    const double handoff_s = models_.phases.time_for(PhaseRole::SomToGprs);
    {
        double t = t_neg;
        std::size_t fit = 0;
        for (const CommittedBundle& cb : outcome.committed) {
            if (t + cb.transfer_time_s > window_end())
                break;
            t += cb.transfer_time_s + handoff_s;
            ++fit;
        }
        if (fit < outcome.committed.size()) {
            outcome.committed.resize(fit);
            outcome.n = static_cast<std::int64_t>(fit);
            outcome.total_fan_cost_j = 0.0;
            outcome.total_dm_cost_j = 0.0;
            outcome.total_transfer_time_s = 0.0;
            for (const CommittedBundle& cb : outcome.committed) {
                outcome.total_fan_cost_j += cb.fan_cost_j;
                outcome.total_dm_cost_j += cb.dm_cost_j;
                outcome.total_transfer_time_s += cb.transfer_time_s;
            }
            if (fit == 0)
                outcome.tech.reset();
        }
    }

    tracer_.emit(t_neg, NodeId::Dm, EventKind::NegotiationDone, std::nullopt, outcome.tech,
                 0.0, dm_.store.voltage_v());
    tracer_.log(NegResp{outcome.n, outcome.tech}.wire());
    result.n = outcome.n;
    result.tech = outcome.tech;
    if (outcome.n == 0)
        return result;

    const Technology tech = *outcome.tech;
    const std::vector<SendAction> sends = fan_begin_contact(fan_, outcome);

    double t_cursor = t_neg;
    for (std::size_t i = 0; i < sends.size(); ++i) {
        const SendAction& send = sends[i];
        const CommittedBundle& cb = outcome.committed[i];

        t_cursor += cb.transfer_time_s;
        tracer_.emit(t_cursor, NodeId::Fan, EventKind::BundleSent, send.bundle.id, tech,
                     -send.cost_j, send.fan_voltage_after_v);
        tracer_.log(BundleMsg{send.bundle.id, send.bundle.size_bytes}.wire());
        som_free_s_ = t_cursor;

        if (draw_loss_())
            continue; // bundle lost in transit; the mule never syncs on it

        const ReceiveOutcome rcv =
            dm_receive_bundle(dm_, send.bundle, models_, tech, quality_.get(tech));
        tracer_.emit(t_cursor, NodeId::Dm, EventKind::PhaseCost, send.bundle.id, tech,
                     -rcv.receive_cost_j, rcv.dm_voltage_after_receive_v);

        const double handoff_done = t_cursor + rcv.handoff_time_s;
        if (rcv.handoff_cost_j > 0.0 || rcv.handoff_time_s > 0.0)
            tracer_.emit(handoff_done, NodeId::Dm, EventKind::PhaseCost, send.bundle.id,
                         tech, -rcv.handoff_cost_j, rcv.dm_voltage_after_handoff_v);
        som_free_s_ = handoff_done;
        t_cursor = handoff_done; // the controller is busy until the handoff ends

        if (!modem_started_ && !rcv.flushes.empty()) {
            modem_started_ = true;
            double t_modem = handoff_done;
            for (const auto& row : models_.phases.rows) {
                if (row.role != PhaseRole::ModemStartup)
                    continue;
                t_modem += row.time_s;
                if (row.energy_j > 0.0)
                    dm_.store.discharge(row.energy_j, row.label);
                tracer_.emit(t_modem, NodeId::Dm, EventKind::PhaseCost, std::nullopt,
                             std::nullopt, -row.energy_j, dm_.store.voltage_v());
            }
            modem_free_s_ = t_modem;
        }

        double flush_t = std::max(modem_free_s_, handoff_done);
        bool all_flushes_delivered = true;
        for (const FlushAction& flush : rcv.flushes) {
            flush_t = defer_blackouts(flush_t);
            flush_t += flush.duration_s;
            tracer_.emit(flush_t, NodeId::Dm, EventKind::PhaseCost, send.bundle.id,
                         Technology::Gprs, -flush.energy_j, flush.dm_voltage_after_v);
            dm_.mark_flushed(flush.packets);
            if (draw_loss_())
                all_flushes_delivered = false; // radio was on: energy is spent anyway
        }
        modem_free_s_ = flush_t;
        last_activity_s_ = std::max(last_activity_s_, flush_t);

        if (all_flushes_delivered) {
            tracer_.emit(flush_t, NodeId::Dm, EventKind::ServerDelivered, send.bundle.id,
                         Technology::Gprs, 0.0, dm_.store.voltage_v());
            const bool ack_lost = draw_loss_();
            if (!ack_lost && flush_t <= window_end()) {
                fan_on_ack(fan_, send.bundle.id);
                tracer_.emit(flush_t, NodeId::Fan, EventKind::AckDelivered, send.bundle.id,
                             tech, 0.0, fan_.store.voltage_v());
                tracer_.log(AckMsg{send.bundle.id}.wire());
            }
        }
    }
    som_free_s_ = std::max(som_free_s_, t_cursor);
    return result;
}

void ContactSession::shutdown_som() {
    for (const auto& row : models_.phases.rows) {
        if (row.role != PhaseRole::Shutdown)
            continue;
        som_free_s_ += row.time_s;
        if (row.energy_j > 0.0)
            dm_.store.discharge(row.energy_j, row.label);
        tracer_.emit(som_free_s_, NodeId::Dm, EventKind::PhaseCost, std::nullopt,
                     std::nullopt, -row.energy_j, dm_.store.voltage_v());
    }
}

void ContactSession::finish() {
    if (finished_)
        return;
    if (booted_) {
        try {
            shutdown_som();
        } catch (const InsufficientEnergy&) {
            // store drained below the shutdown cost; power simply dies
        }
    }
    fan_requeue_unacked(fan_);
    end_time_s_ = std::min(window_end(), std::max(som_free_s_, last_activity_s_));
    tracer_.emit(end_time_s_, NodeId::Dm, EventKind::ContactEnd, std::nullopt, std::nullopt,
                 0.0, dm_.store.voltage_v());
    finished_ = true;
}

void ContactSession::run_all() {
    if (!begin()) {
        finish();
        return;
    }
    bool first = true;
    while (first || !fan_.queue.empty()) {
        first = false;
        RoundResult rr;
        try {
            rr = run_round();
        } catch (const InsufficientEnergy&) {
            break; // accounting fault: abort the contact
        }
        if (rr.window_closed || rr.n == 0)
            break;
    }
    finish();
}

RoundResult contact_round(ContactSession& session) {
    return session.run_round();
}

} // namespace edtn
