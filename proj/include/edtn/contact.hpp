#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "edtn/protocol.hpp"
#include "edtn/trace.hpp"

namespace edtn {

struct ContactWindow {
    double start_s = 0.0;
    double max_duration_s = 0.0;

    double end_s() const { return start_s + max_duration_s; }
};

struct Blackout {
    double start_s = 0.0;
    double end_s = 0.0;
};

/// Collects trace records (with creation-order sequence numbers) and the
/// wire-format message log across one simulation run.
struct Tracer {
    std::vector<TraceRecord> records;
    std::vector<std::string> messages;
    std::int64_t next_seq = 0;

    void emit(double time_s, NodeId node, EventKind kind,
              std::optional<std::int64_t> bundle_id, std::optional<Technology> tech,
              double energy_delta_j, double cap_voltage_v);
    void log(std::string message) { messages.push_back(std::move(message)); }
};

/// Per-message loss draw; returns true when the message is lost.
using LossDraw = std::function<bool()>;

struct RoundResult {
    std::int64_t n = 0;
    std::optional<Technology> tech;
    bool window_closed = false; // negotiation no longer fits in the window
};

/// One DM-FAN contact. Timing model:
///  - startup phase rows run back to back from the window start;
///  - each round costs the fixed negotiation latency, then sends the
///    committed bundles sequentially (a bundle occupies the link for its
///    transfer time and the mule's controller for the handoff after it);
///  - buffer flushes pipeline on the modem clock, which starts with the
///    modem-startup rows before the first flush and may run past the
///    window (uploads do not need the local link);
///  - the ACK rides back at the last flush's completion and is dropped
///    if the window has closed by then;
///  - shutdown rows run after the final round; the contact ends at the
///    later of shutdown and upload/ACK activity, capped at the window.
/// Losing a message costs the sender its energy; flush energy is spent
/// whether or not the flush is delivered.
class ContactSession {
public:
    ContactSession(FanState& fan, DmState& dm, const ModelSuite& models,
                   const ProtocolConfig& config, ContactWindow window,
                   PerTech channel_quality, LossDraw draw_loss, Tracer& tracer,
                   std::vector<Blackout> gprs_blackouts = {});

    /// Emit ContactStart and run the startup rows. Returns false when
    /// the mule cannot afford to boot; the contact is then inert.
    bool begin();

    /// One negotiate -> transfer -> relay -> ACK round.
    RoundResult run_round();

    /// Shutdown rows, requeue of unacknowledged bundles, ContactEnd.
    void finish();

    /// begin() + rounds until n = 0, queue exhaustion or window close +
    /// finish(). Aborts the contact on an InsufficientEnergy fault.
    void run_all();

    double end_time_s() const { return end_time_s_; }
    std::int64_t rounds_executed() const { return rounds_; }

private:
    double window_end() const { return window_.end_s(); }
    double defer_blackouts(double t) const;
    void shutdown_som();

    FanState& fan_;
    DmState& dm_;
    const ModelSuite& models_;
    ProtocolConfig config_;
    ContactWindow window_;
    PerTech quality_;
    LossDraw draw_loss_;
    Tracer& tracer_;
    std::vector<Blackout> blackouts_;

    bool begun_ = false;
    bool booted_ = false;
    bool finished_ = false;
    bool modem_started_ = false;
    double som_free_s_ = 0.0;
    double modem_free_s_ = 0.0;
    double last_activity_s_ = 0.0;
    double end_time_s_ = 0.0;
    std::int64_t rounds_ = 0;
};

/// Single protocol round on an already-begun session.
RoundResult contact_round(ContactSession& session);

} // namespace edtn
