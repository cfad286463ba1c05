#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "edtn/errors.hpp"

namespace edtn {

enum class Technology { Bluetooth, WiFi, Gprs };

std::string_view to_string(Technology tech);
std::optional<Technology> technology_from_string(std::string_view name);

/// One measured (payload size, latency) point of a local link.
struct Anchor {
    double size_bytes = 0.0;
    double time_s = 0.0;
};

/// Piecewise-linear latency model through measured anchors plus a flat
/// active-power figure. Below the smallest anchor the time clamps to it;
/// above the largest it extrapolates with the last segment's slope.
struct LinkModel {
    std::vector<Anchor> anchors;
    double active_watts = 0.0;

    void validate(std::string_view name) const;
};

struct LinkSuite {
    LinkModel bluetooth;
    LinkModel wifi;

    const LinkModel& local_link(Technology tech) const; // throws UnknownTechnology for GPRS
    void validate() const;
};

/// Measured defaults: Bluetooth (5 kB, 5 s), (1 MB, 90 s), (3 MB, 280 s);
/// Wi-Fi (5 kB, 7 s), (1 MB, 7 s), (3 MB, 20 s). Wi-Fi active power is
/// 42 J / 13 s from the measured transfer; the Bluetooth power figure is
/// a placeholder with no measurement behind it (see README).
LinkSuite default_links();

double transfer_time(const LinkSuite& links, Technology tech, double size_bytes);
double transfer_energy(const LinkSuite& links, Technology tech, double size_bytes);

/// Cellular upload model. Energy per packet over buffer size B follows
/// a/B + b + c*B: amortized radio-on cost, per-packet floor, slow linear
/// growth. Defaults hit the measured optimum (B=50 at 0.7 J/packet) and
/// the 50-packet flush figures (31 s, 35 J).
struct GprsModel {
    std::int64_t packet_bytes = 32;
    double epp_a_j = 2.5;
    double epp_b_j = 0.6;
    double epp_c_j = 0.001;
    double t_setup_s = 6.0;
    double t_per_packet_s = 0.5;
    std::int64_t buffer_packets = 50; // flush granularity used by the mule

    void validate() const;
};

double gprs_energy_per_packet(const GprsModel& gprs, std::int64_t buffer_packets);

struct BufferCost {
    double time_s = 0.0;
    double energy_j = 0.0;
};

/// Latency and energy of flushing one buffer of B packets.
BufferCost gprs_buffer_cost(const GprsModel& gprs, std::int64_t buffer_packets);

/// Integer argmin of gprs_energy_per_packet over [b_min, b_max],
/// ties broken toward the smaller buffer.
std::int64_t optimal_gprs_buffer(const GprsModel& gprs, std::int64_t b_min,
                                 std::int64_t b_max);

std::int64_t packets_for_bytes(std::int64_t size_bytes, const GprsModel& gprs);

/// Split a packet count into flush batches of at most `buffer_packets`.
std::vector<std::int64_t> flush_plan(std::int64_t packets, std::int64_t buffer_packets);

/// Role a phase-table row plays in the mule's duty cycle.
enum class PhaseRole {
    Startup,      // runs once per contact, before negotiation
    DtnComm,      // reference figure for the local-link transfer
    SomToGprs,    // per-bundle handoff from controller to modem
    Shutdown,     // runs once per contact, at the end
    ModemStartup, // runs once per contact, before the first flush
    GprsTransmit, // replaced by per-bundle flush costs
};

std::string_view to_string(PhaseRole role);
std::optional<PhaseRole> phase_role_from_string(std::string_view name);

/// Measured per-phase costs of one bundle transfer duty cycle.
struct PhaseCostTable {
    struct Row {
        std::string label;
        double energy_j = 0.0;
        double time_s = 0.0;
        PhaseRole role = PhaseRole::Startup;
    };

    std::vector<Row> rows;

    void validate() const;
    double energy_for(PhaseRole role) const;
    double time_for(PhaseRole role) const;
    bool has(PhaseRole role) const;
};

PhaseCostTable default_phase_table();

struct ChainCost {
    double time_s = 0.0;
    double energy_j = 0.0;
};

/// Full duty-cycle cost of carrying one bundle: all table rows, with the
/// GPRS row expanded into as many buffer flushes as the bundle needs.
ChainCost bundle_chain_cost(std::int64_t bundle_packets, const PhaseCostTable& table,
                            const GprsModel& gprs);

struct GprsFit {
    double epp_a_j = 0.0;
    double epp_b_j = 0.0;
    double epp_c_j = 0.0;
    double residual_norm = 0.0;
};

/// Least-squares fit of (a, b, c) in a/B + b + c*B from (B, J/packet)
/// samples. Needs at least three distinct buffer sizes; throws
/// DegenerateFit when the normal system is singular.
GprsFit fit_gprs_curve(std::span<const std::pair<double, double>> samples);

} // namespace edtn
