#include "edtn/link_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace edtn {

std::string_view to_string(Technology tech) {
    switch (tech) {
    case Technology::Bluetooth: return "bluetooth";
    case Technology::WiFi: return "wifi";
    case Technology::Gprs: return "gprs";
    }
    return "?";
}

std::optional<Technology> technology_from_string(std::string_view name) {
    if (name == "bluetooth") return Technology::Bluetooth;
    if (name == "wifi") return Technology::WiFi;
    if (name == "gprs") return Technology::Gprs;
    return std::nullopt;
}

void LinkModel::validate(std::string_view name) const {
    const std::string key = std::string("links.") + std::string(name);
    if (anchors.size() < 2)
        throw ConfigError(key + ".anchors: need at least two anchor points");
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        if (!(anchors[i].size_bytes > 0.0))
            throw ConfigError(key + ".anchors: sizes must be positive");
        if (!(anchors[i].time_s > 0.0))
            throw ConfigError(key + ".anchors: times must be positive");
        if (i > 0) {
            if (!(anchors[i].size_bytes > anchors[i - 1].size_bytes))
                throw ConfigError(key + ".anchors: sizes must be strictly increasing");
            if (anchors[i].time_s < anchors[i - 1].time_s)
                throw ConfigError(key + ".anchors: times must be non-decreasing");
        }
    }
    if (!(active_watts > 0.0))
        throw ConfigError(key + ".active_watts: must be > 0");
}

const LinkModel& LinkSuite::local_link(Technology tech) const {
    switch (tech) {
    case Technology::Bluetooth: return bluetooth;
    case Technology::WiFi: return wifi;
    case Technology::Gprs:
        throw UnknownTechnology("gprs has no latency anchors; use the buffer model");
    }
    throw UnknownTechnology("unknown technology");
}

void LinkSuite::validate() const {
    bluetooth.validate("bluetooth");
    wifi.validate("wifi");
}

LinkSuite default_links() {
    LinkSuite suite;
    suite.bluetooth.anchors = {{5'000.0, 5.0}, {1'000'000.0, 90.0}, {3'000'000.0, 280.0}};
    suite.bluetooth.active_watts = 0.3;
    suite.wifi.anchors = {{5'000.0, 7.0}, {1'000'000.0, 7.0}, {3'000'000.0, 20.0}};
    suite.wifi.active_watts = 42.0 / 13.0;
    return suite;
}

double transfer_time(const LinkSuite& links, Technology tech, double size_bytes) {
    const LinkModel& model = links.local_link(tech);
    if (!(size_bytes > 0.0))
        throw ConfigError("transfer_time: size must be positive");

    const auto& a = model.anchors;
    if (size_bytes <= a.front().size_bytes)
        return a.front().time_s;

    for (std::size_t i = 1; i < a.size(); ++i) {
        if (size_bytes == a[i].size_bytes)
            return a[i].time_s; // pass through anchors bit-exactly
        if (size_bytes < a[i].size_bytes) {
            const Anchor& lo = a[i - 1];
            const Anchor& hi = a[i];
            const double frac = (size_bytes - lo.size_bytes) / (hi.size_bytes - lo.size_bytes);
            return lo.time_s + frac * (hi.time_s - lo.time_s);
        }
    }

    const Anchor& lo = a[a.size() - 2];
    const Anchor& hi = a.back();
    const double slope = (hi.time_s - lo.time_s) / (hi.size_bytes - lo.size_bytes);
    return hi.time_s + slope * (size_bytes - hi.size_bytes);
}

double transfer_energy(const LinkSuite& links, Technology tech, double size_bytes) {
    return links.local_link(tech).active_watts * transfer_time(links, tech, size_bytes);
}

void GprsModel::validate() const {
    if (packet_bytes < 1)
        throw ConfigError("gprs.packet_bytes: must be >= 1");
    if (epp_a_j < 0.0 || epp_b_j < 0.0 || epp_c_j < 0.0)
        throw ConfigError("gprs.epp: coefficients must be >= 0");
    if (!(epp_a_j + epp_b_j + epp_c_j > 0.0))
        throw ConfigError("gprs.epp: curve must be positive");
    if (t_setup_s < 0.0)
        throw ConfigError("gprs.t_setup_s: must be >= 0");
    if (t_per_packet_s < 0.0)
        throw ConfigError("gprs.t_per_packet_s: must be >= 0");
    if (buffer_packets < 1)
        throw ConfigError("gprs.buffer_packets: must be >= 1");
}

double gprs_energy_per_packet(const GprsModel& gprs, std::int64_t buffer_packets) {
    if (buffer_packets < 1)
        throw InvalidBuffer("buffer size must be >= 1 packet");
    const double b = static_cast<double>(buffer_packets);
    return gprs.epp_a_j / b + gprs.epp_b_j + gprs.epp_c_j * b;
}

BufferCost gprs_buffer_cost(const GprsModel& gprs, std::int64_t buffer_packets) {
    const double epp = gprs_energy_per_packet(gprs, buffer_packets);
    const double b = static_cast<double>(buffer_packets);
    return {gprs.t_setup_s + b * gprs.t_per_packet_s, b * epp};
}

std::int64_t optimal_gprs_buffer(const GprsModel& gprs, std::int64_t b_min,
                                 std::int64_t b_max) {
    if (b_min < 1 || b_min > b_max)
        throw InvalidBuffer("need 1 <= b_min <= b_max");
    std::int64_t best = b_min;
    double best_epp = gprs_energy_per_packet(gprs, b_min);
    for (std::int64_t b = b_min + 1; b <= b_max; ++b) {
        const double epp = gprs_energy_per_packet(gprs, b);
        if (epp < best_epp) {
            best_epp = epp;
            best = b;
        }
    }
    return best;
}

std::int64_t packets_for_bytes(std::int64_t size_bytes, const GprsModel& gprs) {
    if (size_bytes <= 0)
        throw ConfigError("bundle size must be positive");
    return (size_bytes + gprs.packet_bytes - 1) / gprs.packet_bytes;
}

std::vector<std::int64_t> flush_plan(std::int64_t packets, std::int64_t buffer_packets) {
    if (buffer_packets < 1)
        throw InvalidBuffer("buffer size must be >= 1 packet");
    std::vector<std::int64_t> plan;
    while (packets > 0) {
        const std::int64_t batch = std::min(packets, buffer_packets);
        plan.push_back(batch);
        packets -= batch;
    }
    return plan;
}

std::string_view to_string(PhaseRole role) {
    switch (role) {
    case PhaseRole::Startup: return "startup";
    case PhaseRole::DtnComm: return "dtn_comm";
    case PhaseRole::SomToGprs: return "som_to_gprs";
    case PhaseRole::Shutdown: return "shutdown";
    case PhaseRole::ModemStartup: return "modem_startup";
    case PhaseRole::GprsTransmit: return "gprs_transmit";
    }
    return "?";
}

std::optional<PhaseRole> phase_role_from_string(std::string_view name) {
    if (name == "startup") return PhaseRole::Startup;
    if (name == "dtn_comm") return PhaseRole::DtnComm;
    if (name == "som_to_gprs") return PhaseRole::SomToGprs;
    if (name == "shutdown") return PhaseRole::Shutdown;
    if (name == "modem_startup") return PhaseRole::ModemStartup;
    if (name == "gprs_transmit") return PhaseRole::GprsTransmit;
    return std::nullopt;
}

void PhaseCostTable::validate() const {
    for (const auto& row : rows) {
        if (row.energy_j < 0.0 || row.time_s < 0.0)
            throw ConfigError("phase_table: '" + row.label + "' has a negative entry");
    }
}

double PhaseCostTable::energy_for(PhaseRole role) const {
    double total = 0.0;
    for (const auto& row : rows)
        if (row.role == role)
            total += row.energy_j;
    return total;
}

double PhaseCostTable::time_for(PhaseRole role) const {
    double total = 0.0;
    for (const auto& row : rows)
        if (row.role == role)
            total += row.time_s;
    return total;
}

bool PhaseCostTable::has(PhaseRole role) const {
    return std::any_of(rows.begin(), rows.end(),
                       [role](const Row& row) { return row.role == role; });
}

PhaseCostTable default_phase_table() {
    PhaseCostTable table;
    table.rows = {
        {"Powering up the SOM and GPRS module", 77.0, 30.0, PhaseRole::Startup},
        {"Auto-login on SOM", 86.0, 30.0, PhaseRole::Startup},
        {"DTN communication (send and receive)", 42.0, 13.0, PhaseRole::DtnComm},
        {"Bundle transfer from SOM to GPRS", 42.0, 14.0, PhaseRole::SomToGprs},
        {"SOM shutdown", 60.0, 15.0, PhaseRole::Shutdown},
        {"Siemens TC65 startup", 25.0, 60.0, PhaseRole::ModemStartup},
        {"GPRS transmission to the server", 35.0, 31.0, PhaseRole::GprsTransmit},
    };
    return table;
}

ChainCost bundle_chain_cost(std::int64_t bundle_packets, const PhaseCostTable& table,
                            const GprsModel& gprs) {
    ChainCost total;
    for (const auto& row : table.rows) {
        if (row.role == PhaseRole::GprsTransmit) {
            for (std::int64_t batch : flush_plan(bundle_packets, gprs.buffer_packets)) {
                const BufferCost flush = gprs_buffer_cost(gprs, batch);
                total.time_s += flush.time_s;
                total.energy_j += flush.energy_j;
            }
        } else {
            total.time_s += row.time_s;
            total.energy_j += row.energy_j;
        }
    }
    return total;
}

namespace {

// Solve the symmetric 3x3 system A x = y by Cramer's rule.
// Returns false when |det| vanishes against the matrix scale.
bool solve3(const double a[3][3], const double y[3], double x[3]) {
    const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                       a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                       a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    double scale = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            scale = std::max(scale, std::abs(a[i][j]));
    if (std::abs(det) <= 1e-12 * std::max(scale * scale * scale, 1.0))
        return false;

    double m[3][3];
    for (int col = 0; col < 3; ++col) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                m[i][j] = (j == col) ? y[i] : a[i][j];
        const double det_col = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        x[col] = det_col / det;
    }
    return true;
}

} // namespace

GprsFit fit_gprs_curve(std::span<const std::pair<double, double>> samples) {
    std::vector<double> distinct;
    for (const auto& [b, _] : samples) {
        if (!(b >= 1.0))
            throw ConfigError("fit_gprs_curve: buffer sizes must be >= 1");
        if (std::find(distinct.begin(), distinct.end(), b) == distinct.end())
            distinct.push_back(b);
    }
    if (distinct.size() < 3)
        throw DegenerateFit("need samples at >= 3 distinct buffer sizes");

    // Normal equations for the basis [1/B, 1, B].
    double a[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    double y[3] = {0, 0, 0};
    for (const auto& [b, e] : samples) {
        const double phi[3] = {1.0 / b, 1.0, b};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j)
                a[i][j] += phi[i] * phi[j];
            y[i] += phi[i] * e;
        }
    }

    double x[3];
    if (!solve3(a, y, x))
        throw DegenerateFit("normal system is singular");

    GprsFit fit;
    fit.epp_a_j = x[0];
    fit.epp_b_j = x[1];
    fit.epp_c_j = x[2];
    double ss = 0.0;
    for (const auto& [b, e] : samples) {
        const double r = e - (x[0] / b + x[1] + x[2] * b);
        ss += r * r;
    }
    fit.residual_norm = std::sqrt(ss);
    return fit;
}

} // namespace edtn
