#include "edtn/energy_store.hpp"

#include <algorithm>
#include <cmath>

namespace edtn {

void Supercapacitor::validate() const {
    if (!(capacitance_f > 0.0))
        throw ConfigError("capacitance_f: must be > 0");
    if (!(v_cutoff_v >= 0.0))
        throw ConfigError("v_cutoff: must be >= 0");
    if (!(v_max_v > v_cutoff_v))
        throw ConfigError("v_max: must be > v_cutoff");
    if (voltage_v < v_cutoff_v || voltage_v > v_max_v)
        throw ConfigError("v_init: must lie in [v_cutoff, v_max]");
}

double Supercapacitor::stored_energy_j() const {
    return 0.5 * capacitance_f * voltage_v * voltage_v;
}

double Supercapacitor::usable_energy_j() const {
    return 0.5 * capacitance_f * (voltage_v * voltage_v - v_cutoff_v * v_cutoff_v);
}

double Supercapacitor::headroom_j() const {
    return 0.5 * capacitance_f * (v_max_v * v_max_v - voltage_v * voltage_v);
}

double usable_energy(const Supercapacitor& cap) {
    return cap.usable_energy_j();
}

ChargeResult charge(Supercapacitor cap, double power_w, double duration_s,
                    double efficiency) {
    if (power_w < 0.0)
        throw ConfigError("charge: power must be >= 0");
    if (duration_s < 0.0)
        throw ConfigError("charge: duration must be >= 0");
    if (!(efficiency > 0.0 && efficiency <= 1.0))
        throw ConfigError("efficiency: must be in (0, 1]");

    const double offered = efficiency * power_w * duration_s;
    const double room = cap.headroom_j();
    const double stored = std::min(offered, room);
    const double shed = offered - stored;

    if (stored >= room) {
        cap.voltage_v = cap.v_max_v;
    } else {
        const double v2 = cap.voltage_v * cap.voltage_v + 2.0 * stored / cap.capacitance_f;
        cap.voltage_v = std::min(std::sqrt(v2), cap.v_max_v);
    }
    return {cap, stored, shed};
}

Supercapacitor discharge(Supercapacitor cap, double energy_j) {
    if (energy_j < 0.0)
        throw ConfigError("discharge: energy must be >= 0");
    const double usable = cap.usable_energy_j();
    if (energy_j > usable)
        throw InsufficientEnergy("discharge of " + std::to_string(energy_j) +
                                 " J exceeds usable " + std::to_string(usable) + " J");
    const double v2 = cap.voltage_v * cap.voltage_v - 2.0 * energy_j / cap.capacitance_f;
    const double floor2 = cap.v_cutoff_v * cap.v_cutoff_v;
    cap.voltage_v = std::sqrt(std::max(v2, floor2));
    return cap;
}

void Dynamo::validate() const {
    if (watts_per_kmh < 0.0)
        throw ConfigError("watts_per_kmh: must be >= 0");
    if (max_watts < 0.0)
        throw ConfigError("max_watts: must be >= 0");
    if (!(efficiency > 0.0 && efficiency <= 1.0))
        throw ConfigError("efficiency: must be in (0, 1]");
}

double Dynamo::power_at(double speed_kmh) const {
    const double p = watts_per_kmh * std::max(speed_kmh, 0.0);
    return std::min(p, max_watts);
}

double time_to_harvest(double target_j, double speed_kmh, const Dynamo& dynamo) {
    if (target_j < 0.0)
        throw ConfigError("time_to_harvest: target must be >= 0");
    if (target_j == 0.0)
        return 0.0;
    const double p = dynamo.power_at(speed_kmh) * dynamo.efficiency;
    if (p <= 0.0)
        throw NoHarvest("no dynamo power at " + std::to_string(speed_kmh) + " km/h");
    return target_j / p;
}

void EnergyLedger::add_phase(std::string_view label, double joules) {
    for (auto& entry : per_phase) {
        if (entry.label == label) {
            entry.joules += joules;
            return;
        }
    }
    per_phase.push_back({std::string(label), joules});
}

EnergyStore::EnergyStore(Supercapacitor cap) : cap_(cap) {
    cap_.validate();
}

ChargeResult EnergyStore::charge(double power_w, double duration_s, double efficiency,
                                 std::string_view label) {
    ChargeResult result = edtn::charge(cap_, power_w, duration_s, efficiency);
    cap_ = result.cap;
    ledger_.harvested_j += result.stored_j + result.shed_j;
    ledger_.shed_j += result.shed_j;
    ledger_.add_phase(label, result.stored_j + result.shed_j);
    return result;
}

void EnergyStore::discharge(double energy_j, std::string_view label) {
    cap_ = edtn::discharge(cap_, energy_j);
    ledger_.discharged_j += energy_j;
    ledger_.add_phase(label, energy_j);
}

} // namespace edtn
