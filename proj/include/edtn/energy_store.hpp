#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "edtn/errors.hpp"

namespace edtn {

/// Ideal supercapacitor with a usable voltage window [v_cutoff, v_max].
/// Usable energy is the capacitive energy above the cutoff:
/// E = C/2 * (V^2 - Vc^2). No ESR, leakage or temperature effects.
struct Supercapacitor {
    double capacitance_f = 100.0;
    double voltage_v = 5.0;
    double v_max_v = 5.0;
    double v_cutoff_v = 2.0;

    void validate() const; // throws ConfigError on a broken invariant

    double stored_energy_j() const;  // C/2 * V^2
    double usable_energy_j() const;  // C/2 * (V^2 - Vc^2)
    double headroom_j() const;       // C/2 * (Vmax^2 - V^2)
};

double usable_energy(const Supercapacitor& cap);

struct ChargeResult {
    Supercapacitor cap;
    double stored_j = 0.0; // energy that actually entered the store
    double shed_j = 0.0;   // energy discarded at the v_max ceiling
};

/// Feed `power_w` for `duration_s` through a converter of the given
/// efficiency. Voltage never exceeds v_max; the excess is shed.
ChargeResult charge(Supercapacitor cap, double power_w, double duration_s,
                    double efficiency = 1.0);

/// Draw `energy_j` from the usable window.
/// Throws InsufficientEnergy when the draw exceeds usable_energy().
Supercapacitor discharge(Supercapacitor cap, double energy_j);

/// Bicycle dynamo, linear in ground speed up to a power clamp.
/// Default coefficient reproduces 2.9 W at 13 km/h.
struct Dynamo {
    double watts_per_kmh = 2.9 / 13.0;
    double max_watts = 10.0;
    double efficiency = 1.0; // conversion efficiency into the store, (0, 1]

    void validate() const;
    double power_at(double speed_kmh) const; // min(coef * v, max), >= 0
};

/// Seconds of riding at `speed_kmh` needed to put `target_j` into the
/// store. Throws NoHarvest when the dynamo yields no power but energy
/// is still required.
double time_to_harvest(double target_j, double speed_kmh, const Dynamo& dynamo);

struct PhaseEnergy {
    std::string label;
    double joules = 0.0;
};

/// Running account of everything that crossed the store boundary.
/// Conservation: stored-energy delta == harvested - discharged - shed.
struct EnergyLedger {
    double harvested_j = 0.0;  // efficiency-weighted energy offered to the store
    double discharged_j = 0.0;
    double shed_j = 0.0;
    std::vector<PhaseEnergy> per_phase; // aggregated by label

    void add_phase(std::string_view label, double joules);
};

/// Stateful store: a supercapacitor plus its ledger. Value semantics;
/// one simulation thread mutates it at a time.
class EnergyStore {
public:
    EnergyStore() = default;
    explicit EnergyStore(Supercapacitor cap);

    const Supercapacitor& cap() const { return cap_; }
    const EnergyLedger& ledger() const { return ledger_; }

    double voltage_v() const { return cap_.voltage_v; }
    double stored_energy_j() const { return cap_.stored_energy_j(); }
    double usable_energy_j() const { return cap_.usable_energy_j(); }

    ChargeResult charge(double power_w, double duration_s, double efficiency = 1.0,
                        std::string_view label = "harvest");
    void discharge(double energy_j, std::string_view label = "discharge");

private:
    Supercapacitor cap_;
    EnergyLedger ledger_;
};

} // namespace edtn
