// Python bindings for the core models, the negotiation and the simulator.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "edtn/energy_store.hpp"
#include "edtn/link_models.hpp"
#include "edtn/protocol.hpp"
#include "edtn/scenario.hpp"
#include "edtn/sim_engine.hpp"
#include "edtn/trace.hpp"

namespace py = pybind11;
using namespace edtn;

PYBIND11_MODULE(_edtn, m) {
    m.doc() = "Energy-negotiated DTN models and discrete-event simulator";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InsufficientEnergy>(m, "InsufficientEnergyError", PyExc_ValueError);
    py::register_exception<NoHarvest>(m, "NoHarvestError", PyExc_ValueError);
    py::register_exception<UnknownTechnology>(m, "UnknownTechnologyError", PyExc_ValueError);
    py::register_exception<InvalidBuffer>(m, "InvalidBufferError", PyExc_ValueError);
    py::register_exception<DegenerateFit>(m, "DegenerateFitError", PyExc_ValueError);
    py::register_exception<MalformedTrace>(m, "MalformedTraceError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    // --- energy store -------------------------------------------------------

    py::class_<Supercapacitor>(m, "Supercapacitor")
        .def(py::init<double, double, double, double>(), py::arg("capacitance_f") = 100.0,
             py::arg("voltage_v") = 5.0, py::arg("v_max_v") = 5.0,
             py::arg("v_cutoff_v") = 2.0)
        .def_readwrite("capacitance_f", &Supercapacitor::capacitance_f)
        .def_readwrite("voltage_v", &Supercapacitor::voltage_v)
        .def_readwrite("v_max_v", &Supercapacitor::v_max_v)
        .def_readwrite("v_cutoff_v", &Supercapacitor::v_cutoff_v)
        .def("validate", &Supercapacitor::validate)
        .def("stored_energy_j", &Supercapacitor::stored_energy_j)
        .def("usable_energy_j", &Supercapacitor::usable_energy_j)
        .def("headroom_j", &Supercapacitor::headroom_j);

    py::class_<ChargeResult>(m, "ChargeResult")
        .def_readonly("cap", &ChargeResult::cap)
        .def_readonly("stored_j", &ChargeResult::stored_j)
        .def_readonly("shed_j", &ChargeResult::shed_j);

    m.def("usable_energy", &usable_energy, py::arg("cap"));
    m.def("charge", &charge, py::arg("cap"), py::arg("power_w"), py::arg("duration_s"),
          py::arg("efficiency") = 1.0);
    m.def("discharge", &discharge, py::arg("cap"), py::arg("energy_j"));

    py::class_<Dynamo>(m, "Dynamo")
        .def(py::init<>())
        .def_readwrite("watts_per_kmh", &Dynamo::watts_per_kmh)
        .def_readwrite("max_watts", &Dynamo::max_watts)
        .def_readwrite("efficiency", &Dynamo::efficiency)
        .def("power_at", &Dynamo::power_at, py::arg("speed_kmh"));

    m.def("time_to_harvest", &time_to_harvest, py::arg("target_j"), py::arg("speed_kmh"),
          py::arg("dynamo") = Dynamo{});

    // --- link models ---------------------------------------------------------

    py::enum_<Technology>(m, "Technology")
        .value("BLUETOOTH", Technology::Bluetooth)
        .value("WIFI", Technology::WiFi)
        .value("GPRS", Technology::Gprs);

    py::class_<Anchor>(m, "Anchor")
        .def(py::init<double, double>(), py::arg("size_bytes"), py::arg("time_s"))
        .def_readwrite("size_bytes", &Anchor::size_bytes)
        .def_readwrite("time_s", &Anchor::time_s);

    py::class_<LinkModel>(m, "LinkModel")
        .def(py::init<>())
        .def_readwrite("anchors", &LinkModel::anchors)
        .def_readwrite("active_watts", &LinkModel::active_watts);

    py::class_<LinkSuite>(m, "LinkSuite")
        .def(py::init<>())
        .def_readwrite("bluetooth", &LinkSuite::bluetooth)
        .def_readwrite("wifi", &LinkSuite::wifi);

    m.def("default_links", &default_links);
    m.def(
        "transfer_time",
        [](Technology tech, double size_bytes, const LinkSuite& links) {
            return transfer_time(links, tech, size_bytes);
        },
        py::arg("tech"), py::arg("size_bytes"), py::arg("links") = default_links());
    m.def(
        "transfer_energy",
        [](Technology tech, double size_bytes, const LinkSuite& links) {
            return transfer_energy(links, tech, size_bytes);
        },
        py::arg("tech"), py::arg("size_bytes"), py::arg("links") = default_links());

    py::class_<GprsModel>(m, "GprsModel")
        .def(py::init<>())
        .def_readwrite("packet_bytes", &GprsModel::packet_bytes)
        .def_readwrite("epp_a_j", &GprsModel::epp_a_j)
        .def_readwrite("epp_b_j", &GprsModel::epp_b_j)
        .def_readwrite("epp_c_j", &GprsModel::epp_c_j)
        .def_readwrite("t_setup_s", &GprsModel::t_setup_s)
        .def_readwrite("t_per_packet_s", &GprsModel::t_per_packet_s)
        .def_readwrite("buffer_packets", &GprsModel::buffer_packets);

    m.def(
        "gprs_energy_per_packet",
        [](std::int64_t buffer_packets, const GprsModel& gprs) {
            return gprs_energy_per_packet(gprs, buffer_packets);
        },
        py::arg("buffer_packets"), py::arg("gprs") = GprsModel{});
    m.def(
        "gprs_buffer_cost",
        [](std::int64_t buffer_packets, const GprsModel& gprs) {
            const BufferCost cost = gprs_buffer_cost(gprs, buffer_packets);
            return py::make_tuple(cost.time_s, cost.energy_j);
        },
        py::arg("buffer_packets"), py::arg("gprs") = GprsModel{});
    m.def(
        "optimal_gprs_buffer",
        [](std::int64_t b_min, std::int64_t b_max, const GprsModel& gprs) {
            return optimal_gprs_buffer(gprs, b_min, b_max);
        },
        py::arg("b_min"), py::arg("b_max"), py::arg("gprs") = GprsModel{});

    py::class_<PhaseCostTable>(m, "PhaseCostTable").def(py::init<>());
    m.def("default_phase_table", &default_phase_table);

    m.def(
        "bundle_chain_cost",
        [](std::int64_t bundle_packets, const PhaseCostTable& table, const GprsModel& gprs) {
            const ChainCost cost = bundle_chain_cost(bundle_packets, table, gprs);
            return py::make_tuple(cost.time_s, cost.energy_j);
        },
        py::arg("bundle_packets"), py::arg("table") = default_phase_table(),
        py::arg("gprs") = GprsModel{});

    py::class_<GprsFit>(m, "GprsFit")
        .def_readonly("epp_a_j", &GprsFit::epp_a_j)
        .def_readonly("epp_b_j", &GprsFit::epp_b_j)
        .def_readonly("epp_c_j", &GprsFit::epp_c_j)
        .def_readonly("residual_norm", &GprsFit::residual_norm);

    m.def(
        "fit_gprs_curve",
        [](const std::vector<std::pair<double, double>>& samples) {
            return fit_gprs_curve(samples);
        },
        py::arg("samples"));

    m.def(
        "size_capacitor",
        [](double target_j, double v_max, double v_cutoff) {
            if (target_j < 0.0)
                throw ConfigError("target_j: must be >= 0");
            if (!(v_max > v_cutoff) || v_cutoff < 0.0)
                throw ConfigError("v_max: must exceed v_cutoff >= 0");
            return 2.0 * target_j / (v_max * v_max - v_cutoff * v_cutoff);
        },
        py::arg("target_j"), py::arg("v_max") = 5.0, py::arg("v_cutoff") = 2.0,
        "Smallest capacitance whose usable window holds target_j");

    // --- negotiation ----------------------------------------------------------

    py::class_<Bundle>(m, "Bundle")
        .def_readonly("id", &Bundle::id)
        .def_readonly("size_bytes", &Bundle::size_bytes)
        .def_readonly("packets", &Bundle::packets)
        .def_readonly("created_at_s", &Bundle::created_at_s);

    m.def(
        "make_bundle",
        [](std::int64_t id, std::int64_t size_bytes, double created_at_s,
           const GprsModel& gprs) { return make_bundle(id, size_bytes, created_at_s, gprs); },
        py::arg("id"), py::arg("size_bytes"), py::arg("created_at_s") = 0.0,
        py::arg("gprs") = GprsModel{});

    py::class_<PerTech>(m, "PerTech")
        .def(py::init<double, double>(), py::arg("bluetooth") = 1.0, py::arg("wifi") = 1.0)
        .def_readwrite("bluetooth", &PerTech::bluetooth)
        .def_readwrite("wifi", &PerTech::wifi);

    py::class_<NegotiationInputs>(m, "NegotiationInputs")
        .def(py::init<>())
        .def_readwrite("e_dm_j", &NegotiationInputs::e_dm_j)
        .def_readwrite("e_fan_j", &NegotiationInputs::e_fan_j)
        .def_readwrite("data_rate_hint_bps", &NegotiationInputs::data_rate_hint_bps)
        .def_readwrite("transmit_power", &NegotiationInputs::transmit_power)
        .def_readwrite("channel_quality", &NegotiationInputs::channel_quality);

    py::class_<CommittedBundle>(m, "CommittedBundle")
        .def_readonly("id", &CommittedBundle::id)
        .def_readonly("fan_cost_j", &CommittedBundle::fan_cost_j)
        .def_readonly("dm_cost_j", &CommittedBundle::dm_cost_j)
        .def_readonly("transfer_time_s", &CommittedBundle::transfer_time_s);

    py::class_<NegotiationOutcome>(m, "NegotiationOutcome")
        .def_readonly("n", &NegotiationOutcome::n)
        .def_readonly("tech", &NegotiationOutcome::tech)
        .def_readonly("per_bundle_fan_cost_j", &NegotiationOutcome::per_bundle_fan_cost_j)
        .def_readonly("per_bundle_dm_cost_j", &NegotiationOutcome::per_bundle_dm_cost_j)
        .def_readonly("total_fan_cost_j", &NegotiationOutcome::total_fan_cost_j)
        .def_readonly("total_dm_cost_j", &NegotiationOutcome::total_dm_cost_j)
        .def_readonly("total_transfer_time_s", &NegotiationOutcome::total_transfer_time_s)
        .def_readonly("committed", &NegotiationOutcome::committed);

    py::class_<ModelSuite>(m, "ModelSuite")
        .def(py::init<>())
        .def_readwrite("links", &ModelSuite::links)
        .def_readwrite("gprs", &ModelSuite::gprs)
        .def_readwrite("phases", &ModelSuite::phases);

    m.def("default_models", &default_models);

    m.def(
        "negotiate",
        [](const NegotiationInputs& inputs, const std::vector<Bundle>& pending,
           const ModelSuite& models) { return negotiate(inputs, pending, models); },
        py::arg("inputs"), py::arg("pending"), py::arg("models") = default_models());

    // --- simulator -------------------------------------------------------------

    py::class_<Metrics>(m, "Metrics")
        .def_readonly("bundles_offered", &Metrics::bundles_offered)
        .def_readonly("bundles_delivered", &Metrics::bundles_delivered)
        .def_readonly("delivery_latency_mean_s", &Metrics::delivery_latency_mean_s)
        .def_readonly("delivery_latency_max_s", &Metrics::delivery_latency_max_s)
        .def_readonly("fan_energy_j", &Metrics::fan_energy_j)
        .def_readonly("dm_energy_j", &Metrics::dm_energy_j)
        .def_readonly("energy_per_delivered_byte_j", &Metrics::energy_per_delivered_byte_j)
        .def_readonly("rounds_executed", &Metrics::rounds_executed);

    py::class_<Scenario>(m, "Scenario")
        .def_readwrite("loss_probability", &Scenario::loss_probability)
        .def_readwrite("seed", &Scenario::seed)
        .def("validate", &Scenario::validate);

    py::class_<RunResult>(m, "RunResult")
        .def_readonly("metrics", &RunResult::metrics)
        .def_readonly("message_log", &RunResult::message_log)
        .def_readonly("seed", &RunResult::seed)
        .def_readonly("fan_queue_remaining", &RunResult::fan_queue_remaining)
        .def_property_readonly("dm_chain_time_s",
                               [](const RunResult& r) { return r.dm_chain.time_s; })
        .def_property_readonly("dm_chain_energy_j",
                               [](const RunResult& r) { return r.dm_chain.energy_j; })
        .def("trace_csv", [](const RunResult& r) { return trace_to_csv(r.trace); });

    m.def("scenario_from_json", &scenario_from_json, py::arg("text"));
    m.def("load_scenario", &load_scenario, py::arg("path"));
    m.def(
        "run",
        [](const Scenario& scenario, std::optional<std::uint64_t> seed) {
            return run(scenario, seed.value_or(scenario.seed));
        },
        py::arg("scenario"), py::arg("seed") = std::nullopt);
    m.def(
        "metrics_from_trace_csv",
        [](const std::string& csv, const std::map<std::int64_t, std::int64_t>& sizes) {
            return compute_metrics(trace_from_csv(csv), sizes);
        },
        py::arg("csv"), py::arg("bundle_sizes") = std::map<std::int64_t, std::int64_t>{});
}
