#include <doctest.h>

#include <cstdlib>
#include <map>
#include <set>
#include <string>

#include "edtn/scenario.hpp"
#include "edtn/sim_engine.hpp"
#include "edtn/trace.hpp"

using namespace edtn;

namespace {

std::string scenario_dir() {
    const char* dir = std::getenv("EDTN_SCENARIO_DIR");
    return dir ? dir : "scenarios";
}

Scenario bundled(const std::string& name) {
    return load_scenario(scenario_dir() + "/" + name + ".json");
}

TraceRecord simple_record(double t, NodeId node, EventKind kind,
                          std::optional<std::int64_t> id = std::nullopt,
                          double delta = 0.0) {
    TraceRecord rec;
    rec.time_s = t;
    rec.node = node;
    rec.event = kind;
    rec.bundle_id = id;
    rec.energy_delta_j = delta;
    rec.cap_voltage_v = 3.0;
    return rec;
}

void check_ledger_conservation(const NodeSummary& node) {
    const double expected = node.initial_stored_j + node.ledger.harvested_j -
                            node.ledger.discharged_j - node.ledger.shed_j;
    const double scale = std::max({std::abs(expected), std::abs(node.final_stored_j), 1.0});
    CHECK(std::abs(node.final_stored_j - expected) <= 1e-9 * scale);
}

} // namespace

TEST_CASE("loss draws are exact at the extremes and fair in the middle") {
    std::mt19937_64 rng(0);
    for (int i = 0; i < 1000; ++i)
        CHECK(apply_loss(rng, 0.0) == LossOutcome::Delivered);
    for (int i = 0; i < 1000; ++i)
        CHECK(apply_loss(rng, 1.0) == LossOutcome::Lost);

    std::mt19937_64 fair_rng(42);
    int lost = 0;
    const int draws = 10'000;
    for (int i = 0; i < draws; ++i)
        lost += apply_loss(fair_rng, 0.5) == LossOutcome::Lost;
    const double rate = static_cast<double>(lost) / draws;
    CHECK(rate > 0.48);
    CHECK(rate < 0.52);

    // the stream advances exactly once per draw
    std::mt19937_64 a(7), b(7);
    apply_loss(a, 0.3);
    b();
    CHECK(a() == b());

    CHECK_THROWS_AS(apply_loss(rng, 1.5), ConfigError);
}

TEST_CASE("the single-bundle scenario reproduces the duty-cycle totals") {
    const Scenario scenario = bundled("paper-single-bundle");
    const RunResult result = run(scenario, 0);

    CHECK(result.metrics.bundles_offered == 1);
    CHECK(result.metrics.bundles_delivered == 1);
    CHECK(result.metrics.rounds_executed == 1); // the queue empties, no fresh request
    CHECK(result.metrics.dm_energy_j == 367.0);
    CHECK(result.metrics.fan_energy_j == 42.0);
    CHECK(result.dm_chain.time_s == 193.0);
    CHECK(result.dm_chain.energy_j == 367.0);

    // the 22-minute ride at 13 km/h banks the full usable window
    CHECK(result.dm.ledger.harvested_j == 3828.0);
    CHECK(result.dm.initial_stored_j == 200.0);
    CHECK(result.dm.ledger.shed_j == doctest::Approx(2778.0).epsilon(1e-12));
    CHECK(result.dm.final_stored_j == doctest::Approx(883.0).epsilon(1e-12));

    check_ledger_conservation(result.dm);
    check_ledger_conservation(result.fan);

    // expected milestone times
    std::map<EventKind, double> first_at;
    for (const TraceRecord& rec : result.trace)
        if (first_at.find(rec.event) == first_at.end())
            first_at[rec.event] = rec.time_s;
    CHECK(first_at.at(EventKind::RideStart) == 0.0);
    CHECK(first_at.at(EventKind::RideEnd) == 1320.0);
    CHECK(first_at.at(EventKind::ContactStart) == 1320.0);
    CHECK(first_at.at(EventKind::NegotiationDone) == 1386.0);
    CHECK(first_at.at(EventKind::BundleSent) == 1399.0);
    CHECK(first_at.at(EventKind::ServerDelivered) == 1504.0);
    CHECK(first_at.at(EventKind::AckDelivered) == 1504.0);
    CHECK(first_at.at(EventKind::ContactEnd) == 1504.0);

    // message log carries the fixed wire schema
    REQUIRE(result.message_log.size() == 4);
    CHECK(result.message_log[0].rfind("NEG_REQ{e_dm=", 0) == 0);
    CHECK(result.message_log[1] == "NEG_RESP{n=1, tech=wifi}");
    CHECK(result.message_log[2] == "BUNDLE{id=1, size=1600}");
    CHECK(result.message_log[3] == "ACK{id=1}");
}

TEST_CASE("identical scenario and seed produce byte-identical traces") {
    const Scenario scenario = bundled("lossy-multi-contact");
    const RunResult a = run(scenario, scenario.seed);
    const RunResult b = run(scenario, scenario.seed);
    CHECK(a.trace == b.trace);
    CHECK(trace_to_csv(a.trace) == trace_to_csv(b.trace));
    CHECK(a.metrics == b.metrics);

    // a different seed perturbs the loss sequence
    const RunResult c = run(scenario, scenario.seed + 1);
    CHECK(trace_to_csv(a.trace) != trace_to_csv(c.trace));
}

TEST_CASE("an empty workload spends no transfer or relay energy") {
    Scenario scenario = bundled("paper-single-bundle");
    scenario.workload.clear();
    const RunResult result = run(scenario, 0);

    CHECK(result.metrics.bundles_offered == 0);
    CHECK(result.metrics.bundles_delivered == 0);
    CHECK(result.metrics.rounds_executed == 1);
    for (const PhaseEnergy& phase : result.dm.ledger.per_phase) {
        CHECK(phase.label != "dtn_receive");
        CHECK(phase.label != "gprs_flush");
    }
    CHECK(result.fan.ledger.discharged_j == 0.0);
}

TEST_CASE("total loss delivers nothing and keeps the queue at the FAN") {
    Scenario scenario = bundled("paper-single-bundle");
    scenario.loss_probability = 1.0;
    const RunResult result = run(scenario, 0);

    CHECK(result.metrics.bundles_delivered == 0);
    CHECK(result.fan_queue_remaining == 1);
    for (const TraceRecord& rec : result.trace) {
        CHECK(rec.event != EventKind::ServerDelivered);
        CHECK(rec.event != EventKind::AckDelivered);
    }
}

TEST_CASE("metrics fold matches hand-computed examples") {
    const std::map<std::int64_t, std::int64_t> sizes = {{1, 1600}, {2, 1600}};

    SUBCASE("single delivery: latency is delivery minus send") {
        std::vector<TraceRecord> trace = {
            simple_record(100.0, NodeId::Fan, EventKind::BundleSent, 1, -42.0),
            simple_record(131.0, NodeId::Dm, EventKind::ServerDelivered, 1),
        };
        const Metrics m = compute_metrics(trace, sizes);
        CHECK(m.bundles_delivered == 1);
        CHECK(m.delivery_latency_mean_s == 31.0);
        CHECK(m.delivery_latency_max_s == 31.0);
        CHECK(m.fan_energy_j == 42.0);
    }

    SUBCASE("two deliveries: mean and max") {
        std::vector<TraceRecord> trace = {
            simple_record(0.0, NodeId::Fan, EventKind::BundleSent, 1),
            simple_record(31.0, NodeId::Dm, EventKind::ServerDelivered, 1),
            simple_record(40.0, NodeId::Fan, EventKind::BundleSent, 2),
            simple_record(102.0, NodeId::Dm, EventKind::ServerDelivered, 2),
        };
        const Metrics m = compute_metrics(trace, sizes);
        CHECK(m.bundles_delivered == 2);
        CHECK(m.delivery_latency_mean_s == 46.5);
        CHECK(m.delivery_latency_max_s == 62.0);
    }

    SUBCASE("empty trace folds to zeroes") {
        const Metrics m = compute_metrics({}, {});
        CHECK(m == Metrics{});
    }

    SUBCASE("ordering violations are rejected") {
        std::vector<TraceRecord> backwards = {
            simple_record(10.0, NodeId::Dm, EventKind::ContactStart),
            simple_record(5.0, NodeId::Dm, EventKind::ContactEnd),
        };
        CHECK_THROWS_AS(compute_metrics(backwards, {}), MalformedTrace);

        std::vector<TraceRecord> orphan_ack = {
            simple_record(5.0, NodeId::Fan, EventKind::AckDelivered, 1),
        };
        CHECK_THROWS_AS(compute_metrics(orphan_ack, {}), MalformedTrace);

        std::vector<TraceRecord> orphan_delivery = {
            simple_record(5.0, NodeId::Dm, EventKind::ServerDelivered, 1),
        };
        CHECK_THROWS_AS(compute_metrics(orphan_delivery, {}), MalformedTrace);
    }
}

TEST_CASE("metrics recompute exactly from the persisted CSV") {
    for (const char* name : {"paper-single-bundle", "paper-table2-latency",
                             "lossy-multi-contact"}) {
        const Scenario scenario = bundled(name);
        const RunResult result = run(scenario, scenario.seed);

        const std::string csv = trace_to_csv(result.trace);
        const std::vector<TraceRecord> parsed = trace_from_csv(csv);
        CHECK(parsed == result.trace);
        CHECK(compute_metrics(parsed, result.bundle_sizes) == result.metrics);
    }
}

TEST_CASE("trace parsing rejects malformed input") {
    CHECK_THROWS_AS(trace_from_csv(""), MalformedTrace);
    CHECK_THROWS_AS(trace_from_csv("bogus,header\n"), MalformedTrace);

    const std::string header = "time_s,node,event,bundle_id,tech,energy_delta_j,cap_voltage_v\n";
    CHECK_THROWS_AS(trace_from_csv(header + "10,dm,ContactStart,,,0,3\n5,dm,ContactEnd,,,0,3\n"),
                    MalformedTrace);
    CHECK_THROWS_AS(trace_from_csv(header + "1,dm,NotAnEvent,,,0,3\n"), MalformedTrace);
    CHECK_THROWS_AS(trace_from_csv(header + "1,dm,ContactStart,,,0\n"), MalformedTrace);
    CHECK_THROWS_AS(trace_from_csv(header + "x,dm,ContactStart,,,0,3\n"), MalformedTrace);
}

TEST_CASE("event causality holds under heavy loss") {
    const Scenario scenario = bundled("lossy-multi-contact");
    const RunResult result = run(scenario, scenario.seed);

    std::set<std::int64_t> sent;
    std::set<std::int64_t> delivered;
    double prev = -1.0;
    for (const TraceRecord& rec : result.trace) {
        CHECK(rec.time_s >= prev);
        prev = rec.time_s;
        if (rec.event == EventKind::BundleSent)
            sent.insert(*rec.bundle_id);
        if (rec.event == EventKind::ServerDelivered) {
            CHECK(sent.count(*rec.bundle_id) == 1);
            delivered.insert(*rec.bundle_id);
        }
        if (rec.event == EventKind::AckDelivered)
            CHECK(delivered.count(*rec.bundle_id) == 1);
    }

    check_ledger_conservation(result.dm);
    check_ledger_conservation(result.fan);

    // trace deltas add up to the ledger flows per node
    double dm_sum = 0.0;
    double fan_sum = 0.0;
    for (const TraceRecord& rec : result.trace)
        (rec.node == NodeId::Dm ? dm_sum : fan_sum) += rec.energy_delta_j;
    const double dm_net = result.dm.ledger.harvested_j - result.dm.ledger.shed_j -
                          result.dm.ledger.discharged_j;
    const double fan_net = result.fan.ledger.harvested_j - result.fan.ledger.shed_j -
                           result.fan.ledger.discharged_j;
    CHECK(dm_sum == doctest::Approx(dm_net).epsilon(1e-9));
    CHECK(fan_sum == doctest::Approx(fan_net).epsilon(1e-9));
}

TEST_CASE("table-2 scenario replays each anchor over each technology") {
    const Scenario scenario = bundled("paper-table2-latency");
    const RunResult result = run(scenario, 0);

    CHECK(result.metrics.bundles_delivered == 6);

    // send completion gaps equal the anchor latencies per contact
    std::vector<double> wifi_sends;
    std::vector<double> bt_sends;
    double neg_time = 0.0;
    std::vector<double>* current = nullptr;
    for (const TraceRecord& rec : result.trace) {
        if (rec.event == EventKind::NegotiationDone && rec.tech.has_value()) {
            neg_time = rec.time_s;
            current = (*rec.tech == Technology::WiFi) ? &wifi_sends : &bt_sends;
            current->push_back(neg_time);
        }
        if (rec.event == EventKind::BundleSent && current)
            current->push_back(rec.time_s);
    }
    // Wi-Fi contact: sends complete 7, 7 and 20 s after the previous slot
    REQUIRE(wifi_sends.size() == 4);
    CHECK(wifi_sends[1] - wifi_sends[0] == 7.0);
    // a 14 s handoff separates consecutive sends
    CHECK(wifi_sends[2] - wifi_sends[1] == 7.0 + 14.0);
    CHECK(wifi_sends[3] - wifi_sends[2] == 20.0 + 14.0);
    REQUIRE(bt_sends.size() == 4);
    CHECK(bt_sends[1] - bt_sends[0] == 5.0);
    CHECK(bt_sends[2] - bt_sends[1] == 90.0 + 14.0);
    CHECK(bt_sends[3] - bt_sends[2] == 280.0 + 14.0);
}

TEST_CASE("a GPRS blackout defers flush starts") {
    Scenario scenario = bundled("paper-single-bundle");
    // the flush would otherwise start at t = 1473
    scenario.gprs_blackouts.push_back({1400.0, 1600.0});
    const RunResult result = run(scenario, 0);

    for (const TraceRecord& rec : result.trace)
        if (rec.event == EventKind::ServerDelivered)
            CHECK(rec.time_s == 1631.0); // 1600 + 31
    CHECK(result.metrics.bundles_delivered == 1);
}

TEST_CASE("scenario validation names the offending key") {
    Scenario scenario = bundled("paper-single-bundle");
    scenario.loss_probability = 1.5;
    CHECK_THROWS_WITH_AS(scenario.validate(), "loss_probability: must be in [0, 1]",
                         ConfigError);

    scenario = bundled("paper-single-bundle");
    scenario.workload.push_back({1, 32, 0.0}); // duplicate id
    CHECK_THROWS_AS(scenario.validate(), ConfigError);

    scenario = bundled("paper-single-bundle");
    scenario.contacts.push_back({1000.0, 100.0, std::nullopt}); // overlaps / unsorted
    CHECK_THROWS_AS(scenario.validate(), ConfigError);
}
