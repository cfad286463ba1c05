#include <doctest.h>

#include <cmath>
#include <deque>
#include <set>
#include <random>

#include "edtn/contact.hpp"
#include "edtn/messages.hpp"
#include "edtn/protocol.hpp"

using namespace edtn;

namespace {

// Flat-latency link: every size takes `time_s`, so per-bundle costs are
// exact integers and easy to reason about.
LinkModel flat_link(double watts, double time_s) {
    LinkModel link;
    link.anchors = {{1.0, time_s}, {1e9, time_s}};
    link.active_watts = watts;
    return link;
}

// Uniform-cost suite: fan cost = watts * time, dm cost = fan + 39 + 1.
ModelSuite uniform_suite(double wifi_watts, double wifi_time, double bt_watts,
                         double bt_time) {
    ModelSuite suite;
    suite.links.wifi = flat_link(wifi_watts, wifi_time);
    suite.links.bluetooth = flat_link(bt_watts, bt_time);
    suite.gprs.epp_a_j = 0.0;
    suite.gprs.epp_b_j = 1.0; // 1 J per packet, any buffer size
    suite.gprs.epp_c_j = 0.0;
    suite.phases.rows = {{"handoff", 39.0, 14.0, PhaseRole::SomToGprs}};
    return suite;
}

std::vector<Bundle> uniform_pending(std::size_t count, const GprsModel& gprs,
                                    std::int64_t size_bytes = 32) {
    std::vector<Bundle> pending;
    for (std::size_t i = 0; i < count; ++i)
        pending.push_back(make_bundle(static_cast<std::int64_t>(i + 1), size_bytes, 0.0, gprs));
    return pending;
}

EnergyStore full_store(double capacitance_f = 100.0) {
    return EnergyStore(Supercapacitor{capacitance_f, 5.0, 5.0, 2.0});
}

LossDraw scripted(std::deque<bool>& script) {
    return [&script]() {
        if (script.empty())
            return false;
        const bool lost = script.front();
        script.pop_front();
        return lost;
    };
}

} // namespace

TEST_CASE("energy estimate subtracts the reserve and clamps at zero") {
    EnergyStore store = full_store(); // usable 1050 J
    CHECK(estimate_energy(NodeId::Dm, store, 162.0).available_j == 888.0);
    CHECK(estimate_energy(NodeId::Dm, store, 2000.0).available_j == 0.0);

    EnergyStore empty(Supercapacitor{100.0, 2.0, 5.0, 2.0});
    CHECK(estimate_energy(NodeId::Fan, empty, 0.0).available_j == 0.0);

    CHECK_THROWS_AS(estimate_energy(NodeId::Dm, store, -1.0), ConfigError);
}

TEST_CASE("greedy commit is bounded by the tighter budget") {
    const ModelSuite suite = uniform_suite(1.0, 10.0, 1.0, 10.0);
    const auto pending = uniform_pending(10, suite.gprs);
    // fan 10 J per bundle, dm 10 + 39 + 1 = 50 J per bundle
    std::vector<BundleCosts> costs(pending.size(),
                                   bundle_costs(suite, Technology::WiFi, pending[0], 1.0));
    CHECK(costs[0].fan_j == 10.0);
    CHECK(costs[0].dm_j == 50.0);

    const NegotiationOutcome outcome =
        commit_greedy(100.0, 500.0, Technology::WiFi, costs, pending);
    CHECK(outcome.n == 2); // min(floor(100/50), floor(500/10), 10)
    CHECK(outcome.tech == Technology::WiFi);
    CHECK(outcome.per_bundle_dm_cost_j == 50.0);
    CHECK(outcome.per_bundle_fan_cost_j == 10.0);
    CHECK(outcome.total_dm_cost_j == 100.0);
    CHECK(outcome.committed.size() == 2);
    CHECK(outcome.committed[0].id == 1);
    CHECK(outcome.committed[1].id == 2);
}

TEST_CASE("negotiation returns the zero outcome when nothing is feasible") {
    const ModelSuite suite = uniform_suite(1.0, 10.0, 1.0, 10.0);
    const auto pending = uniform_pending(5, suite.gprs);

    NegotiationInputs inputs;
    inputs.e_dm_j = 0.0;
    inputs.e_fan_j = 500.0;
    CHECK(negotiate(inputs, pending, suite).n == 0);
    CHECK(!negotiate(inputs, pending, suite).tech.has_value());

    inputs.e_dm_j = 500.0;
    CHECK(negotiate(inputs, {}, suite).n == 0); // empty queue

    inputs.channel_quality = {0.1, 0.1}; // both below the 0.2 threshold
    CHECK(negotiate(inputs, pending, suite).n == 0);
}

TEST_CASE("equal budgets break ties toward the faster technology") {
    // identical per-bundle energy, Wi-Fi twice as fast
    const ModelSuite wifi_fast = uniform_suite(2.0, 20.0, 1.0, 40.0);
    const auto pending = uniform_pending(3, wifi_fast.gprs);

    NegotiationInputs inputs;
    inputs.e_dm_j = 1000.0;
    inputs.e_fan_j = 1000.0;
    CHECK(negotiate(inputs, pending, wifi_fast).tech == Technology::WiFi);

    const ModelSuite bt_fast = uniform_suite(1.0, 40.0, 2.0, 20.0);
    CHECK(negotiate(inputs, pending, bt_fast).tech == Technology::Bluetooth);

    // full tie: fixed order puts Wi-Fi first
    const ModelSuite identical = uniform_suite(1.0, 20.0, 1.0, 20.0);
    CHECK(negotiate(inputs, pending, identical).tech == Technology::WiFi);
}

TEST_CASE("with the measured defaults a 3 MB bundle goes over Wi-Fi") {
    const ModelSuite suite = default_models();
    const auto pending = uniform_pending(1, suite.gprs, 3'000'000);

    NegotiationInputs inputs;
    inputs.e_dm_j = 1e9; // ample: choice is about efficiency, not feasibility
    inputs.e_fan_j = 1e9;
    const NegotiationOutcome outcome = negotiate(inputs, pending, suite);
    CHECK(outcome.tech == Technology::WiFi);
    // 20 s versus 280 s at 3 MB
    CHECK(transfer_time(suite.links, Technology::WiFi, 3e6) == 20.0);
    CHECK(transfer_time(suite.links, Technology::Bluetooth, 3e6) == 280.0);
}

TEST_CASE("channel eligibility can force the slower link") {
    const ModelSuite wifi_fast = uniform_suite(2.0, 20.0, 1.0, 40.0);
    const auto pending = uniform_pending(2, wifi_fast.gprs);

    NegotiationInputs inputs;
    inputs.e_dm_j = 1000.0;
    inputs.e_fan_j = 1000.0;
    inputs.channel_quality = {1.0, 0.0}; // Wi-Fi blocked
    CHECK(negotiate(inputs, pending, wifi_fast).tech == Technology::Bluetooth);
}

TEST_CASE("channel quality scales transfer time and link energy") {
    const ModelSuite suite = uniform_suite(1.0, 10.0, 1.0, 10.0);
    const Bundle bundle = make_bundle(1, 32, 0.0, suite.gprs);

    const BundleCosts clean = bundle_costs(suite, Technology::WiFi, bundle, 1.0);
    const BundleCosts degraded = bundle_costs(suite, Technology::WiFi, bundle, 0.5);
    CHECK(degraded.transfer_time_s == 2.0 * clean.transfer_time_s);
    CHECK(degraded.fan_j == 2.0 * clean.fan_j);
    // the relay part (handoff + flush) does not depend on the link
    CHECK(degraded.dm_j - degraded.fan_j == clean.dm_j - clean.fan_j);
}

TEST_CASE("negotiation properties over random uniform instances") {
    std::mt19937 rng(123456u);
    std::uniform_real_distribution<double> watts(0.1, 4.0);
    std::uniform_real_distribution<double> seconds(1.0, 60.0);
    std::uniform_real_distribution<double> budget(0.0, 4000.0);
    std::uniform_int_distribution<int> queue_len(1, 12);
    std::uniform_real_distribution<double> scale_log(-3.0, 3.0);

    for (int trial = 0; trial < 500; ++trial) {
        const ModelSuite suite =
            uniform_suite(watts(rng), seconds(rng), watts(rng), seconds(rng));
        const auto pending = uniform_pending(queue_len(rng), suite.gprs);

        NegotiationInputs inputs;
        inputs.e_dm_j = budget(rng);
        inputs.e_fan_j = budget(rng);
        const NegotiationOutcome outcome = negotiate(inputs, pending, suite);

        // n never exceeds the floor bounds of the chosen technology
        if (outcome.n > 0) {
            const BundleCosts c = bundle_costs(suite, *outcome.tech, pending[0], 1.0);
            const auto bound = static_cast<std::int64_t>(
                std::min(std::floor(inputs.e_dm_j / c.dm_j),
                         std::floor(inputs.e_fan_j / c.fan_j)));
            CHECK(outcome.n <= bound);
            CHECK(outcome.n <= static_cast<std::int64_t>(pending.size()));
            // committed totals stay inside both budgets
            CHECK(outcome.total_dm_cost_j <= inputs.e_dm_j * (1.0 + 1e-12));
            CHECK(outcome.total_fan_cost_j <= inputs.e_fan_j * (1.0 + 1e-12));
        }

        // monotone in the mule budget
        NegotiationInputs richer = inputs;
        richer.e_dm_j += budget(rng);
        CHECK(negotiate(richer, pending, suite).n >= outcome.n);

        // joint scaling never changes the selected technology
        const double lambda = std::exp(scale_log(rng));
        NegotiationInputs scaled = inputs;
        scaled.e_dm_j *= lambda;
        scaled.e_fan_j *= lambda;
        const NegotiationOutcome scaled_outcome = negotiate(scaled, pending, suite);
        if (outcome.tech.has_value() && scaled_outcome.tech.has_value())
            CHECK(*scaled_outcome.tech == *outcome.tech);
    }
}

TEST_CASE("fan_begin_contact moves the committed prefix into awaiting_ack") {
    const ModelSuite suite = uniform_suite(1.0, 10.0, 1.0, 10.0);
    FanState fan;
    fan.store = full_store();
    for (std::int64_t id : {1, 2, 3})
        fan.queue.push_back(make_bundle(id, 32, 0.0, suite.gprs));

    NegotiationOutcome outcome;
    outcome.n = 2;
    outcome.tech = Technology::WiFi;
    outcome.committed = {{1, 10.0, 50.0, 10.0}, {2, 10.0, 50.0, 10.0}};

    const auto actions = fan_begin_contact(fan, outcome);
    REQUIRE(actions.size() == 2);
    CHECK(actions[0].bundle.id == 1);
    CHECK(actions[1].bundle.id == 2);
    REQUIRE(fan.queue.size() == 1);
    CHECK(fan.queue.front().id == 3);
    REQUIRE(fan.awaiting_ack.size() == 2);
    CHECK(fan.store.ledger().discharged_j == 20.0);

    SUBCASE("n = 0 leaves the state untouched") {
        FanState idle;
        idle.store = full_store();
        idle.queue.push_back(make_bundle(9, 32, 0.0, suite.gprs));
        CHECK(fan_begin_contact(idle, NegotiationOutcome{}).empty());
        CHECK(idle.queue.size() == 1);
        CHECK(idle.awaiting_ack.empty());
    }

    SUBCASE("a commitment beyond the queue is rejected") {
        NegotiationOutcome bogus;
        bogus.n = 5;
        bogus.committed.resize(5);
        CHECK_THROWS_AS(fan_begin_contact(fan, bogus), ConfigError);
    }
}

TEST_CASE("a send costing exactly the remaining energy drains to the floor") {
    FanState fan;
    fan.store = EnergyStore(Supercapacitor{2.0, 2.0, 3.0, 0.0}); // usable = V^2 = 4 J
    fan.queue.push_back(Bundle{1, 32, 1, 0.0});

    NegotiationOutcome outcome;
    outcome.n = 1;
    outcome.tech = Technology::WiFi;
    outcome.committed = {{1, 4.0, 0.0, 1.0}};

    const auto actions = fan_begin_contact(fan, outcome);
    REQUIRE(actions.size() == 1);
    CHECK(fan.store.voltage_v() == 0.0);
    CHECK(fan.store.usable_energy_j() == 0.0);

    // one joule more than the store holds is an accounting fault
    FanState broke;
    broke.store = EnergyStore(Supercapacitor{2.0, 2.0, 3.0, 0.0});
    broke.queue.push_back(Bundle{1, 32, 1, 0.0});
    NegotiationOutcome too_much;
    too_much.n = 1;
    too_much.tech = Technology::WiFi;
    too_much.committed = {{1, 5.0, 0.0, 1.0}};
    CHECK_THROWS_AS(fan_begin_contact(broke, too_much), InsufficientEnergy);
}

TEST_CASE("dm_receive_bundle plans one flush per buffer batch") {
    const ModelSuite suite = default_models();

    SUBCASE("a 1600-byte bundle is one full 50-packet flush") {
        DmState dm;
        dm.store = full_store();
        const Bundle bundle = make_bundle(7, 1600, 0.0, suite.gprs);
        const ReceiveOutcome rcv = dm_receive_bundle(dm, bundle, suite, Technology::WiFi, 1.0);
        CHECK(rcv.ack_bundle_id == 7);
        REQUIRE(rcv.flushes.size() == 1);
        CHECK(rcv.flushes[0].packets == 50);
        CHECK(rcv.flushes[0].energy_j == 35.0);
        CHECK(rcv.flushes[0].duration_s == 31.0);
        CHECK(rcv.handoff_cost_j == 42.0);
        CHECK(rcv.handoff_time_s == 14.0);
        CHECK(dm.inbox.size() == 1);
        CHECK(dm.gprs_pending_packets == 50);
        dm.mark_flushed(50);
        CHECK(dm.gprs_pending_packets == 0);
    }

    SUBCASE("a 3200-byte bundle takes two flushes and one ACK") {
        DmState dm;
        dm.store = full_store();
        const Bundle bundle = make_bundle(8, 3200, 0.0, suite.gprs);
        const ReceiveOutcome rcv = dm_receive_bundle(dm, bundle, suite, Technology::WiFi, 1.0);
        REQUIRE(rcv.flushes.size() == 2);
        CHECK(rcv.flushes[0].packets == 50);
        CHECK(rcv.flushes[1].packets == 50);
        CHECK(rcv.ack_bundle_id == 8);
    }

    SUBCASE("a 32-byte bundle flushes a partial buffer at bundle end") {
        DmState dm;
        dm.store = full_store();
        const Bundle bundle = make_bundle(9, 32, 0.0, suite.gprs);
        const ReceiveOutcome rcv = dm_receive_bundle(dm, bundle, suite, Technology::WiFi, 1.0);
        REQUIRE(rcv.flushes.size() == 1);
        CHECK(rcv.flushes[0].packets == 1);
        CHECK(rcv.flushes[0].energy_j == doctest::Approx(3.101).epsilon(1e-12));
    }
}

TEST_CASE("acknowledgements delete exactly once") {
    FanState fan;
    fan.store = full_store();
    fan.awaiting_ack = {Bundle{1, 32, 1, 0.0}, Bundle{2, 32, 1, 0.0}};

    CHECK(fan_on_ack(fan, 1));
    REQUIRE(fan.awaiting_ack.size() == 1);
    CHECK(fan.awaiting_ack[0].id == 2);

    CHECK(!fan_on_ack(fan, 1)); // duplicate: ignored
    CHECK(fan.awaiting_ack.size() == 1);
    CHECK(fan.unknown_ack_count == 1);

    CHECK(!fan_on_ack(fan, 99)); // never sent: ignored with a warning
    CHECK(fan.unknown_ack_count == 2);
}

TEST_CASE("unacked bundles requeue at the head in age order") {
    FanState fan;
    fan.store = full_store();
    fan.queue = {Bundle{5, 32, 1, 0.0}};
    fan.awaiting_ack = {Bundle{1, 32, 1, 0.0}, Bundle{2, 32, 1, 0.0}};

    fan_requeue_unacked(fan);
    CHECK(fan.awaiting_ack.empty());
    REQUIRE(fan.queue.size() == 3);
    CHECK(fan.queue[0].id == 1);
    CHECK(fan.queue[1].id == 2);
    CHECK(fan.queue[2].id == 5);
}

TEST_CASE("a lost ACK leads to redelivery in the next contact") {
    ModelSuite suite = default_models();
    // pin the measured 13 s / 42 J transfer for the 1600-byte bundle
    suite.links.wifi.anchors = {{1600.0, 13.0}, {3'000'000.0, 20.0}};

    FanState fan;
    fan.store = EnergyStore(Supercapacitor{10'000.0, 5.0, 5.0, 0.0});
    fan.queue.push_back(make_bundle(1, 1600, 0.0, suite.gprs));

    DmState dm;
    dm.store = full_store();
    dm.reserve_j = 85.0;

    ProtocolConfig config;
    Tracer tracer;

    // contact 1: bundle and flush delivered, the ACK is lost
    std::deque<bool> script = {false, false, true};
    ContactSession first(fan, dm, suite, config, ContactWindow{0.0, 600.0},
                         PerTech{0.0, 1.0}, scripted(script), tracer);
    first.run_all();

    CHECK(fan.awaiting_ack.empty());
    REQUIRE(fan.queue.size() == 1); // requeued at contact end
    CHECK(fan.queue.front().id == 1);

    std::int64_t delivered = 0;
    std::int64_t acked = 0;
    for (const TraceRecord& rec : tracer.records) {
        delivered += rec.event == EventKind::ServerDelivered;
        acked += rec.event == EventKind::AckDelivered;
    }
    CHECK(delivered == 1);
    CHECK(acked == 0);

    // contact 2: clean run, the bundle is delivered again and acknowledged
    std::deque<bool> clean;
    ContactSession second(fan, dm, suite, config, ContactWindow{2000.0, 600.0},
                          PerTech{0.0, 1.0}, scripted(clean), tracer);
    second.run_all();

    CHECK(fan.queue.empty());
    CHECK(fan.awaiting_ack.empty());

    delivered = 0;
    acked = 0;
    for (const TraceRecord& rec : tracer.records) {
        delivered += rec.event == EventKind::ServerDelivered;
        acked += rec.event == EventKind::AckDelivered;
    }
    CHECK(delivered == 2); // at-least-once
    CHECK(acked == 1);
}

TEST_CASE("a contact round arithmetic example: four bundles in two contacts") {
    ModelSuite suite = default_models();
    suite.links.wifi.anchors = {{1600.0, 13.0}, {3'000'000.0, 20.0}};

    FanState fan;
    fan.store = EnergyStore(Supercapacitor{10'000.0, 5.0, 5.0, 0.0});
    for (std::int64_t id : {1, 2, 3, 4})
        fan.queue.push_back(make_bundle(id, 1600, 0.0, suite.gprs));

    // per-bundle mule cost: 42 receive + 42 handoff + 35 flush = 119 J;
    // boot 163 J, tail 85 J. usable = 496 J affords exactly two bundles.
    DmState dm;
    Supercapacitor cap{100.0, std::sqrt(2.0 * 496.0 / 100.0 + 4.0), 5.0, 2.0};
    dm.store = EnergyStore(cap);
    dm.reserve_j = 85.0;

    ProtocolConfig config;
    Tracer tracer;
    std::deque<bool> no_loss;

    ContactSession first(fan, dm, suite, config, ContactWindow{0.0, 3000.0},
                         PerTech{0.0, 1.0}, scripted(no_loss), tracer);
    first.run_all();
    CHECK(fan.queue.size() == 2);

    // recharge between contacts, then finish the queue
    dm.store.charge(2.9, 10'000.0, 1.0);
    ContactSession second(fan, dm, suite, config, ContactWindow{20'000.0, 3000.0},
                          PerTech{0.0, 1.0}, scripted(no_loss), tracer);
    second.run_all();
    CHECK(fan.queue.empty());

    std::set<std::int64_t> delivered;
    std::int64_t committed_rounds = 0;
    for (const TraceRecord& rec : tracer.records) {
        if (rec.event == EventKind::ServerDelivered)
            delivered.insert(*rec.bundle_id);
        if (rec.event == EventKind::NegotiationDone && rec.tech.has_value())
            ++committed_rounds;
    }
    CHECK(delivered == std::set<std::int64_t>{1, 2, 3, 4});
    CHECK(committed_rounds == 2); // two bundles per productive round
}

TEST_CASE("an empty queue still runs a single n = 0 round") {
    const ModelSuite suite = default_models();
    FanState fan;
    fan.store = full_store();
    DmState dm;
    dm.store = full_store();

    Tracer tracer;
    std::deque<bool> no_loss;
    ContactSession session(fan, dm, suite, ProtocolConfig{}, ContactWindow{0.0, 600.0},
                           PerTech{1.0, 1.0}, scripted(no_loss), tracer);
    session.run_all();

    std::int64_t rounds = 0;
    for (const TraceRecord& rec : tracer.records)
        rounds += rec.event == EventKind::NegotiationDone;
    CHECK(rounds == 1);
    CHECK(session.rounds_executed() == 1);
}

TEST_CASE("wire messages keep field order and names") {
    CHECK(NegReq{802.0, PerTech{0.0, 1.0}}.wire() ==
          "NEG_REQ{e_dm=802, channel_qualities=[bluetooth=0, wifi=1]}");
    CHECK(NegResp{2, Technology::WiFi}.wire() == "NEG_RESP{n=2, tech=wifi}");
    CHECK(NegResp{0, std::nullopt}.wire() == "NEG_RESP{n=0, tech=none}");
    CHECK(BundleMsg{7, 1600}.wire() == "BUNDLE{id=7, size=1600}");
    CHECK(AckMsg{7}.wire() == "ACK{id=7}");
}
