#include "edtn/scenario.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace edtn {

namespace {

using nlohmann::json;

void expect_keys(const json& obj, const std::string& path,
                 const std::set<std::string>& allowed) {
    for (const auto& [key, _] : obj.items()) {
        if (allowed.find(key) == allowed.end())
            throw ConfigError(path.empty() ? "unknown key '" + key + "'"
                                           : path + ": unknown key '" + key + "'");
    }
}

double get_number(const json& obj, const std::string& path, const std::string& key,
                  double fallback) {
    if (!obj.contains(key))
        return fallback;
    const json& v = obj.at(key);
    if (!v.is_number())
        throw ConfigError(path + "." + key + ": expected a number");
    return v.get<double>();
}

std::int64_t get_integer(const json& obj, const std::string& path, const std::string& key,
                         std::int64_t fallback) {
    if (!obj.contains(key))
        return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer())
        throw ConfigError(path + "." + key + ": expected an integer");
    return v.get<std::int64_t>();
}

Supercapacitor parse_capacitor(const json& obj, const std::string& path,
                               const Supercapacitor& defaults) {
    if (!obj.is_object())
        throw ConfigError(path + ": expected an object");
    expect_keys(obj, path, {"capacitance_f", "v_init", "v_max", "v_cutoff"});
    Supercapacitor cap = defaults;
    cap.capacitance_f = get_number(obj, path, "capacitance_f", cap.capacitance_f);
    cap.v_max_v = get_number(obj, path, "v_max", cap.v_max_v);
    cap.v_cutoff_v = get_number(obj, path, "v_cutoff", cap.v_cutoff_v);
    cap.voltage_v = get_number(obj, path, "v_init", cap.voltage_v);
    return cap;
}

PerTech parse_per_tech(const json& obj, const std::string& path, PerTech defaults) {
    if (!obj.is_object())
        throw ConfigError(path + ": expected an object");
    expect_keys(obj, path, {"bluetooth", "wifi"});
    defaults.bluetooth = get_number(obj, path, "bluetooth", defaults.bluetooth);
    defaults.wifi = get_number(obj, path, "wifi", defaults.wifi);
    return defaults;
}

LinkModel parse_link(const json& obj, const std::string& path, LinkModel defaults) {
    if (!obj.is_object())
        throw ConfigError(path + ": expected an object");
    expect_keys(obj, path, {"anchors", "active_watts"});
    if (obj.contains("anchors")) {
        const json& anchors = obj.at("anchors");
        if (!anchors.is_array())
            throw ConfigError(path + ".anchors: expected an array of [size_bytes, time_s]");
        defaults.anchors.clear();
        for (const json& pair : anchors) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() ||
                !pair[1].is_number())
                throw ConfigError(path + ".anchors: expected [size_bytes, time_s] pairs");
            defaults.anchors.push_back({pair[0].get<double>(), pair[1].get<double>()});
        }
    }
    defaults.active_watts = get_number(obj, path, "active_watts", defaults.active_watts);
    return defaults;
}

PhaseRole role_for_label(const std::string& label, const json& row,
                         const std::string& path) {
    if (row.contains("role")) {
        const json& role = row.at("role");
        if (!role.is_string())
            throw ConfigError(path + ".role: expected a string");
        const auto parsed = phase_role_from_string(role.get<std::string>());
        if (!parsed)
            throw ConfigError(path + ".role: unknown role '" + role.get<std::string>() + "'");
        return *parsed;
    }
    static const std::map<std::string, PhaseRole> by_label = [] {
        std::map<std::string, PhaseRole> m;
        for (const auto& row : default_phase_table().rows)
            m[row.label] = row.role;
        return m;
    }();
    const auto it = by_label.find(label);
    if (it == by_label.end())
        throw ConfigError(path + ".role: required for custom label '" + label + "'");
    return it->second;
}

} // namespace

Scenario scenario_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& err) {
        throw ConfigError(std::string("scenario is not valid JSON: ") + err.what());
    }
    if (!doc.is_object())
        throw ConfigError("scenario: expected a JSON object");

    expect_keys(doc, "",
                {"capacitor", "fan_capacitor", "dynamo", "links", "gprs", "phase_table",
                 "protocol", "channel_quality", "rides", "contacts", "gprs_blackouts",
                 "workload", "loss_probability", "seed"});

    Scenario scenario;

    if (doc.contains("capacitor"))
        scenario.dm_capacitor =
            parse_capacitor(doc.at("capacitor"), "capacitor", scenario.dm_capacitor);
    if (doc.contains("fan_capacitor"))
        scenario.fan_capacitor =
            parse_capacitor(doc.at("fan_capacitor"), "fan_capacitor", Supercapacitor{});

    if (doc.contains("dynamo")) {
        const json& obj = doc.at("dynamo");
        if (!obj.is_object())
            throw ConfigError("dynamo: expected an object");
        expect_keys(obj, "dynamo", {"watts_per_kmh", "max_watts", "efficiency"});
        scenario.dynamo.watts_per_kmh =
            get_number(obj, "dynamo", "watts_per_kmh", scenario.dynamo.watts_per_kmh);
        scenario.dynamo.max_watts =
            get_number(obj, "dynamo", "max_watts", scenario.dynamo.max_watts);
        scenario.dynamo.efficiency =
            get_number(obj, "dynamo", "efficiency", scenario.dynamo.efficiency);
    }

    if (doc.contains("links")) {
        const json& obj = doc.at("links");
        if (!obj.is_object())
            throw ConfigError("links: expected an object");
        expect_keys(obj, "links", {"bluetooth", "wifi"});
        if (obj.contains("bluetooth"))
            scenario.models.links.bluetooth = parse_link(obj.at("bluetooth"),
                                                         "links.bluetooth",
                                                         scenario.models.links.bluetooth);
        if (obj.contains("wifi"))
            scenario.models.links.wifi =
                parse_link(obj.at("wifi"), "links.wifi", scenario.models.links.wifi);
    }

    if (doc.contains("gprs")) {
        const json& obj = doc.at("gprs");
        if (!obj.is_object())
            throw ConfigError("gprs: expected an object");
        expect_keys(obj, "gprs",
                    {"packet_bytes", "epp_a", "epp_b", "epp_c", "t_setup_s",
                     "t_per_packet_s", "buffer_packets"});
        GprsModel& gprs = scenario.models.gprs;
        gprs.packet_bytes = get_integer(obj, "gprs", "packet_bytes", gprs.packet_bytes);
        gprs.epp_a_j = get_number(obj, "gprs", "epp_a", gprs.epp_a_j);
        gprs.epp_b_j = get_number(obj, "gprs", "epp_b", gprs.epp_b_j);
        gprs.epp_c_j = get_number(obj, "gprs", "epp_c", gprs.epp_c_j);
        gprs.t_setup_s = get_number(obj, "gprs", "t_setup_s", gprs.t_setup_s);
        gprs.t_per_packet_s = get_number(obj, "gprs", "t_per_packet_s", gprs.t_per_packet_s);
        gprs.buffer_packets = get_integer(obj, "gprs", "buffer_packets", gprs.buffer_packets);
    }

    if (doc.contains("phase_table")) {
        const json& rows = doc.at("phase_table");
        if (!rows.is_array())
            throw ConfigError("phase_table: expected an array");
        scenario.models.phases.rows.clear();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const json& row = rows[i];
            const std::string path = "phase_table[" + std::to_string(i) + "]";
            if (!row.is_object())
                throw ConfigError(path + ": expected an object");
            expect_keys(row, path, {"label", "joules", "seconds", "role"});
            if (!row.contains("label") || !row.at("label").is_string())
                throw ConfigError(path + ".label: required string");
            PhaseCostTable::Row parsed;
            parsed.label = row.at("label").get<std::string>();
            parsed.energy_j = get_number(row, path, "joules", -1.0);
            parsed.time_s = get_number(row, path, "seconds", -1.0);
            if (parsed.energy_j < 0.0)
                throw ConfigError(path + ".joules: required non-negative number");
            if (parsed.time_s < 0.0)
                throw ConfigError(path + ".seconds: required non-negative number");
            parsed.role = role_for_label(parsed.label, row, path);
            scenario.models.phases.rows.push_back(std::move(parsed));
        }
    }

    if (doc.contains("protocol")) {
        const json& obj = doc.at("protocol");
        if (!obj.is_object())
            throw ConfigError("protocol: expected an object");
        expect_keys(obj, "protocol",
                    {"negotiation_latency_s", "dm_reserve_j", "fan_reserve_j",
                     "eligibility_threshold"});
        ProtocolConfig& p = scenario.protocol;
        p.negotiation_latency_s =
            get_number(obj, "protocol", "negotiation_latency_s", p.negotiation_latency_s);
        p.dm_reserve_j = get_number(obj, "protocol", "dm_reserve_j", p.dm_reserve_j);
        p.fan_reserve_j = get_number(obj, "protocol", "fan_reserve_j", p.fan_reserve_j);
        p.eligibility_threshold =
            get_number(obj, "protocol", "eligibility_threshold", p.eligibility_threshold);
    }

    if (doc.contains("channel_quality"))
        scenario.channel_quality = parse_per_tech(doc.at("channel_quality"),
                                                  "channel_quality", scenario.channel_quality);

    if (doc.contains("rides")) {
        const json& rides = doc.at("rides");
        if (!rides.is_array())
            throw ConfigError("rides: expected an array");
        for (std::size_t i = 0; i < rides.size(); ++i) {
            const json& leg = rides[i];
            const std::string path = "rides[" + std::to_string(i) + "]";
            if (!leg.is_object())
                throw ConfigError(path + ": expected an object");
            expect_keys(leg, path, {"speed_kmh", "duration_s"});
            scenario.rides.push_back({get_number(leg, path, "speed_kmh", 0.0),
                                      get_number(leg, path, "duration_s", 0.0)});
        }
    }

    if (doc.contains("contacts")) {
        const json& contacts = doc.at("contacts");
        if (!contacts.is_array())
            throw ConfigError("contacts: expected an array");
        for (std::size_t i = 0; i < contacts.size(); ++i) {
            const json& c = contacts[i];
            const std::string path = "contacts[" + std::to_string(i) + "]";
            if (!c.is_object())
                throw ConfigError(path + ": expected an object");
            expect_keys(c, path, {"start_s", "max_duration_s", "channel_quality"});
            ContactSpec spec;
            spec.start_s = get_number(c, path, "start_s", 0.0);
            spec.max_duration_s = get_number(c, path, "max_duration_s", 0.0);
            if (c.contains("channel_quality"))
                spec.channel_quality = parse_per_tech(c.at("channel_quality"),
                                                      path + ".channel_quality",
                                                      scenario.channel_quality);
            scenario.contacts.push_back(std::move(spec));
        }
    }

    if (doc.contains("gprs_blackouts")) {
        const json& blackouts = doc.at("gprs_blackouts");
        if (!blackouts.is_array())
            throw ConfigError("gprs_blackouts: expected an array");
        for (std::size_t i = 0; i < blackouts.size(); ++i) {
            const json& b = blackouts[i];
            const std::string path = "gprs_blackouts[" + std::to_string(i) + "]";
            if (!b.is_object())
                throw ConfigError(path + ": expected an object");
            expect_keys(b, path, {"start_s", "end_s"});
            scenario.gprs_blackouts.push_back(
                {get_number(b, path, "start_s", 0.0), get_number(b, path, "end_s", 0.0)});
        }
    }

    if (doc.contains("workload")) {
        const json& workload = doc.at("workload");
        if (!workload.is_array())
            throw ConfigError("workload: expected an array");
        for (std::size_t i = 0; i < workload.size(); ++i) {
            const json& item = workload[i];
            const std::string path = "workload[" + std::to_string(i) + "]";
            if (!item.is_object())
                throw ConfigError(path + ": expected an object");
            expect_keys(item, path, {"id", "size_bytes", "created_at_s"});
            WorkloadItem parsed;
            parsed.id = get_integer(item, path, "id", -1);
            if (parsed.id < 0)
                throw ConfigError(path + ".id: required non-negative integer");
            parsed.size_bytes = get_integer(item, path, "size_bytes", 0);
            parsed.created_at_s = get_number(item, path, "created_at_s", 0.0);
            scenario.workload.push_back(parsed);
        }
    }

    if (doc.contains("loss_probability")) {
        if (!doc.at("loss_probability").is_number())
            throw ConfigError("loss_probability: expected a number");
        scenario.loss_probability = doc.at("loss_probability").get<double>();
    }
    if (doc.contains("seed")) {
        if (!doc.at("seed").is_number_integer())
            throw ConfigError("seed: expected an integer");
        scenario.seed = doc.at("seed").get<std::uint64_t>();
    }

    scenario.validate();
    return scenario;
}

std::string read_file(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file)
        throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream buffer;
    buffer << file.rdbuf();
    if (file.bad())
        throw IoError("read failure on '" + path + "'");
    return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file)
        throw IoError("cannot open '" + path + "' for writing");
    file << content;
    file.flush();
    if (!file)
        throw IoError("write failure on '" + path + "'");
}

Scenario load_scenario(const std::string& path) {
    return scenario_from_json(read_file(path));
}

} // namespace edtn
