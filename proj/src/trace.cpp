#include "edtn/trace.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace edtn {

std::string_view to_string(EventKind kind) {
    switch (kind) {
    case EventKind::RideStart: return "RideStart";
    case EventKind::RideEnd: return "RideEnd";
    case EventKind::ContactStart: return "ContactStart";
    case EventKind::NegotiationDone: return "NegotiationDone";
    case EventKind::BundleSent: return "BundleSent";
    case EventKind::ServerDelivered: return "ServerDelivered";
    case EventKind::AckDelivered: return "AckDelivered";
    case EventKind::ContactEnd: return "ContactEnd";
    case EventKind::PhaseCost: return "PhaseCost";
    }
    return "?";
}

std::optional<EventKind> event_kind_from_string(std::string_view name) {
    for (EventKind kind : {EventKind::RideStart, EventKind::RideEnd, EventKind::ContactStart,
                           EventKind::NegotiationDone, EventKind::BundleSent,
                           EventKind::ServerDelivered, EventKind::AckDelivered,
                           EventKind::ContactEnd, EventKind::PhaseCost}) {
        if (to_string(kind) == name)
            return kind;
    }
    return std::nullopt;
}

std::string format_double(double value) {
    std::array<char, 64> buf;
    const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), result.ptr);
}

std::string trace_to_csv(std::span<const TraceRecord> records) {
    std::string out = "time_s,node,event,bundle_id,tech,energy_delta_j,cap_voltage_v\n";
    for (const TraceRecord& rec : records) {
        out += format_double(rec.time_s);
        out += ',';
        out += to_string(rec.node);
        out += ',';
        out += to_string(rec.event);
        out += ',';
        if (rec.bundle_id)
            out += std::to_string(*rec.bundle_id);
        out += ',';
        if (rec.tech)
            out += to_string(*rec.tech);
        out += ',';
        out += format_double(rec.energy_delta_j);
        out += ',';
        out += format_double(rec.cap_voltage_v);
        out += '\n';
    }
    return out;
}

namespace {

std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

double parse_double(std::string_view text, std::size_t line_no) {
    double value = 0.0;
    const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
    if (result.ec != std::errc{} || result.ptr != text.data() + text.size())
        throw MalformedTrace("line " + std::to_string(line_no) + ": bad number '" +
                             std::string(text) + "'");
    return value;
}

std::int64_t parse_int(std::string_view text, std::size_t line_no) {
    std::int64_t value = 0;
    const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
    if (result.ec != std::errc{} || result.ptr != text.data() + text.size())
        throw MalformedTrace("line " + std::to_string(line_no) + ": bad integer '" +
                             std::string(text) + "'");
    return value;
}

} // namespace

std::vector<TraceRecord> trace_from_csv(std::string_view csv) {
    std::vector<TraceRecord> records;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    bool saw_header = false;
    while (pos < csv.size()) {
        std::size_t eol = csv.find('\n', pos);
        if (eol == std::string_view::npos)
            eol = csv.size();
        const std::string_view line = csv.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (line.empty())
            continue;
        if (!saw_header) {
            if (line != "time_s,node,event,bundle_id,tech,energy_delta_j,cap_voltage_v")
                throw MalformedTrace("unexpected header: " + std::string(line));
            saw_header = true;
            continue;
        }
        const auto fields = split_line(line);
        if (fields.size() != 7)
            throw MalformedTrace("line " + std::to_string(line_no) + ": expected 7 columns");

        TraceRecord rec;
        rec.time_s = parse_double(fields[0], line_no);
        rec.seq = static_cast<std::int64_t>(records.size());
        if (fields[1] == "fan")
            rec.node = NodeId::Fan;
        else if (fields[1] == "dm")
            rec.node = NodeId::Dm;
        else
            throw MalformedTrace("line " + std::to_string(line_no) + ": unknown node");
        const auto kind = event_kind_from_string(fields[2]);
        if (!kind)
            throw MalformedTrace("line " + std::to_string(line_no) + ": unknown event");
        rec.event = *kind;
        if (!fields[3].empty())
            rec.bundle_id = parse_int(fields[3], line_no);
        if (!fields[4].empty()) {
            const auto tech = technology_from_string(fields[4]);
            if (!tech)
                throw MalformedTrace("line " + std::to_string(line_no) + ": unknown tech");
            rec.tech = *tech;
        }
        rec.energy_delta_j = parse_double(fields[5], line_no);
        rec.cap_voltage_v = parse_double(fields[6], line_no);

        if (!records.empty() && rec.time_s < records.back().time_s)
            throw MalformedTrace("line " + std::to_string(line_no) + ": time went backwards");
        records.push_back(rec);
    }
    if (!saw_header)
        throw MalformedTrace("empty trace file");
    return records;
}

} // namespace edtn
