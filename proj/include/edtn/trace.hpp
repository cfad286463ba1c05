#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edtn/link_models.hpp"
#include "edtn/protocol.hpp"

namespace edtn {

enum class EventKind {
    RideStart,
    RideEnd,
    ContactStart,
    NegotiationDone,
    BundleSent,
    ServerDelivered,
    AckDelivered,
    ContactEnd,
    PhaseCost,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(std::string_view name);

/// One timestamped simulator event. Records execute (and serialize) in
/// (time_s, seq) lexicographic order; seq breaks ties deterministically.
struct TraceRecord {
    double time_s = 0.0;
    std::int64_t seq = 0; // not serialized; assigned in creation order
    NodeId node = NodeId::Dm;
    EventKind event = EventKind::PhaseCost;
    std::optional<std::int64_t> bundle_id;
    std::optional<Technology> tech;
    double energy_delta_j = 0.0;  // positive: harvested, negative: consumed
    double cap_voltage_v = 0.0;   // store voltage after this record's delta

    bool operator==(const TraceRecord&) const = default;
};

/// Serialize numbers with the shortest form that round-trips exactly.
std::string format_double(double value);

/// CSV with the fixed column set
/// time_s,node,event,bundle_id,tech,energy_delta_j,cap_voltage_v
/// (header row, '.' decimal separator, empty string for absent optionals).
std::string trace_to_csv(std::span<const TraceRecord> records);

/// Parse a trace CSV. Throws MalformedTrace on schema or ordering
/// violations. seq is reassigned from row order.
std::vector<TraceRecord> trace_from_csv(std::string_view csv);

} // namespace edtn
