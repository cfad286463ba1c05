#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "edtn/link_models.hpp"
#include "edtn/protocol.hpp"

namespace edtn {

// Wire schema for the four protocol messages. Field order and names are
// fixed; traces and any transport realization must not reorder them.

struct NegReq {
    double e_dm_j = 0.0;
    PerTech channel_qualities{1.0, 1.0};

    std::string wire() const; // NEG_REQ{e_dm=..., channel_qualities=[bluetooth=..., wifi=...]}
};

struct NegResp {
    std::int64_t n = 0;
    std::optional<Technology> tech;

    std::string wire() const; // NEG_RESP{n=..., tech=...}
};

struct BundleMsg {
    std::int64_t id = 0;
    std::int64_t size_bytes = 0;

    std::string wire() const; // BUNDLE{id=..., size=...}
};

struct AckMsg {
    std::int64_t id = 0;

    std::string wire() const; // ACK{id=...}
};

} // namespace edtn
