#include "edtn/messages.hpp"

#include "edtn/trace.hpp"

namespace edtn {

std::string NegReq::wire() const {
    std::string out = "NEG_REQ{e_dm=";
    out += format_double(e_dm_j);
    out += ", channel_qualities=[bluetooth=";
    out += format_double(channel_qualities.bluetooth);
    out += ", wifi=";
    out += format_double(channel_qualities.wifi);
    out += "]}";
    return out;
}

std::string NegResp::wire() const {
    std::string out = "NEG_RESP{n=";
    out += std::to_string(n);
    out += ", tech=";
    out += tech ? std::string(to_string(*tech)) : "none";
    out += "}";
    return out;
}

std::string BundleMsg::wire() const {
    return "BUNDLE{id=" + std::to_string(id) + ", size=" + std::to_string(size_bytes) + "}";
}

std::string AckMsg::wire() const {
    return "ACK{id=" + std::to_string(id) + "}";
}

} // namespace edtn
