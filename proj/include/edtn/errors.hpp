#pragma once

#include <stdexcept>
#include <string>

namespace edtn {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration or violated precondition; messages name the offending key.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A store was asked to supply more energy than its usable window holds.
class InsufficientEnergy : public Error {
public:
    using Error::Error;
};

// Harvest requested with zero available power.
class NoHarvest : public Error {
public:
    using Error::Error;
};

// Operation not defined for the given technology (e.g. anchor lookup for GPRS).
class UnknownTechnology : public Error {
public:
    using Error::Error;
};

// GPRS buffer size below one packet.
class InvalidBuffer : public Error {
public:
    using Error::Error;
};

// Calibration system is singular or underdetermined.
class DegenerateFit : public Error {
public:
    using Error::Error;
};

// Trace records violate ordering rules.
class MalformedTrace : public Error {
public:
    using Error::Error;
};

} // namespace edtn
