#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fha {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed model: bad parameters, invalid ids, schema violations.
class ModelError : public Error {
public:
    using Error::Error;
};

/// A flat map or vector field was evaluated outside its domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A guard whose atoms admit no (v, z) point.
class GuardError : public Error {
public:
    using Error::Error;
};

/// Two transitions with the same head but different tails fire together.
class NondeterminismError : public Error {
public:
    using Error::Error;
};

/// A transition sequence whose heads and tails do not chain.
class ChainBreak : public Error {
public:
    ChainBreak(std::size_t index, const std::string& what) : Error(what), index_(index) {}
    [[nodiscard]] std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

/// Too many switchings at a single time instant.
class ZenoError : public Error {
public:
    using Error::Error;
};

/// The planner cannot satisfy a request.
class PlanError : public Error {
public:
    using Error::Error;
};

}  // namespace fha
