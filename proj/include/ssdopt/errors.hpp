#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssdopt {

class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// A violated operation precondition (bad layout, out-of-range argument).
class PreconditionError : public Error {
   public:
    using Error::Error;
};

/// Thrown when K + Delta stays indefinite after the full jitter escalation.
class ConditioningError : public Error {
   public:
    using Error::Error;
};

class UnsupportedDimensionError : public Error {
   public:
    using Error::Error;
};

class IoError : public Error {
   public:
    using Error::Error;
};

/// Another process holds the run directory.
class LockError : public IoError {
   public:
    using IoError::IoError;
};

class CheckpointError : public Error {
   public:
    using Error::Error;
};

/// Collects every problem found while reading a config, not just the first.
class ConfigError : public Error {
   public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

   private:
    std::vector<std::string> problems_;
};

/// A user simulator threw. Carries what is needed to replay the failing replicate.
class SimulationError : public Error {
   public:
    SimulationError(const std::string& what, std::int64_t replicate,
                     std::uint64_t replicate_seed)
        : Error(what), replicate_(replicate), replicate_seed_(replicate_seed) {}
    std::int64_t replicate() const { return replicate_; }
    std::uint64_t replicate_seed() const { return replicate_seed_; }

   private:
    std::int64_t replicate_;
    std::uint64_t replicate_seed_;
};

}  // namespace ssdopt
