#pragma once

#include <stdexcept>
#include <string>

namespace rsmfg {

// Enumeration or expansion exceeded a configured size cap. The message
// carries a size report (what blew up, at which stage, and the cap).
class CapExceeded : public std::runtime_error {
 public:
  explicit CapExceeded(const std::string& what) : std::runtime_error(what) {}
};

// Bayes update requested for an observation with zero predictive probability.
class ZeroProbabilityObservation : public std::runtime_error {
 public:
  explicit ZeroProbabilityObservation(const std::string& what)
      : std::runtime_error(what) {}
};

// A policy was queried on an observation history it does not cover.
class PolicyUndefined : public std::runtime_error {
 public:
  explicit PolicyUndefined(const std::string& what)
      : std::runtime_error(what) {}
};

// File could not be read, written, or parsed.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rsmfg
