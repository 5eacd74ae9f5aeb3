#pragma once

#include <stdexcept>
#include <string>

namespace geodec {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DatasetError : public Error {
public:
  using Error::Error;
};

class MissingPair : public DatasetError {
public:
  MissingPair(const std::string& from, const std::string& to)
      : DatasetError("missing latency pair (" + from + ", " + to + ")") {}
};

class DuplicatePair : public DatasetError {
public:
  DuplicatePair(const std::string& from, const std::string& to)
      : DatasetError("duplicate latency pair (" + from + ", " + to + ")") {}
};

class NonPositiveLatency : public DatasetError {
public:
  NonPositiveLatency(const std::string& from, const std::string& to)
      : DatasetError("non-positive latency for (" + from + ", " + to + ")") {}
};

/// Raised with a dotted field path, e.g. "consensus.gamma: must lie in (0, 1]".
class ConfigError : public Error {
public:
  using Error::Error;
};

class SharesDontSum : public ConfigError {
public:
  using ConfigError::ConfigError;
};

class NoRelays : public Error {
public:
  NoRelays() : Error("no relays available") {}
};

class ZeroMean : public Error {
public:
  ZeroMean() : Error("payoff vector has non-positive mean") {}
};

class UnknownPreset : public ConfigError {
public:
  explicit UnknownPreset(const std::string& name) : ConfigError("unknown preset '" + name + "'") {}
};

}  // namespace geodec
