// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace gcrmf {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shape-incompatible tensor or feature-vector arguments.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Argument outside its mathematical domain (negative timestamp, inverted
// window, alpha outside [0,1], ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Node or edge identifier that does not exist in the graph.
class MissingNodeError : public Error {
public:
    using Error::Error;
};

// Operation called in the wrong state (missing gradients, unfrozen graph,
// single-class training labels, ...).
class StateError : public Error {
public:
    using Error::Error;
};

// Anything wrong with input data: parse failures, referential integrity,
// malformed config.
class DataError : public Error {
public:
    using Error::Error;
};

class FormatError : public DataError {
public:
    using DataError::DataError;
};

class ConfigError : public DataError {
public:
    using DataError::DataError;
};

// Non-finite value detected at a numeric checkpoint.
class NumericError : public Error {
public:
    using Error::Error;
};

// Structural attention over an empty neighbor set; callers apply the
// self-loop fallback.
class EmptyNeighborhoodError : public Error {
public:
    using Error::Error;
};

// Every meta-path produced zero instances; callers fall back to the node's
// own embedding.
class NoSubgraphError : public Error {
public:
    using Error::Error;
};

// Contrastive batch too small to supply negatives.
class BatchError : public Error {
public:
    using Error::Error;
};

} // namespace gcrmf
