#pragma once

#include <stdexcept>
#include <string>

namespace riskgraph {

/// Base class for all errors raised by the library. The CLI maps each
/// subclass to a distinct process exit code.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad function argument (span out of range, k > n, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Input file or CSV column layout does not match the declared schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Parsing produced no usable rows.
class EmptyInputError : public Error {
public:
    using Error::Error;
};

/// Infeasible synthetic scenario description.
class SpecError : public Error {
public:
    using Error::Error;
};

/// A scene does not satisfy the preconditions of a feature extraction.
class ExtractionError : public Error {
public:
    using Error::Error;
};

/// A loaded artifact fails its own invariants (hand-edited intermediates,
/// digest mismatches, non-PSD kernel matrices, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// SVM training cannot proceed (single class, non-PSD gram, ...).
class TrainingError : public Error {
public:
    using Error::Error;
};

/// Filesystem / serialization failure.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace riskgraph
