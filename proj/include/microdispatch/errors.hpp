#pragma once

#include <stdexcept>
#include <string>

namespace microdispatch {

// Root of every error the library throws. The CLI maps ValidationFailure
// subclasses to exit code 1 and everything else to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Errors caused by bad user input (case files, CSVs, arguments).
class ValidationFailure : public Error {
public:
    using Error::Error;
};

class ParseError : public ValidationFailure {
public:
    using ValidationFailure::ValidationFailure;
};

class ValidationError : public ValidationFailure {
public:
    ValidationError(std::string field_path, const std::string& what)
        : ValidationFailure(field_path + ": " + what), field_path_(std::move(field_path)) {}

    const std::string& field_path() const { return field_path_; }

private:
    std::string field_path_;
};

class TopologyError : public ValidationFailure {
public:
    using ValidationFailure::ValidationFailure;
};

class UnknownBranch : public ValidationFailure {
public:
    explicit UnknownBranch(int id) : ValidationFailure("unknown branch id " + std::to_string(id)) {}
};

class MissingProfile : public ValidationFailure {
public:
    using ValidationFailure::ValidationFailure;
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

class SimultaneousChargeDischarge : public Error {
public:
    SimultaneousChargeDischarge() : Error("ESS cannot charge and discharge in the same step") {}
};

class RateLimit : public Error {
public:
    using Error::Error;
};

class OutOfSupport : public Error {
public:
    using Error::Error;
};

class InfeasibleMoments : public Error {
public:
    using Error::Error;
};

class BadLevelCount : public Error {
public:
    using Error::Error;
};

class BadTarget : public ValidationFailure {
public:
    using ValidationFailure::ValidationFailure;
};

class HorizonMismatch : public ValidationFailure {
public:
    using ValidationFailure::ValidationFailure;
};

class DimensionMismatch : public ValidationFailure {
public:
    using ValidationFailure::ValidationFailure;
};

class NotConverged : public Error {
public:
    using Error::Error;
};

class VoltageCollapse : public Error {
public:
    using Error::Error;
};

class Overflow : public Error {
public:
    using Error::Error;
};

}  // namespace microdispatch
