#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace unistab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};
struct NotSymmetric : Error {
    using Error::Error;
};
struct Singular : Error {
    using Error::Error;
};
struct ZeroDimension : Error {
    using Error::Error;
};
struct ThetaOutOfRange : Error {
    using Error::Error;
};
struct DegenerateProjection : Error {
    using Error::Error;
};
struct NonPositiveWeight : Error {
    using Error::Error;
};
struct InvalidRange : Error {
    using Error::Error;
};

struct InvalidTargets : Error {
    explicit InvalidTargets(const std::string& msg, std::vector<double> offending = {})
        : Error(msg), offending_values(std::move(offending)) {}
    std::vector<double> offending_values;
};

struct NoConvergence : Error {
    NoConvergence(const std::string& msg, int iters) : Error(msg), iterations(iters) {}
    int iterations;
};

struct NotCase1a : Error {
    explicit NotCase1a(const std::string& msg, std::vector<double> offending = {})
        : Error(msg), offending_targets(std::move(offending)) {}
    std::vector<double> offending_targets;
};

struct NotCase2 : Error {
    using Error::Error;
};
struct NotStabilizable : Error {
    using Error::Error;
};

struct ConfigError : Error {
    ConfigError(const std::string& msg, int line_no, std::string field_name)
        : Error(msg), line(line_no), field(std::move(field_name)) {}
    int line;
    std::string field;
};

}  // namespace unistab
