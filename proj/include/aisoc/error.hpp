#pragma once

#include <stdexcept>
#include <string>

namespace aisoc {

// Every failure raised by the toolkit derives from Error so callers can catch
// one type at process boundaries (CLI, HTTP handlers).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class LoadError : public Error {
public:
    LoadError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class SplitError : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

class CalibrationError : public Error {
public:
    using Error::Error;
};

class TuningError : public Error {
public:
    using Error::Error;
};

class MetricError : public Error {
public:
    using Error::Error;
};

class ArtifactError : public Error {
public:
    using Error::Error;
};

// Malformed scoring request (HTTP 400 / batch error object).
class RequestError : public Error {
public:
    using Error::Error;
};

}  // namespace aisoc
