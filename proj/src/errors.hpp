#pragma once

#include <stdexcept>
#include <string>

namespace wta {

enum class ErrorCode {
    Domain = 1,
    Saturation,
    Config,
    Parse,
    UnsupportedFormat,
    Solver,
    Measurement,
    Io,
};

const char* error_code_name(ErrorCode code) noexcept;

// Base for every error the simulator raises. The code maps 1:1 onto the C API status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

#define WTA_DEFINE_ERROR(Name, Code)                                              \
    class Name : public Error {                                                   \
    public:                                                                       \
        explicit Name(const std::string& what) : Error(ErrorCode::Code, what) {}  \
    }

WTA_DEFINE_ERROR(DomainError, Domain);
WTA_DEFINE_ERROR(SaturationError, Saturation);
WTA_DEFINE_ERROR(ConfigError, Config);
WTA_DEFINE_ERROR(ParseError, Parse);
WTA_DEFINE_ERROR(UnsupportedFormatError, UnsupportedFormat);
WTA_DEFINE_ERROR(MeasurementError, Measurement);
WTA_DEFINE_ERROR(IoError, Io);

#undef WTA_DEFINE_ERROR

class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual)
        : Error(ErrorCode::Solver, what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

inline const char* error_code_name(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::Domain: return "domain";
    case ErrorCode::Saturation: return "saturation";
    case ErrorCode::Config: return "config";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::UnsupportedFormat: return "unsupported_format";
    case ErrorCode::Solver: return "solver";
    case ErrorCode::Measurement: return "measurement";
    case ErrorCode::Io: return "io";
    }
    return "unknown";
}

} // namespace wta
