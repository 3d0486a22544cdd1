#ifndef IVMM_ERRORS_HPP
#define IVMM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ivmm {

// Error categories map onto CLI exit codes: validation -> 2, engine -> 3, io -> 4.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EngineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// -- validation --------------------------------------------------------------

struct ParseError : ValidationError {
    using ValidationError::ValidationError;
};

struct BadArgs : ValidationError {
    using ValidationError::ValidationError;
};

struct ConfigError : ValidationError {
    using ValidationError::ValidationError;
};

struct InvalidInterval : ValidationError {
    using ValidationError::ValidationError;
};

struct NonFiniteShares : ValidationError {
    using ValidationError::ValidationError;
};

// -- engine ------------------------------------------------------------------

struct EndpointTooFine : EngineError {
    using EngineError::EngineError;
};

struct PrecisionExceedsSchedule : EngineError {
    using EngineError::EngineError;
};

struct LevelOutOfRange : EngineError {
    using EngineError::EngineError;
};

struct StructureViolation : EngineError {
    using EngineError::EngineError;
};

struct IncoherentState : EngineError {
    using EngineError::EngineError;
};

struct DegeneratePrice : EngineError {
    using EngineError::EngineError;
};

struct DegenerateBelief : EngineError {
    using EngineError::EngineError;
};

// -- io ----------------------------------------------------------------------

struct LogCorrupt : IoError {
    using IoError::IoError;
};

} // namespace ivmm

#endif // IVMM_ERRORS_HPP
