#pragma once

#include <stdexcept>
#include <string>

namespace rcdepth {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid or mismatched tensor shapes.
struct ShapeError : Error {
    using Error::Error;
};

/// Invalid scalar argument (nonpositive beta, zero upsample factor, ...).
struct ArgumentError : Error {
    using Error::Error;
};

/// Malformed tensor file. Each rejection reason carries its own kind.
struct FormatError : Error {
    enum class Kind { bad_magic, bad_version, bad_header, truncated };

    FormatError(Kind k, const std::string& msg) : Error(msg), kind(k) {}

    Kind kind;
};

/// Both supervision maps have an empty valid set; the loss is undefined.
struct EmptyValidSetError : Error {
    using Error::Error;
};

/// A loss component is NaN or infinite; the message names the term.
struct NonFiniteError : Error {
    using Error::Error;
};

/// Config file parse failure or unknown key.
struct ConfigError : Error {
    using Error::Error;
};

/// Training produced a non-finite loss; carries the offending step.
struct DivergenceError : Error {
    DivergenceError(std::size_t step_index, const std::string& msg)
        : Error(msg), step(step_index) {}

    std::size_t step;
};

}  // namespace rcdepth
