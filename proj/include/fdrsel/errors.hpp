#pragma once

#include <stdexcept>
#include <string>

namespace fdrsel {

enum class ErrorCode {
    missing_column,
    non_numeric,
    invalid_binary_response,
    constant_column,
    invalid_dataset,
    invalid_argument,
    not_positive_definite,
    rank_deficient,
    not_converged,
    io,
};

const char* to_string(ErrorCode code) noexcept;

/// Base class for every error the library throws.
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code)
    {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Malformed or invalid input data (CSV content, dataset invariants).
class DataError : public Error
{
public:
    using Error::Error;
};

/// A numerical fit could not be carried out.
class FitError : public Error
{
public:
    using Error::Error;
};

} // namespace fdrsel
