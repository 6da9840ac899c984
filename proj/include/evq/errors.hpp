#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace evq {

/// Base for every failure caused by input data (files, rows, config documents).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed file: bad header, wrong column count, unparsable number.
class ParseError : public DataError {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : DataError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Well-formed input that breaks a domain invariant. `field()` names the culprit.
class ValidationError : public DataError {
public:
    ValidationError(std::string field, std::string detail)
        : DataError(field + ": " + detail), field_(std::move(field)), detail_(std::move(detail)) {}

    const std::string& field() const noexcept { return field_; }
    const std::string& detail() const noexcept { return detail_; }

    /// Same error, prefixed with a `file:line` style location.
    ValidationError located(const std::string& where) const { return ValidationError(where, field_, detail_); }

private:
    ValidationError(const std::string& where, std::string field, std::string detail)
        : DataError(where + ": " + field + ": " + detail), field_(std::move(field)), detail_(std::move(detail)) {}

    std::string field_;
    std::string detail_;
};

}  // namespace evq
