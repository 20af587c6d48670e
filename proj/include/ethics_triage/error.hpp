#ifndef ETHICS_TRIAGE_ERROR_HPP
#define ETHICS_TRIAGE_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ethics_triage {

/// Base class for every error raised by the toolkit. The CLI maps these to
/// exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A referenced file could not be read.
class IngestError : public Error {
public:
    IngestError(const std::string& path, const std::string& what)
        : Error(path + ": " + what), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Input was well-formed but broke a domain invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Syntax error in a JSON document or a guideline source.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
          message_(message),
          line_(line),
          column_(column) {}

    /// The message without the position prefix.
    const std::string& message() const noexcept { return message_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::string message_;
    std::size_t line_;
    std::size_t column_;
};

} // namespace ethics_triage

#endif
