#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bugcast {

enum class ErrorKind {
    Io,
    Network,
    Parse,
    Validation,
    InsufficientData,
    InvalidRange,
    UnknownWeek,
    InvalidLag,
    Degenerate,
    RankDeficient,
    Shape,
    Alignment,
    TransformDomain,
    Divergence,
};

/// Base for every error raised by the library. The kind drives CLI exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Transient transport failure; safe to retry.
class NetworkError : public Error {
public:
    NetworkError(const std::string& what, int attempts)
        : Error(ErrorKind::Network, what + " (after " + std::to_string(attempts) + " attempts)"),
          attempts_(attempts) {}

    [[nodiscard]] int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::string excerpt = {})
        : Error(ErrorKind::Parse, excerpt.empty() ? what : what + ": " + excerpt),
          excerpt_(std::move(excerpt)) {}

    [[nodiscard]] const std::string& excerpt() const noexcept { return excerpt_; }

private:
    std::string excerpt_;
};

/// Raised when a series is shorter than an operation requires.
class InsufficientDataError : public Error {
public:
    InsufficientDataError(const std::string& what, std::size_t required, std::size_t actual)
        : Error(ErrorKind::InsufficientData, what + ": need at least " + std::to_string(required) +
                                                 " observations, got " + std::to_string(actual)),
          required_(required) {}

    [[nodiscard]] std::size_t required() const noexcept { return required_; }

private:
    std::size_t required_;
};

/// Process exit code for an error kind: 2 for I/O and network, 3 for bad input, 1 otherwise.
[[nodiscard]] int exit_code_for(ErrorKind kind) noexcept;

}  // namespace bugcast
