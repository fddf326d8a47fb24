#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace l2g {

// Base class for all library errors. Subclasses map to distinct CLI exit
// codes (see tools/).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid argument or input value (empty id, duplicate doc, empty pool).
class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(what) {}
};

// Malformed text input. Carries a 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Invalid configuration (window/step combinations, hop cap, flag conflicts).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

// Lookup of an unknown document or query.
class NotFoundError : public Error {
public:
    explicit NotFoundError(const std::string& what) : Error(what) {}
};

// A reranker adapter violated its contract or failed (bad permutation,
// protocol violation, timeout, dead child process).
class RerankerError : public Error {
public:
    explicit RerankerError(const std::string& what) : Error(what) {}
};

// Filesystem-level failure (cannot open/read/write).
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

// Graph file rejections, one class per failure mode so callers can tell
// them apart.
class GraphLoadError : public Error {
public:
    explicit GraphLoadError(const std::string& what) : Error(what) {}
};

class GraphVersionError : public GraphLoadError {
public:
    explicit GraphVersionError(const std::string& what) : GraphLoadError(what) {}
};

class GraphTruncatedError : public GraphLoadError {
public:
    explicit GraphTruncatedError(const std::string& what) : GraphLoadError(what) {}
};

class GraphChecksumError : public GraphLoadError {
public:
    explicit GraphChecksumError(const std::string& what) : GraphLoadError(what) {}
};

} // namespace l2g
