#pragma once

#include <stdexcept>
#include <string>

namespace eigenevent {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Input data does not agree with the schema or file format.
class DataError : public Error {
  public:
    using Error::Error;
};

/// Invalid user configuration (bad flags, inconsistent simulator settings).
class ConfigError : public Error {
  public:
    using Error::Error;
};

class UnknownLevel : public DataError {
  public:
    UnknownLevel(const std::string& attribute, const std::string& level)
        : DataError("unknown level '" + level + "' for attribute '" + attribute + "'") {}
};

/// Parse failure with file and line context. Line numbers are 1-based.
class ParseError : public DataError {
  public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : DataError(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}

    const std::string& file() const { return file_; }
    std::size_t line() const { return line_; }

  private:
    std::string file_;
    std::size_t line_;
};

class NonConvergence : public Error {
  public:
    using Error::Error;
};

class EmptyHistory : public Error {
  public:
    EmptyHistory() : Error("history is empty") {}
};

class InsufficientHistory : public Error {
  public:
    using Error::Error;
};


class DegenerateBaseline : public Error {
  public:
    DegenerateBaseline() : Error("baseline tensor has zero principal eigenvalue") {}
};

}  // namespace eigenevent
