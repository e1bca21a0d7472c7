#pragma once

#include <stdexcept>
#include <string>

namespace tep {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// File exists but its contents cannot form a valid variable table.
class MalformedFileError : public Error {
  public:
    explicit MalformedFileError(const std::string& what) : Error(what) {}
};

// A token could not be parsed as a number; carries 1-based line/column.
class ParseError : public Error {
  public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error(what + " (line " + std::to_string(line) + ", column " +
                std::to_string(column) + ")"),
          line(line),
          column(column) {}
    std::size_t line;
    std::size_t column;
};

// An expected input file is absent; message names the file.
class MissingDataError : public Error {
  public:
    explicit MissingDataError(const std::string& what) : Error(what) {}
};

// Label assignment impossible for the given frame shape.
class InvalidLabelingError : public Error {
  public:
    explicit InvalidLabelingError(const std::string& what) : Error(what) {}
};

// Bad argument values (out-of-range thresholds, empty inputs, ...).
class InvalidArgumentError : public Error {
  public:
    explicit InvalidArgumentError(const std::string& what) : Error(what) {}
};

}  // namespace tep
