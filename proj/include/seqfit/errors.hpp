#pragma once

#include <stdexcept>
#include <string>

namespace seqfit {

// Error categories map onto the CLI exit codes: validation = 2,
// solver = 3, io = 4.
class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

class SolverError : public std::runtime_error {
  public:
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
  public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace seqfit
