#ifndef EPIHMM_ERRORS_HPP
#define EPIHMM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace epihmm {

// Error taxonomy mirrors the CLI exit codes: usage 2, data 3, numeric/training 4.

class UsageError : public std::runtime_error {
public:
  explicit UsageError(const std::string &msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string &msg) : std::runtime_error(msg) {}
};

class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string &msg) : std::runtime_error(msg) {}
};

class TrainingError : public NumericError {
public:
  explicit TrainingError(const std::string &msg) : NumericError(msg) {}
};

} // namespace epihmm

#endif
