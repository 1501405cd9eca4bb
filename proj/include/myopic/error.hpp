#ifndef MYOPIC_ERROR_HPP
#define MYOPIC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace myopic {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Invalid network description (bad k, unordered positions, bad splits, ...).
class ConfigError : public Error {
public:
  using Error::Error;
};

// 2^(L_beta + nu) exceeds the configured cap.
class StateSpaceError : public Error {
public:
  using Error::Error;
};

class IntegrationError : public Error {
public:
  using Error::Error;
};

// (A - I + B) could not be inverted; for a correctly built chain this
// indicates a construction bug.
class SingularSystemError : public Error {
public:
  using Error::Error;
};

class ConvergenceError : public Error {
public:
  using Error::Error;
};

}  // namespace myopic

#endif  // MYOPIC_ERROR_HPP
