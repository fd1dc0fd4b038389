#pragma once

#include <stdexcept>
#include <string>

namespace bl {

// Every failure the library reports derives from Error so callers (the CLI in
// particular) can map them to exit codes in one place.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Truncation order too small for the requested coefficient or flow.
class OrderError : public Error {
 public:
  using Error::Error;
};

// Input outside the numerical domain of validity (decay, convergence, Im z <= 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Characteristic crossing / multivalued solution.
class ShockError : public Error {
 public:
  using Error::Error;
};

// Collision of a state with a pole of the vector field (z = mu_i, mu_i = mu_k, ...).
class SingularityError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace bl
