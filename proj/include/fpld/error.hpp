#pragma once

#include <stdexcept>
#include <string>

namespace fpld {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class InvalidDither : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent payloads on the decode side.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Values that cannot be represented on the wire.
class EncodingError : public Error {
 public:
  using Error::Error;
};

class Infeasible : public Error {
 public:
  using Error::Error;
};

}  // namespace fpld
