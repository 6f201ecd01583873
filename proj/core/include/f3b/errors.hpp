#pragma once

#include <stdexcept>
#include <string>

namespace f3b {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside an operation's domain (index 0, duplicate indices, t > n, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Fewer shares than the reconstruction threshold.
class ThresholdError : public Error {
 public:
  using Error::Error;
};

// Malformed or non-canonical encoding.
class DecodeError : public Error {
 public:
  using Error::Error;
};

// A trustee refused to act on an unverifiable ciphertext.
class RefusalError : public Error {
 public:
  using Error::Error;
};

// AEAD open failed: wrong key or tampered ciphertext.
class AuthError : public Error {
 public:
  using Error::Error;
};

// A distributed protocol could not complete (too few honest participants).
class AbortError : public Error {
 public:
  using Error::Error;
};

// An operation was invoked out of lifecycle order.
class OrderingError : public Error {
 public:
  using Error::Error;
};

// Revealed key does not hash to the committed h_k.
class KeyRejectedError : public Error {
 public:
  using Error::Error;
};

// The caller may retry with fresh chain metadata (stale epoch key, stale deal).
class RetriableError : public Error {
 public:
  using Error::Error;
};

class StaleDealError : public RetriableError {
 public:
  using RetriableError::RetriableError;
};

class SingleUseError : public Error {
 public:
  using Error::Error;
};

}  // namespace f3b
