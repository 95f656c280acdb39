#pragma once

#include <stdexcept>
#include <string>

namespace phishgraph {

enum class Errc {
  InvalidAddress,
  InvalidNumeral,
  InvalidTransaction,
  InvalidDataset,
  MalformedHeader,
  MalformedDocument,
  ApiError,
  NetworkError,
  RateLimited,
  InvalidConfig,
  ShapeMismatch,
  EmptyMask,
  ClassAbsent,
  SingleClass,
  IoError,
  FormatError,
  LayoutMismatch,
};

const char* to_string(Errc code) noexcept;

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

class RateLimitedError : public Error {
 public:
  RateLimitedError(const std::string& what, double retry_after_s)
      : Error(Errc::RateLimited, what), retry_after_s_(retry_after_s) {}
  double retry_after_seconds() const noexcept { return retry_after_s_; }

 private:
  double retry_after_s_;
};

}  // namespace phishgraph
