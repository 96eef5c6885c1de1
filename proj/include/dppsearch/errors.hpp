#ifndef DPPSEARCH_ERRORS_HPP
#define DPPSEARCH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dppsearch {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invalid search-space document.
class SpaceError : public Error {
 public:
  enum class Kind { syntax, semantic };

  SpaceError(Kind kind, const std::string& what)
      : Error((kind == Kind::syntax ? "syntax error: " : "semantic error: ") +
              what),
        kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// A configuration, point set or argument does not fit the operation.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The sampler/space combination is not defined (e.g. Sobol on a tree space).
class UnsupportedSpace : public Error {
 public:
  using Error::Error;
};

/// Kernel matrix or candidate pool collapsed numerically.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

}  // namespace dppsearch

#endif  // DPPSEARCH_ERRORS_HPP
