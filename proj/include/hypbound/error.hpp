#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hypbound {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: unknown letters, bad files, bad JSON/CSV payloads.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Arguments outside an operation's domain (p <= 0, empty balls, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Rank < 2 or otherwise elementary input.
class ElementaryGroupError : public DomainError {
 public:
  using DomainError::DomainError;
};

// A Cayley ball is too small to certify a distance.
class RadiusInsufficient : public Error {
 public:
  RadiusInsufficient(const std::string& what, std::size_t required_radius)
      : Error(what + " (radius insufficient: need radius >= " +
              std::to_string(required_radius) + ")"),
        required_radius_(required_radius) {}

  std::size_t required_radius() const noexcept { return required_radius_; }

 private:
  std::size_t required_radius_;
};

// A cylinder partition is too coarse to express the requested quantity.
class RefinementError : public Error {
 public:
  RefinementError(const std::string& what, std::size_t required_depth)
      : Error(what + " (refine to depth >= " + std::to_string(required_depth) +
              ")"),
        required_depth_(required_depth) {}

  std::size_t required_depth() const noexcept { return required_depth_; }

 private:
  std::size_t required_depth_;
};

// A resource guard (memory / dimension cap) refused the request.
class CapacityError : public Error {
 public:
  using Error::Error;
};

}  // namespace hypbound
