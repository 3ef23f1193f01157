#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace maxent {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// One or more query points lie outside the convex hull of the basis nodes.
/// `indices` are positions in the caller's batch (empty for a single query).
class OutsideHullError : public Error {
 public:
  explicit OutsideHullError(std::string what, std::vector<std::size_t> indices = {})
      : Error(std::move(what)), indices_(std::move(indices)) {}

  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  std::vector<std::size_t> indices_;
};

/// The basis solver did not converge at some training points.
class FitError : public Error {
 public:
  explicit FitError(std::string what, std::vector<std::size_t> failed = {})
      : Error(std::move(what)), failed_(std::move(failed)) {}

  const std::vector<std::size_t>& failed_points() const noexcept { return failed_; }

 private:
  std::vector<std::size_t> failed_;
};

}  // namespace maxent
