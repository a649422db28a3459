#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

#include "hyperplan/ids.hpp"

namespace hyperplan {

// Root of every error this library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hyperpath discipline breached while building a hypergraph.
class StructureError : public Error {
 public:
  using Error::Error;
};

class CycleDetected : public Error {
 public:
  using Error::Error;
};

class PreconditionViolated : public Error {
 public:
  using Error::Error;
};

class ExecutionFault : public Error {
 public:
  ExecutionFault(std::optional<ArcId> arc, const std::string& reason)
      : Error(arc ? "arc " + std::to_string(arc->value) + ": " + reason : reason), arc_(arc) {}
  std::optional<ArcId> arc() const { return arc_; }

 private:
  std::optional<ArcId> arc_;
};

/// Planning failures: the problem has no answer under the given limits.
class PlanningFailure : public Error {
 public:
  using Error::Error;
};

class NoSolution : public PlanningFailure {
 public:
  using PlanningFailure::PlanningFailure;
};

class BudgetExhausted : public PlanningFailure {
 public:
  explicit BudgetExhausted(std::size_t limit)
      : PlanningFailure("search budget of " + std::to_string(limit) + " expansions exhausted"),
        limit_(limit) {}
  std::size_t limit() const { return limit_; }

 private:
  std::size_t limit_;
};

class NoGrounding : public PlanningFailure {
 public:
  using PlanningFailure::PlanningFailure;
};

class SubproblemInfeasible : public PlanningFailure {
 public:
  SubproblemInfeasible(ArcId arc, const std::string& reason)
      : PlanningFailure("abstract arc " + std::to_string(arc.value) + ": " + reason), arc_(arc) {}
  ArcId arc() const { return arc_; }

 private:
  ArcId arc_;
};

/// Input errors: malformed or inconsistent files and arguments.
class InputError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InputError {
 public:
  using InputError::InputError;
};

class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

class IoFailure : public InputError {
 public:
  using InputError::InputError;
};

class CorruptRecord : public InputError {
 public:
  CorruptRecord(const std::string& file, const std::string& reason)
      : InputError(file + ": " + reason), file_(file) {}
  const std::string& file() const { return file_; }

 private:
  std::string file_;
};

}  // namespace hyperplan
