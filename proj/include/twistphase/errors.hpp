#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace twistphase {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimension : public Error {
 public:
  using Error::Error;
};

class InvalidModel : public Error {
 public:
  using Error::Error;
};

/// A grid momentum where the Bloch vector violates (R_x, R_y) != (0, 0).
class SingularMode : public Error {
 public:
  SingularMode(const std::string& what, std::array<double, 3> k, int dim)
      : Error(what), k_(k), dim_(dim) {}
  const std::array<double, 3>& k() const noexcept { return k_; }
  int dim() const noexcept { return dim_; }

 private:
  std::array<double, 3> k_;
  int dim_;
};

/// R(k) = 0: the two bands touch at k.
class GapClosure : public SingularMode {
 public:
  using SingularMode::SingularMode;
};

class DegenerateCoefficient : public Error {
 public:
  using Error::Error;
};

/// gamma = 0 in the free-fermion model: the twist commutes with H.
class TrivialTwist : public Error {
 public:
  using Error::Error;
};

/// R_y(k) != -R_y(-k) somewhere on the grid.
class SymmetryViolation : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

class StencilError : public Error {
 public:
  using Error::Error;
};

/// Zero-energy orbital makes half filling ambiguous.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace twistphase
