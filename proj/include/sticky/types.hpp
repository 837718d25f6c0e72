#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace sticky {

/// Largest spatial dimension supported by the engine. Vectors and matrices are
/// dynamically sized up to this bound but never touch the heap.
inline constexpr int kMaxDim = 3;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Geometry
class DegenerateGradient : public Error { public: using Error::Error; };
class NotOnBoundary : public Error { public: using Error::Error; };
class ProjectionDiverged : public Error { public: using Error::Error; };

// Densities and measures
class ZeroAlpha : public Error { public: using Error::Error; };
class ZeroBeta : public Error { public: using Error::Error; };
class QuadratureNotConverged : public Error { public: using Error::Error; };
class EnvelopeUnknown : public Error { public: using Error::Error; };

// Simulation and statistics
class HorizonNotReached : public Error { public: using Error::Error; };
class WindowTooShort : public Error { public: using Error::Error; };

// Input
class ValidationError : public Error { public: using Error::Error; };

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace sticky
