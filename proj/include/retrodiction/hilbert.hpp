#pragma once

// Complex operator algebra over finite-dimensional multi-mode Hilbert spaces.
//
// Kronecker convention: the left operand of tensor() is the slower-varying
// index, so for dims [d0, d1] the basis state |i, k> sits at row i * d1 + k.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "retrodiction/errors.hpp"

namespace retrodiction {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Ket = Eigen::VectorXcd;

inline constexpr double kDefaultTolerance = 1e-9;

class ModeDims {
 public:
  ModeDims(std::initializer_list<std::size_t> dims) : ModeDims(std::vector<std::size_t>(dims)) {}

  explicit ModeDims(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) {
      throw DimensionError("mode dimension list must not be empty");
    }
    for (auto d : dims_) {
      if (d < 1) {
        throw DimensionError("every mode dimension must be at least 1");
      }
    }
    total_ = std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>());
  }

  static ModeDims single(std::size_t dim) { return ModeDims({dim}); }

  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t modes() const noexcept { return dims_.size(); }
  std::size_t total() const noexcept { return total_; }
  std::size_t operator[](std::size_t mode) const { return dims_.at(mode); }

  ModeDims concat(const ModeDims& other) const {
    std::vector<std::size_t> out = dims_;
    out.insert(out.end(), other.dims_.begin(), other.dims_.end());
    return ModeDims(std::move(out));
  }

  // Dims with one mode removed. Removing the only mode leaves a single
  // one-dimensional mode so the result is still a valid operator space.
  ModeDims without(std::size_t mode) const {
    if (mode >= dims_.size()) {
      throw DimensionError("mode index " + std::to_string(mode) + " out of range for " +
                           std::to_string(dims_.size()) + " modes");
    }
    if (dims_.size() == 1) {
      return ModeDims({1});
    }
    std::vector<std::size_t> out = dims_;
    out.erase(out.begin() + static_cast<std::ptrdiff_t>(mode));
    return ModeDims(std::move(out));
  }

  std::string to_string() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      os << (i ? "," : "") << dims_[i];
    }
    os << ']';
    return os.str();
  }

  friend bool operator==(const ModeDims&, const ModeDims&) = default;

 private:
  std::vector<std::size_t> dims_;
  std::size_t total_ = 1;
};

// Square complex matrix tagged with the mode structure of the space it acts
// on. Used for density operators, POM elements and unitaries alike.
class Operator {
 public:
  Operator(ModeDims dims, Matrix entries) : dims_(std::move(dims)), entries_(std::move(entries)) {
    const auto n = static_cast<Eigen::Index>(dims_.total());
    if (entries_.rows() != n || entries_.cols() != n) {
      std::ostringstream os;
      os << "operator is " << entries_.rows() << "x" << entries_.cols() << " but dims "
         << dims_.to_string() << " require " << n << "x" << n;
      throw DimensionError(os.str());
    }
    if (!entries_.allFinite()) {
      throw ValidationError("operator has non-finite entries");
    }
  }

  explicit Operator(const Matrix& entries)
      : Operator(ModeDims::single(static_cast<std::size_t>(entries.rows())), Matrix(entries)) {}

  const ModeDims& dims() const noexcept { return dims_; }
  const Matrix& matrix() const noexcept { return entries_; }
  std::size_t dim() const noexcept { return dims_.total(); }
  Complex operator()(std::size_t row, std::size_t col) const {
    return entries_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  }

 private:
  ModeDims dims_;
  Matrix entries_;
};

namespace detail {

inline void require_same_dims(const Operator& a, const Operator& b, const char* what) {
  if (!(a.dims() == b.dims())) {
    throw DimensionError(std::string(what) + ": dims " + a.dims().to_string() + " vs " +
                         b.dims().to_string());
  }
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace detail

inline Operator identity(const ModeDims& dims) {
  const auto n = static_cast<Eigen::Index>(dims.total());
  return Operator(dims, Matrix::Identity(n, n));
}

inline Operator zero_operator(const ModeDims& dims) {
  const auto n = static_cast<Eigen::Index>(dims.total());
  return Operator(dims, Matrix::Zero(n, n));
}

// |psi><psi| (not normalized; callers pass unit kets for states)
inline Operator projector(const Ket& psi, const ModeDims& dims) {
  return Operator(dims, psi * psi.adjoint());
}

inline Operator projector(const Ket& psi) {
  return projector(psi, ModeDims::single(static_cast<std::size_t>(psi.size())));
}

// Computational basis ket |index> in a space of dimension dim.
inline Ket basis_ket(std::size_t dim, std::size_t index) {
  if (index >= dim) {
    throw DimensionError("basis index " + std::to_string(index) + " out of range for dimension " +
                         std::to_string(dim));
  }
  Ket k = Ket::Zero(static_cast<Eigen::Index>(dim));
  k(static_cast<Eigen::Index>(index)) = 1.0;
  return k;
}

inline Operator tensor(const Operator& a, const Operator& b) {
  const Matrix& A = a.matrix();
  const Matrix& B = b.matrix();
  const Eigen::Index nb = B.rows();
  Matrix out(A.rows() * nb, A.cols() * nb);
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      out.block(i * nb, j * nb, nb, nb) = A(i, j) * B;
    }
  }
  return Operator(a.dims().concat(b.dims()), std::move(out));
}

inline Ket tensor(const Ket& a, const Ket& b) {
  Ket out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    out.segment(i * b.size(), b.size()) = a(i) * b;
  }
  return out;
}

// Trace out one mode. Tracing the only mode yields a 1x1 operator holding
// the full trace.
inline Operator partial_trace(const Operator& op, std::size_t mode) {
  const auto& dims = op.dims();
  ModeDims reduced = dims.without(mode);
  const auto& d = dims.dims();
  std::size_t left = 1;
  std::size_t right = 1;
  for (std::size_t i = 0; i < mode; ++i) left *= d[i];
  for (std::size_t i = mode + 1; i < d.size(); ++i) right *= d[i];
  const std::size_t mid = d[mode];

  const Matrix& M = op.matrix();
  const auto n = static_cast<Eigen::Index>(left * right);
  Matrix out = Matrix::Zero(n, n);
  for (std::size_t l = 0; l < left; ++l) {
    for (std::size_t r = 0; r < right; ++r) {
      for (std::size_t lp = 0; lp < left; ++lp) {
        for (std::size_t rp = 0; rp < right; ++rp) {
          Complex acc = 0.0;
          for (std::size_t j = 0; j < mid; ++j) {
            acc += M(static_cast<Eigen::Index>((l * mid + j) * right + r),
                     static_cast<Eigen::Index>((lp * mid + j) * right + rp));
          }
          out(static_cast<Eigen::Index>(l * right + r), static_cast<Eigen::Index>(lp * right + rp)) =
              acc;
        }
      }
    }
  }
  return Operator(std::move(reduced), std::move(out));
}

inline Operator adjoint(const Operator& op) { return Operator(op.dims(), op.matrix().adjoint()); }

inline Complex trace(const Operator& op) { return op.matrix().trace(); }

inline Operator matmul(const Operator& a, const Operator& b) {
  detail::require_same_dims(a, b, "matmul");
  return Operator(a.dims(), a.matrix() * b.matrix());
}

inline Operator scale(const Operator& op, Complex factor) {
  return Operator(op.dims(), op.matrix() * factor);
}

inline Operator add(const Operator& a, const Operator& b) {
  detail::require_same_dims(a, b, "add");
  return Operator(a.dims(), a.matrix() + b.matrix());
}

inline Operator subtract(const Operator& a, const Operator& b) {
  detail::require_same_dims(a, b, "subtract");
  return Operator(a.dims(), a.matrix() - b.matrix());
}

inline Operator operator+(const Operator& a, const Operator& b) { return add(a, b); }
inline Operator operator-(const Operator& a, const Operator& b) { return subtract(a, b); }
inline Operator operator*(const Operator& a, const Operator& b) { return matmul(a, b); }
inline Operator operator*(Complex f, const Operator& op) { return scale(op, f); }

// Largest elementwise modulus of a - b.
inline double max_abs_diff(const Operator& a, const Operator& b) {
  detail::require_same_dims(a, b, "max_abs_diff");
  return detail::max_abs(a.matrix() - b.matrix());
}

struct MatrixExpOptions {
  // Taylor terms allowed after scaling; reaching the cap is a convergence failure.
  int max_terms = 60;
  double target_norm = 0.5;
};

// Scaling and squaring with a truncated Taylor series. Scales the argument
// until its 1-norm is below options.target_norm, sums terms until they stop
// contributing at double precision, then squares back.
inline Operator matrix_exp(const Operator& op, MatrixExpOptions options = {}) {
  const Matrix& A = op.matrix();
  const auto n = A.rows();
  const double norm = A.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > options.target_norm) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / options.target_norm)));
  }
  if (squarings > 1000) {
    throw ConvergenceError("matrix_exp: argument norm too large to scale");
  }
  const Matrix scaled = A / std::ldexp(1.0, squarings);

  Matrix sum = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  bool converged = false;
  for (int k = 1; k <= options.max_terms; ++k) {
    term = (term * scaled) / static_cast<double>(k);
    sum += term;
    const double tn = detail::max_abs(term);
    if (tn <= 1e-18 * std::max(1.0, detail::max_abs(sum))) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError("matrix_exp: Taylor series did not converge within " +
                           std::to_string(options.max_terms) + " terms");
  }
  for (int s = 0; s < squarings; ++s) {
    sum = sum * sum;
  }
  if (!sum.allFinite()) {
    throw ConvergenceError("matrix_exp: result overflowed");
  }
  return Operator(op.dims(), std::move(sum));
}

inline bool is_hermitian(const Operator& op, double tol = kDefaultTolerance) {
  return detail::max_abs(op.matrix() - op.matrix().adjoint()) <= tol;
}

// Eigenvalues (ascending) of the hermitian part of op.
inline Eigen::VectorXd hermitian_eigenvalues(const Operator& op) {
  const Matrix h = 0.5 * (op.matrix() + op.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

inline double min_eigenvalue(const Operator& op) { return hermitian_eigenvalues(op).minCoeff(); }

// Hermiticity first, then smallest eigenvalue >= -tol.
inline bool is_psd(const Operator& op, double tol = kDefaultTolerance) {
  if (!is_hermitian(op, tol)) {
    return false;
  }
  return min_eigenvalue(op) >= -tol;
}

inline bool is_unitary(const Operator& op, double tol = kDefaultTolerance) {
  const Matrix& U = op.matrix();
  const Matrix I = Matrix::Identity(U.rows(), U.cols());
  return detail::max_abs(U.adjoint() * U - I) <= tol && detail::max_abs(U * U.adjoint() - I) <= tol;
}

// |<a|b>|^2 for unit kets; insensitive to global phase.
inline double fidelity(const Ket& a, const Ket& b) {
  if (a.size() != b.size()) {
    throw DimensionError("fidelity: ket sizes differ");
  }
  return std::norm(a.dot(b));
}

// <psi|rho|psi>, the fidelity of a pure state with a density operator.
inline double fidelity(const Ket& psi, const Operator& rho) {
  if (static_cast<std::size_t>(psi.size()) != rho.dim()) {
    throw DimensionError("fidelity: ket size does not match operator");
  }
  return std::real(psi.dot(rho.matrix() * psi));
}

// Eigenvector of the largest eigenvalue, with the global phase chosen so the
// largest-modulus component is real and positive.
inline Ket dominant_ket(const Operator& op) {
  const Matrix h = 0.5 * (op.matrix() + op.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  Ket v = solver.eigenvectors().col(h.rows() - 1);
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  const Complex pivot = v(arg);
  if (std::abs(pivot) > 0.0) {
    v *= std::conj(pivot) / std::abs(pivot);
  }
  return v;
}

}  // namespace retrodiction
