#pragma once

// Truncated Fock-space optics: ladder operators, the two-mode beam splitter
// U = exp[i theta (b^dag c + c^dag b)], measurement POMs for a beam splitter
// followed by photodetectors, and the retrodictive states that follow from
// them (inefficient detector, projection synthesis, quantum scissors).
//
// Two-mode operators use dims [N+1, N+1] with mode b first and mode c second.

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "retrodiction/errors.hpp"
#include "retrodiction/hilbert.hpp"
#include "retrodiction/retrodict.hpp"

namespace retrodiction::optics {

// Photon-number truncation N per mode; each mode has dimension N + 1.
class FockSpace {
 public:
  explicit FockSpace(std::size_t max_photons) : n_(max_photons) {
    if (n_ < 1) {
      throw ValidationError("Fock truncation must be at least 1 photon");
    }
  }

  std::size_t max_photons() const noexcept { return n_; }
  std::size_t mode_dim() const noexcept { return n_ + 1; }
  ModeDims single_mode() const { return ModeDims::single(n_ + 1); }
  ModeDims two_mode() const { return ModeDims({n_ + 1, n_ + 1}); }

  Ket fock(std::size_t photons) const { return basis_ket(n_ + 1, photons); }
  Operator fock_projector(std::size_t photons) const { return projector(fock(photons)); }

 private:
  std::size_t n_;
};

class BeamSplitter {
 public:
  explicit BeamSplitter(double theta) : theta_(theta) {
    if (!std::isfinite(theta_)) {
      throw ValidationError("beam splitter angle must be finite");
    }
  }

  // Splitter whose transmittance cos^2(theta) equals eta.
  static BeamSplitter from_efficiency(double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) {
      throw ValidationError("efficiency must lie in [0, 1]");
    }
    return BeamSplitter(std::acos(std::sqrt(eta)));
  }

  double theta() const noexcept { return theta_; }
  double efficiency() const noexcept { return std::cos(theta_) * std::cos(theta_); }

 private:
  double theta_;
};

// Pure state c_0|0> + c_1|1> + ... fed into the reference port.
class ReferenceState {
 public:
  explicit ReferenceState(std::vector<Complex> amplitudes, double tol = kDefaultTolerance)
      : amps_(std::move(amplitudes)) {
    if (amps_.empty()) {
      throw ValidationError("reference state needs at least one amplitude");
    }
    double norm2 = 0.0;
    for (const auto& c : amps_) {
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
        throw ValidationError("reference state has non-finite amplitudes");
      }
      norm2 += std::norm(c);
    }
    if (std::abs(norm2 - 1.0) > tol) {
      throw ValidationError("reference state norm^2 is " + std::to_string(norm2) + ", expected 1");
    }
  }

  const std::vector<Complex>& amplitudes() const noexcept { return amps_; }

  Ket ket(const FockSpace& space) const {
    if (amps_.size() > space.mode_dim()) {
      throw DimensionError("reference state has " + std::to_string(amps_.size()) +
                           " amplitudes but the truncation allows " +
                           std::to_string(space.mode_dim()));
    }
    Ket k = Ket::Zero(static_cast<Eigen::Index>(space.mode_dim()));
    for (std::size_t i = 0; i < amps_.size(); ++i) k(static_cast<Eigen::Index>(i)) = amps_[i];
    return k;
  }

 private:
  std::vector<Complex> amps_;
};

// <k-1| b |k> = sqrt(k)
inline Operator annihilation(const FockSpace& space) {
  const auto d = static_cast<Eigen::Index>(space.mode_dim());
  Matrix b = Matrix::Zero(d, d);
  for (Eigen::Index k = 1; k < d; ++k) b(k - 1, k) = std::sqrt(static_cast<double>(k));
  return Operator(space.single_mode(), std::move(b));
}

inline Operator creation(const FockSpace& space) { return adjoint(annihilation(space)); }

inline Operator number_operator(const FockSpace& space) {
  return matmul(creation(space), annihilation(space));
}

// exp[i theta (b^dag c + c^dag b)] on the truncated two-mode space.
//
// The generator conserves n_b + n_c, so it is assembled and exponentiated
// one total-photon-number block at a time. Blocks with total <= N are
// complete and therefore exact; blocks above N are missing states and are
// exponentiated with the correspondingly truncated generator, which keeps
// the full matrix unitary.
inline Operator beam_splitter_unitary(const BeamSplitter& bs, const FockSpace& space) {
  const std::size_t N = space.max_photons();
  const std::size_t d = N + 1;
  const auto full = static_cast<Eigen::Index>(d * d);
  Matrix U = Matrix::Zero(full, full);
  for (std::size_t total = 0; total <= 2 * N; ++total) {
    // States |k, total - k> with both occupations within the truncation.
    const std::size_t k_min = total > N ? total - N : 0;
    const std::size_t k_max = std::min(total, N);
    const std::size_t size = k_max - k_min + 1;
    Matrix gen = Matrix::Zero(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size));
    for (std::size_t k = k_min; k < k_max; ++k) {
      // b^dag c |k, total-k> = sqrt(k+1) sqrt(total-k) |k+1, total-k-1>
      const double amp =
          std::sqrt(static_cast<double>(k + 1)) * std::sqrt(static_cast<double>(total - k));
      const auto row = static_cast<Eigen::Index>(k + 1 - k_min);
      const auto col = static_cast<Eigen::Index>(k - k_min);
      gen(row, col) += amp;
      gen(col, row) += amp;
    }
    const Operator block = matrix_exp(Operator(Complex(0.0, bs.theta()) * gen));
    for (std::size_t r = 0; r < size; ++r) {
      for (std::size_t c = 0; c < size; ++c) {
        const std::size_t kr = k_min + r;
        const std::size_t kc = k_min + c;
        U(static_cast<Eigen::Index>(kr * d + (total - kr)),
          static_cast<Eigen::Index>(kc * d + (total - kc))) = block(r, c);
      }
    }
  }
  return Operator(space.two_mode(), std::move(U));
}

namespace detail {

inline void require_single_mode(const Operator& op, const FockSpace& space, const char* what) {
  if (!(op.dims() == space.single_mode())) {
    throw DimensionError(std::string(what) + " has dims " + op.dims().to_string() +
                         ", expected " + space.single_mode().to_string());
  }
}

}  // namespace detail

// POM element for mode b of the device "beam splitter + detectors on both
// outputs + known state rho_c in input c":
//   Pi_b = Tr_c[ rho_c U^dag (pi_b (x) pi_c) U ]
inline Operator compose_measurement_pom(const Operator& rho_c, const Operator& pi_b,
                                        const Operator& pi_c, const BeamSplitter& bs,
                                        const FockSpace& space) {
  detail::require_single_mode(rho_c, space, "reference state");
  detail::require_single_mode(pi_b, space, "mode-b POM element");
  detail::require_single_mode(pi_c, space, "mode-c POM element");
  // U is block diagonal in total photon number, so the products run sparse.
  const Eigen::SparseMatrix<Complex> U = beam_splitter_unitary(bs, space).matrix().sparseView();
  const Matrix detectors = tensor(pi_b, pi_c).matrix();
  const Matrix heisenberg = U.adjoint() * (detectors * U);

  // Pi[k, k'] = sum_{j, j'} rho_c[j, j'] X[(k, j'), (k', j)]
  const auto d = static_cast<Eigen::Index>(space.mode_dim());
  const Matrix& rho = rho_c.matrix();
  Matrix m = Matrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    for (Eigen::Index kp = 0; kp < d; ++kp) {
      Complex acc = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index jp = 0; jp < d; ++jp) {
          acc += rho(j, jp) * heisenberg(k * d + jp, kp * d + j);
        }
      }
      m(k, kp) = acc;
    }
  }
  return Operator(space.single_mode(), 0.5 * (m + m.adjoint()));
}

// :exp(-eta b^dag b): in the number basis, diag((1 - eta)^k). At eta = 1
// this is the vacuum projector.
inline Operator normal_ordered_damping(double eta, const FockSpace& space) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw ValidationError("damping parameter eta must lie in [0, 1]");
  }
  const auto d = static_cast<Eigen::Index>(space.mode_dim());
  Matrix m = Matrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) m(k, k) = std::pow(1.0 - eta, static_cast<double>(k));
  return Operator(space.single_mode(), std::move(m));
}

namespace detail {

inline Operator power(const Operator& op, std::size_t n) {
  Operator out = identity(op.dims());
  for (std::size_t i = 0; i < n; ++i) out = out * op;
  return out;
}

inline void require_detector_args(std::size_t n, double eta, const FockSpace& space) {
  if (n > space.max_photons()) {
    throw ValidationError("photocount " + std::to_string(n) + " exceeds the truncation N = " +
                          std::to_string(space.max_photons()));
  }
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw ValidationError("detector efficiency must lie in (0, 1]");
  }
}

}  // namespace detail

// POM element for n counts on a detector of efficiency eta:
//   (1/n!) eta^n (b^dag)^n :exp(-eta b^dag b): b^n
inline Operator inefficient_detector_pom(std::size_t n, double eta, const FockSpace& space) {
  detail::require_detector_args(n, eta, space);
  const Operator b = annihilation(space);
  const Operator bn = detail::power(b, n);
  const double factor = std::pow(eta, static_cast<double>(n)) / std::tgamma(static_cast<double>(n) + 1.0);
  return scale(adjoint(bn) * normal_ordered_damping(eta, space) * bn, factor);
}

// Retrodictive state for n counts, normalized with the untruncated trace
// 1/eta of the POM element. On a finite truncation its trace falls short of
// one by at most detector_tail_bound(n, eta, N).
inline Operator inefficient_detector_retro(std::size_t n, double eta, const FockSpace& space) {
  return scale(inefficient_detector_pom(n, eta, space), eta);
}

// Upper bound on the probability mass the truncation cuts off, i.e. on
//   sum_{k > N} eta^{n+1} C(k, n) (1 - eta)^{k-n}.
// Consecutive terms shrink by (1 - eta)(k + 1)/(k + 1 - n), which is largest
// at the first omitted term, so the tail is bounded by a geometric series.
// Returns 1 when that ratio is not below one.
inline double detector_tail_bound(std::size_t n, double eta, std::size_t max_photons) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw ValidationError("detector efficiency must lie in (0, 1]");
  }
  if (n > max_photons) {
    throw ValidationError("photocount exceeds the truncation");
  }
  if (eta == 1.0) {
    return 0.0;
  }
  const double k = static_cast<double>(max_photons + 1);
  const double nn = static_cast<double>(n);
  const double log_term = std::lgamma(k + 1.0) - std::lgamma(nn + 1.0) - std::lgamma(k - nn + 1.0) +
                          (nn + 1.0) * std::log(eta) + (k - nn) * std::log1p(-eta);
  const double ratio = (1.0 - eta) * (k + 1.0) / (k + 1.0 - nn);
  if (ratio >= 1.0) {
    return 1.0;
  }
  return std::min(1.0, std::exp(log_term) / (1.0 - ratio));
}

// Retrodictive state of input b when the detectors record n and m counts and
// the reference port holds |c>.
inline Operator projection_synthesis_retro(const ReferenceState& ref, std::size_t n, std::size_t m,
                                           const BeamSplitter& bs, const FockSpace& space,
                                           double tol = kDefaultTolerance) {
  if (n + m > space.max_photons()) {
    throw ValidationError("n + m = " + std::to_string(n + m) + " exceeds the truncation N = " +
                          std::to_string(space.max_photons()));
  }
  const Operator pom = compose_measurement_pom(projector(ref.ket(space)), space.fock_projector(n),
                                               space.fock_projector(m), bs, space);
  if (std::real(trace(pom)) <= tol) {
    throw ZeroProbabilityError("projection synthesis: the outcome (" + std::to_string(n) + ", " +
                               std::to_string(m) + ") cannot occur with this reference state");
  }
  return retro_state(pom, tol);
}

// U |1>|0> at theta = pi/4: (|1,0> + i|0,1>)/sqrt(2), the entangled resource
// obtained by splitting a single photon on a 50:50 beam splitter.
inline Ket split_single_photon(const FockSpace& space) {
  const Operator U = beam_splitter_unitary(BeamSplitter(std::numbers::pi / 4.0), space);
  return U.matrix() * tensor(space.fock(1), space.fock(0));
}

// Quantum scissors: the photocount outcome (1, 0) with reference |c> fixes a
// retrodictive state for mode b. Projecting it onto the entangled state of
// modes (d, b) from split_single_photon leaves mode d in
//   rho_d ∝ Tr_b[(1_d (x) rho_b^retr) |Psi><Psi|].
inline Operator scissors_output(const ReferenceState& ref, const BeamSplitter& bs,
                                const FockSpace& space, double tol = kDefaultTolerance) {
  const Operator rho_b = projection_synthesis_retro(ref, 1, 0, bs, space, tol);
  const Ket psi = split_single_photon(space);
  const Operator entangled = projector(psi, space.two_mode());
  const Operator conditioned =
      partial_trace(tensor(identity(space.single_mode()), rho_b) * entangled, 1);
  const double p = std::real(trace(conditioned));
  if (p <= tol) {
    throw ZeroProbabilityError("scissors: projection onto the entangled resource has zero probability");
  }
  const Matrix& m = conditioned.matrix();
  return Operator(space.single_mode(), 0.5 * (m + m.adjoint()) / p);
}

}  // namespace retrodiction::optics
