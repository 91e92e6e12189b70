#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gapsched/errors.hpp"
#include "gapsched/rng.hpp"

namespace gapsched {

using MatVec = std::function<void(const double* in, double* out)>;

struct LanczosOptions {
  double tol = 1e-10;     // residual tolerance, relative to the spectral scale
  double scale = 1.0;     // spectral scale estimate (norm bound of the operator)
  int max_basis = 420;    // basis vectors before giving up
  int block = 2;          // block size; 2 resolves doubly degenerate ground levels
  std::uint64_t seed = 0x1f123bb5159a55e5ULL;
};

struct LanczosOutcome {
  double e0 = 0.0, e1 = 0.0;
  int basis_size = 0;
};

namespace detail {

inline void orthogonalize_against_basis(double* col, const std::vector<double>& basis, int dim,
                                        int nbasis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (int q = 0; q < nbasis; ++q) {
      const double* qv = basis.data() + static_cast<std::size_t>(q) * dim;
      double dot = 0.0;
      for (int r = 0; r < dim; ++r) dot += qv[r] * col[r];
      for (int r = 0; r < dim; ++r) col[r] -= dot * qv[r];
    }
  }
}

}  // namespace detail

// Block Lanczos for the two algebraically smallest eigenvalues of a symmetric
// operator given as a matvec. The projected matrix T = Q^T A Q is maintained
// exactly (Rayleigh-Ritz over the accumulated, fully reorthogonalized basis),
// so breakdown replacements with fresh random directions keep the Ritz values
// valid. The residual of a Ritz pair reduces to ||R * u_block|| where R is the
// QR factor of the newest remainder block and u_block is the slice of the Ritz
// vector over the newest processed block.
inline LanczosOutcome block_lanczos_two_smallest(const MatVec& apply, int dim,
                                                 const LanczosOptions& opts = {}) {
  if (dim < 2) throw std::invalid_argument("block_lanczos: dim must be >= 2");
  const int b = std::min(opts.block, dim);
  const int max_basis = std::min(opts.max_basis, dim);
  const double tol_abs = opts.tol * std::max(1.0, opts.scale);
  const double breakdown = 1e-13 * std::max(1.0, opts.scale);

  Rng rng(opts.seed);
  std::vector<double> basis;  // column-contiguous, grows block by block
  basis.reserve(static_cast<std::size_t>(std::min(max_basis, 64)) * dim);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(max_basis, max_basis);

  std::vector<double> col(dim), acol(dim);
  std::vector<double> work(static_cast<std::size_t>(b) * dim);
  std::vector<double> rfac(static_cast<std::size_t>(b) * b, 0.0);

  auto append_random_column = [&](int nbasis) -> bool {
    for (int attempt = 0; attempt < 8; ++attempt) {
      for (int r = 0; r < dim; ++r) col[r] = rng.uniform(-1.0, 1.0);
      detail::orthogonalize_against_basis(col.data(), basis, dim, nbasis);
      double nrm = 0.0;
      for (double v : col) nrm += v * v;
      nrm = std::sqrt(nrm);
      if (nrm > 1e-8) {
        for (double& v : col) v /= nrm;
        basis.insert(basis.end(), col.begin(), col.end());
        return true;
      }
    }
    return false;
  };

  // random orthonormal start block
  int m = 0;
  for (int c = 0; c < b; ++c)
    if (append_random_column(m)) ++m;
  if (m == 0) throw std::runtime_error("block_lanczos: degenerate start block");

  int blk_start = 0, blk_count = m;  // newest block: columns [blk_start, blk_start + blk_count)

  for (;;) {
    // newest block: fill T's columns with exact projections of A x, then
    // orthogonalize the remainder W = A X - Q (Q^T A X) against the basis
    for (int c = 0; c < blk_count; ++c) {
      const double* x = basis.data() + static_cast<std::size_t>(blk_start + c) * dim;
      apply(x, acol.data());
      for (int q = 0; q < m; ++q) {
        const double* qv = basis.data() + static_cast<std::size_t>(q) * dim;
        double dot = 0.0;
        for (int r = 0; r < dim; ++r) dot += qv[r] * acol[r];
        T(q, blk_start + c) = dot;
        T(blk_start + c, q) = dot;
      }
      double* wcol = work.data() + static_cast<std::size_t>(c) * dim;
      std::copy(acol.begin(), acol.end(), wcol);
      for (int pass = 0; pass < 2; ++pass) {
        for (int q = 0; q < m; ++q) {
          const double* qv = basis.data() + static_cast<std::size_t>(q) * dim;
          double dot = 0.0;
          for (int r = 0; r < dim; ++r) dot += qv[r] * wcol[r];
          for (int r = 0; r < dim; ++r) wcol[r] -= dot * qv[r];
        }
      }
    }

    // QR of the remainder block. Rank-deficient columns (breakdown: an exactly
    // invariant subspace was hit) become fresh random directions; their R
    // entries stay zero, matching a vanished true remainder.
    std::fill(rfac.begin(), rfac.end(), 0.0);
    int appended = 0;
    const bool room = m < max_basis;
    if (room) {
      const int capacity = std::min(blk_count, max_basis - m);
      for (int c = 0; c < blk_count && appended < capacity; ++c) {
        double* wcol = work.data() + static_cast<std::size_t>(c) * dim;
        for (int prev = 0; prev < appended; ++prev) {
          const double* qv = basis.data() + static_cast<std::size_t>(m + prev) * dim;
          double dot = 0.0;
          for (int r = 0; r < dim; ++r) dot += qv[r] * wcol[r];
          rfac[static_cast<std::size_t>(prev) * b + c] = dot;
          for (int r = 0; r < dim; ++r) wcol[r] -= dot * qv[r];
        }
        double nrm = 0.0;
        for (int r = 0; r < dim; ++r) nrm += wcol[r] * wcol[r];
        nrm = std::sqrt(nrm);
        if (nrm > breakdown) {
          rfac[static_cast<std::size_t>(appended) * b + c] = nrm;
          col.assign(wcol, wcol + dim);
          for (double& v : col) v /= nrm;
          basis.insert(basis.end(), col.begin(), col.end());
          ++appended;
        } else if (append_random_column(m + appended)) {
          ++appended;
        }
      }
    }

    // Ritz values of the exact projected matrix T_m
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T.topLeftCorner(m, m));
    if (es.info() != Eigen::Success)
      throw std::runtime_error("block_lanczos: projected eigensolve failed");
    const auto& theta = es.eigenvalues();

    if (m >= 2) {
      bool converged = m == dim;  // full space: Ritz values are exact
      if (!converged && appended > 0) {
        converged = true;
        for (int i = 0; i < 2 && converged; ++i) {
          double rn2 = 0.0;
          for (int row = 0; row < appended; ++row) {
            double acc = 0.0;
            for (int c = 0; c < blk_count; ++c)
              acc += rfac[static_cast<std::size_t>(row) * b + c] *
                     es.eigenvectors()(blk_start + c, i);
            rn2 += acc * acc;
          }
          if (std::sqrt(rn2) > tol_abs) converged = false;
        }
      }
      if (converged) return {theta(0), theta(1), m};
    }

    if (appended == 0)
      throw EigensolverDidNotConverge(
          "block_lanczos: no convergence within basis size " + std::to_string(m), m);
    blk_start = m;
    blk_count = appended;
    m += appended;
  }
}

}  // namespace gapsched
