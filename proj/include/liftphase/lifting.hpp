#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "liftphase/forward.hpp"
#include "liftphase/kernels.hpp"
#include "liftphase/signals.hpp"

namespace liftphase {

/// m_k = exp(-pi i l 2k) g^(k) for k = -delta, -delta + 1/2, ..., delta,
/// stored by twice-index 2k in [-2 delta, 2 delta].
class ShiftVector {
 public:
  ShiftVector(double shift, int delta, std::vector<cplx> entries);

  double shift() const { return shift_; }
  int delta() const { return delta_; }
  /// m at k = twice_index / 2; zero outside [-2 delta, 2 delta].
  cplx at_twice(long twice_index) const;
  std::span<const cplx> entries() const { return entries_; }

 private:
  double shift_;
  int delta_;
  std::vector<cplx> entries_;
};

/// Reads g^ from a lattice that must cover [-2 delta, 2 delta].
ShiftVector shift_vector(const FourierLattice& window_lattice, double shift, int delta);
ShiftVector shift_vector(const Window& g, double shift, int delta);

/// N x N Toeplitz matrix with entry (p, q) = m_{(q-p)/2} for |q - p| <= 2 delta.
class ToeplitzBlock {
 public:
  /// DimensionError if dim < 4 delta + 1.
  ToeplitzBlock(ShiftVector generator, std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t half_width() const { return 2 * static_cast<std::size_t>(generator_.delta()); }
  const ShiftVector& generator() const { return generator_; }

  cplx operator()(std::size_t p, std::size_t q) const;
  BandedMatrix to_banded() const;
  ComplexMatrix to_dense() const;

 private:
  ShiftVector generator_;
  std::size_t dim_;
};

ToeplitzBlock toeplitz_block(const ShiftVector& x, std::size_t dim);

/// Row-major enumeration of the entries (i, j) with |i - j| <= half_width.
class BandCoordinates {
 public:
  BandCoordinates(std::size_t dim, std::size_t half_width);

  std::size_t dim() const { return dim_; }
  std::size_t half_width() const { return half_width_; }
  std::size_t size() const { return size_; }

  /// Throws DimensionError outside the band.
  std::size_t index(std::size_t i, std::size_t j) const;
  std::pair<std::size_t, std::size_t> entry(std::size_t c) const;

  ComplexVector flatten(const BandedMatrix& a) const;
  ComplexVector flatten(const BandedHermitian& a) const;
  BandedMatrix unflatten(const ComplexVector& x) const;

 private:
  std::size_t dim_;
  std::size_t half_width_;
  std::size_t size_ = 0;
  std::vector<std::size_t> row_start_;
};

/// Number of in-band entries of an N x N matrix with half-width w:
/// N (2w + 1) - w (w + 1), for N > w.
std::size_t band_entry_count(std::size_t dim, std::size_t half_width);

/// The stacked blocks G = (X_{l_1}; ...; X_{l_K}) and the linear map
/// F -> diag(G F G*) / 4 on the band of F.
///
/// diag(X F X*)_p involves F_{qr} for q, r in the 2 delta band of row p, so
/// the observed part of F has half-width 4 delta.
class LiftedSystem {
 public:
  explicit LiftedSystem(std::vector<ToeplitzBlock> blocks);

  std::size_t num_frequencies() const { return dim_; }
  std::size_t num_shifts() const { return blocks_.size(); }
  int delta() const { return delta_; }
  std::size_t band_half_width() const { return 4 * static_cast<std::size_t>(delta_); }
  const BandCoordinates& coordinates() const { return coords_; }
  const std::vector<ToeplitzBlock>& blocks() const { return blocks_; }

  std::size_t rows() const { return dim_ * blocks_.size(); }
  std::size_t cols() const { return coords_.size(); }

  /// Complex values held by the structured form (one shift vector per block).
  std::size_t structured_storage() const;

  /// Dense M, column c being the image of the basis element E_{ij} for
  /// (i, j) = coordinates().entry(c).
  ComplexMatrix materialize() const;

 private:
  std::vector<ToeplitzBlock> blocks_;
  std::size_t dim_ = 0;
  int delta_ = 0;
  BandCoordinates coords_;
};

/// GridError unless the frequencies step by 1/2.
LiftedSystem assemble_system(const Window& g, const MeasurementGrid& grid);
LiftedSystem assemble_system(std::span<const ShiftVector> shift_vectors, std::size_t dim);

/// diag(G F G*) / 4 in measurement order, computed block by block from the
/// banded factors. `multiplications`, if given, receives the number of
/// complex products performed. DimensionError unless F has dimension N and
/// half-width band_half_width().
Eigen::VectorXd forward_lifted(const LiftedSystem& sys, const BandedHermitian& f,
                               std::size_t* multiplications = nullptr);

/// Same map for a general (not necessarily Hermitian) banded F.
ComplexVector apply_lifted(const LiftedSystem& sys, const BandedMatrix& f);

/// Writes M: one JSON header line {N, K, delta, band_half_width, rows, cols,
/// ordering: "row-major-band", layout: "column-major", scalar:
/// "complex128-le"} followed by the raw (re, im) pairs column by column.
void write_system_dump(std::ostream& out, const LiftedSystem& sys, const ComplexMatrix& m);

}  // namespace liftphase
