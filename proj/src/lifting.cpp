#include "liftphase/lifting.hpp"

#include <algorithm>
#include <ostream>
#include <string>

#include <json.hpp>

#include "liftphase/errors.hpp"

namespace liftphase {

// ---------------------------------------------------------------------------
// ShiftVector

ShiftVector::ShiftVector(double shift, int delta, std::vector<cplx> entries)
    : shift_(shift), delta_(delta), entries_(std::move(entries)) {
  if (delta_ < 1) throw GridError("truncation radius delta must be >= 1");
  if (entries_.size() != 4 * static_cast<std::size_t>(delta_) + 1) {
    throw DimensionError("shift vector needs 4*delta+1 entries");
  }
}

cplx ShiftVector::at_twice(long twice_index) const {
  const long w = 2L * delta_;
  if (twice_index < -w || twice_index > w) return {};
  return entries_[static_cast<std::size_t>(twice_index + w)];
}

ShiftVector shift_vector(const FourierLattice& window_lattice, double shift, int delta) {
  if (delta < 1) throw GridError("truncation radius delta must be >= 1");
  const long w = 2L * delta;
  std::vector<cplx> entries;
  entries.reserve(static_cast<std::size_t>(2 * w + 1));
  for (long m = -w; m <= w; ++m) {
    entries.push_back(std::polar(1.0, -kPi * shift * static_cast<double>(m)) *
                      window_lattice.at(m));
  }
  return ShiftVector(shift, delta, std::move(entries));
}

ShiftVector shift_vector(const Window& g, double shift, int delta) {
  if (delta < 1) throw GridError("truncation radius delta must be >= 1");
  if (!(std::abs(shift) <= 1.0 - g.half_width() + 1e-12)) {
    throw GridError("shift outside the admissible range for this window");
  }
  return shift_vector(FourierLattice::of(g, -2L * delta, 2L * delta), shift, delta);
}

// ---------------------------------------------------------------------------
// ToeplitzBlock

ToeplitzBlock::ToeplitzBlock(ShiftVector generator, std::size_t dim)
    : generator_(std::move(generator)), dim_(dim) {
  if (dim_ < 4 * static_cast<std::size_t>(generator_.delta()) + 1) {
    throw DimensionError("Toeplitz block needs N >= 4*delta+1 (N = " + std::to_string(dim_) +
                         ", delta = " + std::to_string(generator_.delta()) + ")");
  }
}

cplx ToeplitzBlock::operator()(std::size_t p, std::size_t q) const {
  return generator_.at_twice(static_cast<long>(q) - static_cast<long>(p));
}

BandedMatrix ToeplitzBlock::to_banded() const {
  BandedMatrix out(dim_, half_width());
  const long w = static_cast<long>(half_width());
  for (long d = -w; d <= w; ++d) {
    auto diag = out.diagonal(d);
    std::fill(diag.begin(), diag.end(), generator_.at_twice(d));
  }
  return out;
}

ComplexMatrix ToeplitzBlock::to_dense() const { return to_banded().to_dense(); }

ToeplitzBlock toeplitz_block(const ShiftVector& x, std::size_t dim) { return {x, dim}; }

// ---------------------------------------------------------------------------
// BandCoordinates

std::size_t band_entry_count(std::size_t dim, std::size_t half_width) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < dim; ++i) {
    const std::size_t lo = i > half_width ? i - half_width : 0;
    const std::size_t hi = std::min(dim - 1, i + half_width);
    count += hi - lo + 1;
  }
  return count;
}

BandCoordinates::BandCoordinates(std::size_t dim, std::size_t half_width)
    : dim_(dim), half_width_(half_width) {
  row_start_.resize(dim_ + 1, 0);
  for (std::size_t i = 0; i < dim_; ++i) {
    const std::size_t lo = i > half_width_ ? i - half_width_ : 0;
    const std::size_t hi = std::min(dim_ - 1, i + half_width_);
    row_start_[i + 1] = row_start_[i] + (hi - lo + 1);
  }
  size_ = row_start_[dim_];
}

std::size_t BandCoordinates::index(std::size_t i, std::size_t j) const {
  const std::size_t gap = i > j ? i - j : j - i;
  if (i >= dim_ || j >= dim_ || gap > half_width_) {
    throw DimensionError("(" + std::to_string(i) + ", " + std::to_string(j) +
                         ") is outside the band");
  }
  const std::size_t lo = i > half_width_ ? i - half_width_ : 0;
  return row_start_[i] + (j - lo);
}

std::pair<std::size_t, std::size_t> BandCoordinates::entry(std::size_t c) const {
  if (c >= size_) throw DimensionError("band coordinate out of range");
  const auto it = std::upper_bound(row_start_.begin(), row_start_.end(), c);
  const auto i = static_cast<std::size_t>(it - row_start_.begin()) - 1;
  const std::size_t lo = i > half_width_ ? i - half_width_ : 0;
  return {i, lo + (c - row_start_[i])};
}

ComplexVector BandCoordinates::flatten(const BandedMatrix& a) const {
  if (a.dim() != dim_) throw DimensionError("flatten: dimension mismatch");
  ComplexVector x(static_cast<Eigen::Index>(size_));
  for (std::size_t c = 0; c < size_; ++c) {
    const auto [i, j] = entry(c);
    x[static_cast<Eigen::Index>(c)] = a(i, j);
  }
  return x;
}

ComplexVector BandCoordinates::flatten(const BandedHermitian& a) const {
  if (a.dim() != dim_) throw DimensionError("flatten: dimension mismatch");
  ComplexVector x(static_cast<Eigen::Index>(size_));
  for (std::size_t c = 0; c < size_; ++c) {
    const auto [i, j] = entry(c);
    x[static_cast<Eigen::Index>(c)] = a(i, j);
  }
  return x;
}

BandedMatrix BandCoordinates::unflatten(const ComplexVector& x) const {
  if (static_cast<std::size_t>(x.size()) != size_) {
    throw DimensionError("unflatten: expected " + std::to_string(size_) + " coordinates");
  }
  BandedMatrix a(dim_, half_width_);
  for (std::size_t c = 0; c < size_; ++c) {
    const auto [i, j] = entry(c);
    a.at(i, j) = x[static_cast<Eigen::Index>(c)];
  }
  return a;
}

// ---------------------------------------------------------------------------
// LiftedSystem

namespace {

std::size_t first_dim(const std::vector<ToeplitzBlock>& blocks) {
  if (blocks.empty()) throw DimensionError("lifted system needs at least one shift");
  return blocks.front().dim();
}

}  // namespace

LiftedSystem::LiftedSystem(std::vector<ToeplitzBlock> blocks)
    : blocks_(std::move(blocks)),
      dim_(first_dim(blocks_)),
      delta_(blocks_.front().generator().delta()),
      coords_(dim_, 4 * static_cast<std::size_t>(delta_)) {
  for (const auto& b : blocks_) {
    if (b.dim() != dim_ || b.generator().delta() != delta_) {
      throw DimensionError("all Toeplitz blocks must share N and delta");
    }
  }
}

std::size_t LiftedSystem::structured_storage() const {
  std::size_t total = 0;
  for (const auto& b : blocks_) total += b.generator().entries().size();
  return total;
}

ComplexMatrix LiftedSystem::materialize() const {
  const std::size_t n = dim_;
  const long w = 2L * delta_;
  ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(rows()),
                                        static_cast<Eigen::Index>(cols()));
  // Column (q, r): row (k, p) holds X_pq conj(X_pr) / 4, nonzero only for
  // rows p within 2 delta of both q and r.
  parallel_for(cols(), [&](std::size_t c) {
    const auto [q, r] = coords_.entry(c);
    const long lo = std::max(0L, static_cast<long>(std::max(q, r)) - w);
    const long hi = std::min(static_cast<long>(n) - 1, static_cast<long>(std::min(q, r)) + w);
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      const auto& x = blocks_[k];
      for (long p = lo; p <= hi; ++p) {
        const auto pp = static_cast<std::size_t>(p);
        m(static_cast<Eigen::Index>(k * n + pp), static_cast<Eigen::Index>(c)) =
            0.25 * x(pp, q) * std::conj(x(pp, r));
      }
    }
  });
  return m;
}

LiftedSystem assemble_system(std::span<const ShiftVector> shift_vectors, std::size_t dim) {
  std::vector<ToeplitzBlock> blocks;
  blocks.reserve(shift_vectors.size());
  for (const auto& x : shift_vectors) blocks.emplace_back(x, dim);
  return LiftedSystem(std::move(blocks));
}

LiftedSystem assemble_system(const Window& g, const MeasurementGrid& grid) {
  grid.validate(g.half_width());
  if (!grid.is_consecutive_half_steps()) {
    throw GridError("lifted system needs frequencies on consecutive half steps");
  }
  const FourierLattice lattice = FourierLattice::of(g, -2L * grid.delta, 2L * grid.delta);
  std::vector<ShiftVector> vectors;
  vectors.reserve(grid.num_shifts());
  for (double l : grid.shifts) vectors.push_back(shift_vector(lattice, l, grid.delta));
  return assemble_system(vectors, grid.num_frequencies());
}

// ---------------------------------------------------------------------------
// Forward map

namespace {

template <class Band>
void check_operand(const LiftedSystem& sys, const Band& f) {
  if (f.dim() != sys.num_frequencies() || f.half_width() != sys.band_half_width()) {
    throw DimensionError("F must be " + std::to_string(sys.num_frequencies()) +
                         " x " + std::to_string(sys.num_frequencies()) + " with half-width " +
                         std::to_string(sys.band_half_width()));
  }
}

// sum_{q,r} X_pq F_qr conj(X_pr) over the 2 delta window of row p.
template <class Band>
cplx row_quadratic_form(const ToeplitzBlock& x, const Band& f, std::size_t p, long w,
                        std::size_t n, std::size_t& mults) {
  const std::size_t lo = static_cast<long>(p) > w ? p - static_cast<std::size_t>(w) : 0;
  const std::size_t hi = std::min(n - 1, p + static_cast<std::size_t>(w));
  cplx s{};
  for (std::size_t q = lo; q <= hi; ++q) {
    cplx t{};
    for (std::size_t r = lo; r <= hi; ++r) t += f(q, r) * std::conj(x(p, r));
    s += x(p, q) * t;
    mults += (hi - lo + 1) + 1;
  }
  return s;
}

}  // namespace

Eigen::VectorXd forward_lifted(const LiftedSystem& sys, const BandedHermitian& f,
                               std::size_t* multiplications) {
  check_operand(sys, f);
  const std::size_t n = sys.num_frequencies();
  const long w = 2L * sys.delta();
  Eigen::VectorXd b(static_cast<Eigen::Index>(sys.rows()));
  std::vector<std::size_t> mults(sys.num_shifts(), 0);
  parallel_for(sys.num_shifts(), [&](std::size_t k) {
    const auto& x = sys.blocks()[k];
    for (std::size_t p = 0; p < n; ++p) {
      const cplx s = row_quadratic_form(x, f, p, w, n, mults[k]);
      b[static_cast<Eigen::Index>(k * n + p)] = 0.25 * s.real();
    }
  });
  if (multiplications != nullptr) {
    *multiplications = 0;
    for (auto m : mults) *multiplications += m;
  }
  return b;
}

ComplexVector apply_lifted(const LiftedSystem& sys, const BandedMatrix& f) {
  check_operand(sys, f);
  const std::size_t n = sys.num_frequencies();
  const long w = 2L * sys.delta();
  ComplexVector b(static_cast<Eigen::Index>(sys.rows()));
  parallel_for(sys.num_shifts(), [&](std::size_t k) {
    std::size_t unused = 0;
    const auto& x = sys.blocks()[k];
    for (std::size_t p = 0; p < n; ++p) {
      b[static_cast<Eigen::Index>(k * n + p)] = 0.25 * row_quadratic_form(x, f, p, w, n, unused);
    }
  });
  return b;
}

void write_system_dump(std::ostream& out, const LiftedSystem& sys, const ComplexMatrix& m) {
  if (static_cast<std::size_t>(m.rows()) != sys.rows() ||
      static_cast<std::size_t>(m.cols()) != sys.cols()) {
    throw DimensionError("dump: matrix does not match the lifted system");
  }
  const nlohmann::json header = {{"N", sys.num_frequencies()},
                                 {"K", sys.num_shifts()},
                                 {"delta", sys.delta()},
                                 {"band_half_width", sys.band_half_width()},
                                 {"rows", sys.rows()},
                                 {"cols", sys.cols()},
                                 {"ordering", "row-major-band"},
                                 {"layout", "column-major"},
                                 {"scalar", "complex128-le"}};
  out << header.dump() << '\n';
  // Eigen's default storage is column-major with (re, im) adjacent.
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(cplx) * static_cast<std::size_t>(m.size())));
  if (!out) throw IoError("failed writing system dump");
}

}  // namespace liftphase
