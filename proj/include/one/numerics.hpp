#ifndef ONE_NUMERICS_HPP
#define ONE_NUMERICS_HPP

// Dense and sparse containers, the seeded generator, the small Jacobi SVD and
// the multiplicative-update factorization used to initialize the optimizer.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "one/errors.hpp"

namespace one {

/// Row-major dense matrix of doubles.
class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
      throw DimensionError("DenseMatrix: data length does not match rows*cols");
  }
  DenseMatrix(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : init) {
      if (r.size() != cols_) throw DimensionError("DenseMatrix: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  DenseMatrix transposed() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse row matrix. Entries are unique, finite and nonzero.
class SparseMatrix {
public:
  SparseMatrix() : row_ptr_(1, 0) {}
  SparseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

  /// Builds from unordered triplets. Duplicate coordinates are rejected.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries) {
    for (const auto& t : entries) {
      if (t.row >= rows || t.col >= cols)
        throw DimensionError("SparseMatrix: entry index out of range");
      if (!std::isfinite(t.value) || t.value == 0.0)
        throw DomainError("SparseMatrix: entries must be finite and nonzero");
    }
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix m(rows, cols);
    m.col_idx_.reserve(entries.size());
    m.values_.reserve(entries.size());
    for (std::size_t e = 0; e < entries.size(); ++e) {
      if (e > 0 && entries[e].row == entries[e - 1].row && entries[e].col == entries[e - 1].col)
        throw DomainError("SparseMatrix: duplicate entry");
      ++m.row_ptr_[entries[e].row + 1];
      m.col_idx_.push_back(entries[e].col);
      m.values_.push_back(entries[e].value);
    }
    std::partial_sum(m.row_ptr_.begin(), m.row_ptr_.end(), m.row_ptr_.begin());
    return m;
  }

  /// Keeps the nonzero entries of a dense matrix.
  static SparseMatrix from_dense(const DenseMatrix& d) {
    SparseMatrix m(d.rows(), d.cols());
    for (std::size_t i = 0; i < d.rows(); ++i) {
      for (std::size_t j = 0; j < d.cols(); ++j) {
        if (d(i, j) != 0.0) {
          m.col_idx_.push_back(j);
          m.values_.push_back(d(i, j));
        }
      }
      m.row_ptr_[i + 1] = m.col_idx_.size();
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  std::span<const std::size_t> row_cols(std::size_t i) const noexcept {
    return {col_idx_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }
  std::span<const double> row_values(std::size_t i) const noexcept {
    return {values_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }

  /// Value at (i, j), zero when absent.
  double at(std::size_t i, std::size_t j) const noexcept {
    auto cols = row_cols(i);
    auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return 0.0;
    return row_values(i)[static_cast<std::size_t>(it - cols.begin())];
  }

  std::vector<Triplet> entries() const {
    std::vector<Triplet> out;
    out.reserve(nnz());
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
        out.push_back({i, col_idx_[p], values_[p]});
    return out;
  }

  DenseMatrix to_dense() const {
    DenseMatrix d(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) d(i, col_idx_[p]) = values_[p];
    return d;
  }

  bool is_symmetric() const {
    if (rows_ != cols_) return false;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
        if (at(col_idx_[p], i) != values_[p]) return false;
    return true;
  }

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

/// Visits the stored entries of row i as f(col, value). Dense rows skip zeros.
template <typename F>
void for_each_in_row(const SparseMatrix& m, std::size_t i, F&& f) {
  auto cols = m.row_cols(i);
  auto vals = m.row_values(i);
  for (std::size_t p = 0; p < cols.size(); ++p) f(cols[p], vals[p]);
}

template <typename F>
void for_each_in_row(const DenseMatrix& m, std::size_t i, F&& f) {
  auto r = m.row(i);
  for (std::size_t j = 0; j < r.size(); ++j)
    if (r[j] != 0.0) f(j, r[j]);
}

/// A data matrix the factorization kernels can read row by row.
template <typename M>
concept DataMatrix = requires(const M& m, std::size_t i) {
  { m.rows() } -> std::convertible_to<std::size_t>;
  { m.cols() } -> std::convertible_to<std::size_t>;
  for_each_in_row(m, i, [](std::size_t, double) {});
};

// ---------------------------------------------------------------------------
// Random numbers

/// Seeded generator with a platform-independent stream. Draws are built
/// directly from mt19937_64 output because the standard distributions are
/// implementation-defined.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw DomainError("Rng::uniform_index: empty range");
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal by Box-Muller.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Index drawn with probability proportional to weights (all >= 0, sum > 0).
  std::size_t weighted_index(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw DomainError("Rng::weighted_index: weights sum to zero");
    double target = uniform() * total;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      last_positive = i;
      if (target < weights[i]) return i;
      target -= weights[i];
    }
    return last_positive;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(i)]);
  }

  /// Seed of a named sub-stream: splitmix64 over the seed mixed with FNV-1a of the name.
  static std::uint64_t derive_seed(std::uint64_t seed, std::string_view name) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : name) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    return splitmix(seed ^ splitmix(h));
  }
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix(seed ^ splitmix(index + 0x9e3779b97f4a7c15ULL));
  }

private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// ---------------------------------------------------------------------------
// Small dense helpers

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t l = 0; l < a.cols(); ++l) {
      const double ail = a(i, l);
      if (ail == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += ail * b(l, j);
    }
  return c;
}

/// a^T * b without forming the transpose.
inline DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("matmul_tn: row counts differ");
  DenseMatrix c(a.cols(), b.cols());
  for (std::size_t l = 0; l < a.rows(); ++l)
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double ali = a(l, i);
      if (ali == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += ali * b(l, j);
    }
  return c;
}

/// a * b^T.
inline DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) throw DimensionError("matmul_nt: column counts differ");
  DenseMatrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (std::size_t l = 0; l < a.cols(); ++l) s += a(i, l) * b(j, l);
      c(i, j) = s;
    }
  return c;
}

/// Largest |(M^T M - I)_ij|.
inline double orthogonality_error(const DenseMatrix& m) {
  const DenseMatrix g = matmul_tn(m, m);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j)
      worst = std::max(worst, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return worst;
}

// ---------------------------------------------------------------------------
// Residuals

/// Squared residual of every row: r_i = sum_j (M_ij - P_i. * Q_.j)^2.
template <DataMatrix M>
std::vector<double> row_sq_residuals(const M& m, const DenseMatrix& p, const DenseMatrix& q) {
  if (p.rows() != m.rows() || q.cols() != m.cols() || p.cols() != q.rows())
    throw DimensionError("row_sq_residuals: dimensions are not conformal");
  const std::size_t k = p.cols();
  std::vector<double> out(m.rows(), 0.0);
  std::vector<double> approx(m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    std::fill(approx.begin(), approx.end(), 0.0);
    auto pi = p.row(i);
    for (std::size_t l = 0; l < k; ++l) {
      const double pil = pi[l];
      if (pil == 0.0) continue;
      auto ql = q.row(l);
      for (std::size_t j = 0; j < approx.size(); ++j) approx[j] += pil * ql[j];
    }
    for_each_in_row(m, i, [&](std::size_t j, double v) { approx[j] -= v; });
    double s = 0.0;
    for (double r : approx) s += r * r;
    out[i] = s;
  }
  return out;
}

/// Sum_ij (M_ij - P_i. * Q_.j)^2.
template <DataMatrix M>
double frobenius_sq_residual(const M& m, const DenseMatrix& p, const DenseMatrix& q) {
  const auto r = row_sq_residuals(m, p, q);
  return std::accumulate(r.begin(), r.end(), 0.0);
}

// ---------------------------------------------------------------------------
// Singular value decomposition of a small square matrix

struct SvdResult {
  DenseMatrix x;              ///< left singular vectors (columns)
  std::vector<double> sigma;  ///< non-increasing, >= 0
  DenseMatrix y;              ///< right singular vectors (columns)
};

/// One-sided (Hestenes) Jacobi SVD of a K x K matrix. Columns of X are signed
/// so that the largest-magnitude component is positive; Y follows X.
inline SvdResult svd_small(const DenseMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("svd_small: matrix must be square");
  if (m.rows() == 0) throw DimensionError("svd_small: empty matrix");
  if (!m.all_finite()) throw DomainError("svd_small: non-finite entry");
  const std::size_t n = m.rows();

  DenseMatrix a = m;  // columns are rotated towards mutual orthogonality
  DenseMatrix v = DenseMatrix::identity(n);
  constexpr double eps = std::numeric_limits<double>::epsilon();

  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          alpha += a(i, p) * a(i, p);
          beta += a(i, q) * a(i, q);
          gamma += a(i, p) * a(i, q);
        }
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < n; ++i) {
          const double ap = a(i, p), aq = a(i, q);
          a(i, p) = c * ap - s * aq;
          a(i, q) = s * ap + c * aq;
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a(i, j) * a(i, j);
    norms[j] = std::sqrt(s);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return norms[l] > norms[r]; });

  SvdResult out{DenseMatrix(n, n), std::vector<double>(n), DenseMatrix(n, n)};
  const double tiny = std::max(norms[order[0]] * eps * static_cast<double>(n), 1e-300);

  auto orthonormalize_against = [&](std::vector<double>& col, std::size_t filled) {
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t c = 0; c < filled; ++c) {
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) d += out.x(i, c) * col[i];
        for (std::size_t i = 0; i < n; ++i) col[i] -= d * out.x(i, c);
      }
    double s = 0.0;
    for (double e : col) s += e * e;
    return std::sqrt(s);
  };

  std::size_t basis_cursor = 0;
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t src = order[c];
    std::vector<double> col(n);
    double norm = 0.0;
    if (norms[src] > tiny) {
      out.sigma[c] = norms[src];
      for (std::size_t i = 0; i < n; ++i) col[i] = a(i, src) / norms[src];
      norm = orthonormalize_against(col, c);
    }
    if (norms[src] <= tiny || norm < 0.5) {
      // Null direction: complete the basis from the standard unit vectors.
      if (norms[src] <= tiny) out.sigma[c] = 0.0;
      for (; basis_cursor < n; ++basis_cursor) {
        std::fill(col.begin(), col.end(), 0.0);
        col[basis_cursor] = 1.0;
        norm = orthonormalize_against(col, c);
        if (norm > 0.5) {
          ++basis_cursor;
          break;
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      out.x(i, c) = col[i] / norm;
      out.y(i, c) = v(i, src);
    }
  }

  for (std::size_t c = 0; c < n; ++c) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(out.x(i, c)) > std::abs(out.x(arg, c))) arg = i;
    if (out.x(arg, c) < 0.0)
      for (std::size_t i = 0; i < n; ++i) {
        out.x(i, c) = -out.x(i, c);
        out.y(i, c) = -out.y(i, c);
      }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Nonnegative factorization

struct NmfFactors {
  DenseMatrix p;                     ///< rows x k
  DenseMatrix q;                     ///< k x cols
  std::vector<double> error_trace;   ///< squared Frobenius error after each sweep (if recorded)
};

inline constexpr std::size_t kDefaultNmfSweeps = 200;

namespace detail {

// M^T P  (cols x k).
template <DataMatrix M>
DenseMatrix transposed_times(const M& m, const DenseMatrix& p) {
  DenseMatrix out(m.cols(), p.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto pi = p.row(i);
    for_each_in_row(m, i, [&](std::size_t j, double v) {
      auto oj = out.row(j);
      for (std::size_t l = 0; l < pi.size(); ++l) oj[l] += v * pi[l];
    });
  }
  return out;
}

// M Q^T  (rows x k) for Q stored k x cols.
template <DataMatrix M>
DenseMatrix times_transposed(const M& m, const DenseMatrix& q) {
  DenseMatrix out(m.rows(), q.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto oi = out.row(i);
    for_each_in_row(m, i, [&](std::size_t j, double v) {
      for (std::size_t l = 0; l < oi.size(); ++l) oi[l] += v * q(l, j);
    });
  }
  return out;
}

// ||M - PQ||^2 = ||M||^2 - 2 <M, PQ> + tr(P^T P Q Q^T), clamped at 0.
template <DataMatrix M>
double nmf_error(const M& m, const DenseMatrix& p, const DenseMatrix& q) {
  double norm_m = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto pi = p.row(i);
    for_each_in_row(m, i, [&](std::size_t j, double v) {
      norm_m += v * v;
      double pq = 0.0;
      for (std::size_t l = 0; l < pi.size(); ++l) pq += pi[l] * q(l, j);
      cross += v * pq;
    });
  }
  const DenseMatrix ptp = matmul_tn(p, p);
  const DenseMatrix qqt = matmul_nt(q, q);
  double tr = 0.0;
  for (std::size_t i = 0; i < ptp.rows(); ++i)
    for (std::size_t j = 0; j < ptp.cols(); ++j) tr += ptp(i, j) * qqt(j, i);
  return std::max(0.0, norm_m - 2.0 * cross + tr);
}

}  // namespace detail

/// Lee-Seung multiplicative updates for M ~ P Q under squared Frobenius error.
/// Factors start uniform in (0.1, 1.0); denominators are floored at 1e-12.
template <DataMatrix M>
NmfFactors nmf_init(const M& m, std::size_t k, std::size_t sweeps, Rng& rng,
                    bool record_trace = false) {
  const std::size_t rows = m.rows(), cols = m.cols();
  if (k == 0 || k > std::min(rows, cols))
    throw DimensionError("nmf_init: rank must satisfy 1 <= k <= min(rows, cols)");
  if (sweeps == 0) throw DomainError("nmf_init: at least one sweep is required");
  for (std::size_t i = 0; i < rows; ++i)
    for_each_in_row(m, i, [](std::size_t, double v) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("nmf_init: matrix has a negative or non-finite entry");
    });

  constexpr double floor = 1e-12;
  NmfFactors f{DenseMatrix(rows, k), DenseMatrix(k, cols), {}};
  for (double& e : f.p.data()) e = rng.uniform(0.1, 1.0);
  for (double& e : f.q.data()) e = rng.uniform(0.1, 1.0);

  for (std::size_t s = 0; s < sweeps; ++s) {
    {
      const DenseMatrix mtp = detail::transposed_times(m, f.p);  // cols x k
      const DenseMatrix ptp = matmul_tn(f.p, f.p);               // k x k
      for (std::size_t l = 0; l < k; ++l)
        for (std::size_t j = 0; j < cols; ++j) {
          double den = 0.0;
          for (std::size_t r = 0; r < k; ++r) den += ptp(l, r) * f.q(r, j);
          f.q(l, j) *= mtp(j, l) / std::max(den, floor);
        }
    }
    {
      const DenseMatrix mqt = detail::times_transposed(m, f.q);  // rows x k
      const DenseMatrix qqt = matmul_nt(f.q, f.q);               // k x k
      for (std::size_t i = 0; i < rows; ++i) {
        auto pi = f.p.row(i);
        std::vector<double> den(k, 0.0);
        for (std::size_t l = 0; l < k; ++l)
          for (std::size_t r = 0; r < k; ++r) den[l] += pi[r] * qqt(r, l);
        for (std::size_t l = 0; l < k; ++l) pi[l] *= mqt(i, l) / std::max(den[l], floor);
      }
    }
    if (record_trace) f.error_trace.push_back(detail::nmf_error(m, f.p, f.q));
  }
  return f;
}

}  // namespace one

#endif  // ONE_NUMERICS_HPP
