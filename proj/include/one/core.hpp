#ifndef ONE_CORE_HPP
#define ONE_CORE_HPP

// Outlier-aware joint factorization of link structure and node attributes.
//
//   L = L_str + alpha * L_attr + beta * L_dis
//   L_str  = sum_i log(1/o1_i) sum_j (A_ij - G_i. H_.j)^2
//   L_attr = sum_i log(1/o2_i) sum_d (C_id - U_i. V_.d)^2
//   L_dis  = sum_i log(1/o3_i) sum_k (G_ik - U_i. W_k.)^2        W orthogonal
//
// Each o vector lies on {o : sum o = mu, eps_o <= o_i <= 1}. Every update
// below is the exact minimizer of L in its block with the rest held fixed,
// so the loss never increases across a round.

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "one/errors.hpp"
#include "one/network.hpp"
#include "one/numerics.hpp"

namespace one {

struct HyperParams {
  std::size_t k = 0;                    ///< embedding dimension
  std::optional<double> alpha;          ///< attribute weight; calibrated when unset
  std::optional<double> beta;           ///< disagreement weight; calibrated when unset
  double mu = 1.0;                      ///< sum of every outlier-score vector
  std::size_t iters = 5;                ///< outer rounds
  double eps_o = 1e-8;                  ///< lower bound on outlier scores
  std::array<double, 3> combine_weights{0.25, 0.5, 0.25};
  std::uint64_t seed = 0;
  std::size_t nmf_sweeps = kDefaultNmfSweeps;
  std::optional<double> early_stop;     ///< relative loss change that ends the loop
};

/// Embedding dimension used when none is given: three per ground-truth class.
inline std::size_t default_dimension(std::size_t n_classes) { return 3 * n_classes; }

struct OneModel {
  DenseMatrix g;  ///< N x K structure embedding
  DenseMatrix h;  ///< K x N
  DenseMatrix u;  ///< N x K attribute embedding
  DenseMatrix v;  ///< K x D
  DenseMatrix w;  ///< K x K orthogonal, maps attribute space onto structure space
};

struct OutlierScores {
  std::vector<double> o1;  ///< structure
  std::vector<double> o2;  ///< attributes
  std::vector<double> o3;  ///< disagreement

  static OutlierScores uniform(std::size_t n, double mu) {
    const double v = n ? mu / static_cast<double>(n) : 0.0;
    return {std::vector<double>(n, v), std::vector<double>(n, v), std::vector<double>(n, v)};
  }
};

struct LossWeights {
  double alpha = 1.0;
  double beta = 1.0;
};

struct Diagnostics {
  std::size_t degenerate_coordinates = 0;
  std::vector<std::string> warnings;

  void warn(std::string msg) { warnings.push_back(std::move(msg)); }
};

inline constexpr double kDegenerateDenominator = 1e-12;

/// log(1/o_i) for every node; o_i must lie in (0, 1].
inline std::vector<double> log_weights(std::span<const double> o) {
  std::vector<double> w(o.size());
  for (std::size_t i = 0; i < o.size(); ++i) {
    if (!(o[i] > 0.0) || o[i] > 1.0) throw DomainError("outlier score outside (0, 1]");
    w[i] = -std::log(o[i]);
  }
  return w;
}

namespace detail {

inline double weighted_sum(std::span<const double> weights, std::span<const double> residuals) {
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * residuals[i];
  return s;
}

inline void check_scores(std::span<const double> o, std::size_t n, const char* what) {
  if (o.size() != n) throw DimensionError(std::string(what) + ": score vector length differs from node count");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Losses

/// Per-node squared residual of the disagreement term, sum_k (G_ik - (U W^T)_ik)^2.
inline std::vector<double> disagreement_residuals(const DenseMatrix& g, const DenseMatrix& u, const DenseMatrix& w) {
  if (g.rows() != u.rows() || g.cols() != u.cols() || w.rows() != g.cols() || w.cols() != g.cols())
    throw DimensionError("disagreement: dimensions are not conformal");
  return row_sq_residuals(g, u, w.transposed());
}

template <DataMatrix AdjM>
double loss_structure(const AdjM& a, const DenseMatrix& g, const DenseMatrix& h, std::span<const double> o1) {
  detail::check_scores(o1, a.rows(), "loss_structure");
  const auto w = log_weights(o1);
  return detail::weighted_sum(w, row_sq_residuals(a, g, h));
}

template <DataMatrix AttrM>
double loss_attribute(const AttrM& c, const DenseMatrix& u, const DenseMatrix& v, std::span<const double> o2) {
  detail::check_scores(o2, c.rows(), "loss_attribute");
  const auto w = log_weights(o2);
  return detail::weighted_sum(w, row_sq_residuals(c, u, v));
}

/// A W that is not orthogonal within 1e-6 is reported through diag, not rejected.
inline double loss_disagreement(const DenseMatrix& g, const DenseMatrix& u, const DenseMatrix& w,
                                std::span<const double> o3, Diagnostics* diag = nullptr) {
  detail::check_scores(o3, g.rows(), "loss_disagreement");
  if (diag && orthogonality_error(w) > 1e-6) diag->warn("loss_disagreement: W is not orthogonal");
  const auto weights = log_weights(o3);
  return detail::weighted_sum(weights, disagreement_residuals(g, u, w));
}

struct LossParts {
  double structure = 0.0;
  double attribute = 0.0;
  double disagreement = 0.0;

  double joint(const LossWeights& lw) const { return structure + lw.alpha * attribute + lw.beta * disagreement; }
};

template <DataMatrix AdjM, DataMatrix AttrM>
LossParts loss_parts(const AdjM& a, const AttrM& c, const OneModel& m, const OutlierScores& s) {
  return {loss_structure(a, m.g, m.h, s.o1), loss_attribute(c, m.u, m.v, s.o2),
          loss_disagreement(m.g, m.u, m.w, s.o3)};
}

template <DataMatrix AdjM, DataMatrix AttrM>
double loss_joint(const AdjM& a, const AttrM& c, const OneModel& m, const OutlierScores& s, const LossWeights& lw) {
  return loss_parts(a, c, m, s).joint(lw);
}

inline double loss_joint(const AttributedNetwork& net, const OneModel& m, const OutlierScores& s,
                         const LossWeights& lw) {
  return loss_joint(net.adjacency, net.attributes, m, s, lw);
}

// ---------------------------------------------------------------------------
// Weight calibration

struct Calibration {
  LossWeights weights;
  bool fallback = false;  ///< a component loss was zero, weights set to 1
};

/// alpha = L_str / L_attr and beta = L_str / L_dis, so the three weighted terms
/// start out equal.
inline Calibration calibrate_from_parts(const LossParts& p) {
  if (!(p.attribute > 0.0) || !(p.disagreement > 0.0) || !(p.structure > 0.0)) return {{1.0, 1.0}, true};
  return {{p.structure / p.attribute, p.structure / p.disagreement}, false};
}

template <DataMatrix AdjM, DataMatrix AttrM>
Calibration calibrate_weights(const AdjM& a, const AttrM& c, const OneModel& m, const OutlierScores& s) {
  return calibrate_from_parts(loss_parts(a, c, m, s));
}

inline Calibration calibrate_weights(const AttributedNetwork& net, const OneModel& m, const OutlierScores& s) {
  return calibrate_weights(net.adjacency, net.attributes, m, s);
}

// ---------------------------------------------------------------------------
// Block updates for G, H, U, V
//
// Each sweep visits coordinates in a fixed order and reuses freshly written
// values. The inner sums are expanded through K x K Gram matrices, e.g. for G
//   sum_j (A_ij - sum_{k'!=k} G_ik' H_k'j) H_kj = (A H^T)_ik - sum_{k'!=k} G_ik' (H H^T)_k'k
// which keeps a sweep at O(nnz K + N K^2).

template <DataMatrix AdjM>
DenseMatrix update_G(const AdjM& a, const OneModel& m, const OutlierScores& s, const LossWeights& lw,
                     Diagnostics* diag = nullptr) {
  const std::size_t n = m.g.rows(), k = m.g.cols();
  const auto w1 = log_weights(s.o1);
  const auto w3 = log_weights(s.o3);
  const DenseMatrix aht = detail::times_transposed(a, m.h);
  const DenseMatrix hht = matmul_nt(m.h, m.h);
  const DenseMatrix uwt = matmul_nt(m.u, m.w);
  DenseMatrix g = m.g;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      double fit = aht(i, c);
      for (std::size_t o = 0; o < k; ++o)
        if (o != c) fit -= g(i, o) * hht(o, c);
      const double num = w1[i] * fit + lw.beta * w3[i] * uwt(i, c);
      const double den = w1[i] * hht(c, c) + lw.beta * w3[i];
      if (den < kDegenerateDenominator) {
        if (diag) ++diag->degenerate_coordinates;
        continue;
      }
      g(i, c) = num / den;
    }
  }
  return g;
}

template <DataMatrix AdjM>
DenseMatrix update_H(const AdjM& a, const OneModel& m, const OutlierScores& s, Diagnostics* diag = nullptr) {
  const std::size_t n = m.h.cols(), k = m.h.rows();
  const auto w1 = log_weights(s.o1);
  DenseMatrix gram(k, k);  // G^T diag(w1) G
  DenseMatrix proj(n, k);  // A^T diag(w1) G
  for (std::size_t i = 0; i < m.g.rows(); ++i) {
    auto gi = m.g.row(i);
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t q = 0; q < k; ++q) gram(p, q) += w1[i] * gi[p] * gi[q];
    for_each_in_row(a, i, [&](std::size_t j, double v) {
      auto pj = proj.row(j);
      for (std::size_t c = 0; c < k; ++c) pj[c] += w1[i] * v * gi[c];
    });
  }
  DenseMatrix h = m.h;
  for (std::size_t c = 0; c < k; ++c) {
    const double den = gram(c, c);
    if (den < kDegenerateDenominator) {
      if (diag) diag->degenerate_coordinates += n;
      continue;
    }
    for (std::size_t j = 0; j < n; ++j) {
      double num = proj(j, c);
      for (std::size_t o = 0; o < k; ++o)
        if (o != c) num -= gram(c, o) * h(o, j);
      h(c, j) = num / den;
    }
  }
  return h;
}

template <DataMatrix AttrM>
DenseMatrix update_U(const AttrM& c, const OneModel& m, const OutlierScores& s, const LossWeights& lw,
                     Diagnostics* diag = nullptr) {
  const std::size_t n = m.u.rows(), k = m.u.cols();
  const auto w2 = log_weights(s.o2);
  const auto w3 = log_weights(s.o3);
  const DenseMatrix cvt = detail::times_transposed(c, m.v);
  const DenseMatrix vvt = matmul_nt(m.v, m.v);
  const DenseMatrix gw = matmul(m.g, m.w);
  const DenseMatrix wtw = matmul_tn(m.w, m.w);
  DenseMatrix u = m.u;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t col = 0; col < k; ++col) {
      double attr_fit = cvt(i, col);
      double dis_fit = gw(i, col);
      for (std::size_t o = 0; o < k; ++o) {
        if (o == col) continue;
        attr_fit -= u(i, o) * vvt(o, col);
        dis_fit -= u(i, o) * wtw(o, col);
      }
      const double num = lw.alpha * w2[i] * attr_fit + lw.beta * w3[i] * dis_fit;
      const double den = lw.alpha * w2[i] * vvt(col, col) + lw.beta * w3[i] * wtw(col, col);
      if (den < kDegenerateDenominator) {
        if (diag) ++diag->degenerate_coordinates;
        continue;
      }
      u(i, col) = num / den;
    }
  }
  return u;
}

template <DataMatrix AttrM>
DenseMatrix update_V(const AttrM& c, const OneModel& m, const OutlierScores& s, Diagnostics* diag = nullptr) {
  const std::size_t d = m.v.cols(), k = m.v.rows();
  const auto w2 = log_weights(s.o2);
  DenseMatrix gram(k, k);  // U^T diag(w2) U
  DenseMatrix proj(d, k);  // C^T diag(w2) U
  for (std::size_t i = 0; i < m.u.rows(); ++i) {
    auto ui = m.u.row(i);
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t q = 0; q < k; ++q) gram(p, q) += w2[i] * ui[p] * ui[q];
    for_each_in_row(c, i, [&](std::size_t col, double val) {
      auto pc = proj.row(col);
      for (std::size_t l = 0; l < k; ++l) pc[l] += w2[i] * val * ui[l];
    });
  }
  DenseMatrix v = m.v;
  for (std::size_t row = 0; row < k; ++row) {
    const double den = gram(row, row);
    if (den < kDegenerateDenominator) {
      if (diag) diag->degenerate_coordinates += d;
      continue;
    }
    for (std::size_t col = 0; col < d; ++col) {
      double num = proj(col, row);
      for (std::size_t o = 0; o < k; ++o)
        if (o != row) num -= gram(row, o) * v(o, col);
      v(row, col) = num / den;
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Single-coordinate minimizers, evaluated term by term from the loss without
// the Gram expansion. nullopt when the coordinate is degenerate.

namespace detail {

template <DataMatrix M>
std::vector<double> dense_row(const M& m, std::size_t i) {
  std::vector<double> r(m.cols(), 0.0);
  for_each_in_row(m, i, [&](std::size_t j, double v) { r[j] = v; });
  return r;
}

}  // namespace detail

template <DataMatrix AdjM>
std::optional<double> optimal_g_entry(const AdjM& a, const OneModel& m, const OutlierScores& s, const LossWeights& lw,
                                      std::size_t i, std::size_t k) {
  const double w1 = -std::log(s.o1[i]);
  const double w3 = -std::log(s.o3[i]);
  const auto ai = detail::dense_row(a, i);
  double fit = 0.0, hh = 0.0;
  for (std::size_t j = 0; j < ai.size(); ++j) {
    double rest = ai[j];
    for (std::size_t o = 0; o < m.g.cols(); ++o)
      if (o != k) rest -= m.g(i, o) * m.h(o, j);
    fit += rest * m.h(k, j);
    hh += m.h(k, j) * m.h(k, j);
  }
  double target = 0.0;  // (U W^T)_ik = W_k. . U_i.
  for (std::size_t l = 0; l < m.u.cols(); ++l) target += m.w(k, l) * m.u(i, l);
  const double den = w1 * hh + lw.beta * w3;
  if (den < kDegenerateDenominator) return std::nullopt;
  return (w1 * fit + lw.beta * w3 * target) / den;
}

template <DataMatrix AdjM>
std::optional<double> optimal_h_entry(const AdjM& a, const OneModel& m, const OutlierScores& s, std::size_t k,
                                      std::size_t j) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < m.g.rows(); ++i) {
    const double w1 = -std::log(s.o1[i]);
    double rest = 0.0;
    for_each_in_row(a, i, [&](std::size_t col, double v) {
      if (col == j) rest = v;
    });
    for (std::size_t o = 0; o < m.g.cols(); ++o)
      if (o != k) rest -= m.g(i, o) * m.h(o, j);
    num += w1 * rest * m.g(i, k);
    den += w1 * m.g(i, k) * m.g(i, k);
  }
  if (den < kDegenerateDenominator) return std::nullopt;
  return num / den;
}

template <DataMatrix AttrM>
std::optional<double> optimal_u_entry(const AttrM& c, const OneModel& m, const OutlierScores& s, const LossWeights& lw,
                                      std::size_t i, std::size_t k) {
  const double w2 = -std::log(s.o2[i]);
  const double w3 = -std::log(s.o3[i]);
  const auto ci = detail::dense_row(c, i);
  const std::size_t dim = m.u.cols();
  double attr_num = 0.0, vv = 0.0;
  for (std::size_t d = 0; d < ci.size(); ++d) {
    double rest = ci[d];
    for (std::size_t o = 0; o < dim; ++o)
      if (o != k) rest -= m.u(i, o) * m.v(o, d);
    attr_num += rest * m.v(k, d);
    vv += m.v(k, d) * m.v(k, d);
  }
  // Disagreement residual for output coordinate r: G_ir - sum_l U_il W_rl.
  double dis_num = 0.0, ww = 0.0;
  for (std::size_t r = 0; r < dim; ++r) {
    double rest = m.g(i, r);
    for (std::size_t l = 0; l < dim; ++l)
      if (l != k) rest -= m.u(i, l) * m.w(r, l);
    dis_num += rest * m.w(r, k);
    ww += m.w(r, k) * m.w(r, k);
  }
  const double den = lw.alpha * w2 * vv + lw.beta * w3 * ww;
  if (den < kDegenerateDenominator) return std::nullopt;
  return (lw.alpha * w2 * attr_num + lw.beta * w3 * dis_num) / den;
}

template <DataMatrix AttrM>
std::optional<double> optimal_v_entry(const AttrM& c, const OneModel& m, const OutlierScores& s, std::size_t k,
                                      std::size_t d) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < m.u.rows(); ++i) {
    const double w2 = -std::log(s.o2[i]);
    double rest = 0.0;
    for_each_in_row(c, i, [&](std::size_t col, double v) {
      if (col == d) rest = v;
    });
    for (std::size_t o = 0; o < m.u.cols(); ++o)
      if (o != k) rest -= m.u(i, o) * m.v(o, d);
    num += w2 * rest * m.u(i, k);
    den += w2 * m.u(i, k) * m.u(i, k);
  }
  if (den < kDegenerateDenominator) return std::nullopt;
  return num / den;
}

// ---------------------------------------------------------------------------
// Orthogonal alignment

/// Weighted Procrustes solution: with Gb = sqrt(w3) G and Ub = sqrt(w3) U row-wise,
/// X S Y^T = svd(Gb^T Ub) and W = X Y^T.
inline DenseMatrix update_W(const OneModel& m, const OutlierScores& s) {
  const std::size_t k = m.g.cols();
  const auto w3 = log_weights(s.o3);
  DenseMatrix cross(k, k);
  for (std::size_t i = 0; i < m.g.rows(); ++i) {
    auto gi = m.g.row(i);
    auto ui = m.u.row(i);
    for (std::size_t p = 0; p < k; ++p) {
      const double gp = w3[i] * gi[p];
      for (std::size_t q = 0; q < k; ++q) cross(p, q) += gp * ui[q];
    }
  }
  if (!cross.all_finite()) throw NumericError("update_W: weighted cross product is non-finite");
  const SvdResult svd = svd_small(cross);
  return matmul_nt(svd.x, svd.y);
}

// ---------------------------------------------------------------------------
// Outlier scores

/// Minimizes sum_i r_i log(1/o_i) over {sum o = mu, eps_o <= o_i <= 1}.
/// Without active bounds this is o_i = mu r_i / sum r; nodes whose share falls
/// below eps_o are pinned there and the rest rescaled (and likewise at 1).
inline std::vector<double> scores_from_residuals(std::span<const double> r, double mu, double eps_o,
                                                 Diagnostics* diag = nullptr) {
  const std::size_t n = r.size();
  if (n == 0) return {};
  if (!(eps_o > 0.0) || eps_o > 1.0) throw DomainError("eps_o must lie in (0, 1]");
  if (mu < eps_o * static_cast<double>(n) || mu > static_cast<double>(n))
    throw DomainError("mu must lie in [N * eps_o, N]");
  double total = 0.0;
  for (double v : r) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("residuals must be finite and non-negative");
    total += v;
  }
  if (total < 1e-300) {
    if (diag) diag->warn("all residuals are zero; outlier scores set uniform");
    return std::vector<double>(n, mu / static_cast<double>(n));
  }

  enum class Bound : unsigned char { Free, Lower, Upper };
  std::vector<Bound> state(n, Bound::Free);
  std::vector<double> o(n);
  for (std::size_t pass = 0; pass <= 2 * n + 2; ++pass) {
    double free_mass = 0.0, budget = mu;
    for (std::size_t i = 0; i < n; ++i) {
      if (state[i] == Bound::Free) free_mass += r[i];
      else budget -= state[i] == Bound::Lower ? eps_o : 1.0;
    }
    bool changed = false;
    if (free_mass > 0.0 && budget > 0.0) {
      const double scale = budget / free_mass;
      for (std::size_t i = 0; i < n; ++i) {
        if (state[i] != Bound::Free) continue;
        const double v = r[i] * scale;
        if (v < eps_o) {
          state[i] = Bound::Lower;
          changed = true;
        } else if (v > 1.0) {
          state[i] = Bound::Upper;
          changed = true;
        }
      }
    } else {
      // Remaining budget cannot be split by residual share; spread it evenly.
      std::size_t n_free = 0;
      for (auto st : state) n_free += st == Bound::Free;
      for (std::size_t i = 0; i < n; ++i)
        o[i] = state[i] == Bound::Free ? std::clamp(budget / static_cast<double>(std::max<std::size_t>(n_free, 1)), eps_o, 1.0)
                                       : (state[i] == Bound::Lower ? eps_o : 1.0);
      return o;
    }
    if (!changed) {
      const double scale = budget / free_mass;
      for (std::size_t i = 0; i < n; ++i)
        o[i] = state[i] == Bound::Free ? r[i] * scale : (state[i] == Bound::Lower ? eps_o : 1.0);
      return o;
    }
  }
  throw NumericError("outlier score projection did not settle");
}

template <DataMatrix AdjM>
std::vector<double> update_O1(const AdjM& a, const DenseMatrix& g, const DenseMatrix& h, double mu, double eps_o,
                              Diagnostics* diag = nullptr) {
  return scores_from_residuals(row_sq_residuals(a, g, h), mu, eps_o, diag);
}

template <DataMatrix AttrM>
std::vector<double> update_O2(const AttrM& c, const DenseMatrix& u, const DenseMatrix& v, double mu, double eps_o,
                              Diagnostics* diag = nullptr) {
  return scores_from_residuals(row_sq_residuals(c, u, v), mu, eps_o, diag);
}

inline std::vector<double> update_O3(const DenseMatrix& g, const DenseMatrix& u, const DenseMatrix& w, double mu,
                                     double eps_o, Diagnostics* diag = nullptr) {
  return scores_from_residuals(disagreement_residuals(g, u, w), mu, eps_o, diag);
}

// ---------------------------------------------------------------------------
// Outputs

/// Row i is (G_i. + U_i. W^T) / 2.
inline DenseMatrix final_embedding(const OneModel& m) {
  DenseMatrix e = matmul_nt(m.u, m.w);
  for (std::size_t i = 0; i < e.rows(); ++i)
    for (std::size_t c = 0; c < e.cols(); ++c) e(i, c) = 0.5 * (m.g(i, c) + e(i, c));
  return e;
}

inline void validate_combine_weights(const std::array<double, 3>& w) {
  for (double v : w)
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("combine weights must be non-negative");
  if (std::abs(w[0] + w[1] + w[2] - 1.0) > 1e-9) throw DomainError("combine weights must sum to 1");
}

inline std::vector<double> final_outlier_score(std::span<const double> o1, std::span<const double> o2,
                                               std::span<const double> o3, const std::array<double, 3>& w) {
  validate_combine_weights(w);
  if (o2.size() != o1.size() || o3.size() != o1.size()) throw DimensionError("final_outlier_score: length mismatch");
  std::vector<double> out(o1.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = w[0] * o1[i] + w[1] * o2[i] + w[2] * o3[i];
  return out;
}

inline std::vector<double> final_outlier_score(const OutlierScores& s, const std::array<double, 3>& w) {
  return final_outlier_score(s.o1, s.o2, s.o3, w);
}

// ---------------------------------------------------------------------------
// Driver

struct FitResult {
  OneModel model;
  OutlierScores scores;
  LossWeights weights;
  EmbeddingResult result;
  Diagnostics diagnostics;
};

inline void validate(const HyperParams& hp, std::size_t n, std::size_t d) {
  if (n == 0) throw DimensionError("fit: network has no nodes");
  if (hp.k == 0) throw DimensionError("fit: embedding dimension must be positive");
  if (hp.k > std::min(n, d))
    throw DimensionError("fit: embedding dimension " + std::to_string(hp.k) + " exceeds min(N, D) = " +
                         std::to_string(std::min(n, d)));
  if (hp.alpha && !(*hp.alpha > 0.0)) throw DomainError("fit: alpha must be positive");
  if (hp.beta && !(*hp.beta > 0.0)) throw DomainError("fit: beta must be positive");
  if (!(hp.eps_o > 0.0) || hp.eps_o > 1.0) throw DomainError("fit: eps_o must lie in (0, 1]");
  if (!(hp.mu >= hp.eps_o * static_cast<double>(n)) || hp.mu > static_cast<double>(n))
    throw DomainError("fit: mu must lie in [N * eps_o, N]");
  if (hp.nmf_sweeps == 0) throw DomainError("fit: nmf_sweeps must be positive");
  if (hp.early_stop && !(*hp.early_stop >= 0.0)) throw DomainError("fit: early-stop threshold must be >= 0");
  validate_combine_weights(hp.combine_weights);
}

/// Runs the full alternating minimization on explicit matrices.
template <DataMatrix AdjM, DataMatrix AttrM>
FitResult fit(const AdjM& a, const AttrM& c, const HyperParams& hp) {
  const std::size_t n = a.rows(), d = c.cols();
  if (a.cols() != n || c.rows() != n) throw DimensionError("fit: adjacency and attributes disagree on node count");
  validate(hp, n, d);

  FitResult out;
  Diagnostics& diag = out.diagnostics;
  if (hp.k == std::min(n, d)) diag.warn("embedding dimension equals min(N, D)");

  Rng rng(Rng::derive_seed(hp.seed, "init"));
  NmfFactors structure = nmf_init(a, hp.k, hp.nmf_sweeps, rng);
  NmfFactors attribute = nmf_init(c, hp.k, hp.nmf_sweeps, rng);
  auto check = [](const DenseMatrix& x, const char* step, std::size_t round) {
    if (!x.all_finite())
      throw NumericError(std::string(step) + " produced non-finite values in round " + std::to_string(round));
  };
  auto check_residuals = [](const std::vector<double>& r, const char* view, std::size_t round) {
    for (double v : r)
      if (!std::isfinite(v))
        throw NumericError(std::string(view) + " residuals are non-finite in round " + std::to_string(round));
  };
  // Round 0 is the initialization.
  for (const DenseMatrix* x : {&structure.p, &structure.q}) check(*x, "structure initialization", 0);
  for (const DenseMatrix* x : {&attribute.p, &attribute.q}) check(*x, "attribute initialization", 0);

  OneModel& m = out.model;
  m.g = std::move(structure.p);
  m.h = std::move(structure.q);
  m.u = std::move(attribute.p);
  m.v = std::move(attribute.q);

  OutlierScores& s = out.scores;
  s = OutlierScores::uniform(n, hp.mu);
  m.w = update_W(m, s);

  const LossParts start = loss_parts(a, c, m, s);
  if (!std::isfinite(start.structure) || !std::isfinite(start.attribute) || !std::isfinite(start.disagreement))
    throw NumericError("initial loss is non-finite");
  const Calibration cal = calibrate_from_parts(start);
  if (cal.fallback && (!hp.alpha || !hp.beta)) diag.warn("a component loss is zero at initialization; alpha = beta = 1");
  out.weights = {hp.alpha.value_or(cal.weights.alpha), hp.beta.value_or(cal.weights.beta)};
  const LossWeights& lw = out.weights;

  out.result.initial_loss = start.joint(lw);
  double previous = out.result.initial_loss;
  for (std::size_t round = 1; round <= hp.iters; ++round) {
    m.w = update_W(m, s);
    check(m.w, "update_W", round);
    m.g = update_G(a, m, s, lw, &diag);
    check(m.g, "update_G", round);
    m.h = update_H(a, m, s, &diag);
    check(m.h, "update_H", round);
    m.u = update_U(c, m, s, lw, &diag);
    check(m.u, "update_U", round);
    m.v = update_V(c, m, s, &diag);
    check(m.v, "update_V", round);

    const auto r1 = row_sq_residuals(a, m.g, m.h);
    const auto r2 = row_sq_residuals(c, m.u, m.v);
    const auto r3 = disagreement_residuals(m.g, m.u, m.w);
    check_residuals(r1, "structure", round);
    check_residuals(r2, "attribute", round);
    check_residuals(r3, "disagreement", round);
    s.o1 = scores_from_residuals(r1, hp.mu, hp.eps_o, &diag);
    s.o2 = scores_from_residuals(r2, hp.mu, hp.eps_o, &diag);
    s.o3 = scores_from_residuals(r3, hp.mu, hp.eps_o, &diag);

    const double loss = detail::weighted_sum(log_weights(s.o1), r1) +
                        lw.alpha * detail::weighted_sum(log_weights(s.o2), r2) +
                        lw.beta * detail::weighted_sum(log_weights(s.o3), r3);
    if (!std::isfinite(loss)) throw NumericError("joint loss is non-finite after round " + std::to_string(round));
    out.result.loss_trace.push_back(loss);
    if (hp.early_stop && std::abs(previous - loss) <= *hp.early_stop * std::max(std::abs(previous), 1e-300)) break;
    previous = loss;
  }

  out.result.embedding = final_embedding(m);
  out.result.o1 = s.o1;
  out.result.o2 = s.o2;
  out.result.o3 = s.o3;
  out.result.combined = final_outlier_score(s, hp.combine_weights);
  return out;
}

/// Fits a loaded network. Attributes are handed to the kernels in sparse form.
inline FitResult fit(const AttributedNetwork& net, const HyperParams& hp) {
  FitResult r = fit(net.adjacency, SparseMatrix::from_dense(net.attributes), hp);
  r.result.node_names = net.node_names;
  if (r.result.node_names.size() != net.n_nodes()) {
    r.result.node_names.resize(net.n_nodes());
    for (std::size_t i = 0; i < net.n_nodes(); ++i) r.result.node_names[i] = std::to_string(i);
  }
  return r;
}

}  // namespace one

#endif  // ONE_CORE_HPP
