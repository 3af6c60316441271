#pragma once

// Linear programs in bounded standard form
//
//   minimize  c^T x   subject to  A x = b,  lower <= x <= upper,
//
// where bounds may be infinite, the linear-program recasts of the three
// restoration energies, and a primal-dual interior-point solver.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "bcr/degrade.hpp"
#include "bcr/functional.hpp"
#include "bcr/grid.hpp"

namespace bcr {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct StandardLp {
  SparseMatrix a_eq;
  Eigen::VectorXd b_eq;
  Eigen::VectorXd cost;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index num_vars() const { return cost.size(); }
  Eigen::Index num_eq() const { return b_eq.size(); }

  void validate() const {
    const auto n = num_vars();
    if (a_eq.cols() != n || a_eq.rows() != num_eq() || lower.size() != n ||
        upper.size() != n)
      throw std::invalid_argument("StandardLp: inconsistent dimensions");
    for (Eigen::Index j = 0; j < n; ++j)
      if (!(lower[j] <= upper[j]) || lower[j] == kInf || upper[j] == -kInf)
        throw std::invalid_argument("StandardLp: lower > upper at variable " +
                                    std::to_string(j));
  }
};

enum class LpStatus { optimal, max_iterations, numerical_failure };

inline const char *to_string(LpStatus s) {
  switch (s) {
  case LpStatus::optimal:
    return "optimal";
  case LpStatus::max_iterations:
    return "max_iterations";
  case LpStatus::numerical_failure:
    return "numerical_failure";
  }
  return "unknown";
}

struct SolverTolerances {
  double eps = 1e-8;
  int max_iterations = 200;
  double regularization = 1e-9; // primal and dual, before scaling retries
  int refinement_steps = 3;
  double step_fraction = 0.9995;
};

struct LpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd y; // equality multipliers
  double objective = 0.0;
  LpStatus status = LpStatus::numerical_failure;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double duality_gap = 0.0;
};

// ---------------------------------------------------------------------------
// Interior-point solver
// ---------------------------------------------------------------------------

namespace detail {

// Factorizes the quasidefinite augmented matrix
//   [ -(D + rho I)   A^T     ]
//   [  A             delta I ]
// with a sparse LDL^T on a fill-reducing ordering computed once.
class AugmentedSystem {
public:
  AugmentedSystem(const SparseMatrix &a) : a_(a), n_(a.cols()), m_(a.rows()) {
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(n_ + m_ + a.nonZeros()));
    for (Eigen::Index j = 0; j < n_; ++j)
      t.emplace_back(j, j, -1.0);
    for (Eigen::Index j = 0; j < a.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(a, j); it; ++it)
        t.emplace_back(n_ + it.row(), j, it.value());
    for (Eigen::Index i = 0; i < m_; ++i)
      t.emplace_back(n_ + i, n_ + i, 1.0);
    k_.resize(n_ + m_, n_ + m_);
    k_.setFromTriplets(t.begin(), t.end());
    k_.makeCompressed();
    diag_.resize(n_ + m_);
    for (Eigen::Index j = 0; j < n_ + m_; ++j) {
      // Column j of the lower triangle starts with its diagonal entry.
      diag_[j] = k_.outerIndexPtr()[j];
    }
    ldlt_.analyzePattern(k_);
  }

  bool factorize(const Eigen::VectorXd &d, double rho, double delta) {
    double *vals = k_.valuePtr();
    for (Eigen::Index j = 0; j < n_; ++j)
      vals[diag_[j]] = -(d[j] + rho);
    for (Eigen::Index i = 0; i < m_; ++i)
      vals[diag_[n_ + i]] = delta;
    d_ = d;
    ldlt_.factorize(k_);
    return ldlt_.info() == Eigen::Success;
  }

  // Solves the unregularized system by refining the regularized solve.
  void solve(const Eigen::VectorXd &r1, const Eigen::VectorXd &r2,
             Eigen::VectorXd &dx, Eigen::VectorXd &dy, int refinement) const {
    Eigen::VectorXd rhs(n_ + m_);
    rhs << r1, r2;
    Eigen::VectorXd sol = ldlt_.solve(rhs);
    double last = residual_norm(rhs, sol);
    for (int k = 0; k < refinement && last > 0.0; ++k) {
      Eigen::VectorXd res = rhs - apply(sol);
      Eigen::VectorXd cand = sol + ldlt_.solve(res);
      const double now = residual_norm(rhs, cand);
      if (!(now < last))
        break;
      sol = std::move(cand);
      last = now;
    }
    dx = sol.head(n_);
    dy = sol.tail(m_);
  }

private:
  Eigen::VectorXd apply(const Eigen::VectorXd &s) const {
    Eigen::VectorXd out(n_ + m_);
    const auto sx = s.head(n_);
    const auto sy = s.tail(m_);
    out.head(n_) = -d_.cwiseProduct(sx) + a_.transpose() * sy;
    out.tail(m_) = a_ * sx;
    return out;
  }

  double residual_norm(const Eigen::VectorXd &rhs, const Eigen::VectorXd &s) const {
    return (rhs - apply(s)).lpNorm<Eigen::Infinity>();
  }

  const SparseMatrix &a_;
  Eigen::Index n_, m_;
  SparseMatrix k_;
  std::vector<Eigen::Index> diag_;
  Eigen::VectorXd d_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

inline double max_step(const Eigen::VectorXd &w, const Eigen::VectorXd &dw,
                       const std::vector<Eigen::Index> &idx) {
  double alpha = 1.0;
  for (auto j : idx)
    if (dw[j] < 0.0)
      alpha = std::min(alpha, -w[j] / dw[j]);
  return alpha;
}

} // namespace detail

/// Mehrotra predictor-corrector interior-point method.
///
/// Lower-bounded variables carry slacks wl = x - l with duals zl, upper
/// bounded ones wu = u - x with duals zu; free variables have neither.
/// Each Newton step solves the reduced augmented system
///   -(Zl/Wl + Zu/Wu) dx + A^T dy = r_dual',   A dx = r_primal
/// with small primal/dual regularization, recovered by iterative refinement.
inline LpSolution solve(const StandardLp &lp, const SolverTolerances &tol = {}) {
  lp.validate();
  const Eigen::Index n = lp.num_vars();
  const Eigen::Index m = lp.num_eq();
  const auto &A = lp.a_eq;
  const auto &b = lp.b_eq;
  const auto &c = lp.cost;

  std::vector<Eigen::Index> lo_idx, up_idx;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::isfinite(lp.lower[j]))
      lo_idx.push_back(j);
    if (std::isfinite(lp.upper[j]))
      up_idx.push_back(j);
  }
  const double num_compl = static_cast<double>(lo_idx.size() + up_idx.size());
  const double bnorm = b.size() ? b.lpNorm<Eigen::Infinity>() : 0.0;
  const double cnorm = c.size() ? c.lpNorm<Eigen::Infinity>() : 0.0;

  // Starting point: bounded variables sit a fixed distance inside their
  // box, free variables at zero, duals at a scale matching the cost.
  const double pscale = std::max(1.0, bnorm);
  const double dscale = std::max(1.0, cnorm);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd wl = Eigen::VectorXd::Zero(n), wu = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd zl = Eigen::VectorXd::Zero(n), zu = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double l = lp.lower[j], u = lp.upper[j];
    const bool hl = std::isfinite(l), hu = std::isfinite(u);
    if (hl && hu) {
      x[j] = 0.5 * (l + u);
      if (u - l < 1e-12)
        throw std::invalid_argument("solve: fixed variables are not supported");
    } else if (hl) {
      x[j] = l + pscale;
    } else if (hu) {
      x[j] = u - pscale;
    }
    if (hl) {
      wl[j] = x[j] - l;
      zl[j] = dscale;
    }
    if (hu) {
      wu[j] = u - x[j];
      zu[j] = dscale;
    }
  }

  detail::AugmentedSystem system(A);
  LpSolution sol;

  auto dual_residual = [&]() {
    Eigen::VectorXd rd = c - A.transpose() * y;
    for (auto j : lo_idx)
      rd[j] -= zl[j];
    for (auto j : up_idx)
      rd[j] += zu[j];
    return rd;
  };
  auto dual_objective = [&]() {
    double d = b.dot(y);
    for (auto j : lo_idx)
      d += lp.lower[j] * zl[j];
    for (auto j : up_idx)
      d -= lp.upper[j] * zu[j];
    return d;
  };
  auto complementarity = [&]() {
    double s = 0.0;
    for (auto j : lo_idx)
      s += wl[j] * zl[j];
    for (auto j : up_idx)
      s += wu[j] * zu[j];
    return s;
  };

  Eigen::VectorXd dx, dy, dzl(n), dzu(n), dwl(n), dwu(n);
  Eigen::VectorXd dx_aff, dy_aff, dzl_aff(n), dzu_aff(n);
  Eigen::VectorXd rcl = Eigen::VectorXd::Zero(n), rcu = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd theta_inv(n);

  sol.status = LpStatus::max_iterations;
  for (int iter = 0;; ++iter) {
    const Eigen::VectorXd rp = b - A * x;
    const Eigen::VectorXd rd = dual_residual();
    const double pobj = c.dot(x);
    const double dobj = dual_objective();
    sol.primal_residual = rp.size() ? rp.lpNorm<Eigen::Infinity>() / (1.0 + bnorm) : 0.0;
    sol.dual_residual = rd.size() ? rd.lpNorm<Eigen::Infinity>() / (1.0 + cnorm) : 0.0;
    sol.duality_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
    sol.iterations = iter;
    if (sol.primal_residual <= tol.eps && sol.dual_residual <= tol.eps &&
        sol.duality_gap <= tol.eps) {
      sol.status = LpStatus::optimal;
      break;
    }
    if (iter >= tol.max_iterations)
      break;

    const double mu = num_compl > 0 ? complementarity() / num_compl : 0.0;

    theta_inv.setZero();
    for (auto j : lo_idx)
      theta_inv[j] += zl[j] / wl[j];
    for (auto j : up_idx)
      theta_inv[j] += zu[j] / wu[j];

    bool factored = false;
    double reg = tol.regularization;
    for (int attempt = 0; attempt < 6 && !factored; ++attempt, reg *= 100.0)
      factored = system.factorize(theta_inv, reg, reg);
    if (!factored) {
      sol.status = LpStatus::numerical_failure;
      break;
    }

    // Direction for complementarity targets rcl, rcu (wl zl -> rcl + wl zl).
    auto direction = [&](Eigen::VectorXd &ox, Eigen::VectorXd &oy,
                         Eigen::VectorXd &ozl, Eigen::VectorXd &ozu) {
      Eigen::VectorXd r1 = rd;
      for (auto j : lo_idx)
        r1[j] -= rcl[j] / wl[j];
      for (auto j : up_idx)
        r1[j] += rcu[j] / wu[j];
      system.solve(r1, rp, ox, oy, tol.refinement_steps);
      ozl.setZero();
      ozu.setZero();
      for (auto j : lo_idx)
        ozl[j] = (rcl[j] - zl[j] * ox[j]) / wl[j];
      for (auto j : up_idx)
        ozu[j] = (rcu[j] + zu[j] * ox[j]) / wu[j];
    };
    auto step_lengths = [&](const Eigen::VectorXd &sx, const Eigen::VectorXd &szl,
                            const Eigen::VectorXd &szu) {
      Eigen::VectorXd neg = -sx;
      const double ap = std::min(detail::max_step(wl, sx, lo_idx),
                                 detail::max_step(wu, neg, up_idx));
      const double ad = std::min(detail::max_step(zl, szl, lo_idx),
                                 detail::max_step(zu, szu, up_idx));
      return std::pair{ap, ad};
    };

    // Predictor.
    for (auto j : lo_idx)
      rcl[j] = -wl[j] * zl[j];
    for (auto j : up_idx)
      rcu[j] = -wu[j] * zu[j];
    direction(dx_aff, dy_aff, dzl_aff, dzu_aff);
    auto [ap_aff, ad_aff] = step_lengths(dx_aff, dzl_aff, dzu_aff);

    double sigma = 0.0;
    if (num_compl > 0) {
      double mu_aff = 0.0;
      for (auto j : lo_idx)
        mu_aff += (wl[j] + ap_aff * dx_aff[j]) * (zl[j] + ad_aff * dzl_aff[j]);
      for (auto j : up_idx)
        mu_aff += (wu[j] - ap_aff * dx_aff[j]) * (zu[j] + ad_aff * dzu_aff[j]);
      mu_aff /= num_compl;
      sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);
    }

    // Corrector.
    for (auto j : lo_idx)
      rcl[j] = sigma * mu - wl[j] * zl[j] - dx_aff[j] * dzl_aff[j];
    for (auto j : up_idx)
      rcu[j] = sigma * mu - wu[j] * zu[j] + dx_aff[j] * dzu_aff[j];
    direction(dx, dy, dzl, dzu);
    auto [ap, ad] = step_lengths(dx, dzl, dzu);
    ap = std::min(1.0, tol.step_fraction * ap);
    ad = std::min(1.0, tol.step_fraction * ad);

    if (!dx.allFinite() || !dy.allFinite()) {
      sol.status = LpStatus::numerical_failure;
      break;
    }

    x += ap * dx;
    for (auto j : lo_idx)
      wl[j] += ap * dx[j];
    for (auto j : up_idx)
      wu[j] -= ap * dx[j];
    y += ad * dy;
    for (auto j : lo_idx)
      zl[j] += ad * dzl[j];
    for (auto j : up_idx)
      zu[j] += ad * dzu[j];
  }

  sol.x = std::move(x);
  sol.y = std::move(y);
  sol.objective = c.dot(sol.x);
  return sol;
}

// ---------------------------------------------------------------------------
// Restoration energies as linear programs
// ---------------------------------------------------------------------------

/// Where the pieces of an image LP live inside its variable vector.
struct LpLayout {
  std::size_t width = 0;
  std::size_t height = 0;
  Eigen::Index image_offset = 0;
  Eigen::Index image_size = 0;
  Eigen::Index residual_rows = 0; // rows of the split residual
  Eigen::Index pos_offset = 0;    // positive parts
  Eigen::Index neg_offset = 0;    // negative parts
};

struct ImageLp {
  StandardLp lp;
  LpLayout layout;
  SparseMatrix m; // stacked operator whose residual is split
  Eigen::VectorXd rhs;

  /// Image slice of a solution; entries with |x| < 1e-9 are reported as 0.
  GridImage image(const Eigen::VectorXd &x, double spacing = 1.0) const {
    std::vector<double> v(static_cast<std::size_t>(layout.image_size));
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double a = x[layout.image_offset + static_cast<Eigen::Index>(i)];
      v[i] = std::abs(a) < 1e-9 ? 0.0 : a;
    }
    return GridImage(layout.width, layout.height, std::move(v), spacing);
  }
};

namespace detail {

inline SparseMatrix vstack(const std::vector<const SparseMatrix *> &blocks) {
  Eigen::Index rows = 0;
  const Eigen::Index cols = blocks.front()->cols();
  std::vector<Triplet> t;
  for (auto *blk : blocks) {
    for (Eigen::Index j = 0; j < blk->outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(*blk, j); it; ++it)
        t.emplace_back(rows + it.row(), it.col(), it.value());
    rows += blk->rows();
  }
  SparseMatrix out(rows, cols);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

// [M, -I, I] with the identity blocks appended after `n` leading columns.
inline SparseMatrix split_matrix(const SparseMatrix &m) {
  const Eigen::Index rows = m.rows(), n = m.cols();
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(m.nonZeros() + 2 * rows));
  for (Eigen::Index j = 0; j < m.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(m, j); it; ++it)
      t.emplace_back(it.row(), it.col(), it.value());
  for (Eigen::Index i = 0; i < rows; ++i) {
    t.emplace_back(i, n + i, -1.0);
    t.emplace_back(i, n + rows + i, 1.0);
  }
  SparseMatrix out(rows, n + 2 * rows);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

inline ImageLp split_l1_lp(SparseMatrix m, Eigen::VectorXd rhs,
                           const Eigen::VectorXd &image_cost, double image_lower,
                           double image_upper, std::size_t width,
                           std::size_t height) {
  const Eigen::Index n = m.cols(), rows = m.rows();
  ImageLp out;
  out.layout = {width, height, 0, n, rows, n, n + rows};
  out.lp.a_eq = split_matrix(m);
  out.lp.b_eq = rhs;
  out.lp.cost = Eigen::VectorXd::Zero(n + 2 * rows);
  out.lp.cost.head(n) = image_cost;
  out.lp.cost.tail(2 * rows).setOnes();
  out.lp.lower = Eigen::VectorXd::Zero(n + 2 * rows);
  out.lp.upper = Eigen::VectorXd::Constant(n + 2 * rows, kInf);
  out.lp.lower.head(n).setConstant(image_lower);
  out.lp.upper.head(n).setConstant(image_upper);
  out.m = std::move(m);
  out.rhs = std::move(rhs);
  return out;
}

} // namespace detail

/// min ||M x - b||_1 with M = [Dx; Dy; lambda_bar K], b = [0; 0; lambda_bar f],
/// recast with M x - s+ + s- = b, s+- >= 0 and cost sum s+ + sum s-.
inline ImageLp build_f3_lp(const GridImage &f, double lambda_bar,
                           const HatKernel &k) {
  if (lambda_bar < 0.0)
    throw std::invalid_argument("build_f3_lp: lambda_bar must be >= 0");
  const auto ops = forward_diff_matrices(f.width(), f.height());
  const SparseMatrix fid =
      lambda_bar * convolution_matrix(k, f.width(), f.height());
  SparseMatrix m = detail::vstack({&ops.dx, &ops.dy, &fid});
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m.rows());
  rhs.tail(static_cast<Eigen::Index>(f.size())) = lambda_bar * as_vector(f);
  return detail::split_l1_lp(std::move(m), std::move(rhs),
                             Eigen::VectorXd::Zero(static_cast<Eigen::Index>(f.size())),
                             -kInf, kInf, f.width(), f.height());
}

inline ImageLp build_f1_lp(const GridImage &f, double lambda_bar) {
  return build_f3_lp(f, lambda_bar, HatKernel(1));
}

/// min ||[Dx; Dy] v||_1 + lambda_bar * sum (|1-f| - |f|) v over v in [0,1].
inline ImageLp build_f2_lp(const GridImage &f, double lambda_bar) {
  if (lambda_bar < 0.0)
    throw std::invalid_argument("build_f2_lp: lambda_bar must be >= 0");
  const auto ops = forward_diff_matrices(f.width(), f.height());
  SparseMatrix m = detail::vstack({&ops.dx, &ops.dy});
  const auto c = f2_cost(f);
  Eigen::VectorXd cost = lambda_bar * Eigen::Map<const Eigen::VectorXd>(
                                          c.data(), static_cast<Eigen::Index>(c.size()));
  return detail::split_l1_lp(std::move(m), Eigen::VectorXd::Zero(ops.dx.rows() + ops.dy.rows()),
                             cost, 0.0, 1.0, f.width(), f.height());
}

// ---------------------------------------------------------------------------
// Plain-text dump
// ---------------------------------------------------------------------------

// Format:
//   n m_eq
//   nnz
//   row col value          (nnz lines, zero-based)
//   b_eq                   (m_eq values on one line)
//   cost                   (n values)
//   lower                  (n values, -inf allowed)
//   upper                  (n values, inf allowed)
inline void write_lp_text(std::ostream &os, const StandardLp &lp) {
  os << std::setprecision(17);
  os << lp.num_vars() << ' ' << lp.num_eq() << '\n' << lp.a_eq.nonZeros() << '\n';
  for (Eigen::Index j = 0; j < lp.a_eq.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(lp.a_eq, j); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
  auto line = [&os](const Eigen::VectorXd &v) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
      os << (i ? " " : "") << v[i];
    os << '\n';
  };
  line(lp.b_eq);
  line(lp.cost);
  line(lp.lower);
  line(lp.upper);
}

inline StandardLp read_lp_text(std::istream &is) {
  auto number = [&is]() {
    std::string tok;
    if (!(is >> tok))
      throw std::runtime_error("read_lp_text: unexpected end of input");
    if (tok == "inf")
      return kInf;
    if (tok == "-inf")
      return -kInf;
    return std::stod(tok);
  };
  Eigen::Index n, m, nnz;
  if (!(is >> n >> m >> nnz) || n < 0 || m < 0 || nnz < 0)
    throw std::runtime_error("read_lp_text: bad header");
  std::vector<Triplet> t;
  for (Eigen::Index k = 0; k < nnz; ++k) {
    Eigen::Index r, col;
    if (!(is >> r >> col) || r < 0 || r >= m || col < 0 || col >= n)
      throw std::runtime_error("read_lp_text: bad triplet");
    t.emplace_back(r, col, number());
  }
  StandardLp lp;
  lp.a_eq.resize(m, n);
  lp.a_eq.setFromTriplets(t.begin(), t.end());
  auto vec = [&](Eigen::Index len) {
    Eigen::VectorXd v(len);
    for (Eigen::Index i = 0; i < len; ++i)
      v[i] = number();
    return v;
  };
  lp.b_eq = vec(m);
  lp.cost = vec(n);
  lp.lower = vec(n);
  lp.upper = vec(n);
  lp.validate();
  return lp;
}

// ---------------------------------------------------------------------------
// Exhaustive binary oracle
// ---------------------------------------------------------------------------

inline constexpr std::size_t kBruteForceMaxPixels = 20;

/// Exact minimizer over all binary images of aniso_tv(u) + lambda_bar *
/// sum |K u - f| (K the identity when no kernel is given). Ties go to the
/// image with fewer ones, then to the lexicographically smallest bit string.
inline BinaryImage brute_force_binary(const GridImage &f, double lambda_bar,
                                      const std::optional<HatKernel> &k = {}) {
  const std::size_t n = f.size();
  if (n > kBruteForceMaxPixels)
    throw std::invalid_argument("brute_force_binary: image too large");
  const HatKernel kernel = k.value_or(HatKernel(1));

  auto bits_of = [n](std::uint32_t mask) {
    std::vector<std::uint8_t> b(n);
    for (std::size_t i = 0; i < n; ++i)
      b[i] = (mask >> i) & 1u;
    return b;
  };
  auto lex_less = [n](std::uint32_t a, std::uint32_t b) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto ba = (a >> i) & 1u, bb = (b >> i) & 1u;
      if (ba != bb)
        return ba < bb;
    }
    return false;
  };

  std::uint32_t best = 0;
  double best_energy = kInf;
  const std::uint32_t total = 1u << n;
  for (std::uint32_t mask = 0; mask < total; ++mask) {
    const auto bits = bits_of(mask);
    GridImage u(f.width(), f.height(), std::vector<double>(bits.begin(), bits.end()));
    const double e = f3_value(u, f, lambda_bar, kernel);
    const double tie = 1e-12 * std::max(1.0, std::abs(e));
    bool better = e < best_energy - tie;
    if (!better && std::abs(e - best_energy) <= tie) {
      const int ones = std::popcount(mask), best_ones = std::popcount(best);
      better = ones < best_ones || (ones == best_ones && lex_less(mask, best));
    }
    if (better) {
      best = mask;
      best_energy = e;
    }
  }
  return BinaryImage(f.width(), f.height(), bits_of(best));
}

} // namespace bcr
