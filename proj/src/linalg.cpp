// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "xgbl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "xgbl/error.hpp"

namespace xgbl {

namespace {

using Col = std::vector<double>;

double dot(const Col& a, const Col& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Col& a) { return std::sqrt(dot(a, a)); }

// Orthonormalises `v` against `basis`, trying unit vectors when v collapses.
Col complete_column(const std::vector<Col>& basis, std::size_t dim) {
  for (std::size_t e = 0; e < dim; ++e) {
    Col v(dim, 0.0);
    v[e] = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (const Col& b : basis) {
        const double p = dot(v, b);
        for (std::size_t i = 0; i < dim; ++i) v[i] -= p * b[i];
      }
    const double n = norm(v);
    if (n > 1e-8) {
      for (double& x : v) x /= n;
      return v;
    }
  }
  throw NumericError("svd: could not complete orthonormal basis");
}

Tensor columns_to_tensor(const std::vector<Col>& cols, std::size_t rows) {
  Tensor t({rows, cols.size()});
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < rows; ++i) t.at(i, j) = cols[j][i];
  return t;
}

// One-sided Jacobi on a tall matrix (m >= n) given by columns.
Svd jacobi_tall(std::vector<Col> x, std::size_t m, const SvdOptions& opts) {
  const std::size_t n = x.size();
  std::vector<Col> v(n, Col(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) v[j][j] = 1.0;

  bool rotated = true;
  std::size_t sweep = 0;
  for (; rotated && sweep < opts.max_sweeps; ++sweep) {
    rotated = false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double alpha = dot(x[i], x[i]);
        const double beta = dot(x[j], x[j]);
        const double gamma = dot(x[i], x[j]);
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= opts.tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t k = 0; k < m; ++k) {
          const double xi = x[i][k], xj = x[j][k];
          x[i][k] = c * xi - s * xj;
          x[j][k] = s * xi + c * xj;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vi = v[i][k], vj = v[j][k];
          v[i][k] = c * vi - s * vj;
          v[j][k] = s * vi + c * vj;
        }
      }
    }
  }
  if (rotated) throw NumericError("svd_jacobi: no convergence after " + std::to_string(sweep) + " sweeps");

  std::vector<double> sv(n);
  for (std::size_t j = 0; j < n; ++j) sv[j] = norm(x[j]);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sv[a] > sv[b]; });

  const double smax = n > 0 ? sv[order[0]] : 0.0;
  const double cutoff = smax * 1e-13 * static_cast<double>(std::max<std::size_t>(m, 1));
  Svd out;
  std::vector<Col> ucols, vcols;
  for (std::size_t j : order) {
    out.s.push_back(sv[j]);
    vcols.push_back(v[j]);
    if (sv[j] > cutoff && sv[j] > 0.0) {
      Col u = x[j];
      for (double& e : u) e /= sv[j];
      ucols.push_back(std::move(u));
    } else {
      ucols.push_back(complete_column(ucols, m));
    }
  }
  out.u = columns_to_tensor(ucols, m);
  out.v = columns_to_tensor(vcols, n);
  return out;
}

// Least squares on the selected columns of A via Householder QR; columns whose
// pivot collapses get a zero coefficient.
std::vector<double> lstsq_subset(const Tensor& a, std::span<const double> b, const std::vector<std::size_t>& cols) {
  const std::size_t n = a.rows(), p = cols.size();
  std::vector<Col> q(p, Col(n));
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t i = 0; i < n; ++i) q[j][i] = a.at(i, cols[j]);
  Col rhs(b.begin(), b.end());
  std::vector<double> diag(p, 0.0);
  double scale = 0.0;
  for (const Col& c : q) scale = std::max(scale, norm(c));
  const double tol = 1e-12 * std::max(scale, std::numeric_limits<double>::min());
  std::vector<bool> dead(p, false);
  std::size_t row = 0;
  std::vector<std::size_t> pivot_row(p, 0);
  for (std::size_t j = 0; j < p && row < n; ++j) {
    double nrm = 0.0;
    for (std::size_t i = row; i < n; ++i) nrm += q[j][i] * q[j][i];
    nrm = std::sqrt(nrm);
    if (nrm <= tol) {
      dead[j] = true;
      continue;
    }
    const double alpha = q[j][row] > 0 ? -nrm : nrm;
    Col h(n, 0.0);
    for (std::size_t i = row; i < n; ++i) h[i] = q[j][i];
    h[row] -= alpha;
    const double hh = dot(h, h);
    auto reflect = [&](Col& c) {
      double s = 0.0;
      for (std::size_t i = row; i < n; ++i) s += h[i] * c[i];
      s = 2.0 * s / hh;
      for (std::size_t i = row; i < n; ++i) c[i] -= s * h[i];
    };
    for (std::size_t k = j; k < p; ++k) reflect(q[k]);
    reflect(rhs);
    diag[j] = q[j][row];
    pivot_row[j] = row;
    ++row;
  }
  std::vector<double> coef(p, 0.0);
  for (std::size_t j = p; j-- > 0;) {
    if (dead[j] || diag[j] == 0.0) continue;
    double s = rhs[pivot_row[j]];
    for (std::size_t k = j + 1; k < p; ++k)
      if (!dead[k]) s -= q[k][pivot_row[j]] * coef[k];
    coef[j] = s / diag[j];
  }
  return coef;
}

}  // namespace

Tensor Svd::reconstruct() const {
  const std::size_t m = u.rows(), n = v.rows(), k = s.size();
  Tensor out({m, n}, 0.0);
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t i = 0; i < m; ++i) {
      const double us = u.at(i, p) * s[p];
      if (us == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out.at(i, j) += us * v.at(j, p);
    }
  return out;
}

Svd svd_jacobi(const Tensor& m, const SvdOptions& opts) {
  require(m.rank() == 2 && m.rows() > 0 && m.cols() > 0, "svd: expected a non-empty matrix");
  check_finite(m, "svd input");
  const std::size_t rows = m.rows(), cols = m.cols();
  const bool flip = rows < cols;
  const std::size_t tall_m = flip ? cols : rows, tall_n = flip ? rows : cols;
  std::vector<Col> x(tall_n, Col(tall_m));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      if (flip) {
        x[i][j] = m.at(i, j);
      } else {
        x[j][i] = m.at(i, j);
      }
    }
  Svd s = jacobi_tall(std::move(x), tall_m, opts);
  if (flip) std::swap(s.u, s.v);
  return s;
}

Svd svd_power(const Tensor& m, std::size_t r, Rng& rng, const SvdOptions& opts) {
  require(m.rank() == 2 && m.rows() > 0 && m.cols() > 0, "svd: expected a non-empty matrix");
  const std::size_t rows = m.rows(), cols = m.cols();
  require(r >= 1 && r <= std::min(rows, cols), "svd_power: rank out of range");
  std::vector<Col> us, vs;
  Svd out;
  auto mv = [&](const Col& v) {
    Col w(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) w[i] += m.at(i, j) * v[j];
    return w;
  };
  auto mtv = [&](const Col& u) {
    Col w(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) w[j] += m.at(i, j) * u[i];
    return w;
  };
  auto deflate = [&](Col& v) {
    for (int pass = 0; pass < 2; ++pass)
      for (const Col& b : vs) {
        const double p = dot(v, b);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= p * b[i];
      }
  };
  for (std::size_t k = 0; k < r; ++k) {
    Col v(cols);
    for (double& e : v) e = rng.gaussian();
    deflate(v);
    double nv = norm(v);
    if (nv == 0.0) {
      v = complete_column(vs, cols);
    } else {
      for (double& e : v) e /= nv;
    }
    for (std::size_t it = 0; it < opts.power_max_iter; ++it) {
      Col w = mtv(mv(v));
      deflate(w);
      const double nw = norm(w);
      if (nw == 0.0) break;
      double diff = 0.0;
      for (std::size_t i = 0; i < cols; ++i) {
        const double e = w[i] / nw;
        diff += (e - v[i]) * (e - v[i]);
        v[i] = e;
      }
      if (std::sqrt(diff) < opts.power_tol) break;
    }
    Col u = mv(v);
    const double sigma = norm(u);
    if (sigma > 0.0) {
      for (double& e : u) e /= sigma;
    } else {
      u = complete_column(us, rows);
    }
    out.s.push_back(sigma);
    us.push_back(std::move(u));
    vs.push_back(std::move(v));
  }
  out.u = columns_to_tensor(us, rows);
  out.v = columns_to_tensor(vs, cols);
  return out;
}

Svd svd_topr(const Tensor& m, std::size_t r, const SvdOptions& opts) {
  require(m.rank() == 2, "svd_topr: expected a matrix");
  const std::size_t k = std::min(m.rows(), m.cols());
  require(r >= 1 && r <= k, "svd_topr: r=" + std::to_string(r) + " outside [1, " + std::to_string(k) + "]");
  if (m.numel() > opts.jacobi_max_elems) {
    Rng rng(0x5eedULL);
    return svd_power(m, r, rng, opts);
  }
  Svd full = svd_jacobi(m, opts);
  Svd out;
  out.s.assign(full.s.begin(), full.s.begin() + static_cast<std::ptrdiff_t>(r));
  out.u = Tensor({m.rows(), r});
  out.v = Tensor({m.cols(), r});
  for (std::size_t p = 0; p < r; ++p) {
    for (std::size_t i = 0; i < m.rows(); ++i) out.u.at(i, p) = full.u.at(i, p);
    for (std::size_t j = 0; j < m.cols(); ++j) out.v.at(j, p) = full.v.at(j, p);
  }
  return out;
}

double eckart_young_floor(std::span<const double> s, std::size_t r) {
  double t = 0.0;
  for (std::size_t i = r; i < s.size(); ++i) t += s[i] * s[i];
  return std::sqrt(t);
}

double power_iteration(const std::function<std::vector<double>(const std::vector<double>&)>& matvec, std::size_t dim,
                       Rng& rng, double tol, std::size_t max_iter) {
  require(dim >= 1, "power_iteration: empty operator");
  Col v(dim);
  for (double& e : v) e = rng.gaussian();
  double nv = norm(v);
  for (double& e : v) e /= nv;
  double lambda = 0.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    Col w = matvec(v);
    const double rayleigh = dot(v, w);
    const double nw = norm(w);
    if (nw == 0.0) return 0.0;
    for (std::size_t i = 0; i < dim; ++i) v[i] = w[i] / nw;
    if (it > 0 && std::abs(rayleigh - lambda) <= tol * std::abs(rayleigh)) {
      lambda = rayleigh;
      break;
    }
    lambda = rayleigh;
  }
  return dot(v, matvec(v));
}

EigenRange extremal_eigenvalues(const Tensor& sym, Rng& rng, double tol, std::size_t max_iter) {
  require(sym.rank() == 2 && sym.rows() == sym.cols() && sym.rows() > 0, "extremal_eigenvalues: expected square matrix");
  const std::size_t n = sym.rows();
  auto apply = [&](const Col& v) {
    Col w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) w[i] += sym.at(i, j) * v[j];
    return w;
  };
  EigenRange er;
  er.max = power_iteration(apply, n, rng, tol, max_iter);
  const double shift = er.max;
  auto shifted = [&](const Col& v) {
    Col w = apply(v);
    for (std::size_t i = 0; i < n; ++i) w[i] = shift * v[i] - w[i];
    return w;
  };
  er.min = shift - power_iteration(shifted, n, rng, tol, max_iter);
  return er;
}

Tensor solve_spd(const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && a.rows() == a.cols(), "solve_spd: expected square matrix");
  require(b.rank() == 2 && b.rows() == a.rows(), "solve_spd: right-hand side rows differ");
  const std::size_t n = a.rows(), m = b.cols();
  Tensor l({n, n}, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a.at(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l.at(j, k) * l.at(j, k);
    if (!(d > 0.0)) throw NumericError("solve_spd: matrix is not positive definite");
    l.at(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a.at(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l.at(i, k) * l.at(j, k);
      l.at(i, j) = s / l.at(j, j);
    }
  }
  Tensor x = b;
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = x.at(i, c);
      for (std::size_t k = 0; k < i; ++k) s -= l.at(i, k) * x.at(k, c);
      x.at(i, c) = s / l.at(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = x.at(i, c);
      for (std::size_t k = i + 1; k < n; ++k) s -= l.at(k, i) * x.at(k, c);
      x.at(i, c) = s / l.at(i, i);
    }
  }
  return x;
}

std::vector<double> nnls(const Tensor& a, std::span<const double> b, std::size_t max_iter) {
  require(a.rank() == 2 && a.rows() == b.size(), "nnls: shape mismatch");
  const std::size_t n = a.rows(), p = a.cols();
  if (max_iter == 0) max_iter = 30 * p + 30;
  std::vector<double> x(p, 0.0);
  std::vector<bool> passive(p, false);
  double anorm = 0.0;
  for (double v : a.data()) anorm = std::max(anorm, std::abs(v));
  double bnorm = 0.0;
  for (double v : b) bnorm = std::max(bnorm, std::abs(v));
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() * anorm * std::max(bnorm, 1.0) *
                     static_cast<double>(std::max(n, p));

  auto dual = [&] {
    std::vector<double> resid(b.begin(), b.end());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < p; ++j) resid[i] -= a.at(i, j) * x[j];
    std::vector<double> w(p, 0.0);
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t i = 0; i < n; ++i) w[j] += a.at(i, j) * resid[i];
    return w;
  };

  for (std::size_t outer = 0; outer < max_iter; ++outer) {
    const std::vector<double> w = dual();
    std::size_t t = p;
    double best = tol;
    for (std::size_t j = 0; j < p; ++j)
      if (!passive[j] && w[j] > best) {
        best = w[j];
        t = j;
      }
    if (t == p) break;
    passive[t] = true;
    for (std::size_t inner = 0; inner < max_iter; ++inner) {
      std::vector<std::size_t> cols;
      for (std::size_t j = 0; j < p; ++j)
        if (passive[j]) cols.push_back(j);
      const std::vector<double> coef = lstsq_subset(a, b, cols);
      std::vector<double> z(p, 0.0);
      bool feasible = true;
      for (std::size_t k = 0; k < cols.size(); ++k) {
        z[cols[k]] = coef[k];
        if (coef[k] <= 0.0) feasible = false;
      }
      if (feasible) {
        x = z;
        break;
      }
      double step = 1.0;
      for (std::size_t j : cols)
        if (z[j] <= 0.0) step = std::min(step, x[j] / (x[j] - z[j]));
      for (std::size_t j = 0; j < p; ++j) x[j] += step * (z[j] - x[j]);
      for (std::size_t j : cols)
        if (x[j] <= tol) {
          x[j] = 0.0;
          passive[j] = false;
        }
    }
  }
  return x;
}

double r_squared(std::span<const double> y, std::span<const double> yhat) {
  require(y.size() == yhat.size() && !y.empty(), "r_squared: size mismatch");
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

}  // namespace xgbl
