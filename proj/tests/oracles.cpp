// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace oracle {

Dense from_eigen(const pdbl::Matrix& m) {
  Dense d(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (int i = 0; i < d.rows; ++i)
    for (int j = 0; j < d.cols; ++j) d(i, j) = m(i, j);
  return d;
}

pdbl::Matrix to_eigen(const Dense& d) {
  pdbl::Matrix m(d.rows, d.cols);
  for (int i = 0; i < d.rows; ++i)
    for (int j = 0; j < d.cols; ++j) m(i, j) = d(i, j);
  return m;
}

Dense multiply(const Dense& a, const Dense& b) {
  if (a.cols != b.rows) throw std::logic_error("oracle multiply: shape mismatch");
  Dense out(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < b.cols; ++j) {
      long double s = 0;
      for (int k = 0; k < a.cols; ++k) s += static_cast<long double>(a(i, k)) * b(k, j);
      out(i, j) = static_cast<double>(s);
    }
  return out;
}

Dense transpose(const Dense& a) {
  Dense t(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  return t;
}

Dense identity(int n) {
  Dense d(n, n);
  for (int i = 0; i < n; ++i) d(i, i) = 1.0;
  return d;
}

double max_abs_diff(const Dense& a, const Dense& b) {
  if (a.rows != b.rows || a.cols != b.cols) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
  return m;
}

Dense inverse(const Dense& a) {
  if (a.rows != a.cols) throw std::logic_error("oracle inverse: not square");
  const int n = a.rows;
  Dense m = a;
  Dense inv = identity(n);
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(m(r, col)) > std::abs(m(pivot, col))) pivot = r;
    if (m(pivot, col) == 0.0) throw std::runtime_error("oracle inverse: singular");
    if (pivot != col) {
      for (int j = 0; j < n; ++j) {
        std::swap(m(col, j), m(pivot, j));
        std::swap(inv(col, j), inv(pivot, j));
      }
    }
    const double p = m(col, col);
    for (int j = 0; j < n; ++j) {
      m(col, j) /= p;
      inv(col, j) /= p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = m(r, col);
      if (f == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        m(r, j) -= f * m(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

Dense ridge_normal(const Dense& a, const Dense& y, double lambda) {
  const Dense at = transpose(a);
  Dense g = multiply(at, a);
  for (int i = 0; i < g.rows; ++i) g(i, i) += lambda;
  return multiply(inverse(g), multiply(at, y));
}

Dense ridge_dual(const Dense& a, const Dense& y, double lambda) {
  const int n = a.rows, d = a.cols, c = y.cols;
  using ld = long double;
  std::vector<ld> k(static_cast<std::size_t>(n) * n), rhs(static_cast<std::size_t>(n) * c);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      ld s = 0;
      for (int t = 0; t < d; ++t) s += static_cast<ld>(a(i, t)) * a(j, t);
      k[i * n + j] = s + (i == j ? static_cast<ld>(lambda) : 0);
    }
    for (int j = 0; j < c; ++j) rhs[i * c + j] = y(i, j);
  }
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(k[r * n + col]) > std::fabs(k[pivot * n + col])) pivot = r;
    if (k[pivot * n + col] == 0) throw std::runtime_error("oracle ridge_dual: singular");
    if (pivot != col) {
      for (int j = 0; j < n; ++j) std::swap(k[col * n + j], k[pivot * n + j]);
      for (int j = 0; j < c; ++j) std::swap(rhs[col * c + j], rhs[pivot * c + j]);
    }
    for (int r = col + 1; r < n; ++r) {
      const ld f = k[r * n + col] / k[col * n + col];
      if (f == 0) continue;
      for (int j = col; j < n; ++j) k[r * n + j] -= f * k[col * n + j];
      for (int j = 0; j < c; ++j) rhs[r * c + j] -= f * rhs[col * c + j];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    for (int j = 0; j < c; ++j) {
      ld s = rhs[r * c + j];
      for (int t = r + 1; t < n; ++t) s -= k[r * n + t] * rhs[t * c + j];
      rhs[r * c + j] = s / k[r * n + r];
    }
  }
  Dense w(d, c);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < c; ++j) {
      ld s = 0;
      for (int t = 0; t < n; ++t) s += static_cast<ld>(a(t, i)) * rhs[t * c + j];
      w(i, j) = static_cast<double>(s);
    }
  return w;
}

EigenPairs jacobi(const Dense& sym) {
  const int n = sym.rows;
  Dense a = sym;
  Dense v = identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) > a(j, j); });
  EigenPairs out{std::vector<double>(n), Dense(n, n)};
  for (int k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (int r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

std::vector<double> bilinear(const std::vector<float>& src, int w, int h, int ch, int tw, int th) {
  std::vector<double> out(static_cast<std::size_t>(tw) * th * ch);
  const auto px = [&](int x, int y, int c) { return static_cast<double>(src[(static_cast<std::size_t>(y) * w + x) * ch + c]); };
  for (int oy = 0; oy < th; ++oy) {
    double sy = (oy + 0.5) * h / th - 0.5;
    sy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
    const int y0 = static_cast<int>(std::floor(sy));
    const int y1 = std::min(y0 + 1, h - 1);
    const double fy = sy - y0;
    for (int ox = 0; ox < tw; ++ox) {
      double sx = (ox + 0.5) * w / tw - 0.5;
      sx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
      const int x0 = static_cast<int>(std::floor(sx));
      const int x1 = std::min(x0 + 1, w - 1);
      const double fx = sx - x0;
      for (int c = 0; c < ch; ++c) {
        out[(static_cast<std::size_t>(oy) * tw + ox) * ch + c] =
            (1 - fx) * (1 - fy) * px(x0, y0, c) + fx * (1 - fy) * px(x1, y0, c) + (1 - fx) * fy * px(x0, y1, c) +
            fx * fy * px(x1, y1, c);
      }
    }
  }
  return out;
}

std::vector<double> block_average(const std::vector<float>& src, int w, int h, int ch, int k) {
  const int tw = w / k, th = h / k;
  std::vector<double> out(static_cast<std::size_t>(tw) * th * ch, 0.0);
  for (int oy = 0; oy < th; ++oy)
    for (int ox = 0; ox < tw; ++ox)
      for (int c = 0; c < ch; ++c) {
        double s = 0.0;
        for (int dy = 0; dy < k; ++dy)
          for (int dx = 0; dx < k; ++dx) s += src[(static_cast<std::size_t>(oy * k + dy) * w + ox * k + dx) * ch + c];
        out[(static_cast<std::size_t>(oy) * tw + ox) * ch + c] = s / (k * k);
      }
  return out;
}

std::vector<double> channel_means(const std::vector<float>& chw, int c, int h, int w) {
  std::vector<double> out(c, 0.0);
  for (int k = 0; k < c; ++k) {
    double s = 0.0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) s += chw[(static_cast<std::size_t>(k) * h + y) * w + x];
    out[k] = s / (static_cast<double>(h) * w);
  }
  return out;
}

std::vector<int> coverage(int w, int h, int window, const std::vector<std::pair<int, int>>& positions) {
  std::vector<int> cov(static_cast<std::size_t>(w) * h, 0);
  for (const auto& [x0, y0] : positions)
    for (int y = y0; y < y0 + window && y < h; ++y)
      for (int x = x0; x < x0 + window && x < w; ++x) ++cov[static_cast<std::size_t>(y) * w + x];
  return cov;
}

int plurality(const std::vector<int>& votes, int classes) {
  int best = -1, best_count = -1;
  for (int k = 0; k < classes; ++k) {
    const int n = static_cast<int>(std::count(votes.begin(), votes.end(), k));
    if (n > best_count) best = k, best_count = n;
  }
  return best;
}

Dense random_matrix(int rows, int cols, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Dense d(rows, cols);
  for (auto& x : d.v) x = u(rng);
  return d;
}

}  // namespace oracle
