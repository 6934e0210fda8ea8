#pragma once

// Independent reference computations used to check the library. They favor
// obviousness over speed and share no code with core/.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

/// Raw-sums Pearson formula in long double.
inline double pearson_direct(const std::vector<double>& xs, const std::vector<double>& ys) {
  const long double n = static_cast<long double>(xs.size());
  long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const long double x = xs[i], y = ys[i];
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const long double num = n * sxy - sx * sy;
  const long double den = std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
  return static_cast<double>(num / den);
}

/// Two-sided permutation p-value for Pearson r: the share of label shuffles
/// whose |r| reaches the observed |r|.
inline double permutation_p(const std::vector<double>& xs, std::vector<double> ys, int resamples, std::uint64_t seed) {
  const double observed = std::abs(pearson_direct(xs, ys));
  std::mt19937_64 gen(seed);
  int hits = 0;
  for (int i = 0; i < resamples; ++i) {
    std::shuffle(ys.begin(), ys.end(), gen);
    if (std::abs(pearson_direct(xs, ys)) >= observed - 1e-12) ++hits;
  }
  return static_cast<double>(hits) / resamples;
}

using Matrix = std::vector<std::vector<double>>;

/// Gauss-Jordan inverse with partial pivoting.
inline Matrix inverse(Matrix a) {
  const std::size_t n = a.size();
  Matrix inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (a[pivot][col] == 0.0) throw std::runtime_error("singular matrix");
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const double d = a[col][col];
    for (std::size_t k = 0; k < n; ++k) {
      a[col][k] /= d;
      inv[col][k] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] -= f * a[col][k];
        inv[r][k] -= f * inv[col][k];
      }
    }
  }
  return inv;
}

/// v^T M v.
inline double quadratic_form(const Matrix& m, const std::vector<double>& v) {
  double s = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = 0; j < v.size(); ++j) s += v[i] * m[i][j] * v[j];
  }
  return s;
}

/// Chi-square CDF by composite Simpson integration of the density after the
/// substitution t = u^2, which removes the singularity at 0 for d = 1.
inline double chi2_cdf_numeric(int d, double x, int intervals = 20000) {
  const double k = d / 2.0;
  const double log_norm = -k * std::log(2.0) - std::lgamma(k);
  auto g = [&](double u) {
    if (u == 0.0) return d == 1 ? 2.0 * std::exp(log_norm) : 0.0;
    return 2.0 * std::exp(log_norm + (d - 1) * std::log(u) - u * u / 2.0);
  };
  const double b = std::sqrt(x);
  const double h = b / intervals;
  double s = g(0.0) + g(b);
  for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * g(i * h);
  return s * h / 3.0;
}

/// Great-circle distance via the atan2 (Vincenty, spherical) form.
inline double great_circle_m(double lat1, double lon1, double lat2, double lon2) {
  constexpr double R = 6371008.8;
  const double d2r = 3.14159265358979323846 / 180.0;
  const double p1 = lat1 * d2r, p2 = lat2 * d2r, dl = (lon2 - lon1) * d2r;
  const double a = std::cos(p2) * std::sin(dl);
  const double b = std::cos(p1) * std::sin(p2) - std::sin(p1) * std::cos(p2) * std::cos(dl);
  const double c = std::sin(p1) * std::sin(p2) + std::cos(p1) * std::cos(p2) * std::cos(dl);
  return R * std::atan2(std::sqrt(a * a + b * b), c);
}

/// Reference splitmix64 (Vigna), written out independently.
struct SplitMix64 {
  std::uint64_t x;
  std::uint64_t next() {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

/// Two-sided binomial interval [lo, hi] on counts holding at least
/// `coverage` of the mass, from the exact pmf.
inline std::pair<int, int> binomial_interval(int n, double p, double coverage) {
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    pmf[static_cast<std::size_t>(k)] = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                                                k * std::log(p) + (n - k) * std::log1p(-p));
  }
  const double tail = (1.0 - coverage) / 2.0;
  int lo = 0;
  double acc = 0;
  while (lo < n && acc + pmf[static_cast<std::size_t>(lo)] <= tail) acc += pmf[static_cast<std::size_t>(lo++)];
  int hi = n;
  acc = 0;
  while (hi > 0 && acc + pmf[static_cast<std::size_t>(hi)] <= tail) acc += pmf[static_cast<std::size_t>(hi--)];
  return {lo, hi};
}

}  // namespace oracle
