#pragma once

// Reference computations written independently of the library: plain loops,
// textbook formulas, and an exact moment recursion for the Euclidean
// least-squares iteration.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

inline double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double pnorm(const Vec& a, double p) {
  double s = 0;
  for (double v : a) s += std::pow(std::abs(v), p);
  return std::pow(s, 1.0 / p);
}

/// 1/2 ||w||_p^2
inline double half_sq(const Vec& w, double p) {
  const double n = pnorm(w, p);
  return 0.5 * n * n;
}

/// Gradient of 1/2||.||_p^2 by central differences.
inline Vec fd_grad(const Vec& w, double p, double h = 1e-6) {
  Vec g(w.size());
  for (size_t i = 0; i < w.size(); ++i) {
    Vec a = w, b = w;
    a[i] += h;
    b[i] -= h;
    g[i] = (half_sq(a, p) - half_sq(b, p)) / (2 * h);
  }
  return g;
}

/// Hand-rolled generator for property tests; independent of the library RNG.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  Vec vec(size_t d, double lo, double hi) {
    Vec v(d);
    for (double& x : v) x = uniform(lo, hi);
    return v;
  }
  /// Entries in [-1, 1] scaled by 10^s, s uniform in [lo_exp, hi_exp].
  Vec scaled(size_t d, double lo_exp, double hi_exp) {
    Vec v = vec(d, -1, 1);
    const double s = std::pow(10.0, uniform(lo_exp, hi_exp));
    for (double& x : v) x *= s;
    return v;
  }

 private:
  std::mt19937_64 eng_;
};

struct Atom {
  Vec x;
  double y;
  double p;
};

/// Exact E[1/2 ||w_t - w*||^2] for w_{t+1} = w_t - eta_t (<w_t, x> - y) x, with
/// labels y = <w*, x> + e and E[e | x] = 0.
///
/// The error e_t = w_t - w* satisfies e_{t+1} = (I - eta x x^T) e_t - eta e x, so
/// M_t = E[e_t e_t^T] obeys M_{t+1} = E[A M_t A] + eta^2 E[e^2 x x^T].
template <class Eta>
std::vector<double> kaczmarz_expected_distance(const std::vector<Atom>& atoms, const Vec& w_star, const Vec& w1,
                                               Eta eta, std::uint64_t T) {
  const size_t d = w1.size();
  Mat m(d, Vec(d));
  for (size_t i = 0; i < d; ++i)
    for (size_t j = 0; j < d; ++j) m[i][j] = (w1[i] - w_star[i]) * (w1[j] - w_star[j]);
  std::vector<double> out;
  for (std::uint64_t t = 1; t <= T; ++t) {
    double tr = 0;
    for (size_t i = 0; i < d; ++i) tr += m[i][i];
    out.push_back(0.5 * tr);
    if (t == T) break;
    const double e = eta(t);
    Mat next(d, Vec(d, 0.0));
    for (const auto& a : atoms) {
      const double noise = a.y - dot(w_star, a.x);
      Mat A(d, Vec(d));
      for (size_t i = 0; i < d; ++i)
        for (size_t j = 0; j < d; ++j) A[i][j] = (i == j ? 1.0 : 0.0) - e * a.x[i] * a.x[j];
      Mat am(d, Vec(d, 0.0));
      for (size_t i = 0; i < d; ++i)
        for (size_t k = 0; k < d; ++k)
          for (size_t j = 0; j < d; ++j) am[i][j] += A[i][k] * m[k][j];
      for (size_t i = 0; i < d; ++i)
        for (size_t j = 0; j < d; ++j) {
          double s = 0;
          for (size_t k = 0; k < d; ++k) s += am[i][k] * A[k][j];
          next[i][j] += a.p * (s + e * e * noise * noise * a.x[i] * a.x[j]);
        }
    }
    m = next;
  }
  return out;
}

/// Rows of the 4x4 Hadamard matrix over 2, both signs.
inline std::vector<Vec> hadamard_rows() {
  const double h[4][4] = {{1, 1, 1, 1}, {1, -1, 1, -1}, {1, 1, -1, -1}, {1, -1, -1, 1}};
  std::vector<Vec> out;
  for (auto& r : h)
    for (double s : {1.0, -1.0}) out.push_back({s * r[0] / 2, s * r[1] / 2, s * r[2] / 2, s * r[3] / 2});
  return out;
}

inline std::vector<Atom> hadamard_atoms(const Vec& w_star, double noise) {
  std::vector<Atom> out;
  for (const auto& x : hadamard_rows()) {
    const double y = dot(w_star, x);
    if (noise > 0) {
      out.push_back({x, y + noise, 1.0 / 16});
      out.push_back({x, y - noise, 1.0 / 16});
    } else {
      out.push_back({x, y, 1.0 / 8});
    }
  }
  return out;
}

}  // namespace oracle
