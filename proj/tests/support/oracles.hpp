#pragma once

// Slow, direct implementations used as references in tests. None of them
// call into the library's numeric code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense floyd_warshall(const Dense& w) {
  const std::size_t n = w.size();
  const double inf = std::numeric_limits<double>::infinity();
  Dense d(n, std::vector<double>(n, inf));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) d[i][j] = 0.0;
      else if (w[i][j] > 0.0) d[i][j] = 1.0 / w[i][j];
    }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

inline double modularity(const Dense& w, const std::vector<int>& m) {
  const std::size_t n = w.size();
  std::vector<double> k(n, 0.0);
  double l = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      k[i] += w[i][j];
      l += w[i][j];
    }
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (m[i] == m[j]) q += w[i][j] - k[i] * k[j] / l;
  return q / l;
}

// Enumerates every set partition (restricted growth strings).
inline double best_modularity(const Dense& w) {
  const std::size_t n = w.size();
  std::vector<int> a(n, 0), mx(n, 0);
  double best = -1.0;
  while (true) {
    best = std::max(best, modularity(w, a));
    std::size_t i = n - 1;
    while (i > 0 && a[i] == mx[i - 1] + 1) --i;
    if (i == 0) break;
    ++a[i];
    mx[i] = std::max(mx[i - 1], a[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      a[j] = 0;
      mx[j] = mx[i];
    }
  }
  return best;
}

inline double transitivity(const Dense& w) {
  const std::size_t n = w.size();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double k = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && w[i][j] != 0.0) k += 1.0;
    den += k * (k - 1.0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t h = 0; h < n; ++h)
        if (i != j && i != h && j != h) num += std::cbrt(w[i][j] * w[i][h] * w[j][h]);
  }
  // num already counts both orders (j, h) and (h, j): that is 2 t_i.
  return den == 0.0 ? 0.0 : num / den;
}

// Stationary vector of the damped walk by a dense linear solve.
inline std::vector<double> pagerank(const Dense& w, double d = 0.85) {
  const std::size_t n = w.size();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);  // column-stochastic
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[j][i];
    for (std::size_t i = 0; i < n; ++i) p(i, j) = s > 0.0 ? w[j][i] / s : 1.0 / n;
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - d * p;
  Eigen::VectorXd b = Eigen::VectorXd::Constant(n, (1.0 - d) / n);
  Eigen::VectorXd x = a.fullPivLu().solve(b);
  x /= x.sum();
  return {x.data(), x.data() + n};
}

struct Eer {
  double eer, threshold;
};

// Tries every candidate threshold and keeps the smallest |FAR - FRR|,
// smallest threshold first.
inline Eer brute_eer(const std::vector<double>& gen, const std::vector<double>& imp) {
  std::vector<double> cand(gen);
  cand.insert(cand.end(), imp.begin(), imp.end());
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  double best_gap = INFINITY;
  Eer out{0.0, 0.0};
  for (double t : cand) {
    double fa = 0.0, fr = 0.0;
    for (double s : imp) fa += s <= t;
    for (double s : gen) fr += s > t;
    fa /= imp.size();
    fr /= gen.size();
    if (std::fabs(fa - fr) < best_gap) {
      best_gap = std::fabs(fa - fr);
      out = {0.5 * (fa + fr), t};
    }
  }
  return out;
}

inline double entropy_rho(const std::vector<double>& counts) {
  double total = std::accumulate(counts.begin(), counts.end(), 0.0), s = 0.0;
  for (double c : counts)
    if (c > 0) s -= (c / total) * std::log(c / total);
  return (std::log(static_cast<double>(counts.size())) - s) / std::log(static_cast<double>(counts.size()));
}

inline double fuzzy_entropy(const std::vector<double>& x, std::size_t m = 2, double rf = 0.2,
                            double n_exp = 2.0) {
  const std::size_t n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  const double r = rf * std::sqrt(var / n);
  auto phi = [&](std::size_t dim) {
    const std::size_t cnt = n - m;
    double total = 0.0;
    for (std::size_t i = 0; i < cnt; ++i) {
      double mi = 0.0;
      for (std::size_t k = 0; k < dim; ++k) mi += x[i + k];
      mi /= dim;
      for (std::size_t j = 0; j < cnt; ++j) {
        if (i == j) continue;
        double mj = 0.0;
        for (std::size_t k = 0; k < dim; ++k) mj += x[j + k];
        mj /= dim;
        double dist = 0.0;
        for (std::size_t k = 0; k < dim; ++k)
          dist = std::max(dist, std::fabs((x[i + k] - mi) - (x[j + k] - mj)));
        total += std::exp(-std::pow(dist / r, n_exp)) / (cnt - 1);
      }
    }
    return total / cnt;
  };
  return std::log(phi(m)) - std::log(phi(m + 1));
}

// Builds an EDF file in memory. Each signal: label, phys min/max, dig
// min/max, digital samples (all records concatenated, spr per record).
struct EdfSignal {
  std::string label;
  double phys_min, phys_max;
  int dig_min, dig_max;
  std::vector<std::int16_t> digital;
};

inline std::string pad(const std::string& s, std::size_t w) {
  std::string out = s.substr(0, w);
  out.resize(w, ' ');
  return out;
}

inline std::string num_field(double v, std::size_t w) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return pad(buf, w);
}

inline std::string edf_bytes(const std::vector<EdfSignal>& sig, std::size_t spr, std::size_t records,
                             double duration = 1.0, long header_bytes_override = -1) {
  const std::size_t ns = sig.size();
  const long header = header_bytes_override >= 0 ? header_bytes_override : static_cast<long>(256 + 256 * ns);
  std::string h = pad("0", 8) + pad("X", 80) + pad("rec", 80) + pad("01.01.01", 8) + pad("00.00.00", 8) +
                  num_field(header, 8) + pad("", 44) + num_field(records, 8) + num_field(duration, 8) +
                  num_field(ns, 4);
  for (auto& s : sig) h += pad(s.label, 16);
  for (std::size_t i = 0; i < ns; ++i) h += pad("", 80);
  for (std::size_t i = 0; i < ns; ++i) h += pad("uV", 8);
  for (auto& s : sig) h += num_field(s.phys_min, 8);
  for (auto& s : sig) h += num_field(s.phys_max, 8);
  for (auto& s : sig) h += num_field(s.dig_min, 8);
  for (auto& s : sig) h += num_field(s.dig_max, 8);
  for (std::size_t i = 0; i < ns; ++i) h += pad("", 80);
  for (std::size_t i = 0; i < ns; ++i) h += num_field(spr, 8);
  for (std::size_t i = 0; i < ns; ++i) h += pad("", 32);
  for (std::size_t r = 0; r < records; ++r)
    for (auto& s : sig)
      for (std::size_t k = 0; k < spr; ++k) {
        const auto v = static_cast<std::uint16_t>(s.digital[r * spr + k]);
        h.push_back(static_cast<char>(v & 0xff));
        h.push_back(static_cast<char>(v >> 8));
      }
  return h;
}

}  // namespace oracle
