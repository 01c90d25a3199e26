#pragma once

// Brute-force reference implementations used to check the library. None of
// these call into the code under test beyond plain data types.

#include "l1ksvd/image.hpp"
#include "l1ksvd/rng.hpp"
#include "l1ksvd/types.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

namespace oracle {

using l1ksvd::Index;
using l1ksvd::Matrix;
using l1ksvd::Vector;

inline double l1_objective(const Vector& y, const Matrix& d, const Vector& x, double lambda) {
  return (y - d * x).lpNorm<1>() + lambda * x.lpNorm<1>();
}

// Minimum of ||y - D x||_1 + lambda ||x||_1 over the grid {lo + i*step}^3
// (K = 3). With `tau` set, the penalty is dropped and the grid is restricted
// to ||x||_1 <= tau. The innermost coordinate is searched by ternary search
// over grid indices, which is exact for a convex function sampled on a grid.
inline double grid_min_3d(const Vector& y, const Matrix& d, double lambda, double lo, double hi, double step,
                          double tau = -1.0) {
  const bool constrained = tau >= 0.0;
  const int n = static_cast<int>(std::lround((hi - lo) / step)) + 1;
  auto coord = [&](int i) { return lo + i * step; };
  double best = std::numeric_limits<double>::infinity();
  Vector x(3);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      x(0) = coord(i);
      x(1) = coord(j);
      int a = 0, b = n - 1;
      if (constrained) {
        const double room = tau - std::abs(x(0)) - std::abs(x(1));
        if (room < -1e-12) continue;
        // Grid indices whose value lies in [-room, room].
        a = static_cast<int>(std::ceil((-room - lo) / step - 1e-9));
        b = static_cast<int>(std::floor((room - lo) / step + 1e-9));
        a = std::max(a, 0);
        b = std::min(b, n - 1);
        if (a > b) continue;
      }
      auto f = [&](int k) {
        x(2) = coord(k);
        return constrained ? (y - d * x).lpNorm<1>() : l1_objective(y, d, x, lambda);
      };
      while (b - a > 2) {
        const int m1 = a + (b - a) / 3;
        const int m2 = b - (b - a) / 3;
        if (f(m1) <= f(m2)) b = m2;
        else a = m1;
      }
      for (int k = a; k <= b; ++k) best = std::min(best, f(k));
    }
  }
  return best;
}

struct SubsetFit {
  std::vector<Index> support;
  double residual = std::numeric_limits<double>::infinity();
};

// Best least-squares fit of y over every 3-atom subset of D.
inline SubsetFit best_three_subset(const Vector& y, const Matrix& d) {
  SubsetFit best;
  const Index k = d.cols();
  for (Index a = 0; a < k; ++a)
    for (Index b = a + 1; b < k; ++b)
      for (Index c = b + 1; c < k; ++c) {
        Matrix sub(d.rows(), 3);
        sub << d.col(a), d.col(b), d.col(c);
        const Vector coef = sub.colPivHouseholderQr().solve(y);
        const double r = (y - sub * coef).norm();
        if (r < best.residual) {
          best.residual = r;
          best.support = {a, b, c};
        }
      }
  return best;
}

inline double naive_kappa(const Matrix& truth, const Matrix& estimate) {
  double sum = 0.0;
  for (Index i = 0; i < truth.cols(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < estimate.cols(); ++j) {
      double dot = 0.0;
      for (Index r = 0; r < truth.rows(); ++r) dot += truth(r, i) * estimate(r, j);
      best = std::min(best, 1.0 - std::abs(dot));
    }
    sum += best;
  }
  return sum / static_cast<double>(truth.cols());
}

inline double naive_adr(const Matrix& truth, const Matrix& estimate) {
  Index hits = 0;
  for (Index i = 0; i < truth.cols(); ++i) {
    bool hit = false;
    for (Index j = 0; j < estimate.cols(); ++j) {
      double dot = 0.0;
      for (Index r = 0; r < truth.rows(); ++r) dot += truth(r, i) * estimate(r, j);
      if (std::abs(dot) > 0.99) hit = true;
    }
    hits += hit ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(truth.cols());
}

// Mean SSIM over all full 11x11 windows, each window weighted by a 2-D
// Gaussian (sigma 1.5) normalized over the window.
inline double naive_ssim(const l1ksvd::GrayImage& a, const l1ksvd::GrayImage& b) {
  constexpr int w = 11;
  constexpr int r = w / 2;
  double weights[w][w];
  double total = 0.0;
  for (int i = 0; i < w; ++i)
    for (int j = 0; j < w; ++j) {
      const double di = i - r, dj = j - r;
      weights[i][j] = std::exp(-(di * di + dj * dj) / (2.0 * 1.5 * 1.5));
      total += weights[i][j];
    }
  for (auto& row : weights)
    for (double& v : row) v /= total;

  const double c1 = (0.01 * 255) * (0.01 * 255);
  const double c2 = (0.03 * 255) * (0.03 * 255);
  double sum = 0.0;
  Index count = 0;
  for (Index y0 = 0; y0 + w <= a.height; ++y0) {
    for (Index x0 = 0; x0 + w <= a.width; ++x0) {
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (int i = 0; i < w; ++i)
        for (int j = 0; j < w; ++j) {
          const double g = weights[i][j];
          const double p = a.at(x0 + j, y0 + i);
          const double q = b.at(x0 + j, y0 + i);
          mx += g * p;
          my += g * q;
          sxx += g * p * p;
          syy += g * q * q;
          sxy += g * p * q;
        }
      const double vx = sxx - mx * mx;
      const double vy = syy - my * my;
      const double cov = sxy - mx * my;
      sum += ((2 * mx * my + c1) * (2 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

inline double naive_psnr(const l1ksvd::GrayImage& a, const l1ksvd::GrayImage& b) {
  double se = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double e = a.pixels[i] - b.pixels[i];
    se += e * e;
  }
  const double mse = se / static_cast<double>(a.pixels.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

inline l1ksvd::GrayImage random_image(l1ksvd::Rng& rng, Index w, Index h) {
  l1ksvd::GrayImage img(w, h);
  for (double& p : img.pixels) p = std::floor(256.0 * rng.uniform());
  return img;
}

// Smooth test image with edges: a few shaded rectangles and a disk.
inline l1ksvd::GrayImage synthetic_scene(Index w, Index h) {
  l1ksvd::GrayImage img(w, h);
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x) {
      double v = 60.0 + 80.0 * static_cast<double>(x) / static_cast<double>(w);
      if (x > w / 5 && x < w / 2 && y > h / 6 && y < h / 2) v = 200.0;
      const double dx = static_cast<double>(x) - 0.7 * static_cast<double>(w);
      const double dy = static_cast<double>(y) - 0.65 * static_cast<double>(h);
      if (dx * dx + dy * dy < 0.04 * static_cast<double>(w * h)) v = 30.0 + 0.5 * static_cast<double>(y % 16);
      if ((x / 8 + y / 8) % 2 == 0 && y > 3 * h / 4) v += 40.0;
      img.at(x, y) = v;
    }
  return img;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace oracle
