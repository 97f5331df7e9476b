#include "modaseg/bias.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace modaseg {

namespace {

// cubic B-spline weights for fractional position f in [0,1)
inline void bspline_weights(double f, double w[4]) {
  double f2 = f * f, f3 = f2 * f;
  w[0] = (1 - 3 * f + 3 * f2 - f3) / 6.0;
  w[1] = (4 - 6 * f2 + 3 * f3) / 6.0;
  w[2] = (1 + 3 * f + 3 * f2 - 3 * f3) / 6.0;
  w[3] = f3 / 6.0;
}

struct AxisBasis {
  std::vector<int> first;      // first contributing control index per voxel
  std::vector<double> w;       // 4 weights per voxel
};

AxisBasis make_axis_basis(int n, int ncp) {
  AxisBasis b;
  b.first.resize(n);
  b.w.resize(4 * static_cast<std::size_t>(n));
  double span = ncp - 3;
  for (int x = 0; x < n; ++x) {
    double u = (n > 1) ? (static_cast<double>(x) / (n - 1)) * span : 0.0;
    int i0 = std::min(static_cast<int>(std::floor(u)), ncp - 4);
    double f = u - i0;
    b.first[x] = i0;
    bspline_weights(f, &b.w[4 * static_cast<std::size_t>(x)]);
  }
  return b;
}

}  // namespace

BiasFieldResult correct_bias_field(const Volume& v, const BiasFieldOptions& opts) {
  if (opts.control_points < 4)
    throw std::invalid_argument("correct_bias_field: need at least 4 control points");
  const auto& s = v.geom.shape;
  const int ncp = opts.control_points;
  const int ncoef = ncp * ncp * ncp;

  float lo = min_value(v), hi = max_value(v);
  double shift = 0.0;
  if (lo <= 0.0f) shift = -static_cast<double>(lo) + 1e-3 * (static_cast<double>(hi) - lo + 1e-6);

  AxisBasis bx = make_axis_basis(s[0], ncp);
  AxisBasis by = make_axis_basis(s[1], ncp);
  AxisBasis bz = make_axis_basis(s[2], ncp);

  // gather samples
  const int stride = std::max(1, opts.sample_stride);
  std::vector<std::size_t> sample_idx;
  std::vector<double> u;  // log intensities
  for (int z = 0; z < s[2]; z += stride)
    for (int y = 0; y < s[1]; y += stride)
      for (int x = 0; x < s[0]; x += stride) {
        std::size_t i = v.index(x, y, z);
        sample_idx.push_back(i);
        u.push_back(std::log(static_cast<double>(v.data[i]) + shift));
      }
  const std::size_t nsamp = sample_idx.size();

  auto basis_row = [&](std::size_t flat, int* idx, double* w) {
    int x = static_cast<int>(flat % s[0]);
    int y = static_cast<int>((flat / s[0]) % s[1]);
    int z = static_cast<int>(flat / (static_cast<std::size_t>(s[0]) * s[1]));
    int k = 0;
    for (int c = 0; c < 4; ++c)
      for (int b = 0; b < 4; ++b)
        for (int a = 0; a < 4; ++a) {
          int cx = bx.first[x] + a, cy = by.first[y] + b, cz = bz.first[z] + c;
          idx[k] = cx + ncp * (cy + ncp * cz);
          w[k] = bx.w[4 * static_cast<std::size_t>(x) + a] * by.w[4 * static_cast<std::size_t>(y) + b] *
                 bz.w[4 * static_cast<std::size_t>(z) + c];
          ++k;
        }
  };

  Eigen::VectorXd coef = Eigen::VectorXd::Zero(ncoef);
  std::vector<double> sw(nsamp, 1.0);  // robust sample weights

  for (int iter = 0; iter < std::max(1, opts.iterations); ++iter) {
    Eigen::MatrixXd ata = Eigen::MatrixXd::Zero(ncoef, ncoef);
    Eigen::VectorXd atb = Eigen::VectorXd::Zero(ncoef);
    int idx[64];
    double w[64];
    for (std::size_t si = 0; si < nsamp; ++si) {
      basis_row(sample_idx[si], idx, w);
      double wt = sw[si];
      for (int a = 0; a < 64; ++a) {
        double wa = wt * w[a];
        atb[idx[a]] += wa * u[si];
        for (int b = 0; b < 64; ++b) ata(idx[a], idx[b]) += wa * w[b];
      }
    }
    ata.diagonal().array() += opts.ridge * (static_cast<double>(nsamp) / ncoef);
    coef = ata.ldlt().solve(atb);

    if (iter + 1 == opts.iterations) break;
    // Huber reweighting so anatomy acts as outliers to the smooth field
    std::vector<double> absr(nsamp);
    std::vector<double> r(nsamp);
    for (std::size_t si = 0; si < nsamp; ++si) {
      basis_row(sample_idx[si], idx, w);
      double fit = 0.0;
      for (int a = 0; a < 64; ++a) fit += w[a] * coef[idx[a]];
      r[si] = u[si] - fit;
      absr[si] = std::abs(r[si]);
    }
    std::vector<double> tmp = absr;
    std::nth_element(tmp.begin(), tmp.begin() + tmp.size() / 2, tmp.end());
    double sigma_r = 1.4826 * tmp[tmp.size() / 2];
    if (sigma_r < 1e-12) break;  // already an exact fit
    const double k = 1.345 * sigma_r;
    for (std::size_t si = 0; si < nsamp; ++si) sw[si] = absr[si] <= k ? 1.0 : k / absr[si];
  }

  // evaluate the fitted log-field everywhere, normalize to geometric mean 1
  Volume field(v.geom);
  double mean_log = 0.0;
  {
    int idx[64];
    double w[64];
    std::vector<double> flog(v.data.size());
    for (std::size_t i = 0; i < v.data.size(); ++i) {
      basis_row(i, idx, w);
      double fit = 0.0;
      for (int a = 0; a < 64; ++a) fit += w[a] * coef[idx[a]];
      flog[i] = fit;
      mean_log += fit;
    }
    mean_log /= static_cast<double>(v.data.size());
    for (std::size_t i = 0; i < v.data.size(); ++i)
      field.data[i] = static_cast<float>(std::exp(flog[i] - mean_log));
  }

  BiasFieldResult res;
  res.field = field;
  res.shift = shift;
  res.corrected = Volume(v.geom);
  for (std::size_t i = 0; i < v.data.size(); ++i) res.corrected.data[i] = v.data[i] / field.data[i];
  return res;
}

}  // namespace modaseg
