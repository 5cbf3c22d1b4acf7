#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "sarc/matrix.hpp"
#include "sarc/parallel.hpp"
#include "sarc/segment.hpp"

namespace sarc {

inline constexpr std::size_t kNumUnivariate = 13;
inline constexpr std::size_t kNumVectors = 8;  // six channels plus the two energy vectors
inline constexpr std::size_t kNumPairs = kNumVectors * (kNumVectors - 1) / 2;
inline constexpr std::size_t kNumFeatures = kNumVectors * kNumUnivariate + kNumPairs + 1;
static_assert(kNumFeatures == 133);

inline constexpr std::array<std::string_view, kNumVectors> kVectorNames{"ax", "ay", "az", "wx", "wy", "wz", "ea", "ew"};
inline constexpr std::array<std::string_view, kNumUnivariate> kStatNames{
    "mean", "var", "std", "max", "min", "skew", "kurt", "zeta", "xi", "hist0", "hist1", "hist2", "hist3"};

/// Column names in extraction order: `<vector>.<stat>`, then `corr.<u>.<v>`, then `side`.
inline std::vector<std::string> feature_names() {
  std::vector<std::string> names;
  names.reserve(kNumFeatures);
  for (auto v : kVectorNames)
    for (auto s : kStatNames) names.push_back(std::string(v) + "." + std::string(s));
  for (std::size_t i = 0; i < kNumVectors; ++i)
    for (std::size_t j = i + 1; j < kNumVectors; ++j)
      names.push_back("corr." + std::string(kVectorNames[i]) + "." + std::string(kVectorNames[j]));
  names.push_back("side");
  return names;
}

/// Per-column standardization statistics and the fold they were fitted on.
struct ScalingStats {
  std::vector<double> mean;
  std::vector<double> std;
  int fitted_fold = -1;  // -1: fitted outside any fold
  friend bool operator==(const ScalingStats&, const ScalingStats&) = default;
};

struct FeatureMatrix {
  Matrix values;
  std::vector<std::string> names;
  std::vector<ExerciseClass> labels;
  std::vector<WindowMeta> meta;
  std::vector<WindowSource> sources;
  std::optional<ScalingStats> scaling;

  std::size_t rows() const noexcept { return values.rows(); }
  std::size_t cols() const noexcept { return values.cols(); }
};

// ---------------------------------------------------------------------------
// Per-vector features
// ---------------------------------------------------------------------------

struct EnergyVectors {
  std::vector<double> accel;
  std::vector<double> gyro;
};

/// Squared norms of the accelerometer and gyroscope triplets per sample.
/// `window` is L x 6, row-major.
inline EnergyVectors energy_vectors(std::span<const double> window) {
  require(window.size() % kNumChannels == 0, "window must have 6 channels");
  const std::size_t l = window.size() / kNumChannels;
  EnergyVectors e{std::vector<double>(l), std::vector<double>(l)};
  for (std::size_t t = 0; t < l; ++t) {
    const double* s = window.data() + t * kNumChannels;
    e.accel[t] = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
    e.gyro[t] = s[3] * s[3] + s[4] * s[4] + s[5] * s[5];
  }
  return e;
}

/// Mean squared magnitude of the unnormalized forward DFT.
inline double spectral_energy(std::span<const double> x) {
  require(!x.empty(), "spectral energy of an empty vector");
  thread_local Eigen::FFT<double> fft;
  thread_local std::vector<double> in;
  thread_local std::vector<std::complex<double>> out;
  in.assign(x.begin(), x.end());
  fft.fwd(out, in);
  double s = 0.0;
  for (const auto& c : out) s += std::norm(c);
  return s / static_cast<double>(out.size());
}

/// mean, var, std, max, min, skew, kurt, zeta, xi, hist0..hist3.
/// Population moments and excess kurtosis; skew and kurtosis are 0 for a
/// constant vector. Mean crossings count sign changes of x - mean with zero
/// counted as positive. Histogram bins split [min, max] into 4 equal parts,
/// the last bin closed on the right.
inline std::array<double, kNumUnivariate> univariate_features(std::span<const double> x) {
  const std::size_t l = x.size();
  if (l < 2) throw ValidationError("degenerate window: univariate features need at least 2 samples");
  const auto [mn_it, mx_it] = std::minmax_element(x.begin(), x.end());
  const double mn = *mn_it, mx = *mx_it;
  std::array<double, kNumUnivariate> f{};
  const double n = static_cast<double>(l);
  f[3] = mx;
  f[4] = mn;
  f[8] = spectral_energy(x);
  if (mx == mn) {
    f[0] = mn;
    f[9] = n;
    return f;
  }
  double sum = 0.0;
  for (double v : x) sum += v;
  const double mean = sum / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  f[0] = mean;
  f[1] = m2;
  f[2] = std::sqrt(m2);
  f[5] = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  f[6] = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
  std::size_t crossings = 0;
  bool prev = (x[0] - mean) >= 0.0;
  for (std::size_t t = 1; t < l; ++t) {
    const bool cur = (x[t] - mean) >= 0.0;
    crossings += cur != prev;
    prev = cur;
  }
  f[7] = static_cast<double>(crossings);
  const double range = mx - mn;
  for (double v : x) {
    auto b = static_cast<std::size_t>(std::floor((v - mn) / range * 4.0));
    f[9 + std::min<std::size_t>(b, 3)] += 1.0;
  }
  return f;
}

/// Pearson correlation; 0 when either vector is constant.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "pearson: length mismatch");
  require(x.size() >= 2, "pearson: need at least 2 samples");
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return 0.0;
  const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
  const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
  if (*xmin == *xmax || *ymin == *ymax) return 0.0;
  return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

/// The 133-dimensional feature vector of one window.
inline std::array<double, kNumFeatures> window_features(std::span<const double> window, Side side) {
  require(window.size() % kNumChannels == 0, "window must have 6 channels");
  const std::size_t l = window.size() / kNumChannels;
  std::array<std::vector<double>, kNumVectors> vec;
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    vec[c].resize(l);
    for (std::size_t t = 0; t < l; ++t) vec[c][t] = window[t * kNumChannels + c];
  }
  auto e = energy_vectors(window);
  vec[6] = std::move(e.accel);
  vec[7] = std::move(e.gyro);

  std::array<double, kNumFeatures> out{};
  std::size_t k = 0;
  for (const auto& v : vec) {
    const auto f = univariate_features(v);
    std::copy(f.begin(), f.end(), out.begin() + static_cast<std::ptrdiff_t>(k));
    k += kNumUnivariate;
  }
  for (std::size_t i = 0; i < kNumVectors; ++i)
    for (std::size_t j = i + 1; j < kNumVectors; ++j) out[k++] = pearson(vec[i], vec[j]);
  out[k] = side == Side::RIGHT ? 1.0 : 0.0;
  return out;
}

inline FeatureMatrix extract_features(const WindowTensor& wt) {
  FeatureMatrix fm;
  fm.values = Matrix(wt.size(), kNumFeatures);
  fm.names = feature_names();
  fm.labels = wt.labels;
  fm.meta = wt.meta;
  fm.sources = wt.sources;
  parallel_for(wt.size(), [&](std::size_t i) {
    const auto f = window_features(wt.window(i), wt.side(i));
    std::copy(f.begin(), f.end(), fm.values.row(i).begin());
  });
  return fm;
}

// ---------------------------------------------------------------------------
// Scaling
// ---------------------------------------------------------------------------

/// Column mean and population standard deviation over `rows` only.
inline ScalingStats fit_scaling(const Matrix& x, std::span<const std::size_t> rows, int fold = -1) {
  if (rows.empty()) throw ValidationError("cannot fit scaling on an empty row set");
  const std::size_t d = x.cols();
  ScalingStats s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0), fold};
  const double n = static_cast<double>(rows.size());
  for (auto r : rows) {
    const auto row = x.row(r);
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += row[j];
  }
  for (auto& m : s.mean) m /= n;
  for (auto r : rows) {
    const auto row = x.row(r);
    for (std::size_t j = 0; j < d; ++j) {
      const double dv = row[j] - s.mean[j];
      s.std[j] += dv * dv;
    }
  }
  for (auto& v : s.std) v = std::sqrt(v / n);
  return s;
}

inline ScalingStats fit_scaling(const FeatureMatrix& fm, std::span<const std::size_t> rows, int fold = -1) {
  return fit_scaling(fm.values, rows, fold);
}

/// (x - mean) / std per column; zero-variance columns map to 0.
inline Matrix apply_scaling(const Matrix& x, const ScalingStats& s) {
  require(s.mean.size() == x.cols() && s.std.size() == x.cols(), "scaling stats do not match column count");
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto in = x.row(r);
    auto o = out.row(r);
    for (std::size_t j = 0; j < x.cols(); ++j) o[j] = s.std[j] > 0.0 ? (in[j] - s.mean[j]) / s.std[j] : 0.0;
  }
  return out;
}

inline FeatureMatrix apply_scaling(const FeatureMatrix& fm, const ScalingStats& s) {
  FeatureMatrix out = fm;
  out.values = apply_scaling(fm.values, s);
  out.scaling = s;
  return out;
}

}  // namespace sarc
