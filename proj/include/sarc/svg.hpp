#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sarc/annotate.hpp"
#include "sarc/crnn.hpp"
#include "sarc/eval.hpp"
#include "sarc/select.hpp"

namespace sarc::svg {

/// Fixed two-decimal formatting keeps the byte stream locale- and platform-independent.
inline std::string num(double v) {
  if (!std::isfinite(v)) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

inline std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline constexpr std::array<std::string_view, 8> kPalette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                         "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

class Document {
 public:
  Document(double width, double height) : w_(width), h_(height) {}

  Document& rect(double x, double y, double w, double h, std::string_view fill, std::string_view extra = {}) {
    body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
             "\" fill=\"" + std::string(fill) + "\"" + (extra.empty() ? "" : " " + std::string(extra)) + "/>\n";
    return *this;
  }
  Document& line(double x1, double y1, double x2, double y2, std::string_view stroke = "#000", double width = 1.0) {
    body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
             "\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" + num(width) + "\"/>\n";
    return *this;
  }
  Document& polyline(std::span<const double> xs, std::span<const double> ys, std::string_view stroke, double width = 1.5) {
    body_ += "<polyline fill=\"none\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" + num(width) + "\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) body_ += ' ';
      body_ += num(xs[i]) + "," + num(ys[i]);
    }
    body_ += "\"/>\n";
    return *this;
  }
  Document& circle(double cx, double cy, double r, std::string_view fill) {
    body_ += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) + "\" fill=\"" + std::string(fill) +
             "\"/>\n";
    return *this;
  }
  Document& text(double x, double y, std::string_view s, std::string_view anchor = "start", double size = 12,
                 std::string_view fill = "#000") {
    body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + num(size) + "\" text-anchor=\"" +
             std::string(anchor) + "\" fill=\"" + std::string(fill) + "\">" + escape(s) + "</text>\n";
    return *this;
  }

  std::string str() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w_) + "\" height=\"" + num(h_) +
           "\" viewBox=\"0 0 " + num(w_) + " " + num(h_) + "\" font-family=\"sans-serif\">\n<rect width=\"100%\" " +
           "height=\"100%\" fill=\"#fff\"/>\n" + body_ + "</svg>\n";
  }

 private:
  double w_, h_;
  std::string body_;
};

/// Linear map from a data range onto a pixel range.
struct Scale {
  double d0, d1, p0, p1;
  double operator()(double v) const { return d1 == d0 ? (p0 + p1) / 2 : p0 + (v - d0) / (d1 - d0) * (p1 - p0); }
};

struct Plot {
  double left = 70, top = 40, width = 480, height = 300;
  Scale x{0, 1, 0, 1}, y{0, 1, 0, 1};

  Plot(double x0, double x1, double y0, double y1) {
    if (x0 == x1) x1 = x0 + 1;
    if (y0 == y1) y1 = y0 + 1;
    x = {x0, x1, left, left + width};
    y = {y0, y1, top + height, top};
  }
  double right() const { return left + width; }
  double bottom() const { return top + height; }

  void axes(Document& d, std::string_view xlabel, std::string_view ylabel, std::size_t ticks = 5) const {
    d.rect(left, top, width, height, "none", "stroke=\"#000\"");
    for (std::size_t i = 0; i <= ticks; ++i) {
      const double fx = x.d0 + (x.d1 - x.d0) * static_cast<double>(i) / static_cast<double>(ticks);
      const double fy = y.d0 + (y.d1 - y.d0) * static_cast<double>(i) / static_cast<double>(ticks);
      d.line(x(fx), bottom(), x(fx), bottom() + 4).text(x(fx), bottom() + 16, num(fx), "middle", 10);
      d.line(left - 4, y(fy), left, y(fy)).text(left - 6, y(fy) + 3, num(fy), "end", 10);
    }
    d.text(left + width / 2, bottom() + 34, xlabel, "middle");
    d.text(16, top + height / 2, ylabel, "middle");
  }
};

inline std::pair<double, double> range_of(std::span<const double> v) {
  if (v.empty()) return {0.0, 1.0};
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return {*lo, *hi};
}

/// Row-normalized heat map with counts in each cell.
inline std::string confusion(const Confusion& c, std::string_view title) {
  const double cell = 56, left = 80, top = 60;
  const double size = cell * kNumClasses;
  Document d(left + size + 30, top + size + 60);
  d.text(left + size / 2, 24, title, "middle", 14);
  const auto n = normalize_rows(c);
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    d.text(left - 8, top + cell * static_cast<double>(i) + cell / 2 + 4, kClassNames[i], "end");
    d.text(left + cell * static_cast<double>(i) + cell / 2, top - 8, kClassNames[i], "middle");
    for (std::size_t j = 0; j < kNumClasses; ++j) {
      const int shade = 255 - static_cast<int>(std::lround(n[i][j] * 200.0));
      char fill[16];
      std::snprintf(fill, sizeof fill, "#%02x%02xff", shade, shade);
      const double x = left + cell * static_cast<double>(j), y = top + cell * static_cast<double>(i);
      d.rect(x, y, cell, cell, fill, "stroke=\"#fff\"");
      d.text(x + cell / 2, y + cell / 2 - 2, num(n[i][j]), "middle", 11, n[i][j] > 0.6 ? "#fff" : "#000");
      d.text(x + cell / 2, y + cell / 2 + 12, std::to_string(c[i][j]), "middle", 9, n[i][j] > 0.6 ? "#fff" : "#444");
    }
  }
  d.text(left + size / 2, top + size + 30, "predicted", "middle");
  d.text(14, top + size / 2, "true", "middle");
  return d.str();
}

/// Validation mean with +/- std bars, plus the training mean.
inline std::string sweep_curve(const SweepCurve& s) {
  std::vector<double> xs, va, tr, lo, hi;
  for (const auto& p : s.points) {
    xs.push_back(p.value);
    va.push_back(p.valid_mean);
    tr.push_back(p.train_mean);
    lo.push_back(p.valid_mean - p.valid_std);
    hi.push_back(p.valid_mean + p.valid_std);
  }
  const auto [x0, x1] = range_of(xs);
  std::vector<double> all = lo;
  all.insert(all.end(), hi.begin(), hi.end());
  all.insert(all.end(), tr.begin(), tr.end());
  auto [y0, y1] = range_of(all);
  y0 = std::max(0.0, y0 - 0.02);
  y1 = std::min(1.0, y1 + 0.02);
  Plot p(x0, x1, y0, y1);
  Document d(p.right() + 150, p.bottom() + 50);
  d.text(p.left + p.width / 2, 24,
         std::string(to_string(s.protocol)) + " " + s.classifier + " vs " + std::string(to_string(s.axis)), "middle", 14);
  p.axes(d, to_string(s.axis), "accuracy");
  std::vector<double> px, pv, pt;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    px.push_back(p.x(xs[i]));
    pv.push_back(p.y(va[i]));
    pt.push_back(p.y(tr[i]));
    d.line(px[i], p.y(lo[i]), px[i], p.y(hi[i]), kPalette[0]);
    d.circle(px[i], pv[i], 3, kPalette[0]);
  }
  d.polyline(px, pv, kPalette[0]).polyline(px, pt, kPalette[1]);
  d.text(p.right() + 10, p.top + 14, "validation", "start", 12, kPalette[0]);
  d.text(p.right() + 10, p.top + 30, "training", "start", 12, kPalette[1]);
  return d.str();
}

/// Accelerometer magnitude, moving-average energy, threshold and the annotated interval.
inline std::string annotation(const Recording& rec, const EnergyProfile& profile, double threshold_fraction,
                              const std::optional<Interval>& iv) {
  const std::size_t n = rec.size();
  const std::size_t stride = std::max<std::size_t>(1, n / 1500);
  std::vector<double> t, mag, en;
  for (std::size_t i = 0; i < n; i += stride) {
    const auto& a = rec.samples[i].a;
    t.push_back(static_cast<double>(i) / rec.fs_hz);
    mag.push_back(std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]));
    en.push_back(profile.values[i]);
  }
  const double emax = profile.values.empty() ? 1.0 : *std::max_element(profile.values.begin(), profile.values.end());
  std::vector<double> ys = mag;
  ys.insert(ys.end(), en.begin(), en.end());
  const auto [y0, y1] = range_of(ys);
  Plot p(0.0, t.empty() ? 1.0 : t.back(), std::min(0.0, y0), y1);
  p.width = 720;
  p.x = {p.x.d0, p.x.d1, p.left, p.left + p.width};
  Document d(p.right() + 30, p.bottom() + 50);
  d.text(p.left + p.width / 2, 24, rec.id, "middle", 14);
  if (iv) d.rect(p.x(static_cast<double>(iv->start) / rec.fs_hz), p.top,
                 p.x(static_cast<double>(iv->end) / rec.fs_hz) - p.x(static_cast<double>(iv->start) / rec.fs_hz),
                 p.height, "#e8f4e8");
  p.axes(d, "time [s]", "|a| [g], energy [g^2]");
  std::vector<double> px, pm, pe;
  for (std::size_t i = 0; i < t.size(); ++i) {
    px.push_back(p.x(t[i]));
    pm.push_back(p.y(mag[i]));
    pe.push_back(p.y(en[i]));
  }
  d.polyline(px, pm, kPalette[7], 0.8).polyline(px, pe, kPalette[0]);
  const double thr = threshold_fraction * emax;
  d.line(p.left, p.y(thr), p.right(), p.y(thr), kPalette[3]);
  return d.str();
}

/// Per-epoch loss and accuracy.
inline std::string history(std::span<const EpochStats> h) {
  std::vector<double> xs, loss, acc;
  for (const auto& e : h) {
    xs.push_back(static_cast<double>(e.epoch));
    loss.push_back(e.loss);
    acc.push_back(e.accuracy);
  }
  const auto [x0, x1] = range_of(xs);
  const auto [l0, l1] = range_of(loss);
  Plot p(x0, x1, std::min(0.0, l0), std::max(1.0, l1));
  Document d(p.right() + 130, p.bottom() + 50);
  d.text(p.left + p.width / 2, 24, "training history", "middle", 14);
  p.axes(d, "epoch", "loss / accuracy");
  std::vector<double> px, pl, pa;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    px.push_back(p.x(xs[i]));
    pl.push_back(p.y(loss[i]));
    pa.push_back(p.y(acc[i]));
  }
  d.polyline(px, pl, kPalette[3]).polyline(px, pa, kPalette[2]);
  d.text(p.right() + 10, p.top + 14, "loss", "start", 12, kPalette[3]);
  d.text(p.right() + 10, p.top + 30, "accuracy", "start", 12, kPalette[2]);
  return d.str();
}

/// Sorted importance bars; the top `limit` features are labelled.
inline std::string importance(const FeatureRanking& r, std::size_t limit = 30) {
  std::vector<std::size_t> order(r.importance.mean.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return r.importance.mean[a] > r.importance.mean[b]; });
  order.resize(std::min(limit, order.size()));
  const double bar = 16, left = 130, top = 40, width = 420;
  const double vmax = order.empty() ? 1.0 : std::max(1e-12, r.importance.mean[order.front()]);
  Document d(left + width + 80, top + bar * static_cast<double>(order.size()) + 30);
  d.text(left + width / 2, 24, "Gini importance", "middle", 14);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto j = order[i];
    const double y = top + bar * static_cast<double>(i);
    const double v = r.importance.mean[j];
    d.rect(left, y + 2, width * v / vmax, bar - 4, kPalette[0]);
    d.text(left - 6, y + bar - 4, j < r.names.size() ? r.names[j] : "f" + std::to_string(j), "end", 10);
    d.text(left + width * v / vmax + 4, y + bar - 4, num(v * 100.0) + "%", "start", 10);
  }
  return d.str();
}

/// Two-component embedding coloured by class.
inline std::string lda_scatter(const Matrix& embedding, std::span<const int> labels, std::size_t max_points = 3000) {
  require(embedding.cols() >= 2, "scatter needs two components");
  const auto rows = eval_detail::spaced(embedding.rows(), max_points);
  std::vector<double> xs, ys;
  for (auto i : rows) {
    xs.push_back(embedding(i, 0));
    ys.push_back(embedding(i, 1));
  }
  const auto [x0, x1] = range_of(xs);
  const auto [y0, y1] = range_of(ys);
  Plot p(x0, x1, y0, y1);
  p.height = 420;
  p.y = {y0 == y1 ? y0 - 1 : y0, y0 == y1 ? y0 + 1 : y1, p.top + p.height, p.top};
  Document d(p.right() + 100, p.bottom() + 50);
  d.text(p.left + p.width / 2, 24, "LDA embedding", "middle", 14);
  p.axes(d, "LD1", "LD2");
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto c = static_cast<std::size_t>(labels[rows[k]]) % kPalette.size();
    d.circle(p.x(xs[k]), p.y(ys[k]), 1.6, kPalette[c]);
  }
  for (std::size_t c = 0; c < kNumClasses; ++c)
    d.text(p.right() + 10, p.top + 14 + 16 * static_cast<double>(c), kClassNames[c], "start", 12, kPalette[c]);
  return d.str();
}

}  // namespace sarc::svg
