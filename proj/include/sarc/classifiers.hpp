#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <list>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sarc/matrix.hpp"
#include "sarc/parallel.hpp"

namespace sarc {

namespace detail {
/// Squared Euclidean distance with four independent accumulators.
inline double squared_distance(const double* a, const double* b, std::size_t d) noexcept {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t j = 0;
  for (; j + 4 <= d; j += 4) {
    const double d0 = a[j] - b[j], d1 = a[j + 1] - b[j + 1], d2 = a[j + 2] - b[j + 2], d3 = a[j + 3] - b[j + 3];
    s0 += d0 * d0;
    s1 += d1 * d1;
    s2 += d2 * d2;
    s3 += d3 * d3;
  }
  for (; j < d; ++j) {
    const double dd = a[j] - b[j];
    s0 += dd * dd;
  }
  return (s0 + s1) + (s2 + s3);
}

inline int argmax_lowest(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}
}  // namespace detail

enum class ClassifierKind : std::uint8_t { RF, KNN, SVC, CRNN };

inline std::string_view to_string(ClassifierKind k) noexcept {
  switch (k) {
    case ClassifierKind::RF: return "rf";
    case ClassifierKind::KNN: return "knn";
    case ClassifierKind::SVC: return "svc";
    case ClassifierKind::CRNN: return "crnn";
  }
  return "?";
}

inline ClassifierKind parse_classifier_kind(std::string_view s) {
  for (auto k : {ClassifierKind::RF, ClassifierKind::KNN, ClassifierKind::SVC, ClassifierKind::CRNN})
    if (s == to_string(k)) return k;
  throw ValidationError("unknown classifier '" + std::string(s) + "' (expected rf, knn, svc or crnn)");
}

// ---------------------------------------------------------------------------
// k-nearest neighbours
// ---------------------------------------------------------------------------

struct KnnModel {
  Matrix x;
  std::vector<int> y;
  std::size_t k = 1;
  std::size_t n_classes = 0;
  friend bool operator==(const KnnModel&, const KnnModel&) = default;
};

inline KnnModel knn_fit(Matrix x, std::vector<int> y, std::size_t k, std::size_t n_classes) {
  require(k >= 1, "k must be >= 1");
  require(k <= x.rows(), "k = " + std::to_string(k) + " exceeds training size " + std::to_string(x.rows()));
  require(y.size() == x.rows(), "label count does not match row count");
  for (int v : y) require(v >= 0 && static_cast<std::size_t>(v) < n_classes, "label out of range");
  return KnnModel{std::move(x), std::move(y), k, n_classes};
}

/// The k nearest training rows of each query, ordered by (distance, row index).
inline std::vector<std::vector<std::uint32_t>> knn_neighbors(const KnnModel& m, const Matrix& q, std::size_t k) {
  require(q.cols() == m.x.cols(), "feature dimension mismatch: model expects " + std::to_string(m.x.cols()) +
                                      ", got " + std::to_string(q.cols()));
  k = std::min(k, m.x.rows());
  std::vector<std::vector<std::uint32_t>> out(q.rows());
  const std::size_t d = q.cols();
  const std::size_t n = m.x.rows();
  parallel_for(q.rows(), [&](std::size_t r) {
    using Entry = std::pair<double, std::uint32_t>;
    std::vector<Entry> heap;  // max-heap on (distance, index): top is the current k-th neighbour
    heap.reserve(k + 1);
    const double* qp = q.row(r).data();
    const double* base = m.x.data().data();
    for (std::size_t i = 0; i < n; ++i) {
      const Entry e{detail::squared_distance(qp, base + i * d, d), static_cast<std::uint32_t>(i)};
      if (heap.size() < k) {
        heap.push_back(e);
        std::push_heap(heap.begin(), heap.end());
      } else if (e < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = e;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    std::sort_heap(heap.begin(), heap.end());
    out[r].reserve(heap.size());
    for (const auto& e : heap) out[r].push_back(e.second);
  });
  return out;
}

/// Unweighted majority vote over the first k neighbours; ties go to the lowest class index.
inline std::vector<int> knn_vote(const std::vector<std::vector<std::uint32_t>>& neighbors, std::span<const int> y,
                                 std::size_t k, std::size_t n_classes) {
  std::vector<int> out(neighbors.size());
  std::vector<double> votes(n_classes);
  for (std::size_t r = 0; r < neighbors.size(); ++r) {
    std::fill(votes.begin(), votes.end(), 0.0);
    const std::size_t kk = std::min(k, neighbors[r].size());
    for (std::size_t j = 0; j < kk; ++j) votes[static_cast<std::size_t>(y[neighbors[r][j]])] += 1.0;
    out[r] = detail::argmax_lowest(votes);
  }
  return out;
}

inline std::vector<int> knn_predict(const KnnModel& m, const Matrix& q) {
  return knn_vote(knn_neighbors(m, q, m.k), m.y, m.k, m.n_classes);
}

// ---------------------------------------------------------------------------
// RBF support vector classifier
// ---------------------------------------------------------------------------

struct SvcParams {
  double C = 1.0;
  double gamma = 0.005;
  double tol = 1e-3;
  std::size_t max_iter = 0;  // 0: max(10^7, 100 n)
  double cache_mb = 256.0;
  friend bool operator==(const SvcParams&, const SvcParams&) = default;
};

inline double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  return std::exp(-gamma * detail::squared_distance(a.data(), b.data(), a.size()));
}

/// Dual solution of one binary problem with labels in {+1, -1}.
struct SmoResult {
  std::vector<double> alpha;
  double rho = 0.0;  // decision(x) = sum_i alpha_i y_i K(x_i, x) - rho
  std::size_t iterations = 0;
  bool converged = false;
};

namespace svm_detail {

/// Rows of Q_ij = y_i y_j K(x_i, x_j), computed on demand behind an LRU cache.
class KernelRows {
 public:
  KernelRows(const Matrix& x, std::span<const double> y, double gamma, double cache_mb)
      : x_(x), y_(y), gamma_(gamma) {
    const double row_bytes = static_cast<double>(x.rows()) * sizeof(double);
    capacity_ = std::max<std::size_t>(2, static_cast<std::size_t>(cache_mb * 1024.0 * 1024.0 / row_bytes));
  }

  const std::vector<double>& row(std::size_t i) {
    if (auto it = index_.find(i); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
    if (lru_.size() >= capacity_) {
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
    const std::size_t n = x_.rows(), d = x_.cols();
    std::vector<double> r(n);
    const double* xi = x_.row(i).data();
    for (std::size_t k = 0; k < n; ++k)
      r[k] = y_[i] * y_[k] * std::exp(-gamma_ * detail::squared_distance(xi, x_.row(k).data(), d));
    lru_.emplace_front(i, std::move(r));
    index_[i] = lru_.begin();
    return lru_.front().second;
  }

 private:
  const Matrix& x_;
  std::span<const double> y_;
  double gamma_;
  std::size_t capacity_;
  std::list<std::pair<std::size_t, std::vector<double>>> lru_;
  std::unordered_map<std::size_t, std::list<std::pair<std::size_t, std::vector<double>>>::iterator> index_;
};

}  // namespace svm_detail

/// Sequential minimal optimization for
///   min 1/2 a'Qa - e'a  s.t.  0 <= a <= C, y'a = 0,
/// choosing at each step the maximal KKT-violating pair and stopping once the
/// violation m(a) - M(a) drops below tol.
inline SmoResult smo_solve(const Matrix& x, std::span<const double> y, const SvcParams& p) {
  const std::size_t n = x.rows();
  require(n >= 2 && y.size() == n, "SMO needs at least two labelled rows");
  require(p.C > 0.0 && p.gamma > 0.0 && p.tol > 0.0, "SVC requires C > 0, gamma > 0, tol > 0");
  const double C = p.C;
  constexpr double kTau = 1e-12;
  svm_detail::KernelRows q(x, y, p.gamma, p.cache_mb);
  SmoResult res;
  res.alpha.assign(n, 0.0);
  auto& a = res.alpha;
  std::vector<double> g(n, -1.0);
  const std::size_t max_iter = p.max_iter > 0 ? p.max_iter : std::max<std::size_t>(10'000'000, 100 * n);
  const double qd = 1.0;  // K(x, x) = 1 for the RBF kernel

  auto in_up = [&](std::size_t t) { return (y[t] > 0 && a[t] < C) || (y[t] < 0 && a[t] > 0); };
  auto in_low = [&](std::size_t t) { return (y[t] > 0 && a[t] > 0) || (y[t] < 0 && a[t] < C); };

  while (true) {
    double gmax = -HUGE_VAL, gmin = HUGE_VAL;
    std::size_t i = n, j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * g[t];
      if (in_up(t) && v > gmax) {
        gmax = v;
        i = t;
      }
      if (in_low(t) && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    if (i == n || j == n || gmax - gmin < p.tol) {
      res.converged = true;
      break;
    }
    if (res.iterations >= max_iter) break;
    ++res.iterations;

    // Capacity >= 2 and LRU order keep row i alive while row j is fetched.
    const std::vector<double>& qi = q.row(i);
    const std::vector<double>& qj = q.row(j);
    const double ai_old = a[i], aj_old = a[j];
    if (y[i] != y[j]) {
      double quad = qd + qd + 2.0 * qi[j];
      if (quad <= 0) quad = kTau;
      const double delta = (-g[i] - g[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0) {
        if (a[j] < 0) {
          a[j] = 0;
          a[i] = diff;
        }
      } else if (a[i] < 0) {
        a[i] = 0;
        a[j] = -diff;
      }
      if (diff > 0) {
        if (a[i] > C) {
          a[i] = C;
          a[j] = C - diff;
        }
      } else if (a[j] > C) {
        a[j] = C;
        a[i] = C + diff;
      }
    } else {
      double quad = qd + qd - 2.0 * qi[j];
      if (quad <= 0) quad = kTau;
      const double delta = (g[i] - g[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > C) {
        if (a[i] > C) {
          a[i] = C;
          a[j] = sum - C;
        }
      } else if (a[j] < 0) {
        a[j] = 0;
        a[i] = sum;
      }
      if (sum > C) {
        if (a[j] > C) {
          a[j] = C;
          a[i] = sum - C;
        }
      } else if (a[i] < 0) {
        a[i] = 0;
        a[j] = sum;
      }
    }
    const double dai = a[i] - ai_old, daj = a[j] - aj_old;
    for (std::size_t k = 0; k < n; ++k) g[k] += qi[k] * dai + qj[k] * daj;
  }

  // rho: average of y_i G_i over free vectors, else the midpoint of the feasible range.
  double ub = HUGE_VAL, lb = -HUGE_VAL, sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * g[t];
    if (a[t] >= C) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (a[t] <= 0) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  res.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  return res;
}

/// One pairwise machine. Positive decision votes for `positive`.
struct BinarySvm {
  int positive = 0;
  int negative = 1;
  std::vector<std::uint32_t> sv;  // indices into SvcModel::support_vectors
  std::vector<double> coef;       // alpha_i * y_i
  double bias = 0.0;              // -rho
  std::size_t iterations = 0;
  bool converged = true;
  friend bool operator==(const BinarySvm&, const BinarySvm&) = default;
};

struct SvcModel {
  SvcParams params;
  std::vector<int> classes;
  std::size_t n_features = 0;
  Matrix support_vectors;
  std::vector<BinarySvm> machines;
  std::vector<std::string> warnings;
  friend bool operator==(const SvcModel&, const SvcModel&) = default;
};

/// One-vs-one RBF SVC: a binary machine per class pair (a < b), class a
/// labelled +1.
inline SvcModel svc_fit(const Matrix& x, std::span<const int> y, const SvcParams& p) {
  require(y.size() == x.rows(), "label count does not match row count");
  std::vector<int> classes(y.begin(), y.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  require(classes.size() >= 2, "SVC needs at least two classes");

  struct PairJob {
    int a, b;
    std::vector<std::size_t> rows;
    SmoResult res;
  };
  std::vector<PairJob> jobs;
  for (std::size_t ia = 0; ia < classes.size(); ++ia)
    for (std::size_t ib = ia + 1; ib < classes.size(); ++ib) {
      PairJob job{classes[ia], classes[ib], {}, {}};
      for (std::size_t r = 0; r < y.size(); ++r)
        if (y[r] == job.a || y[r] == job.b) job.rows.push_back(r);
      jobs.push_back(std::move(job));
    }
  parallel_for(jobs.size(), [&](std::size_t k) {
    auto& job = jobs[k];
    const Matrix sub = x.select_rows(job.rows);
    std::vector<double> yy(job.rows.size());
    for (std::size_t r = 0; r < job.rows.size(); ++r) yy[r] = y[job.rows[r]] == job.a ? 1.0 : -1.0;
    job.res = smo_solve(sub, yy, p);
  });

  SvcModel model;
  model.params = p;
  model.classes = classes;
  model.n_features = x.cols();
  std::unordered_map<std::size_t, std::uint32_t> sv_slot;
  std::vector<std::size_t> sv_rows;
  for (auto& job : jobs) {
    BinarySvm m;
    m.positive = job.a;
    m.negative = job.b;
    m.bias = -job.res.rho;
    m.iterations = job.res.iterations;
    m.converged = job.res.converged;
    for (std::size_t r = 0; r < job.rows.size(); ++r) {
      const double al = job.res.alpha[r];
      if (al <= 0.0) continue;
      const std::size_t row = job.rows[r];
      auto [it, inserted] = sv_slot.try_emplace(row, static_cast<std::uint32_t>(sv_rows.size()));
      if (inserted) sv_rows.push_back(row);
      m.sv.push_back(it->second);
      m.coef.push_back(y[row] == job.a ? al : -al);
    }
    if (!m.converged)
      model.warnings.push_back("SMO iteration cap reached for classes " + std::to_string(job.a) + " vs " +
                               std::to_string(job.b));
    model.machines.push_back(std::move(m));
  }
  model.support_vectors = x.select_rows(sv_rows);
  return model;
}

/// Decision values, one column per machine in model order.
inline Matrix svc_decision(const SvcModel& m, const Matrix& q) {
  require(q.cols() == m.n_features, "feature dimension mismatch: model expects " + std::to_string(m.n_features) +
                                        ", got " + std::to_string(q.cols()));
  Matrix out(q.rows(), m.machines.size());
  const std::size_t nsv = m.support_vectors.rows();
  parallel_for(q.rows(), [&](std::size_t r) {
    std::vector<double> k(nsv);
    for (std::size_t s = 0; s < nsv; ++s) k[s] = rbf_kernel(m.support_vectors.row(s), q.row(r), m.params.gamma);
    for (std::size_t j = 0; j < m.machines.size(); ++j) {
      const auto& mc = m.machines[j];
      double v = 0.0;
      for (std::size_t s = 0; s < mc.sv.size(); ++s) v += mc.coef[s] * k[mc.sv[s]];
      out(r, j) = v + mc.bias;
    }
  });
  return out;
}

/// Pairwise voting; vote ties go to the lowest class index.
inline std::vector<int> svc_predict(const SvcModel& m, const Matrix& q) {
  const Matrix dec = svc_decision(m, q);
  const int max_class = *std::max_element(m.classes.begin(), m.classes.end());
  std::vector<int> out(q.rows());
  std::vector<double> votes(static_cast<std::size_t>(max_class) + 1);
  for (std::size_t r = 0; r < q.rows(); ++r) {
    std::fill(votes.begin(), votes.end(), 0.0);
    for (std::size_t j = 0; j < m.machines.size(); ++j)
      votes[static_cast<std::size_t>(dec(r, j) > 0 ? m.machines[j].positive : m.machines[j].negative)] += 1.0;
    out[r] = detail::argmax_lowest(votes);
  }
  return out;
}

}  // namespace sarc
