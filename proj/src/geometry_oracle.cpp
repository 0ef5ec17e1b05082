#include "spiky/geometry_oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <vector>

#include "spiky/errors.hpp"

namespace spiky {

namespace {

constexpr int kMaxDim = 8;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

// f(w) = max_j <a_j, w> + b_j over unit w.
struct Pieces {
  int dim = 0;
  std::vector<double> a;
  std::vector<double> b;

  [[nodiscard]] std::size_t size() const { return b.size(); }
  [[nodiscard]] const double* row(std::size_t j) const { return a.data() + j * dim; }

  void add(std::span<const double> dir, double offset, std::span<const double> shift, double sign) {
    for (int k = 0; k < dim; ++k) a.push_back(sign * dir[k] - shift[k]);
    b.push_back(offset);
  }

  [[nodiscard]] double eval(const double* w) const {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < size(); ++j) {
      double s = b[j];
      const double* r = row(j);
      for (int k = 0; k < dim; ++k) s += r[k] * w[k];
      best = std::max(best, s);
    }
    return best;
  }
};

Pieces margin_pieces(const SpikyBody& body, std::span<const double> p) {
  Pieces pc;
  pc.dim = body.dim;
  const std::vector<double> zero(body.dim, 0.0);
  for (std::size_t i = 0; i < body.size(); ++i) {
    pc.add(body.spikes[i], 0.0, p, 1.0);
    pc.add(body.spikes[i], 0.0, p, -1.0);
  }
  if (body.polytopal_core) {
    for (std::size_t c = 0; c < body.polytopal_core->size(); ++c) pc.add((*body.polytopal_core)[c], 0.0, p, 1.0);
  } else {
    pc.add(zero, body.inner_radius, p, 1.0);
  }
  return pc;
}

struct Best {
  double value = std::numeric_limits<double>::infinity();
  std::vector<double> w;

  void offer(const Pieces& pc, const Vec& cand) {
    const double v = pc.eval(cand.data());
    if (v < value) {
      value = v;
      w.assign(cand.data(), cand.data() + cand.size());
    }
  }
};

std::uint64_t subset_count(std::size_t m, int d) {
  std::uint64_t total = 0;
  long double c = 1;
  for (int k = 1; k <= d && k <= static_cast<int>(m); ++k) {
    c = c * static_cast<long double>(m - k + 1) / k;
    total += static_cast<std::uint64_t>(std::min<long double>(c, 1e18L));
  }
  return total;
}

Vec piece_vec(const Pieces& pc, std::size_t j) {
  Vec v(pc.dim);
  for (int k = 0; k < pc.dim; ++k) v[k] = pc.row(j)[k];
  return v;
}

// Minimizes the common value of the pieces in `subset` over the small sphere
// on which they are all equal, and offers the minimizer(s).
void solve_subset(const Pieces& pc, std::span<const std::size_t> subset, Best& best) {
  const int d = pc.dim;
  const int k = static_cast<int>(subset.size());
  const Vec a1 = piece_vec(pc, subset[0]);
  if (k == 1) {
    const double n = a1.norm();
    if (n > 1e-300) {
      best.offer(pc, -a1 / n);
    } else {
      for (int j = 0; j < d; ++j) {
        Vec e = Vec::Zero(d);
        e[j] = 1.0;
        best.offer(pc, e);
        best.offer(pc, -e);
      }
    }
    return;
  }
  Mat E(k - 1, d);
  Vec rhs(k - 1);
  for (int m = 1; m < k; ++m) {
    E.row(m - 1) = (piece_vec(pc, subset[m]) - a1).transpose();
    rhs[m - 1] = pc.b[subset[0]] - pc.b[subset[m]];
  }
  const Mat G = E * E.transpose();
  const Eigen::LDLT<Mat> ldlt(G);
  if (ldlt.info() != Eigen::Success) return;
  const auto diag = ldlt.vectorD();
  if (!(diag.minCoeff() > 1e-13 * std::max(diag.maxCoeff(), 1e-300))) return;
  const Vec w0 = E.transpose() * ldlt.solve(rhs);
  const double n0 = w0.squaredNorm();
  if (n0 > 1.0) return;
  const double rho = std::sqrt(std::max(0.0, 1.0 - n0));
  const Vec g = a1 - E.transpose() * ldlt.solve(E * a1);
  const double gn = g.norm();
  if (k < d && gn > 1e-12 * std::max(1.0, a1.norm())) {
    best.offer(pc, w0 - rho * g / gn);
    return;
  }
  // The small sphere is two points (k == d) or the common value is constant
  // on it: try directions spanning the null space of E.
  const Mat P = Mat::Identity(d, d) - E.transpose() * ldlt.solve(E);
  std::vector<std::pair<double, int>> cols;
  for (int j = 0; j < d; ++j) cols.emplace_back(P.col(j).norm(), j);
  std::sort(cols.begin(), cols.end(), std::greater<>());
  const int tries = k == d ? 1 : 2;
  for (int t = 0; t < tries && t < d; ++t) {
    if (cols[t].first < 1e-8) break;
    const Vec dir = P.col(cols[t].second) / cols[t].first;
    best.offer(pc, w0 + rho * dir);
    best.offer(pc, w0 - rho * dir);
  }
}

void enumerate_subsets(const Pieces& pc, std::span<const std::size_t> pool, int max_k, Best& best) {
  const int m = static_cast<int>(pool.size());
  std::vector<std::size_t> chosen;
  std::vector<int> idx;
  for (int k = 1; k <= max_k && k <= m; ++k) {
    idx.resize(k);
    for (int j = 0; j < k; ++j) idx[j] = j;
    for (;;) {
      chosen.resize(k);
      for (int j = 0; j < k; ++j) chosen[j] = pool[idx[j]];
      solve_subset(pc, chosen, best);
      int j = k - 1;
      while (j >= 0 && idx[j] == m - k + j) --j;
      if (j < 0) break;
      ++idx[j];
      for (int t = j + 1; t < k; ++t) idx[t] = idx[t - 1] + 1;
    }
  }
}

// Log-sum-exp smoothed descent on the sphere with decreasing temperature,
// followed by exact solves on the near-active pieces.
void local_descent(const Pieces& pc, std::vector<double> w, Best& best) {
  const int d = pc.dim;
  const std::size_t M = pc.size();
  std::vector<double> vals(M);
  std::vector<double> grad(d);
  std::vector<double> trial(d);
  const auto values = [&](const std::vector<double>& x) {
    for (std::size_t j = 0; j < M; ++j) {
      double s = pc.b[j];
      for (int k = 0; k < d; ++k) s += pc.row(j)[k] * x[k];
      vals[j] = s;
    }
  };
  const auto smooth = [&](const std::vector<double>& x, double mu) {
    values(x);
    const double top = *std::max_element(vals.begin(), vals.end());
    double z = 0.0;
    for (double v : vals) z += std::exp((v - top) / mu);
    return top + mu * std::log(z);
  };
  double step = 0.1;
  for (double mu = 1e-1; mu >= 1e-9; mu *= 0.1) {
    for (int iter = 0; iter < 200; ++iter) {
      const double f0 = smooth(w, mu);
      const double top = *std::max_element(vals.begin(), vals.end());
      std::fill(grad.begin(), grad.end(), 0.0);
      double z = 0.0;
      for (std::size_t j = 0; j < M; ++j) {
        const double e = std::exp((vals[j] - top) / mu);
        z += e;
        for (int k = 0; k < d; ++k) grad[k] += e * pc.row(j)[k];
      }
      double radial = 0.0;
      for (int k = 0; k < d; ++k) {
        grad[k] /= z;
        radial += grad[k] * w[k];
      }
      double gn2 = 0.0;
      for (int k = 0; k < d; ++k) {
        grad[k] -= radial * w[k];
        gn2 += grad[k] * grad[k];
      }
      if (gn2 < 1e-28) break;
      bool moved = false;
      step = std::min(step * 4.0, 1.0);
      while (step > 1e-16) {
        double tn = 0.0;
        for (int k = 0; k < d; ++k) {
          trial[k] = w[k] - step * grad[k];
          tn += trial[k] * trial[k];
        }
        tn = std::sqrt(tn);
        for (double& x : trial) x /= tn;
        if (smooth(trial, mu) <= f0 - 1e-4 * step * gn2) {
          w = trial;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
  }
  Vec wv(d);
  for (int k = 0; k < d; ++k) wv[k] = w[k];
  best.offer(pc, wv);
  // Exact solves over subsets of the d + 1 most active pieces.
  values(w);
  std::vector<std::size_t> order(M);
  for (std::size_t j = 0; j < M; ++j) order[j] = j;
  const std::size_t keep = std::min<std::size_t>(M, d + 1);
  std::partial_sort(order.begin(), order.begin() + keep, order.end(),
                    [&](std::size_t x, std::size_t y) { return vals[x] > vals[y]; });
  order.resize(keep);
  enumerate_subsets(pc, order, d, best);
}

std::uint64_t hash_point(std::uint64_t h, std::span<const double> p) {
  for (double x : p) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    h = mix64(h ^ bits);
  }
  return h;
}

MarginStatus classify(double value, double tol) {
  if (value < -tol) return MarginStatus::CertifiedNegative;
  if (value > tol) return MarginStatus::CertifiedPositive;
  return MarginStatus::Ambiguous;
}

}  // namespace

double support(const SpikyBody& body, std::span<const double> w) {
  if (static_cast<int>(w.size()) != body.dim) throw DomainError("support: dimension mismatch");
  double h = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < body.size(); ++i) h = std::max(h, std::abs(vec::dot(body.spikes[i], w)));
  if (body.polytopal_core) {
    for (std::size_t c = 0; c < body.polytopal_core->size(); ++c) {
      h = std::max(h, vec::dot((*body.polytopal_core)[c], w));
    }
  } else {
    h = std::max(h, vec::norm(w) * body.inner_radius);
  }
  return h;
}

MarginResult membership_margin(const SpikyBody& body, std::span<const double> p, const OracleOptions& opts) {
  if (static_cast<int>(p.size()) != body.dim) throw DomainError("membership_margin: dimension mismatch");
  for (double x : p) {
    if (!std::isfinite(x)) throw DomainError("membership_margin: non-finite point");
  }
  const int d = body.dim;
  MarginResult out;
  if (body.size() == 0 && !body.polytopal_core) {
    // Pure ball: h(w) = |w| / D, minimized against -p.
    const double pn = vec::norm(p);
    out.value = body.inner_radius - pn;
    std::vector<double> w(p.begin(), p.end());
    out.minimizer_direction = pn > 0.0 ? UnitVector::normalized(std::move(w)) : UnitVector::axis(d, 0);
    out.status = classify(out.value, opts.tolerance);
    out.exhaustive = true;
    return out;
  }
  const Pieces pc = margin_pieces(body, p);
  Best best;
  const bool exhaustive =
      !opts.force_local && d <= kMaxDim && subset_count(pc.size(), d) <= opts.exhaustive_budget;
  if (exhaustive) {
    std::vector<std::size_t> all(pc.size());
    for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
    enumerate_subsets(pc, all, d, best);
    out.exhaustive = true;
  }
  if (!exhaustive || !std::isfinite(best.value)) {
    if (d > kMaxDim) throw DomainError("membership_margin: dimension above the oracle limit");
    // Candidate starts: +-X_i, the direction of p, and a random sweep; the
    // best `restarts` of them are descended.
    std::vector<std::pair<double, std::vector<double>>> starts;
    const auto consider = [&](std::vector<double> w) {
      const double n = vec::norm(w);
      if (!(n > 0.0)) return;
      for (double& x : w) x /= n;
      starts.emplace_back(pc.eval(w.data()), std::move(w));
    };
    for (std::size_t i = 0; i < body.size(); ++i) {
      std::vector<double> x(body.spikes[i].begin(), body.spikes[i].end());
      consider(x);
      for (double& v : x) v = -v;
      consider(x);
    }
    consider({p.begin(), p.end()});
    const SeedSpec seed{opts.seed, hash_point(digest(body), p)};
    const PointSet sweep = uniform_cloud(d, opts.sweep, seed, 1);
    for (std::size_t k = 0; k < sweep.size(); ++k) consider({sweep[k].begin(), sweep[k].end()});
    const std::size_t keep = std::min<std::size_t>(starts.size(), std::max(1, opts.restarts));
    std::partial_sort(starts.begin(), starts.begin() + keep, starts.end(),
                      [](const auto& x, const auto& y) { return x.first < y.first; });
    for (std::size_t s = 0; s < keep; ++s) local_descent(pc, starts[s].second, best);
    out.restarts_used = static_cast<int>(keep);
    out.exhaustive = false;
  }
  out.value = best.value;
  out.minimizer_direction = UnitVector::normalized(best.w);
  out.status = classify(out.value, opts.tolerance);
  return out;
}

IlluminationTrace illuminates_at(const SpikyBody& body, std::span<const double> boundary_point, const UnitVector& u,
                                 const OracleOptions& opts) {
  if (u.dim() != body.dim || static_cast<int>(boundary_point.size()) != body.dim) {
    throw DomainError("illuminates: dimension mismatch");
  }
  IlluminationTrace trace;
  std::vector<double> q(body.dim);
  const auto margin_at = [&](double lambda) {
    for (int k = 0; k < body.dim; ++k) q[k] = boundary_point[k] + lambda * u[k];
    ++trace.evaluations;
    return membership_margin(body, q, opts).value;
  };
  constexpr int kGrid = 32;
  std::vector<double> grid(kGrid);
  int arg = 0;
  for (int k = 0; k < kGrid; ++k) {
    grid[k] = margin_at(2.0 * (k + 1) / kGrid);
    if (grid[k] > grid[arg]) arg = k;
  }
  double lo = 2.0 * std::max(arg, 1) / kGrid;
  double hi = 2.0 * std::min(arg + 2, kGrid) / kGrid;
  double best_lambda = 2.0 * (arg + 1) / kGrid;
  double best = grid[arg];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = margin_at(x1);
  double f2 = margin_at(x2);
  while (hi - lo > 1e-9) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = margin_at(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = margin_at(x1);
    }
  }
  for (const auto& [x, f] : {std::pair{x1, f1}, std::pair{x2, f2}}) {
    if (f > best) {
      best = f;
      best_lambda = x;
    }
  }
  trace.best_lambda = best_lambda;
  trace.max_margin = best;
  trace.illuminated = best > opts.tolerance;
  trace.ambiguous = std::abs(best) <= opts.tolerance;
  return trace;
}

IlluminationTrace illuminates(const SpikyBody& body, std::size_t i, const UnitVector& u, const OracleOptions& opts,
                              bool negated) {
  if (i >= body.size()) throw DomainError("illuminates: spike index out of range");
  std::vector<double> b(body.spikes[i].begin(), body.spikes[i].end());
  if (negated) {
    for (double& x : b) x = -x;
  }
  return illuminates_at(body, b, u, opts);
}

GaugeResult gauge(const SpikyBody& body, std::span<const double> p, const OracleOptions& opts) {
  const int d = body.dim;
  if (static_cast<int>(p.size()) != d) throw DomainError("gauge: dimension mismatch");
  const double pn = vec::norm(p);
  if (pn == 0.0) return {0.0, true};
  if (body.size() == 0 && !body.polytopal_core) return {pn * body.bigD, true};
  // max <p, w> subject to <s, w> <= 1 for every halfspace normal s and, with
  // the inner ball, |w| <= D. The feasible set is convex, so the optimum is a
  // vertex or lies where the sphere |w| = D meets a face.
  std::vector<std::vector<double>> normals;
  for (std::size_t i = 0; i < body.size(); ++i) {
    std::vector<double> s(body.spikes[i].begin(), body.spikes[i].end());
    normals.push_back(s);
    for (double& x : s) x = -x;
    normals.push_back(std::move(s));
  }
  if (body.polytopal_core) {
    for (std::size_t c = 0; c < body.polytopal_core->size(); ++c) {
      normals.emplace_back((*body.polytopal_core)[c].begin(), (*body.polytopal_core)[c].end());
    }
  }
  const bool ball = !body.polytopal_core.has_value();
  const double radius = body.bigD;
  const std::size_t H = normals.size();
  const bool exhaustive = !opts.force_local && d <= kMaxDim && subset_count(H, d) + 1 <= opts.exhaustive_budget;
  if (exhaustive) {
    Vec pv(d);
    for (int k = 0; k < d; ++k) pv[k] = p[k];
    double best = -std::numeric_limits<double>::infinity();
    const auto feasible = [&](const Vec& w) {
      if (ball && w.norm() > radius * (1.0 + 1e-12)) return false;
      for (const auto& s : normals) {
        double v = 0.0;
        for (int k = 0; k < d; ++k) v += s[k] * w[k];
        if (v > 1.0 + 1e-12) return false;
      }
      return true;
    };
    const auto offer = [&](const Vec& w) {
      if (feasible(w)) best = std::max(best, pv.dot(w));
    };
    if (ball) offer(pv * (radius / pn));
    std::vector<int> idx;
    for (int k = 1; k <= d && k <= static_cast<int>(H); ++k) {
      if (k < d && !ball) continue;
      idx.resize(k);
      for (int j = 0; j < k; ++j) idx[j] = j;
      for (;;) {
        Mat S(k, d);
        for (int r = 0; r < k; ++r) {
          for (int c = 0; c < d; ++c) S(r, c) = normals[idx[r]][c];
        }
        const Mat G = S * S.transpose();
        const Eigen::LDLT<Mat> ldlt(G);
        const auto diag = ldlt.vectorD();
        if (ldlt.info() == Eigen::Success && diag.minCoeff() > 1e-13 * std::max(diag.maxCoeff(), 1e-300)) {
          const Vec w0 = S.transpose() * ldlt.solve(Vec::Ones(k));
          if (k == d) {
            offer(w0);
          } else if (w0.norm() <= radius) {
            const Vec g = pv - S.transpose() * ldlt.solve(S * pv);
            const double gn = g.norm();
            const double rho = std::sqrt(std::max(0.0, radius * radius - w0.squaredNorm()));
            offer(gn > 1e-14 * pn ? Vec(w0 + rho * g / gn) : w0);
          }
        }
        int j = k - 1;
        while (j >= 0 && idx[j] == static_cast<int>(H) - k + j) --j;
        if (j < 0) break;
        ++idx[j];
        for (int t = j + 1; t < k; ++t) idx[t] = idx[t - 1] + 1;
      }
    }
    if (std::isfinite(best)) return {best, true};
  }
  // Fallback: the gauge is the root of lambda -> margin(p / lambda).
  std::vector<double> q(d);
  const auto margin_scaled = [&](double lambda) {
    for (int k = 0; k < d; ++k) q[k] = p[k] / lambda;
    return membership_margin(body, q, opts).value;
  };
  double lo = pn * (1.0 - 1e-9);
  double hi = pn * body.bigD * (1.0 + 1e-9);
  if (body.polytopal_core) hi /= std::cos(body.core_density);
  while (margin_scaled(hi) < 0.0) hi *= 2.0;
  std::uintmax_t iters = 200;
  const auto root = boost::math::tools::toms748_solve(margin_scaled, lo, hi,
                                                      boost::math::tools::eps_tolerance<double>(50), iters);
  return {0.5 * (root.first + root.second), false};
}

bool cap_predicate(const SpikyBody& body, std::size_t i, const UnitVector& u, bool negated) {
  if (i >= body.size()) throw DomainError("cap_predicate: spike index out of range");
  if (u.dim() != body.dim) throw DomainError("cap_predicate: dimension mismatch");
  std::vector<double> target(body.spikes[i].begin(), body.spikes[i].end());
  if (!negated) {
    for (double& x : target) x = -x;
  }
  return angle(u.coords(), target) < body.alpha() - kTieTolerance;
}

}  // namespace spiky
