#include "spiky/cap_calculus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <sstream>
#include <vector>

#include "spiky/errors.hpp"

namespace spiky {

namespace {

constexpr double kPi = std::numbers::pi;

// 15-point Kronrod rule with embedded 7-point Gauss rule (QUADPACK constants).
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gauss_kronrod(const F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double x = h * kXgk[j];
    const double s = f(c - x) + f(c + x);
    kron += kWgk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  return {a, b, kron * h, std::abs((kron - gauss) * h)};
}

// Globally adaptive Gauss-Kronrod over the given breakpoints.
template <class F>
double integrate(const F& f, const std::vector<double>& breaks, double rel_tol) {
  std::priority_queue<Segment> heap;
  double total = 0.0;
  double err = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    heap.push(gauss_kronrod(f, breaks[k], breaks[k + 1]));
  }
  {
    auto copy = heap;
    while (!copy.empty()) {
      total += copy.top().value;
      err += copy.top().error;
      copy.pop();
    }
  }
  for (int iter = 0; iter < 4000 && err > rel_tol * std::abs(total); ++iter) {
    const Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    heap.pop();
    const Segment left = gauss_kronrod(f, worst.a, mid);
    const Segment right = gauss_kronrod(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Neumaier summation of the segment values, smallest first.
  std::vector<double> parts;
  while (!heap.empty()) {
    parts.push_back(heap.top().value);
    heap.pop();
  }
  std::sort(parts.begin(), parts.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
  double sum = 0.0;
  double comp = 0.0;
  for (double v : parts) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

void check_cap_args(int d, double phi) {
  if (d < 2) throw DomainError("cap measure: ambient dimension must be >= 2");
  if (!(phi > 0.0 && phi < kPi)) throw DomainError("cap measure: radius must lie in (0, pi)");
}

// log of the integral of sin^m over [0, pi].
double log_sphere_normalizer(int m) {
  return 0.5 * std::log(kPi) + std::lgamma(0.5 * (m + 1)) - std::lgamma(0.5 * m + 1.0);
}

// log Omega for phi in (0, pi/2], m = d - 2 >= 1.
double log_cap_lower_half(int m, double phi) {
  const double log_sin_phi = std::log(std::sin(phi));
  // The integrand sin^m(t) / sin^m(phi) peaks at t = phi with width about
  // 1 / (m cot(phi) + sqrt(m)); grade the initial breakpoints toward it.
  const double width = 1.0 / (m * std::abs(std::cos(phi) / std::sin(phi)) + std::sqrt(static_cast<double>(m)));
  std::vector<double> breaks{phi};
  for (double step = width; phi - step > 0.0; step *= 2.0) breaks.push_back(phi - step);
  breaks.push_back(0.0);
  std::reverse(breaks.begin(), breaks.end());
  const auto scaled = [m, log_sin_phi](double t) {
    if (t <= 0.0) return 0.0;
    return std::exp(m * (std::log(std::sin(t)) - log_sin_phi));
  };
  const double integral = integrate(scaled, breaks, 1e-14);
  return m * log_sin_phi + std::log(integral) - log_sphere_normalizer(m);
}

std::string describe_bound(int n, double phi, double limit) {
  std::ostringstream os;
  os.precision(17);
  os << "bw_upper requires phi <= arccos(1/sqrt(n+1)) = " << limit << " for n = " << n << ", got phi = " << phi;
  return os.str();
}

}  // namespace

double log_cap_measure(int d, double phi) {
  check_cap_args(d, phi);
  if (phi == kPi / 2) return std::log(0.5);
  if (phi > kPi / 2) return std::log1p(-std::exp(log_cap_measure(d, kPi - phi)));
  const int m = d - 2;
  if (m == 0) return std::log(phi / kPi);
  return log_cap_lower_half(m, phi);
}

double cap_measure(int d, double phi) { return std::exp(log_cap_measure(d, phi)); }

double log_bw_lower(int n, double phi) {
  if (n < 1) throw DomainError("bw_lower: n must be >= 1");
  if (!(phi > 0.0 && phi < kPi / 2)) throw DomainError("bw_lower: phi must lie in (0, pi/2)");
  return n * std::log(std::sin(phi)) - 0.5 * std::log(2.0 * kPi * (n + 1));
}

double bw_lower(int n, double phi) { return std::exp(log_bw_lower(n, phi)); }

double bw_upper_limit(int n) {
  if (n < 1) throw DomainError("bw_upper: n must be >= 1");
  return std::acos(1.0 / std::sqrt(static_cast<double>(n) + 1.0));
}

double log_bw_upper(int n, double phi) {
  const double limit = bw_upper_limit(n);
  if (!(phi > 0.0)) throw DomainError("bw_upper: phi must be positive");
  if (phi > limit * (1.0 + 4e-16)) throw PreconditionError(describe_bound(n, phi, limit));
  return n * std::log(std::sin(phi)) - 0.5 * std::log(2.0 * kPi * n) - std::log(std::cos(phi));
}

double bw_upper(int n, double phi) { return std::exp(log_bw_upper(n, phi)); }

double cap_scaling_bound(int n, double phi, double t) {
  if (n < 1) throw DomainError("cap_scaling_bound: n must be >= 1");
  if (!(phi > 0.0 && phi < kPi / 2)) throw DomainError("cap_scaling_bound: phi must lie in (0, pi/2)");
  if (!(t > 1.0 && t < kPi / (2.0 * phi))) {
    throw DomainError("cap_scaling_bound: t must lie in (1, pi/(2 phi))");
  }
  return std::pow(t, n) * cap_measure(n + 1, phi);
}

double jordan_lower(double x) {
  if (!(x >= 0.0 && x <= kPi / 2)) throw DomainError("jordan_lower: x must lie in [0, pi/2]");
  return 2.0 * x / kPi;
}

double TailBound::bound() const { return std::clamp(std::exp2(log2_bound), 0.0, 1.0); }

TailBound chernoff_bound(std::int64_t trials, double p, double theta) {
  if (trials < 1) throw DomainError("chernoff_bound: N must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("chernoff_bound: p must lie in (0, 1)");
  if (!(theta >= 6.0)) throw PreconditionError("chernoff_bound: requires theta >= 6");
  TailBound t;
  t.trials = trials;
  t.success_prob = p;
  t.threshold = static_cast<double>(trials) * theta * p;
  t.log2_bound = -t.threshold;
  return t;
}

double log_binomial_tail_exact(std::int64_t trials, double p, double k) {
  if (trials < 0) throw DomainError("binomial_tail_exact: N must be >= 0");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binomial_tail_exact: p must lie in [0, 1]");
  if (!(k >= 0.0) || !std::isfinite(k)) throw DomainError("binomial_tail_exact: threshold must be >= 0");
  const auto first = static_cast<std::int64_t>(std::floor(k)) + 1;
  if (first > trials) return -INFINITY;
  if (p == 0.0) return -INFINITY;
  if (p == 1.0) return 0.0;
  using ld = long double;
  const ld log_p = std::log(static_cast<ld>(p));
  const ld log_q = std::log1p(-static_cast<ld>(p));
  const ld lg_n = std::lgamma(static_cast<ld>(trials) + 1);
  const auto log_pmf = [&](std::int64_t j) {
    return lg_n - std::lgamma(static_cast<ld>(j) + 1) - std::lgamma(static_cast<ld>(trials - j) + 1) + j * log_p +
           (trials - j) * log_q;
  };
  ld peak = -INFINITY;
  for (std::int64_t j = first; j <= trials; ++j) peak = std::max(peak, log_pmf(j));
  ld sum = 0;
  ld comp = 0;
  for (std::int64_t j = first; j <= trials; ++j) {
    const ld y = std::exp(log_pmf(j) - peak) - comp;
    const ld t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return static_cast<double>(peak + std::log(sum));
}

double binomial_tail_exact(std::int64_t trials, double p, double k) {
  const double v = std::exp(log_binomial_tail_exact(trials, p, k));
  return std::min(v, 1.0);
}

}  // namespace spiky
