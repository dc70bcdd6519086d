#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace levypass {

struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// 15-point Kronrod nodes/weights on [-1,1] with the embedded 7-point Gauss rule.
inline constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <typename F>
void gk15(const F& f, double a, double b, double& result, double& err) {
  const double h = 0.5 * (b - a);
  const double c = 0.5 * (a + b);
  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(c - h * kKronrodNodes[i]);
    fv[14 - i] = f(c + h * kKronrodNodes[i]);
  }
  fv[7] = f(c);
  double kronrod = 0.0, gauss = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double pair = (i == 7) ? fv[7] : fv[i] + fv[14 - i];
    kronrod += kKronrodWeights[i] * pair;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * pair;
  }
  result = kronrod * h;
  err = std::abs(kronrod - gauss) * h;
}

}  // namespace detail

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_depth = 48;
  std::size_t max_intervals = 20000;
};

// Adaptive bisection on top of Gauss-Kronrod 15(7). Throws QuadratureError when
// the requested tolerance is unreachable within the interval budget.
template <typename F>
double integrate(const F& f, double a, double b,
                 const QuadratureOptions& opt = {}) {
  if (!(a < b)) {
    if (a == b) return 0.0;
    throw std::invalid_argument("integrate: bad interval");
  }
  struct Seg {
    double a, b, value, err;
    int depth;
  };
  double v0, e0;
  detail::gk15(f, a, b, v0, e0);
  std::vector<Seg> heap{{a, b, v0, e0, 0}};
  auto worse = [](const Seg& x, const Seg& y) { return x.err < y.err; };
  std::make_heap(heap.begin(), heap.end(), worse);
  double total = v0, toterr = e0;
  while (true) {
    const double goal =
        std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
    if (toterr <= goal || heap.empty()) break;
    if (heap.size() > opt.max_intervals)
      throw QuadratureError("integrate: interval budget exhausted, err=" +
                            std::to_string(toterr));
    std::pop_heap(heap.begin(), heap.end(), worse);
    Seg s = heap.back();
    heap.pop_back();
    if (s.depth >= opt.max_depth) {
      // Interval no longer refinable; accept its estimate.
      if (toterr - s.err <= goal || heap.empty()) break;
      // Park it by zeroing its error so the loop can terminate.
      toterr -= s.err;
      continue;
    }
    const double mid = 0.5 * (s.a + s.b);
    Seg l{s.a, mid, 0, 0, s.depth + 1}, r{mid, s.b, 0, 0, s.depth + 1};
    detail::gk15(f, l.a, l.b, l.value, l.err);
    detail::gk15(f, r.a, r.b, r.value, r.err);
    total += l.value + r.value - s.value;
    toterr += l.err + r.err - s.err;
    heap.push_back(l);
    std::push_heap(heap.begin(), heap.end(), worse);
    heap.push_back(r);
    std::push_heap(heap.begin(), heap.end(), worse);
  }
  return total;
}

// Integral over (a, +inf) via the substitution x = a + t/(1-t), t in (0,1).
template <typename F>
double integrate_to_inf(const F& f, double a,
                        const QuadratureOptions& opt = {}) {
  auto g = [&](double t) {
    const double u = 1.0 - t;
    if (u <= 0.0) return 0.0;
    const double x = a + t / u;
    const double v = f(x);
    if (v == 0.0) return 0.0;  // avoid 0 * inf at the far end
    return v / (u * u);
  };
  return integrate(g, 0.0, 1.0, opt);
}

}  // namespace levypass
