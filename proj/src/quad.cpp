#include "supcar/quad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace supcar {

namespace {

constexpr double kXgk[11] = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr double kWgk[11] = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208292801114, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr double kWg[5] = {0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
                           0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
                           0.295524224714752870173892994651338};

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kUflow = std::numeric_limits<double>::min();

template <class T>
struct Segment {
  double a, b;
  T value;
  double err;
  bool operator<(const Segment& o) const { return err < o.err; }
};

inline double norm_of(double v) { return std::fabs(v); }
inline double norm_of(const std::complex<double>& v) { return std::abs(v); }

template <class T, class F>
Segment<T> gk21(const F& f, double a, double b) {
  const double centr = 0.5 * (a + b);
  const double hlgth = 0.5 * (b - a);
  T fv1[10], fv2[10];
  const T fc = f(centr);
  T resg{};
  T resk = fc * kWgk[10];
  double resabs = norm_of(resk);
  for (int j = 0; j < 5; ++j) {
    const int jtw = 2 * j + 1;
    const double absc = hlgth * kXgk[jtw];
    const T f1 = f(centr - absc);
    const T f2 = f(centr + absc);
    fv1[jtw] = f1;
    fv2[jtw] = f2;
    const T fsum = f1 + f2;
    resg += kWg[j] * fsum;
    resk += kWgk[jtw] * fsum;
    resabs += kWgk[jtw] * (norm_of(f1) + norm_of(f2));
  }
  for (int j = 0; j < 5; ++j) {
    const int jtwm1 = 2 * j;
    const double absc = hlgth * kXgk[jtwm1];
    const T f1 = f(centr - absc);
    const T f2 = f(centr + absc);
    fv1[jtwm1] = f1;
    fv2[jtwm1] = f2;
    const T fsum = f1 + f2;
    resk += kWgk[jtwm1] * fsum;
    resabs += kWgk[jtwm1] * (norm_of(f1) + norm_of(f2));
  }
  const T reskh = resk * 0.5;
  double resasc = kWgk[10] * norm_of(fc - reskh);
  for (int j = 0; j < 10; ++j) resasc += kWgk[j] * (norm_of(fv1[j] - reskh) + norm_of(fv2[j] - reskh));
  const T result = resk * hlgth;
  resabs *= std::fabs(hlgth);
  resasc *= std::fabs(hlgth);
  double abserr = norm_of((resk - resg) * hlgth);
  if (resasc != 0.0 && abserr != 0.0) abserr = resasc * std::min(1.0, std::pow(200.0 * abserr / resasc, 1.5));
  if (resabs > kUflow / (50.0 * kEps)) abserr = std::max(kEps * 50.0 * resabs, abserr);
  if (!std::isfinite(norm_of(result))) abserr = std::numeric_limits<double>::infinity();
  return {a, b, result, abserr};
}

template <class T, class F>
BasicQuadResult<T> adaptive(const F& f, const std::vector<double>& pts, const QuadOptions& opt) {
  std::priority_queue<Segment<T>> heap;
  T total{};
  double err = 0.0;
  int evals = 0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i + 1] == pts[i]) continue;
    Segment<T> s = gk21<T>(f, pts[i], pts[i + 1]);
    evals += 21;
    total += s.value;
    err += s.err;
    heap.push(s);
  }
  BasicQuadResult<T> r;
  int intervals = static_cast<int>(heap.size());
  while (!heap.empty()) {
    const double tol = std::max(opt.epsabs, opt.epsrel * norm_of(total));
    if (err <= tol) break;
    if (!std::isfinite(err)) break;
    if (intervals >= opt.max_intervals) break;
    Segment<T> s = heap.top();
    const double mid = 0.5 * (s.a + s.b);
    if (!(mid > s.a && mid < s.b) || std::fabs(s.b - s.a) < 1e3 * kEps * std::max(std::fabs(s.a), std::fabs(s.b)))
      break;
    heap.pop();
    Segment<T> l = gk21<T>(f, s.a, mid);
    Segment<T> rr = gk21<T>(f, mid, s.b);
    evals += 42;
    total += l.value + rr.value - s.value;
    err += l.err + rr.err - s.err;
    heap.push(l);
    heap.push(rr);
    ++intervals;
  }
  // Re-sum to remove drift from incremental updates.
  T sum{};
  double esum = 0.0;
  std::vector<Segment<T>> all;
  all.reserve(heap.size());
  while (!heap.empty()) {
    all.push_back(heap.top());
    heap.pop();
  }
  std::sort(all.begin(), all.end(), [](const Segment<T>& x, const Segment<T>& y) { return x.a < y.a; });
  for (const auto& s : all) {
    sum += s.value;
    esum += s.err;
  }
  r.value = sum;
  r.abs_error = esum;
  r.evaluations = evals;
  r.converged = std::isfinite(esum) && esum <= std::max(opt.epsabs, opt.epsrel * norm_of(sum)) * 1.0000001;
  return r;
}

template <class T, class F>
BasicQuadResult<T> line_impl(const F& g, double lo, double hi, double hint, const QuadOptions& opt) {
  constexpr double kCap = 745.0;
  constexpr double kNegligible = 1e-17;
  bool settled = true;
  double start = std::clamp(hint, std::max(lo, -kCap), std::min(hi, kCap));
  double abs_sum = 0.0;

  auto march = [&](int dir, double limit) -> std::vector<double> {
    std::vector<double> edges;
    double x = start;
    int quiet = 0;
    int steps = 0;
    while (true) {
      double next = x + dir;
      bool hit_limit = false;
      if ((dir > 0 && next >= limit) || (dir < 0 && next <= limit)) {
        next = limit;
        hit_limit = true;
      }
      if (next == x) break;
      const Segment<T> s = gk21<T>(g, std::min(x, next), std::max(x, next));
      const double m = norm_of(s.value) + s.err;
      abs_sum += m;
      edges.push_back(next);
      x = next;
      ++steps;
      if (hit_limit) break;
      if (abs_sum == 0.0 ? steps > 60 : m <= kNegligible * abs_sum)
        ++quiet;
      else
        quiet = 0;
      if (quiet >= 3) break;
      if (std::fabs(x) >= kCap) {
        settled = false;
        break;
      }
    }
    return edges;
  };

  const double up_limit = std::isinf(hi) ? kCap : hi;
  const double down_limit = std::isinf(lo) ? -kCap : lo;
  std::vector<double> up = march(+1, up_limit);
  std::vector<double> down = march(-1, down_limit);
  if (std::isinf(hi) && !up.empty() && up.back() >= kCap) settled = false;
  if (std::isinf(lo) && !down.empty() && down.back() <= -kCap) settled = false;
  std::vector<double> all(down.rbegin(), down.rend());
  all.push_back(start);
  all.insert(all.end(), up.begin(), up.end());
  QuadOptions o = opt;
  o.max_intervals = std::max(opt.max_intervals, static_cast<int>(all.size()) * 8);
  BasicQuadResult<T> r = adaptive<T>(g, all, o);
  if (!settled) r.converged = false;
  return r;
}

}  // namespace

QuadResult integrate(const RealFn& f, double a, double b, const QuadOptions& opt) {
  return adaptive<double>(f, {a, b}, opt);
}

QuadResult integrate_points(const RealFn& f, const std::vector<double>& points, const QuadOptions& opt) {
  return adaptive<double>(f, points, opt);
}

ComplexQuadResult integrate_points_complex(const ComplexFn& f, const std::vector<double>& points, const QuadOptions& opt) {
  return adaptive<std::complex<double>>(f, points, opt);
}

QuadResult integrate_line(const RealFn& g, double lo, double hi, double hint, const QuadOptions& opt) {
  return line_impl<double>(g, lo, hi, hint, opt);
}

ComplexQuadResult integrate_line_complex(const ComplexFn& g, double lo, double hi, double hint, const QuadOptions& opt) {
  return line_impl<std::complex<double>>(g, lo, hi, hint, opt);
}

DivergenceCheck truncation_doubling(const RealFn& g, double anchor, int direction, double L0, int doublings,
                                    double tol) {
  DivergenceCheck out;
  out.divergent = true;
  QuadOptions opt;
  opt.epsrel = 1e-10;
  double prev = 0.0;
  for (int k = 0; k <= doublings; ++k) {
    const double L = L0 * std::ldexp(1.0, k);
    std::vector<double> pts;
    const int n = std::max(2, static_cast<int>(std::ceil(L)));
    for (int i = 0; i <= n; ++i) {
      const double frac = static_cast<double>(i) / n;
      pts.push_back(direction < 0 ? anchor - L + frac * L : anchor + frac * L);
    }
    const QuadResult r = integrate_points(g, pts, opt);
    out.estimates.push_back(r.value);
    if (!std::isfinite(r.value)) {
      out.value = r.value;
      out.divergent = true;
      return out;
    }
    if (k > 0) out.divergent = !(std::fabs(r.value - prev) <= tol * std::fabs(r.value));
    prev = r.value;
  }
  out.value = prev;
  return out;
}

}  // namespace supcar
