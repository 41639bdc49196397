#include <catch2/catch_amalgamated.hpp>

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "supcar/levy.hpp"
#include "supcar/model.hpp"
#include "supcar/quad.hpp"

using namespace supcar;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using cd = std::complex<double>;

namespace {

std::vector<LevyMeasureSpec> families() {
  return {LevyMeasureSpec::gamma_subordinator(2.0, 3.0),      LevyMeasureSpec::inverse_gaussian(1.5, 0.8),
          LevyMeasureSpec::tempered_stable(0.5, 1.0, 1.0, 0.5), LevyMeasureSpec::tempered_stable(1.0, 2.0, 0.7, 0.7),
          LevyMeasureSpec::tempered_stable(1.5, 1.0, 1.0, 0.0), LevyMeasureSpec::tempered_stable(1.9, 0.5, 0.3, 1.0)};
}

CharacteristicQuadruple quad_of(const LevyMeasureSpec& w, double b) {
  CharacteristicQuadruple q;
  q.b = b;
  q.levy = w;
  q.mixing = MixingMeasureSpec::gamma_mix(5.0);
  return q;
}

bool rel_close(cd a, cd b, double tol) { return std::abs(a - b) <= tol * std::abs(b); }

// Finite iff int_0^1 x^gamma W(dx) converges, judged by truncation doubling in u = ln x.
bool small_jump_moment_finite(const LevyMeasureSpec& w, double gamma) {
  auto g = [&](double u) {
    const double x = std::exp(u);
    return std::exp((1.0 + gamma) * u + levy_log_density(w, x)) + std::exp((1.0 + gamma) * u + levy_log_density(w, -x));
  };
  return !truncation_doubling(g, 0.0, -1, 5.0, 6, 1e-3).divergent;
}

double bisect_bg(const LevyMeasureSpec& w) {
  if (small_jump_moment_finite(w, 0.0)) return 0.0;
  double lo = 0.0, hi = 2.0;
  for (int i = 0; i < 30; ++i) {
    const double m = 0.5 * (lo + hi);
    (small_jump_moment_finite(w, m) ? hi : lo) = m;
  }
  return hi;
}

}  // namespace

TEST_CASE("truncation function", "[levy]") {
  CHECK(truncation_tau(0.3) == 0.3);
  CHECK(truncation_tau(-1.0) == -1.0);
  CHECK(truncation_tau(4.0) == 1.0);
  CHECK(truncation_tau(-2.5) == -1.0);
}

TEST_CASE("cumulant examples", "[levy]") {
  for (const auto& w : families()) CHECK(cumulant(quad_of(w, 0.7), 0.0) == cd(0.0));
  const auto g = quad_of(LevyMeasureSpec::gamma_subordinator(2.0, 3.0), 0.0);
  const cd I(0.0, 1.0);
  const cd expect = 2.0 * (std::log(3.0 / (3.0 - I)) - I / 3.0);
  CHECK(rel_close(cumulant(g, 1.0), expect, 1e-13));
  CHECK(rel_close(cumulant_quadrature(g, 1.0), expect, 1e-8));
  CharacteristicQuadruple gauss;
  gauss.b = 4.0;
  CHECK(cumulant(gauss, 2.0) == cd(-8.0));
}

TEST_CASE("closed form and quadrature cumulants agree", "[levy]") {
  for (const auto& w : families()) {
    for (double s : {-7.0, -1.0, -0.05, 1e-3, 0.01, 0.3, 1.0, 2.5, 10.0}) {
      const cd a = levy_cumulant(w, s);
      const cd b = levy_cumulant_quadrature(w, s);
      INFO(w.name() << " beta=" << w.beta << " s=" << s << " closed=" << a << " quad=" << b);
      CHECK(rel_close(a, b, 1e-7));
    }
  }
}

TEST_CASE("second derivative at zero", "[levy]") {
  for (const auto& w : families()) {
    const auto q = quad_of(w, 0.3);
    const double h = 1e-3;
    const double fd = (cumulant(q, h) - 2.0 * cumulant(q, 0.0) + cumulant(q, -h)).real() / (h * h);
    const auto kd = cumulant_derivatives(q);
    INFO(w.name() << " beta=" << w.beta);
    CHECK(kd.k1 == cd(0.0));
    CHECK_THAT(fd, WithinRel(kd.k2, 1e-5));
  }
  CHECK_THAT(cumulant_derivatives(quad_of(LevyMeasureSpec::gamma_subordinator(2.0, 3.0), 0.0)).k2,
             WithinRel(-2.0 / 9.0, 1e-14));
  CharacteristicQuadruple gauss;
  gauss.b = 2.5;
  CHECK(cumulant_derivatives(gauss).k2 == -2.5);
  // int x^2 c beta x^{-1-beta} e^{-theta x} dx by quadrature
  const auto ts = LevyMeasureSpec::tempered_stable(0.5, 1.0, 1.0, 0.0);
  const QuadResult m2 =
      integrate_line([&](double u) { return std::exp(2 * u) * levy_density(ts, std::exp(u)) * std::exp(u); },
                     -INFINITY, INFINITY, 0.0);
  CHECK_THAT(-cumulant_derivatives(quad_of(ts, 0.0)).k2, WithinRel(m2.value, 1e-9));
  CHECK_THAT(m2.value, WithinRel(0.5 * std::tgamma(1.5), 1e-9));
  // inverse Gaussian: int x^2 W = mu^2 + mu^3/alpha
  const auto ig = LevyMeasureSpec::inverse_gaussian(1.5, 0.8);
  const QuadResult m2ig =
      integrate_line([&](double u) { return std::exp(2 * u) * levy_density(ig, std::exp(u)) * std::exp(u); },
                     -INFINITY, INFINITY, 0.0);
  CHECK_THAT(levy_second_moment(ig), WithinRel(m2ig.value, 1e-9));
}

TEST_CASE("Blumenthal-Getoor index", "[levy]") {
  CHECK(bg_index(LevyMeasureSpec::gamma_subordinator(1.0, 1.0)) == 0.0);
  CHECK(bg_index(LevyMeasureSpec::tempered_stable(1.9, 1.0, 1.0, 1.0)) == 1.9);
  CHECK(bg_index(LevyMeasureSpec::inverse_gaussian(1.0, 1.0)) == 0.0);
  CHECK_THAT(bisect_bg(LevyMeasureSpec::gamma_subordinator(1.0, 1.0)), WithinAbs(0.0, 0.05));
  CHECK_THAT(bisect_bg(LevyMeasureSpec::tempered_stable(1.9, 1.0, 1.0, 1.0)), WithinAbs(1.9, 0.05));
  CHECK_THAT(bisect_bg(LevyMeasureSpec::tempered_stable(0.5, 1.0, 1.0, 0.0)), WithinAbs(0.5, 0.05));
  // the exp(-alpha/(2x)) factor removes the x^{-3/2} singularity
  CHECK_THAT(bisect_bg(LevyMeasureSpec::inverse_gaussian(1.0, 1.0)), WithinAbs(0.0, 0.05));
}

TEST_CASE("tail masses", "[levy]") {
  CHECK_THAT(tail_mass(LevyMeasureSpec::tempered_stable(0.5, 0.0, 1.0, 0.0), 4.0, Side::plus), WithinRel(0.5, 1e-14));
  CHECK(tail_mass(LevyMeasureSpec::gamma_subordinator(1.0, 1.0), 1.0, Side::minus) == 0.0);
  CHECK(tail_mass(LevyMeasureSpec::inverse_gaussian(1.0, 2.0), 1.0, Side::minus) == 0.0);
  CHECK_THAT(tail_mass(LevyMeasureSpec::gamma_subordinator(1.0, 1.0), 1.0, Side::plus),
             WithinRel(0.21938393439552026, 1e-12));
  CHECK_THAT(tail_mass(LevyMeasureSpec::gamma_subordinator(2.0, 3.0), 0.4, Side::plus),
             WithinRel(2.0 * boost::math::expint(1, 1.2), 1e-12));
  for (const auto& w : families()) {
    for (Side side : {Side::plus, Side::minus}) {
      double prev = INFINITY;
      for (double x : {1e-4, 1e-2, 0.3, 1.0, 2.0, 5.0}) {
        const double t = tail_mass(w, x, side);
        CHECK(t <= prev);
        prev = t;
        const double sgn = side == Side::plus ? 1.0 : -1.0;
        const QuadResult q = integrate_line(
            [&](double u) { return levy_density(w, sgn * std::exp(u)) * std::exp(u); }, std::log(x), INFINITY,
            std::log(x));
        INFO(w.name() << " x=" << x);
        CHECK_THAT(t, WithinRel(q.value, 1e-8) || WithinAbs(q.value, 1e-300));
      }
    }
  }
  for (double beta : {0.5, 1.9}) {
    const auto w = LevyMeasureSpec::tempered_stable(beta, 1.0, 1.3, 0.4);
    CHECK_THAT(std::pow(1e-4, beta) * tail_mass(w, 1e-4, Side::plus), WithinRel(1.3, 0.05));
    CHECK_THAT(std::pow(1e-4, beta) * tail_mass(w, 1e-4, Side::minus), WithinRel(0.4, 0.05));
  }
}

TEST_CASE("Rajput-Rosinski integrands", "[levy]") {
  for (const auto& w : families()) {
    CHECK(v0(w, 0.0) == 0.0);
    CHECK(v1(w, 0.0) == 0.0);
    CHECK(v1(w, 1.0) == 0.0);
  }
  const auto g = LevyMeasureSpec::gamma_subordinator(1.0, 1.0);
  // brute-force trapezoid on a log grid
  auto trap = [&](auto h) {
    const int n = 400000;
    const double lo = -40.0, hi = 6.0;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double u = lo + (hi - lo) * i / n;
      const double x = std::exp(u);
      const double v = h(x) * levy_density(g, x) * x;
      s += (i == 0 || i == n) ? 0.5 * v : v;
    }
    return s * (hi - lo) / n;
  };
  const double r = 0.5;
  const double ref0 = trap([r](double x) { return std::min(1.0, r * r * x * x); });
  CHECK_THAT(v0(g, r), WithinRel(ref0, 1e-6));
  const double ref1 = trap([r](double x) { return truncation_tau(r * x) - r * truncation_tau(x); });
  CHECK_THAT(v1(g, r), WithinRel(ref1, 1e-6));
  const double r2 = 3.0;
  const double ref1b = trap([r2](double x) { return truncation_tau(r2 * x) - r2 * truncation_tau(x); });
  CHECK_THAT(v1(g, r2), WithinRel(ref1b, 1e-6));
}

TEST_CASE("stable omega", "[levy]") {
  CHECK(stable_omega(0.7, 2.0, 1.0, 0.3).imag() == Catch::Approx(0.0).margin(1e-15));
  const cd w = stable_omega(1.0, 1.5, 1.0, 1.0);
  CHECK_THAT(w.real(), WithinRel(std::sqrt(std::numbers::pi) / -0.5 * 2.0 * std::cos(0.75 * std::numbers::pi), 1e-14));
  CHECK_THAT(w.real(), WithinRel(5.0132565492620, 1e-12));
  const cd a = stable_omega(2.0, 0.7, 1.0, 0.2);
  const cd b = stable_omega(-2.0, 0.7, 1.0, 0.2);
  CHECK(a == std::conj(b));
  CHECK_THAT(stable_omega(1.0, 1.0, 0.5, 0.5).real(), WithinRel(0.5 * std::numbers::pi, 1e-15));
  CHECK_THROWS(stable_omega(1.0, 1.0, 0.5, 0.6));
}

TEST_CASE("cell increments", "[levy][sampling]") {
  struct Case {
    LevyMeasureSpec w;
    double b;
  };
  const std::vector<Case> cases{{LevyMeasureSpec::gamma_subordinator(2.0, 3.0), 0.0},
                                {LevyMeasureSpec::inverse_gaussian(1.5, 0.8), 0.5},
                                {LevyMeasureSpec::tempered_stable(0.5, 1.0, 1.0, 0.5), 0.0},
                                {LevyMeasureSpec::tempered_stable(1.9, 1.0, 1.0, 1.0), 0.0},
                                {LevyMeasureSpec::none(), 2.0}};
  const int n = 100000;
  for (size_t ci = 0; ci < cases.size(); ++ci) {
    const auto& c = cases[ci];
    const double area = 0.37;
    RngStream rng(42, ci);
    const IncrementPlan plan = make_increment_plan(c.w, c.b, -1.0, area);
    double s1 = 0, s2 = 0, s4 = 0;
    for (int i = 0; i < n; ++i) {
      const double x = draw_increment(plan, area, rng);
      s1 += x;
      s2 += x * x;
      s4 += x * x * x * x;
    }
    const double mean = s1 / n;
    const double var = s2 / n - mean * mean;
    const double target = (c.b + levy_second_moment(c.w)) * area;
    INFO("case " << ci);
    CHECK(std::fabs(mean) <= 4.0 * std::sqrt(var / n));
    const double se_var = std::sqrt((s4 / n - (s2 / n) * (s2 / n)) / n);
    CHECK(std::fabs(var - target) <= 4.0 * se_var);
  }
}

TEST_CASE("increment streams are deterministic", "[levy][sampling]") {
  const auto w = LevyMeasureSpec::tempered_stable(0.5, 1.0, 1.0, 1.0);
  RngStream a(7, 3), b(7, 3), c(7, 4);
  bool all_same = true, any_diff = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = sample_increment(w, 0.2, 0.5, a);
    const double y = sample_increment(w, 0.2, 0.5, b);
    const double z = sample_increment(w, 0.2, 0.5, c);
    all_same = all_same && (x == y);
    any_diff = any_diff || (x != z);
  }
  CHECK(all_same);
  CHECK(any_diff);
}

TEST_CASE("increment additivity through the empirical cumulant", "[levy][sampling]") {
  const std::vector<LevyMeasureSpec> ws{LevyMeasureSpec::gamma_subordinator(2.0, 3.0),
                                        LevyMeasureSpec::inverse_gaussian(1.5, 0.8),
                                        LevyMeasureSpec::tempered_stable(0.5, 1.0, 1.0, 0.5)};
  const double a1 = 0.3, a2 = 0.9;
  const int n = 100000;
  for (size_t k = 0; k < ws.size(); ++k) {
    const auto& w = ws[k];
    RngStream rng(99, k);
    const IncrementPlan p1 = make_increment_plan(w, 0.0, -1.0, a1);
    const IncrementPlan p2 = make_increment_plan(w, 0.0, -1.0, a2);
    for (double s : {0.8, 2.0}) {
      cd sum = 0.0;
      double sr2 = 0.0, si2 = 0.0;
      for (int i = 0; i < n; ++i) {
        const double x = draw_increment(p1, a1, rng) + draw_increment(p2, a2, rng);
        const cd e = std::exp(cd(0.0, s * x));
        sum += e;
        sr2 += e.real() * e.real();
        si2 += e.imag() * e.imag();
      }
      const cd phi = sum / static_cast<double>(n);
      const cd target = std::exp((a1 + a2) * levy_cumulant(w, s));
      const double se_r = std::sqrt((sr2 / n - phi.real() * phi.real()) / n);
      const double se_i = std::sqrt((si2 / n - phi.imag() * phi.imag()) / n);
      INFO(w.name() << " s=" << s << " phi=" << phi << " target=" << target);
      CHECK(std::fabs(phi.real() - target.real()) <= 3.0 * se_r);
      CHECK(std::fabs(phi.imag() - target.imag()) <= 3.0 * se_i);
    }
  }
}
