#include "pspline/interval.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace pspline {

namespace {

// s = 1/(1+e^x) and s(1−s), without overflow for large |x|.
std::pair<double, double> logistic(double x) {
  if (x > 0.0) {
    const double t = std::exp(-x);
    const double s = t / (1.0 + t);
    return {s, s / (1.0 + t)};
  }
  const double t = std::exp(x);
  const double s = 1.0 / (1.0 + t);
  return {s, s * t / (1.0 + t)};
}

void check_kappa(double kappa) {
  if (!(kappa > 0.0 && kappa < 0.5)) throw InvalidArgument("kappa must lie in (0, 0.5)");
}

void check_spectrum(const Vectord& lambdas) {
  if (lambdas.size() < 1) throw InvalidDimensions("empty spectrum");
  if (!(lambdas.minCoeff() > 0.0)) throw InvalidArgument("eigenvalues must be positive");
}

// Bisection on a decreasing g with g(lo) > 0 > g(hi).
double bisect(const std::function<double(double)>& g, double lo, double hi) {
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    (gm > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Solves redf(ρ; λ) = target by Newton from x0, falling back to bisection
// on [lo, hi] when the root finder fails or lands short.
double redf_root(const Vectord& lambdas, double target, double x0, double lo, double hi) {
  const auto g = [&](double r) { return redf(r, lambdas) - target; };
  const auto gp = [&](double r) { return redf_derivative(r, lambdas); };
  const double tol = 1e-9 * static_cast<double>(lambdas.size());
  try {
    const double r = newton_root(g, gp, x0, 20.0);
    if (std::abs(g(r)) <= tol) return r;
  } catch (const NumericalError&) {
  }
  while (g(lo) < 0.0) lo -= 5.0;
  while (g(hi) > 0.0) hi += 5.0;
  return bisect(g, lo, hi);
}

}  // namespace

std::string_view to_string(IntervalKind k) {
  switch (k) {
    case IntervalKind::exact: return "exact";
    case IntervalKind::wide: return "wide";
    case IntervalKind::heuristic: return "heuristic";
  }
  return "?";
}

std::string_view to_string(IntervalMode m) {
  switch (m) {
    case IntervalMode::exact: return "exact";
    case IntervalMode::wide: return "wide";
    case IntervalMode::heuristic_preferred: return "heuristic";
  }
  return "?";
}

double redf(double rho, const Vectord& lambdas) {
  double s = 0.0;
  for (Index j = 0; j < lambdas.size(); ++j) s += logistic(rho + std::log(lambdas(j))).first;
  return s;
}

double redf_derivative(double rho, const Vectord& lambdas) {
  double s = 0.0;
  for (Index j = 0; j < lambdas.size(); ++j) s -= logistic(rho + std::log(lambdas(j))).second;
  return s;
}

double newton_root(const std::function<double(double)>& g, const std::function<double(double)>& g_prime, double x0,
                   double delta_max, int max_iterations) {
  if (!(delta_max > 0.0)) throw InvalidArgument("newton_root needs delta_max > 0");
  double x = x0;
  double gx = g(x);
  for (int it = 0; it < max_iterations; ++it) {
    if (gx == 0.0) return x;
    const double gp = g_prime(x);
    if (gp == 0.0 || !std::isfinite(gp)) throw ZeroDerivative("g' vanishes at x=" + std::to_string(x));
    double delta = -gx / gp;
    if (std::abs(delta) <= 1e-12 * std::max(1.0, std::abs(x))) return x;
    delta = std::copysign(std::min(std::abs(delta), delta_max), delta);
    double xt = x;
    double gt = gx;
    int halvings = 0;
    for (; halvings < 60; ++halvings) {
      xt = x + delta;
      gt = g(xt);
      if (std::abs(gt) < std::abs(gx)) break;
      delta /= 2.0;
    }
    if (halvings == 60) return x;  // no decrease left at working precision
    x = xt;
    gx = gt;
  }
  throw MaxIterationsExceeded("newton_root: no convergence in " + std::to_string(max_iterations) + " steps");
}

SearchInterval exact_interval(const Vectord& lambdas, double kappa) {
  check_kappa(kappa);
  check_spectrum(lambdas);
  const Index q = lambdas.size();
  const double qd = static_cast<double>(q);
  EigenSummary s;
  s.lambda_max = lambdas.maxCoeff();
  s.lambda_min = lambdas.minCoeff();
  s.lambda_mean = lambdas.mean();
  s.q = q;
  const SearchInterval wide = wide_interval(s, kappa);
  const double lo = wide.rho_lo - 5.0;
  const double hi = wide.rho_hi + 5.0;
  SearchInterval out;
  out.rho_lo = redf_root(lambdas, (1.0 - kappa) * qd, wide.rho_lo, lo, hi);
  out.rho_hi = redf_root(lambdas, kappa * qd, wide.rho_hi, lo, hi);
  out.kind = IntervalKind::exact;
  out.kappa = kappa;
  out.q = q;
  return out;
}

SearchInterval wide_interval(const EigenSummary& summary, double kappa) {
  check_kappa(kappa);
  if (!(summary.lambda_min > 0.0 && summary.lambda_mean > 0.0))
    throw InvalidArgument("wide_interval needs positive lambda_min and lambda_mean");
  SearchInterval out;
  out.rho_lo = std::log(kappa / ((1.0 - kappa) * summary.lambda_mean));
  out.rho_hi = std::log((1.0 - kappa) / (kappa * summary.lambda_min));
  out.kind = IntervalKind::wide;
  out.kappa = kappa;
  out.q = summary.q;
  return out;
}

ApproxSpectrum approx_spectrum(Index q, double lambda_max, double lambda_min, double lambda_mean) {
  if (q < 2) throw InvalidArgument("approx_spectrum needs q >= 2");
  if (!(lambda_min > 0.0 && lambda_min <= lambda_mean && lambda_mean <= lambda_max))
    throw InvalidArgument("approx_spectrum needs 0 < lambda_min <= lambda_mean <= lambda_max");
  const double a = std::log(lambda_min);
  const double b = std::log(lambda_max);
  const double qd = static_cast<double>(q);
  const Vectord t = Vectord::LinSpaced(q, 1.0, qd) / (qd + 1.0);

  ApproxSpectrum out{Vectord::Zero(q), 0};
  Vectord theta(q), h(q);
  // g(α)/(qλ̄) keeps the root solve scale-free
  // residuals at rounding level count as roots
  const auto g = [&](double alpha) {
    const double v = (theta + alpha * h).array().exp().sum() / (qd * lambda_mean) - 1.0;
    return std::abs(v) <= 1e-12 ? 0.0 : v;
  };
  const auto gp = [&](double alpha) { return (h.array() * (theta + alpha * h).array().exp()).sum() / (qd * lambda_mean); };
  const auto attempt = [&](double al, double ar) {
    const double gl = g(al);
    const double gr = g(ar);
    if (!(gl * gr <= 0.0)) return;
    double alpha = al;
    if (gr == 0.0) {
      alpha = ar;
    } else if (gl != 0.0 && ar > al) {
      try {
        alpha = newton_root(g, gp, 0.5 * (al + ar), 0.25 * (ar - al));
      } catch (const NumericalError&) {
        return;
      }
    }
    out.lambda_hat += (theta + alpha * h).array().exp().matrix();
    ++out.n_successes;
  };

  for (int k = 0; k <= 20; ++k) {
    const double gamma = 0.05 * k;
    const Vectord zp = (1.0 - t.array()).log() - gamma * t.array().log();
    const Vectord z = (zp.array() - zp(q - 1)) / (zp(0) - zp(q - 1));

    theta = a + (b - a) * z.array();
    h = z.array().square() - z.array();
    attempt(0.0, b - a);

    const Eigen::ArrayXd c0 = (1.0 - z.array()).cube();
    const Eigen::ArrayXd c1 = 3.0 * z.array() * (1.0 - z.array()).square();
    const Eigen::ArrayXd c2 = 3.0 * z.array().square() * (1.0 - z.array());
    const Eigen::ArrayXd c3 = z.array().cube();
    theta = a * (c0 + c2) + b * (c2 + c3);
    h = c1 - c2;
    attempt(a, (2.0 * a + b) / 3.0);
  }
  if (out.n_successes == 0) throw ApproximationFailure("unable to approximate the eigenvalues");
  out.lambda_hat /= static_cast<double>(out.n_successes);
  return out;
}

namespace {

double heuristic_root(const ApproxSpectrum& spec, double kappa, bool upper) {
  check_kappa(kappa);
  check_spectrum(spec.lambda_hat);
  const Index q = spec.lambda_hat.size();
  EigenSummary s;
  s.lambda_min = spec.lambda_hat.minCoeff();
  s.lambda_mean = spec.lambda_hat.mean();
  s.q = q;
  const SearchInterval wide = wide_interval(s, kappa);
  const double target = (upper ? kappa : 1.0 - kappa) * static_cast<double>(q);
  return redf_root(spec.lambda_hat, target, upper ? wide.rho_hi : wide.rho_lo, wide.rho_lo - 5.0, wide.rho_hi + 5.0);
}

}  // namespace

double heuristic_upper_bound(const ApproxSpectrum& spec, double kappa) { return heuristic_root(spec, kappa, true); }

double heuristic_lower_bound(const ApproxSpectrum& spec, double kappa) { return heuristic_root(spec, kappa, false); }

IntervalReport auto_interval(const PlsProblem& prob, double kappa, IntervalMode mode, std::uint64_t seed) {
  check_kappa(kappa);
  IntervalReport r;
  if (mode == IntervalMode::exact) {
    const Vectord all = all_eigenvalues(build_E(prob.factor(), prob.penalty()));
    const double floor = all(0) * std::numeric_limits<double>::epsilon();
    Vectord clamped = all.cwiseMax(floor);
    r.summary.lambda_max = all(0);
    r.summary.lambda_min = clamped(clamped.size() - 1);
    r.summary.lambda_mean = clamped.mean();
    r.summary.q = clamped.size();
    r.summary.singular = all(all.size() - 1) < floor;
    r.interval = exact_interval(clamped, kappa);
  } else {
    r.summary = eigen_summary(prob.factor(), prob.penalty(), seed);
  }
  const SearchInterval wide = wide_interval(r.summary, kappa);
  r.rho_star_min = wide.rho_lo;
  r.rho_star_max = wide.rho_hi;
  if (mode == IntervalMode::exact) return r;
  r.interval = wide;
  if (mode == IntervalMode::wide) return r;

  try {
    const EigenSummary& s = r.summary;
    if (s.q < 2) throw ApproximationFailure("q < 2");
    const ApproxSpectrum spec = approx_spectrum(s.q, s.lambda_max, s.lambda_min, s.lambda_mean);
    r.rho_hat_max = heuristic_upper_bound(spec, kappa);
    r.rho_hat_min = heuristic_lower_bound(spec, kappa);
    if (*r.rho_hat_max > wide.rho_lo) {
      r.interval.rho_hi = *r.rho_hat_max;
      r.interval.kind = IntervalKind::heuristic;
    } else {
      r.heuristic_failed = true;
    }
  } catch (const ApproximationFailure&) {
    r.heuristic_failed = true;
  }
  return r;
}

}  // namespace pspline
