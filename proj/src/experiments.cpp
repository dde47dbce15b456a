#include "pspline/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "pspline/gridsearch.hpp"
#include "pspline/pls.hpp"

namespace pspline {

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

template <typename F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Scenario Scenario::from_id(int id) {
  if (id < 1 || id > 8) throw InvalidArgument("scenario id must be in 1..8");
  const int bits = id - 1;
  return {id, (bits & 1) != 0, (bits & 2) != 0, (bits & 4) != 0};
}

Replication make_replication(const Scenario& sc, Index p, int d, int m, std::uint64_t seed) {
  KnotVector kv = sc.equidistant_knots ? equidistant_knots(p, d) : random_knots(p, d, seed);
  std::vector<double> x = xs_between_knots(kv, 10, seed + 7);
  std::vector<double> w;
  if (sc.weighted_data) {
    // Beta(3,3) as a ratio of Gamma(3) draws
    std::mt19937_64 rng(seed + 13);
    std::gamma_distribution<double> g3(3.0, 1.0);
    w.resize(x.size());
    for (auto& wi : w) {
      const double a = g3(rng);
      const double c = g3(rng);
      wi = a / (a + c);
    }
  }
  PenaltyFactor pen = sc.derivative_penalty ? derivative_factor(kv, m) : general_diff(kv, m);
  DesignMatrix b = design_matrix(kv, x);
  return {std::move(kv), std::move(x), std::move(w), std::move(b), std::move(pen)};
}

ReplicationResult replication_coverage(const Replication& rep, double kappa, std::uint64_t seed) {
  const std::vector<double> y(rep.x.size(), 0.0);  // the interval does not depend on y
  std::optional<std::span<const double>> w;
  if (!rep.w.empty()) w = std::span<const double>(rep.w);
  const PlsProblem prob(rep.b, y, w, rep.d);

  ReplicationResult r;
  r.seed = seed;
  const EigenSummary s = eigen_summary(prob.factor(), prob.penalty(), seed);
  r.lambda_max = s.lambda_max;
  r.lambda_min = s.lambda_min;
  r.lambda_mean = s.lambda_mean;
  r.singular = s.singular;

  const Vectord all = all_eigenvalues(build_E(prob.factor(), prob.penalty()));
  const Vectord truth = all.cwiseMax(all(0) * std::numeric_limits<double>::epsilon());
  const double q = static_cast<double>(truth.size());
  r.rho_max = exact_interval(truth, kappa).rho_hi;
  r.rho_star_max = wide_interval(s, kappa).rho_hi;
  r.p_star = 1.0 - redf(r.rho_star_max, truth) / q;
  try {
    const ApproxSpectrum a = approx_spectrum(s.q, s.lambda_max, s.lambda_min, s.lambda_mean);
    r.rho_hat_max = heuristic_upper_bound(a, kappa);
    r.p_hat = 1.0 - redf(*r.rho_hat_max, truth) / q;
  } catch (const ApproximationFailure&) {
  }
  return r;
}

CoverageReport run_scenario(const Scenario& sc, Index p, int d, int m, int reps, std::uint64_t seed, double kappa) {
  if (reps < 1) throw InvalidArgument("reps must be >= 1");
  if (m < 1 || m > d - 1) throw InvalidOrder("need 1 <= m <= d-1");
  if (p < d) throw InvalidArgument("need p >= d");
  CoverageReport out;
  out.scenario = sc.id;
  out.p = p;
  out.d = d;
  out.m = m;
  out.reps = reps;
  out.seed = seed;
  out.kappa = kappa;
  for (int r = 0; r < reps; ++r) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(r);
    try {
      const ReplicationResult res = replication_coverage(make_replication(sc, p, d, m, s), kappa, s);
      if (!res.p_hat) ++out.heuristic_failures;
      out.results.push_back(res);
    } catch (const Error&) {
      ++out.construction_failures;
    }
  }
  return out;
}

std::string to_json(const CoverageReport& r) {
  nlohmann::json j;
  j["schema"] = 1;
  j["scenario"] = r.scenario;
  const Scenario sc = Scenario::from_id(r.scenario);
  j["derivative_penalty"] = sc.derivative_penalty;
  j["equidistant_knots"] = sc.equidistant_knots;
  j["weighted_data"] = sc.weighted_data;
  j["p"] = r.p;
  j["d"] = r.d;
  j["m"] = r.m;
  j["reps"] = r.reps;
  j["seed"] = r.seed;
  j["kappa"] = r.kappa;
  j["heuristic_failures"] = r.heuristic_failures;
  j["construction_failures"] = r.construction_failures;
  nlohmann::json p_star = nlohmann::json::array();
  nlohmann::json p_hat = nlohmann::json::array();
  for (const auto& x : r.results) {
    p_star.push_back(x.p_star);
    p_hat.push_back(x.p_hat ? nlohmann::json(*x.p_hat) : nlohmann::json(nullptr));
  }
  j["p_star_max"] = std::move(p_star);
  j["p_hat_max"] = std::move(p_hat);
  return j.dump(2);
}

std::string to_csv(const CoverageReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "scenario,p,d,m,seed,lambda_max,lambda_min,lambda_mean,singular,rho_max,rho_star_max,rho_hat_max,p_star_max,"
        "p_hat_max\n";
  for (const auto& x : r.results) {
    os << r.scenario << ',' << r.p << ',' << r.d << ',' << r.m << ',' << x.seed << ',' << x.lambda_max << ','
       << x.lambda_min << ',' << x.lambda_mean << ',' << (x.singular ? 1 : 0) << ',' << x.rho_max << ','
       << x.rho_star_max << ',';
    if (x.rho_hat_max) os << *x.rho_hat_max;
    os << ',' << x.p_star << ',';
    if (x.p_hat) os << *x.p_hat;
    os << '\n';
  }
  return os.str();
}

Density coverage_density(const CoverageReport& r, int bins) {
  if (bins < 1) throw InvalidArgument("bins must be >= 1");
  std::vector<double> hat;
  double star = 0.0;
  for (const auto& x : r.results) {
    if (x.p_hat) hat.push_back(*x.p_hat);
    star += x.p_star;
  }
  if (hat.size() < 2) throw TooFewSamples("coverage_density needs at least 2 heuristic samples");
  Density out;
  out.counts.assign(static_cast<std::size_t>(bins), 0);
  out.mean_p_star = star / static_cast<double>(r.results.size());
  const double width = (out.hi - out.lo) / bins;
  for (double v : hat) {
    if (v < out.lo) {
      ++out.below;
      continue;
    }
    const int k = std::min(bins - 1, static_cast<int>((v - out.lo) / width));
    ++out.counts[static_cast<std::size_t>(k)];
  }
  for (int c : out.counts) out.density.push_back(c / (static_cast<double>(hat.size()) * width));
  return out;
}

std::vector<BenchRow> bench_intervals(const std::vector<Index>& p_list, int reps, std::uint64_t seed) {
  if (reps < 1) throw InvalidArgument("reps must be >= 1");
  if (!std::is_sorted(p_list.begin(), p_list.end())) throw InvalidArgument("p values must be ascending");
  std::vector<BenchRow> rows;
  for (Index p : p_list) {
    const Scenario sc = Scenario::from_id(3);
    const Replication rep = make_replication(sc, p, 4, 2, seed);
    std::vector<double> y(rep.x.size());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.2);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::sin(2.0 * std::numbers::pi * rep.x[i] / p) + noise(rng);
    const PlsProblem prob(rep.b, y, std::nullopt, rep.d);

    std::vector<double> ta, tb, tc;
    SearchInterval iv;
    for (int r = 0; r < reps; ++r) {
      ta.push_back(seconds([&] { iv = auto_interval(prob, kDefaultKappa, IntervalMode::heuristic_preferred, seed).interval; }));
      tb.push_back(seconds([&] { auto_interval(prob, kDefaultKappa, IntervalMode::exact, seed); }));
      const std::vector<double> grid = make_grid(iv, 20);
      tc.push_back(seconds([&] {
        for (double rho : grid) solve_at(prob, rho);
      }));
    }
    rows.push_back({p, median(ta), median(tb), median(tc)});
  }
  return rows;
}

double loglog_slope(const std::vector<double>& p, const std::vector<double>& t) {
  if (p.size() != t.size() || p.size() < 2) throw InvalidArgument("need at least two (p, t) pairs");
  const Index n = static_cast<Index>(p.size());
  Vectord x(n), y(n);
  for (Index i = 0; i < n; ++i) {
    x(i) = std::log(p[static_cast<std::size_t>(i)]);
    y(i) = std::log(t[static_cast<std::size_t>(i)]);
  }
  const double xm = x.mean();
  const double ym = y.mean();
  return ((x.array() - xm) * (y.array() - ym)).sum() / (x.array() - xm).square().sum();
}

std::string to_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os.precision(6);
  os << "p,wide_heuristic_s,exact_s,grid20_s\n";
  for (const auto& r : rows) os << r.p << ',' << r.wide_heuristic << ',' << r.exact << ',' << r.grid20 << '\n';
  return os.str();
}

Dataset two_scale_data(Index n, std::uint64_t seed, double amp, double cycles, double sd) {
  if (n < 2) throw InvalidArgument("two_scale_data needs n >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sd);
  Dataset out;
  out.x.resize(static_cast<std::size_t>(n));
  out.y.resize(static_cast<std::size_t>(n));
  const double two_pi = 2.0 * std::numbers::pi;
  for (Index i = 0; i < n; ++i) {
    const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    out.x[static_cast<std::size_t>(i)] = x;
    out.y[static_cast<std::size_t>(i)] = std::sin(two_pi * x) + amp * std::sin(two_pi * cycles * x) + noise(rng);
  }
  return out;
}

}  // namespace pspline
