#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "pspline/gridsearch.hpp"

using namespace pspline;

namespace {

CriterionCurve synthetic(std::vector<double> gcv) {
  CriterionCurve c;
  const std::size_t n = gcv.size();
  for (std::size_t i = 0; i < n; ++i) c.rhos.push_back(static_cast<double>(i));
  c.edf.assign(n, 1.0);
  c.reml = gcv;
  for (auto& r : c.reml) r = -r;
  c.gcv = std::move(gcv);
  return c;
}

}  // namespace

TEST_CASE("make_grid") {
  SearchInterval s;
  s.rho_lo = 0.0;
  s.rho_hi = 1.0;
  CHECK(make_grid(s, 3) == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(make_grid(s, 2) == std::vector<double>{0.0, 1.0});
  s.rho_lo = -6.15;
  s.rho_hi = 14.93;
  const auto g = make_grid(s, 100);
  CHECK(g.front() == s.rho_lo);
  CHECK(g.back() == s.rho_hi);
  const double h = (s.rho_hi - s.rho_lo) / 99.0;
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(std::abs(g[i] - g[i - 1] - h) < 1e-12);
  CHECK_THROWS_AS(make_grid(s, 1), InvalidArgument);
}

TEST_CASE("evaluate: matches solve_at, monotone edf, isolated failures") {
  const auto inst = fixture::make_instance(50, 4, 2, false, true, false, 1);
  const PlsProblem prob(inst.b, inst.y, std::nullopt, inst.d);

  const CriterionCurve one = evaluate(prob, {0.0});
  const PlsFit fit = solve_at(prob, 0.0);
  CHECK(one.edf[0] == fit.edf);
  CHECK(one.gcv[0] == fit.gcv);
  CHECK(one.reml[0] == fit.reml);

  const IntervalReport r = auto_interval(prob, kDefaultKappa, IntervalMode::heuristic_preferred, 1);
  const CriterionCurve c = evaluate(prob, make_grid(r.interval, 60));
  CHECK(c.failures.empty());
  for (Index i = 1; i < c.size(); ++i) CHECK(c.edf[i] <= c.edf[i - 1]);

  std::vector<double> grid = {-2.0, 0.0, 1000.0, 2.0};
  const CriterionCurve bad = evaluate(prob, grid);
  REQUIRE(bad.failures == std::vector<Index>{2});
  CHECK_FALSE(bad.ok(2));
  CHECK(std::isnan(bad.gcv[2]));
  CHECK(bad.gcv[3] == solve_at(prob, 2.0).gcv);
  CHECK(select_optimum(bad, Criterion::gcv).index != 2);
  CHECK_THROWS_AS(evaluate(prob, {1000.0, 2000.0}), AllPointsFailed);
}

TEST_CASE("select_optimum: argmin, ties, REML maximum") {
  const CriterionCurve convex = synthetic({5.0, 3.0, 1.0, 2.0, 4.0});
  const Selection s = select_optimum(convex, Criterion::gcv);
  CHECK(s.index == 2);
  CHECK(s.value == 1.0);
  CHECK(select_optimum(convex, Criterion::reml).index == 2);

  const CriterionCurve tie = synthetic({2.0, 1.0, 3.0, 1.0, 2.0});
  CHECK(select_optimum(tie, Criterion::gcv).index == 3);

  const CriterionCurve two = synthetic({3.0, 1.5, 2.5, 0.5, 2.0});
  CHECK(select_optimum(two, Criterion::gcv).index == 3);
  CHECK(local_optima(two, Criterion::gcv) == std::vector<Index>{1, 3});

  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> u(0, 5);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> v(20);
    for (auto& x : v) x = u(rng);
    const CriterionCurve c = synthetic(v);
    Index best = 0;
    for (Index i = 0; i < 20; ++i)
      if (v[static_cast<std::size_t>(i)] <= v[static_cast<std::size_t>(best)]) best = i;
    CHECK(select_optimum(c, Criterion::gcv).index == best);
  }

  CriterionCurve none = synthetic({1.0, 2.0});
  none.failures = {0, 1};
  CHECK_THROWS_AS(select_optimum(none, Criterion::gcv), AllPointsFailed);
}

TEST_CASE("boundary_warning") {
  const CriterionCurve c = synthetic({1.0, 2.0, 3.0});
  CHECK(boundary_warning(c, {0.0, 0, 1.0}).has_value());
  CHECK(boundary_warning(c, {2.0, 2, 3.0}).has_value());
  CHECK_FALSE(boundary_warning(c, {1.0, 1, 2.0}).has_value());
}

TEST_CASE("grid depends only on design and penalty; refinement never worsens") {
  const auto inst = fixture::make_instance(40, 4, 2, true, false, false, 4);
  const PlsProblem a(inst.b, inst.y, std::nullopt, inst.d);
  std::vector<double> y2 = inst.y;
  for (std::size_t i = 0; i < y2.size(); ++i) y2[i] = std::cos(static_cast<double>(i));
  const PlsProblem b(inst.b, y2, std::nullopt, inst.d);
  const auto ga = make_grid(auto_interval(a, kDefaultKappa, IntervalMode::heuristic_preferred, 3).interval, 50);
  const auto gb = make_grid(auto_interval(b, kDefaultKappa, IntervalMode::heuristic_preferred, 3).interval, 50);
  CHECK(ga == gb);

  SearchInterval s;
  s.rho_lo = ga.front();
  s.rho_hi = ga.back();
  const CriterionCurve coarse = evaluate(a, make_grid(s, 26));
  const CriterionCurve fine = evaluate(a, make_grid(s, 51));  // contains the coarse grid
  CHECK(select_optimum(fine, Criterion::gcv).value <= select_optimum(coarse, Criterion::gcv).value);
  CHECK(select_optimum(fine, Criterion::reml).value >= select_optimum(coarse, Criterion::reml).value);
}
