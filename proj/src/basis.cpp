#include "pspline/basis.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace pspline {

KnotVector::KnotVector(Vectord knots, int order) : knots_(std::move(knots)), order_(order) {
  if (order_ < 1) throw InvalidOrder("B-spline order must be at least 1");
  if (knots_.size() < 2 * static_cast<Index>(order_))
    throw InvalidDimensions("need at least 2d knots (p >= d), got " + std::to_string(knots_.size()));
  for (Index k = 1; k < knots_.size(); ++k)
    if (!(knots_(k - 1) <= knots_(k))) throw InvalidArgument("knots must be non-decreasing");
  if (!(domain_lo() < domain_hi())) throw DegenerateKnots("empty spline domain");
}

KnotVector KnotVector::derivative_knots(int m) const {
  if (m < 0 || m >= order_) throw InvalidOrder("derivative order must lie in [0, d-1]");
  return KnotVector(knots_.segment(m, knots_.size() - 2 * m), order_ - m);
}

KnotVector equidistant_knots(Index p, int d) {
  if (d < 1 || p < d) throw InvalidDimensions("equidistant_knots needs p >= d >= 1");
  return KnotVector(Vectord::LinSpaced(p + d, 1.0, static_cast<double>(p + d)), d);
}

KnotVector random_knots(Index p, int d, std::uint64_t seed) {
  if (d < 1 || p < d) throw InvalidDimensions("random_knots needs p >= d >= 1");
  std::mt19937_64 rng(seed);
  const double sd = static_cast<double>(p + d) / 10.0;
  Vectord knots(p + d);
  for (Index k = 0; k < p + d; ++k) {
    std::normal_distribution<double> draw(static_cast<double>(k + 1), sd);
    knots(k) = draw(rng);
  }
  std::sort(knots.begin(), knots.end());
  return KnotVector(std::move(knots), d);
}

double quantile_sorted(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw DegenerateData("quantile of empty data");
  const double h = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

KnotVector quantile_knots(std::span<const double> x, Index k_total, int d) {
  if (k_total < 2) throw InvalidArgument("need at least 2 knots");
  if (d < 1) throw InvalidOrder("B-spline order must be at least 1");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.empty() || sorted.front() == sorted.back())
    throw DegenerateData("fewer than 2 distinct x values");

  std::vector<double> q;
  q.reserve(static_cast<std::size_t>(k_total));
  for (Index i = 0; i < k_total; ++i)
    q.push_back(quantile_sorted(sorted, static_cast<double>(i) / static_cast<double>(k_total - 1)));
  q.erase(std::unique(q.begin(), q.end()), q.end());

  const Index interior = static_cast<Index>(q.size());
  Vectord knots(interior + 2 * (d - 1));
  Index at = 0;
  for (int r = 0; r < d - 1; ++r) knots(at++) = q.front();
  for (double v : q) knots(at++) = v;
  for (int r = 0; r < d - 1; ++r) knots(at++) = q.back();
  return KnotVector(std::move(knots), d);
}

Index find_span(const KnotVector& kv, double x) {
  const double lo = kv.domain_lo();
  const double hi = kv.domain_hi();
  if (!(x >= lo && x <= hi)) throw OutOfDomain("x = " + std::to_string(x) + " outside spline domain");
  const Vectord& t = kv.knots();
  const Index d = kv.order();
  const Index p = kv.num_basis();
  if (x == hi) {
    Index mu = p - 1;
    while (t(mu) == t(mu + 1)) --mu;
    return mu;
  }
  // first knot in t[d-1..p] strictly greater than x
  const double* begin = t.data() + (d - 1);
  const double* end = t.data() + p + 1;
  const double* it = std::upper_bound(begin, end, x);
  return static_cast<Index>(it - t.data()) - 1;
}

namespace {

// de Boor's BSPLVB: values of the `order` B-splines of that order that are
// nonzero on span mu, for offsets 0..order-1 (spline index mu-order+1+offset).
void bsplvb(const Vectord& t, Index mu, double x, int order, Vectord& out) {
  out.setZero(order);
  Vectord left(order), right(order);
  out(0) = 1.0;
  for (int j = 1; j < order; ++j) {
    left(j) = x - t(mu + 1 - j);
    right(j) = t(mu + j) - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = out(r) / (right(r + 1) + left(j - r));
      out(r) = saved + right(r + 1) * temp;
      saved = left(j - r) * temp;
    }
    out(j) = saved;
  }
}

}  // namespace

BasisRow eval_row(const KnotVector& kv, double x) {
  const Index mu = find_span(kv, x);
  BasisRow row;
  row.first = mu - kv.order() + 1;
  bsplvb(kv.knots(), mu, x, kv.order(), row.values);
  return row;
}

BasisRow eval_row_derivative(const KnotVector& kv, double x, int m) {
  const int d = kv.order();
  if (m < 0 || m >= d) throw InvalidOrder("derivative order must lie in [0, d-1]");
  if (m == 0) return eval_row(kv, x);

  const Vectord& t = kv.knots();
  const Index mu = find_span(kv, x);
  const int k0 = d - m;
  Vectord low;
  bsplvb(t, mu, x, k0, low);

  // c holds values for spline indices mu-d+1 .. mu (offset 0..d-1); at order k
  // only offsets d-k .. d-1 are populated.
  Vectord c = Vectord::Zero(d);
  c.tail(k0) = low;
  const Index base = mu - d + 1;
  for (int k = k0 + 1; k <= d; ++k) {
    Vectord next = Vectord::Zero(d);
    for (int o = d - k; o < d; ++o) {
      const Index j = base + o;
      double v = 0.0;
      const double den1 = t(j + k - 1) - t(j);
      if (den1 > 0.0) v += c(o) / den1;
      if (o + 1 < d) {
        const double den2 = t(j + k) - t(j + 1);
        if (den2 > 0.0) v -= c(o + 1) / den2;
      }
      next(o) = (k - 1) * v;
    }
    c = std::move(next);
  }
  return BasisRow{base, std::move(c)};
}

DesignMatrix design_matrix(const KnotVector& kv, std::span<const double> xs) {
  DesignMatrix b;
  b.cols = kv.num_basis();
  b.first.resize(xs.size());
  b.values.resize(static_cast<Index>(xs.size()), kv.order());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    BasisRow row = eval_row(kv, xs[i]);
    b.first[i] = row.first;
    b.values.row(static_cast<Index>(i)) = row.values.transpose();
  }
  return b;
}

std::vector<double> xs_between_knots(const KnotVector& kv, Index count_per_interval, std::uint64_t seed) {
  if (count_per_interval < 1) throw InvalidArgument("count_per_interval must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<double> xs;
  const Vectord& t = kv.knots();
  for (Index i = kv.order() - 1; i < kv.num_basis(); ++i) {
    if (!(t(i) < t(i + 1))) continue;
    std::uniform_real_distribution<double> draw(t(i), t(i + 1));
    for (Index c = 0; c < count_per_interval; ++c) xs.push_back(draw(rng));
  }
  std::sort(xs.begin(), xs.end());
  return xs;
}

}  // namespace pspline
