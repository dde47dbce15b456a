#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>

#include "pspline/eigext.hpp"
#include "pspline/pls.hpp"

namespace pspline {

enum class IntervalKind { exact, wide, heuristic };
enum class IntervalMode { exact, wide, heuristic_preferred };

std::string_view to_string(IntervalKind k);
std::string_view to_string(IntervalMode m);

/// Search interval for ρ mapping to the redf range [κq, (1−κ)q].
struct SearchInterval {
  double rho_lo = 0.0;
  double rho_hi = 0.0;
  IntervalKind kind = IntervalKind::wide;
  double kappa = 0.01;
  Index q = 0;
};

/// Σ 1/(1+e^ρλⱼ).
double redf(double rho, const Vectord& lambdas);
/// d redf / dρ = −Σ e^ρλⱼ/(1+e^ρλⱼ)².
double redf_derivative(double rho, const Vectord& lambdas);

/// Safeguarded Newton iteration for g(x) = 0: steps clamped to delta_max,
/// then halved until |g| decreases.
double newton_root(const std::function<double(double)>& g, const std::function<double(double)>& g_prime, double x0,
                   double delta_max, int max_iterations = 200);

/// Solves redf(ρ_min) = (1−κ)q and redf(ρ_max) = κq on the full spectrum.
SearchInterval exact_interval(const Vectord& lambdas, double kappa);

/// Closed-form bounds from λ̄ and λ_q.
SearchInterval wide_interval(const EigenSummary& summary, double kappa);

struct ApproxSpectrum {
  Vectord lambda_hat;
  int n_successes = 0;
};

/// Guesses the full spectrum from q, λ₁, λ_q and λ̄ by screening decay shapes.
ApproxSpectrum approx_spectrum(Index q, double lambda_max, double lambda_min, double lambda_mean);

/// Root of redf(ρ; λ̂) = κq.
double heuristic_upper_bound(const ApproxSpectrum& spec, double kappa);
/// Root of redf(ρ; λ̂) = (1−κ)q. Reported only.
double heuristic_lower_bound(const ApproxSpectrum& spec, double kappa);

struct IntervalReport {
  SearchInterval interval;
  EigenSummary summary;
  double rho_star_min = 0.0;
  double rho_star_max = 0.0;
  std::optional<double> rho_hat_min;
  std::optional<double> rho_hat_max;
  bool heuristic_failed = false;
};

inline constexpr double kDefaultKappa = 0.01;

IntervalReport auto_interval(const PlsProblem& prob, double kappa, IntervalMode mode, std::uint64_t seed = 0);

}  // namespace pspline
