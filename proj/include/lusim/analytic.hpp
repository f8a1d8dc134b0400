#ifndef LUSIM_ANALYTIC_HPP
#define LUSIM_ANALYTIC_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "lusim/model.hpp"

namespace lusim {

/// Rate of the checkpoint process that defers the periodic re-registration
/// schedule: re-registrations alone for StandardIMS, all update events for
/// CloudAware.
inline double policy_checkpoint_rate(PolicyKind kind, const RateConfig& rates) {
  return kind == PolicyKind::StandardIms ? rates.lambda_ccrr : rates.total();
}

/// Distribution of the number of periodic re-registrations between two
/// consecutive update checkpoints. Checkpoint inter-arrivals are
/// exponential(checkpoint_rate), so the count is geometric on {0,1,2,...} with
/// success probability 1 - e^(-checkpoint_rate * t_p).
struct PrrDistribution {
  double checkpoint_rate;
  double t_p;

  PrrDistribution(double rate, double tp) : checkpoint_rate(rate), t_p(tp) {
    detail::require(std::isfinite(rate) && rate > 0, "checkpoint_rate must be finite and > 0");
    detail::require(std::isfinite(tp) && tp > 0, "t_p must be finite and > 0");
  }

  double success_probability() const { return -std::expm1(-checkpoint_rate * t_p); }
};

/// P(N = n) = e^(-rate*n*t_p) * (1 - e^(-rate*t_p)).
inline double prr_pmf(const PrrDistribution& dist, std::int64_t n) {
  if (n < 0) throw std::invalid_argument("prr_pmf: n must be >= 0");
  const double x = dist.checkpoint_rate * dist.t_p;
  return std::exp(-x * static_cast<double>(n)) * -std::expm1(-x);
}

/// E[N] = 1 / (e^(rate*t_p) - 1).
inline double prr_expectation(const PrrDistribution& dist) {
  const double x = dist.checkpoint_rate * dist.t_p;
  if (x <= 0)
    throw std::domain_error("prr_expectation: diverges when checkpoint_rate * t_p is zero");
  return 1.0 / std::expm1(x);
}

/// Per-checkpoint power shares of one policy's update traffic. total is the
/// sum of the three components; the device-local CSA cost is outside the
/// closed-form total.
struct PowerBreakdown {
  double power_ccrr = 0;
  double power_ios = 0;
  double power_prr = 0;
  double total = 0;
};

/// Expected power of one arrival event class per update checkpoint:
/// c_e * (lambda_e / lambda).
inline double per_event_power(const RateConfig& rates, const CostModel& costs, UpdateEvent event) {
  if (event == UpdateEvent::Prr)
    throw std::invalid_argument("per_event_power: PRR is timer-driven, not an arrival class");
  const double lambda = rates.total();
  if (lambda <= 0) throw std::domain_error("per_event_power: total event rate is zero");
  double lambda_e = 0;
  switch (event) {
    case UpdateEvent::Ios: lambda_e = rates.lambda_ios; break;
    case UpdateEvent::Ccrr: lambda_e = rates.lambda_ccrr; break;
    case UpdateEvent::Csa: lambda_e = rates.lambda_csa; break;
    default: break;
  }
  return costs.cost(event) * (lambda_e / lambda);
}

/// Total update power per checkpoint for one policy:
///   c_CCRR*(lambda_CCRR/lambda) + c_IOS*(lambda_IOS/lambda) + c_PRR*E[N]
/// where E[N] uses the policy's checkpoint rate. Diverges (domain error) for
/// StandardIMS when lambda_ccrr is zero.
inline PowerBreakdown total_power(const Policy& policy, const RateConfig& rates,
                                  const TimerParams& timer, const CostModel& costs) {
  const double lambda = rates.total();
  if (lambda <= 0) throw std::domain_error("total_power: total event rate is zero");
  if (policy.kind == PolicyKind::StandardIms && rates.lambda_ccrr <= 0)
    throw std::domain_error(
        "total_power: PRR term diverges under StandardIMS (lambda_ccrr is zero)");
  const double deferral_rate = policy_checkpoint_rate(policy.kind, rates);
  PowerBreakdown b;
  b.power_ccrr = costs.cost(UpdateEvent::Ccrr) * (rates.lambda_ccrr / lambda);
  b.power_ios = costs.cost(UpdateEvent::Ios) * (rates.lambda_ios / lambda);
  b.power_prr = costs.cost(UpdateEvent::Prr) / std::expm1(deferral_rate * timer.t_p);
  b.total = b.power_ccrr + b.power_ios + b.power_prr;
  return b;
}

/// StandardIMS total minus CloudAware total. The arrival-cost terms cancel,
/// leaving c_PRR * [1/(e^(lambda_ccrr*t_p)-1) - 1/(e^(lambda*t_p)-1)], which
/// is non-negative and zero exactly when lambda_ios + lambda_csa = 0.
inline double power_difference(const RateConfig& rates, const TimerParams& timer,
                               const CostModel& costs) {
  if (rates.lambda_ccrr <= 0)
    throw std::domain_error("power_difference: lambda_ccrr must be positive");
  const double c_prr = costs.cost(UpdateEvent::Prr);
  return c_prr * (1.0 / std::expm1(rates.lambda_ccrr * timer.t_p) -
                  1.0 / std::expm1(rates.total() * timer.t_p));
}

}  // namespace lusim

#endif  // LUSIM_ANALYTIC_HPP
