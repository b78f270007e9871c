#include "texfair/robust.hpp"

#include <algorithm>
#include <cmath>

#include "texfair/error.hpp"

namespace texfair {

GemanMcClure::GemanMcClure(RobustScale scale) : sigma_(scale.sigma) {
  if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) {
    throw Error(ErrorCode::NonPositiveSigma, "Geman-McClure sigma must be positive");
  }
}

double GemanMcClure::rho(double e) const {
  const double e2 = e * e;
  return e2 / (sigma_ + e2);
}

double GemanMcClure::rho_dot(double e) const {
  const double d = sigma_ + e * e;
  return 2.0 * sigma_ * e / (d * d);
}

double GemanMcClure::rho_ddot(double e) const {
  const double d = sigma_ + e * e;
  return 2.0 * sigma_ * (sigma_ - 3.0 * e * e) / (d * d * d);
}

double GemanMcClure::secant_weight(double e) const {
  const double d = sigma_ + e * e;
  return 2.0 * sigma_ / (d * d);
}

double rho(double e, double sigma) { return GemanMcClure(sigma).rho(e); }
double rho_dot(double e, double sigma) { return GemanMcClure(sigma).rho_dot(e); }
double rho_ddot(double e, double sigma) { return GemanMcClure(sigma).rho_ddot(e); }
double secant_weight(double e, double sigma) { return GemanMcClure(sigma).secant_weight(e); }

RobustScale estimate_sigma(std::span<const double> residuals) {
  if (residuals.empty()) {
    throw Error(ErrorCode::EmptyResiduals, "cannot estimate sigma from no residuals");
  }
  double max_abs = 0.0;
  for (double e : residuals) max_abs = std::max(max_abs, std::abs(e));
  return {std::max(max_abs / std::sqrt(3.0), kSigmaFloor)};
}

double outlier_threshold(double sigma) {
  if (!(sigma > 0.0)) {
    throw Error(ErrorCode::NonPositiveSigma, "Geman-McClure sigma must be positive");
  }
  return sigma / std::sqrt(3.0);
}

std::vector<bool> outlier_mask(std::span<const double> residuals, double sigma) {
  const double threshold = outlier_threshold(sigma);
  std::vector<bool> out(residuals.size());
  for (std::size_t i = 0; i < residuals.size(); ++i) out[i] = std::abs(residuals[i]) > threshold;
  return out;
}

}  // namespace texfair
