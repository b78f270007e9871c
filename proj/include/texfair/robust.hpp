#pragma once

#include <span>
#include <vector>

namespace texfair {

/// Scale of the Geman-McClure norm. It is compared against e^2 inside the
/// norm but estimated from max|e|, so it carries intensity units, not
/// intensity squared. That mismatch is kept on purpose.
struct RobustScale {
  double sigma = 1.0;
};

/// Geman-McClure norm rho(e) = e^2 / (sigma + e^2).
class GemanMcClure {
 public:
  /// Throws NonPositiveSigma unless sigma > 0 and finite.
  explicit GemanMcClure(RobustScale scale);
  explicit GemanMcClure(double sigma) : GemanMcClure(RobustScale{sigma}) {}

  double sigma() const { return sigma_; }

  double rho(double e) const;
  /// Influence function.
  double rho_dot(double e) const;
  double rho_ddot(double e) const;
  /// rho_dot(e) / e in closed form, finite and positive at e = 0.
  double secant_weight(double e) const;

 private:
  double sigma_;
};

// Free-function forms; each validates sigma.
double rho(double e, double sigma);
double rho_dot(double e, double sigma);
double rho_ddot(double e, double sigma);
double secant_weight(double e, double sigma);

inline constexpr double kSigmaFloor = 1e-6;

/// sigma = max|e| / sqrt(3), floored at kSigmaFloor. Throws EmptyResiduals.
RobustScale estimate_sigma(std::span<const double> residuals);

/// Outlier threshold e_T = sigma / sqrt(3).
double outlier_threshold(double sigma);

/// Flags |e| > sigma / sqrt(3). Diagnostic only.
std::vector<bool> outlier_mask(std::span<const double> residuals, double sigma);

}  // namespace texfair
