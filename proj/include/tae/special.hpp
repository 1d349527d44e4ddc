#pragma once

namespace tae {

/// Error function; power series below |x| = 2, continued fraction for erfc beyond.
double erf(double x);
double erfc(double x);

/// Inverse of erf on (-1, 1): rational first guess refined by two Newton steps.
double erf_inv(double y);
/// Inverse of erfc on (0, 2); keeps full precision in the tails.
double erfc_inv(double y);

/// mu + sqrt(2) * sigma * erf_inv(2p - 1), for 0 < p < 1.
double inverse_normal_cdf(double p, double mu, double sigma);

}  // namespace tae
