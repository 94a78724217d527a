#pragma once

namespace thermosense {

/// Gauss error function. Power series for |z| < 3, Lentz continued fraction
/// for the complement beyond that; absolute error well below 1e-12.
double erf(double z);

/// Complementary error function, 1 - erf(z), computed without cancellation
/// for large positive z.
double erfc(double z);

}  // namespace thermosense
