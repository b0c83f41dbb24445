#pragma once

namespace cyldens {

//! Modified Bessel function of the first kind, order zero.
//! Power series below x = 15, asymptotic expansion beyond.
//! Throws std::domain_error for negative or non-finite input.
double bessel_i0(double x);

//! log I0(x), stable for large arguments (no overflow up to x ~ 1e8).
double log_bessel_i0(double x);

//! Modified Bessel function of the first kind, order one.
double bessel_i1(double x);

//! A(x) = I1(x)/I0(x), the mean resultant length of a von Mises distribution.
double bessel_i1_over_i0(double x);

} // namespace cyldens
