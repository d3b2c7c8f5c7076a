#pragma once

namespace gripstream::stats {

// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1], by
// Lentz's continued fraction with the symmetry swap for x > (a+1)/(a+b+2).
// Absolute error is below 1e-10 over the parameter ranges used for ANOVA.
double regularized_incomplete_beta(double a, double b, double x);

// Upper tail P(F > f) of the F(d1, d2) distribution. f may be +inf (returns 0).
double f_survival(double f, double d1, double d2);

double f_cdf(double f, double d1, double d2);

}  // namespace gripstream::stats
