#ifndef IVMM_SIM_BETA_MATH_HPP
#define IVMM_SIM_BETA_MATH_HPP

#include <vector>

namespace ivmm::sim {

// Regularized incomplete beta function I_x(a, b), continued-fraction
// evaluation (Lentz), accurate to ~1e-14 for the parameter ranges the
// trader model uses (a, b up to a few hundred).
double reg_inc_beta(double x, double a, double b);

// Probability mass of each of the 2^K equal bins of [0, 1) under
// Beta(a, b), via incomplete-beta differences. Non-negative, sums to 1.
std::vector<double> beta_bin_masses(double a, double b, int K);

} // namespace ivmm::sim

#endif // IVMM_SIM_BETA_MATH_HPP
