#pragma once

// Lattice series over N^d that control the convergence rates: the
// |a|^{-(d + c eps)} sum (grows like 1/eps) and the sum of
// (1 - exp(-lambda_a^2 delta)) / lambda_a^2 (behaves like delta^{(4-d)/4}).

namespace spde4 {

/// Partial sum of |a|^{-(d + c_star eps)} over {a : a_i <= n_max}.
double series_lemma_A1(int d, double c_star, double eps, int n_max);

/// Integral estimate of the remainder of series_lemma_A1 beyond the box
/// (the part of the orthant outside the ball of radius n_max). Adding it to
/// the partial sum approximates the full series when eps is so small that no
/// reachable cutoff converges.
double series_lemma_A1_tail(int d, double c_star, double eps, int n_max);

/// Partial sum of (1 - exp(-lambda_a^2 delta)) / lambda_a^2, delta > 0.
double series_lemma_A2(int d, double delta, int n_max);

/// p_d(s) = 1 + s + ... + s^d.
double p_d(int d, double s);

/// Upper bound of sum_{a outside [1, n_max]^d} |a|^{-power}, power > d.
double lattice_tail_majorant(int d, int n_max, double power);

/// Upper bound of sum_{a outside the cutoff box} lambda_a^{-2}.
double biharmonic_tail_majorant(int d, int n_max);

}  // namespace spde4
