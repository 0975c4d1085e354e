// Spectral and Lyapunov analysis of the closed-loop matrices.
#pragma once

#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "laneless/laplacian.hpp"
#include "laneless/trace.hpp"
#include "laneless/types.hpp"

namespace laneless {

// Gamma = [[0, I], [-k*L, -b*L]] for a reduced Laplacian L.
Eigen::MatrixXd closed_loop_matrix(const Eigen::MatrixXd& reduced, double b,
                                   double k);

// The two roots of s^2 + b*mu*s + k*mu = 0, one closed-loop mode per
// diagonal entry mu of a triangular reduced Laplacian.
std::pair<std::complex<double>, std::complex<double>> mode_roots(double mu,
                                                                 double b,
                                                                 double k);

// All 2m eigenvalues of the closed loop, sorted by (real, imag). When the
// reduced Laplacian is triangular the result is cross-checked against the
// closed-form mode roots and a mismatch is logged.
std::vector<std::complex<double>> gamma_spectrum(const LaplacianBundle& bundle,
                                                 double b, double k);

struct SpectrumReport {
  std::vector<std::complex<double>> eigenvalues;
  bool hurwitz = false;
  double spectral_margin = 0.0;  // -max real part
};
SpectrumReport analyze_spectrum(const LaplacianBundle& bundle, double b,
                                double k);

// Common quadratic function candidate V = y'y/q + v'v with
// q = 2 / (k * lambda_min) where lambda_min is the smallest eigenvalue of
// the symmetric part of the reduced Laplacian. Absent when that part is not
// positive definite (inapplicable, which does not imply instability).
// negdef_margin is the largest eigenvalue of Gamma'P + P*Gamma; because P is
// block diagonal this matrix always has a zero quadratic form on pure
// position perturbations, so the margin is >= 0 in exact arithmetic and
// "certified" here means semidefinite up to the stated tolerance.
struct LyapunovCertificate {
  double q = 0.0;
  double lambda_min_sym = 0.0;
  double negdef_margin = 0.0;
  bool semidefinite(double tol = 1e-6) const { return negdef_margin <= tol; }
};
std::optional<LyapunovCertificate> lyapunov_certificate(
    const LaplacianBundle& bundle, double b, double k);

// Did a position jump keep (or shrink) the shifted-coordinate norm? `delta`
// is either the position block (length m) or a full state delta (length 2m)
// whose velocity block is expected to be zero.
bool impulse_admissible(const StateVector& before, const Eigen::VectorXd& delta);

struct TraceCheckReport {
  bool empty = true;
  int steps = 0;
  double max_step_increase = 0.0;     // largest flow Delta-V between samples
  double max_impulse_increase = 0.0;  // largest Delta-V across spacing jumps
  int impulses = 0;
};

// Evaluate V along a recorded run in shifted coordinates (positions relative
// to the level-spaced equilibrium of the current g_y, velocities relative to
// the leader) and report the worst Delta-V per step and across spacing-change
// instants.
TraceCheckReport lyapunov_trace_check(const Trace& trace,
                                      const GainParams& initial_gains,
                                      double q);

}  // namespace laneless
