#include "laneless/stability.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "laneless/log.hpp"

namespace laneless {

namespace {

bool complex_less(const std::complex<double>& a, const std::complex<double>& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

}  // namespace

Eigen::MatrixXd closed_loop_matrix(const Eigen::MatrixXd& reduced, double b,
                                   double k) {
  const Eigen::Index m = reduced.rows();
  if (m == 0 || reduced.cols() != m)
    throw SimError(ErrorCode::DimensionMismatch,
                   "reduced Laplacian must be square and nonempty");
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  gamma.topRightCorner(m, m).setIdentity();
  gamma.bottomLeftCorner(m, m) = -k * reduced;
  gamma.bottomRightCorner(m, m) = -b * reduced;
  return gamma;
}

std::pair<std::complex<double>, std::complex<double>> mode_roots(double mu,
                                                                 double b,
                                                                 double k) {
  const std::complex<double> disc(b * b * mu * mu - 4.0 * k * mu, 0.0);
  const std::complex<double> root = std::sqrt(disc);
  return {0.5 * (-b * mu + root), 0.5 * (-b * mu - root)};
}

std::vector<std::complex<double>> gamma_spectrum(const LaplacianBundle& bundle,
                                                 double b, double k) {
  const Eigen::MatrixXd gamma = closed_loop_matrix(bundle.reduced, b, k);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(gamma, false);
  if (solver.info() != Eigen::Success)
    throw SimError(ErrorCode::ScenarioInvalid, "eigenvalue solver failed");

  std::vector<std::complex<double>> eigs(static_cast<size_t>(gamma.rows()));
  for (Eigen::Index i = 0; i < gamma.rows(); ++i)
    eigs[static_cast<size_t>(i)] = solver.eigenvalues()(i);
  std::sort(eigs.begin(), eigs.end(), complex_less);

  if (is_lower_triangular(bundle.reduced)) {
    std::vector<std::complex<double>> expected;
    for (Eigen::Index i = 0; i < bundle.reduced.rows(); ++i) {
      const auto [r1, r2] = mode_roots(bundle.reduced(i, i), b, k);
      expected.push_back(r1);
      expected.push_back(r2);
    }
    std::sort(expected.begin(), expected.end(), complex_less);
    double worst = 0.0;
    for (size_t i = 0; i < eigs.size(); ++i)
      worst = std::max(worst, std::abs(eigs[i] - expected[i]));
    // Repeated diagonal entries make the closed loop defective and cost the
    // dense solver several digits, so only flag genuine disagreement.
    if (worst > 1e-4) {
      std::ostringstream oss;
      oss << "triangular spectrum cross-check mismatch: " << worst;
      log_error(oss.str());
    }
  }
  return eigs;
}

SpectrumReport analyze_spectrum(const LaplacianBundle& bundle, double b,
                                double k) {
  SpectrumReport report;
  report.eigenvalues = gamma_spectrum(bundle, b, k);
  double max_re = -std::numeric_limits<double>::infinity();
  for (const auto& e : report.eigenvalues) max_re = std::max(max_re, e.real());
  report.spectral_margin = -max_re;
  report.hurwitz = report.spectral_margin > 0.0;
  return report;
}

std::optional<LyapunovCertificate> lyapunov_certificate(
    const LaplacianBundle& bundle, double b, double k) {
  const Eigen::Index m = bundle.reduced.rows();
  if (m == 0) return std::nullopt;

  const Eigen::MatrixXd sym =
      0.5 * (bundle.reduced + bundle.reduced.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sym_eigs(sym);
  const double lambda_min = sym_eigs.eigenvalues().minCoeff();
  if (!(lambda_min > 0.0)) return std::nullopt;

  LyapunovCertificate cert;
  cert.lambda_min_sym = lambda_min;
  cert.q = 2.0 / (k * lambda_min);

  const Eigen::MatrixXd gamma = closed_loop_matrix(bundle.reduced, b, k);
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(2 * m, 2 * m);
  p.topLeftCorner(m, m) /= cert.q;
  const Eigen::MatrixXd m2 = gamma.transpose() * p + p * gamma;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> m2_eigs(
      0.5 * (m2 + m2.transpose()));
  cert.negdef_margin = m2_eigs.eigenvalues().maxCoeff();
  return cert;
}

bool impulse_admissible(const StateVector& before,
                        const Eigen::VectorXd& delta) {
  const Eigen::Index m = before.m();
  Eigen::VectorXd dpos;
  if (delta.size() == m)
    dpos = delta;
  else if (delta.size() == 2 * m)
    dpos = delta.head(m);
  else
    throw SimError(ErrorCode::DimensionMismatch,
                   "impulse delta must cover the position block");
  return (before.positions() + dpos).norm() <= before.positions().norm();
}

namespace {

// V for one sample under a given spacing constant, in shifted coordinates.
double sample_v(const TraceSample& sample, double g_y, double w, double q) {
  const Car* leader = sample.snapshot.phantom_leader();
  if (leader == nullptr)
    throw SimError(ErrorCode::MissingLeader,
                   "trace sample has no phantom leader");
  double v = 0.0;
  for (const Car& c : sample.snapshot.cars) {
    if (c.role != CarRole::Regular) continue;
    const auto it = sample.levels.find(c.id);
    if (it == sample.levels.end()) continue;
    const double eq_y = leader->y - it->second * g_y / w;
    const double py = c.y - eq_y;
    const double vy = c.vy - leader->vy;
    v += py * py / q + vy * vy;
  }
  return v;
}

}  // namespace

TraceCheckReport lyapunov_trace_check(const Trace& trace,
                                      const GainParams& initial_gains,
                                      double q) {
  TraceCheckReport report;
  if (trace.samples.size() < 2) return report;
  report.empty = false;

  std::vector<const AppliedEvent*> jumps;
  for (const AppliedEvent& e : trace.event_log)
    if (e.kind == EventKind::GyChange) jumps.push_back(&e);
  std::sort(jumps.begin(), jumps.end(),
            [](const AppliedEvent* a, const AppliedEvent* b) {
              return a->t < b->t;
            });

  double g = initial_gains.g_y;
  size_t next = 0;
  while (next < jumps.size() && jumps[next]->t <= trace.samples[0].t) {
    g += jumps[next]->delta_g_y;
    ++next;
  }

  report.max_step_increase = -std::numeric_limits<double>::infinity();
  report.max_impulse_increase = -std::numeric_limits<double>::infinity();
  for (size_t n = 0; n + 1 < trace.samples.size(); ++n) {
    const TraceSample& a = trace.samples[n];
    const TraceSample& b = trace.samples[n + 1];
    const double flow =
        sample_v(b, g, initial_gains.W, q) - sample_v(a, g, initial_gains.W, q);
    report.max_step_increase = std::max(report.max_step_increase, flow);
    ++report.steps;
    while (next < jumps.size() && jumps[next]->t <= b.t + 1e-9) {
      const double g_new = g + jumps[next]->delta_g_y;
      const double jump = sample_v(b, g_new, initial_gains.W, q) -
                          sample_v(b, g, initial_gains.W, q);
      report.max_impulse_increase =
          std::max(report.max_impulse_increase, jump);
      ++report.impulses;
      g = g_new;
      ++next;
    }
  }
  if (report.impulses == 0) report.max_impulse_increase = 0.0;
  return report;
}

}  // namespace laneless
