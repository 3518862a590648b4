#include "recall_dyn/hopf.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include <fmt/format.h>

#include "recall_dyn/errors.hpp"
#include "recall_dyn/softmax.hpp"

namespace recall_dyn {

namespace {

constexpr double kPi = std::numbers::pi;

// Conjugating matrix bringing a 2x2 block with A(0,1) = -1 to real normal
// form. Columns come from the eigenvector z = (1, A00 - nu) of nu_+:
// distinct real pair -> diag(nu+, nu-); complex pair -> [Re z, Im z] giving
// [[re, im], [-im, re]]; repeated root -> Jordan chain.
Eigen::Matrix2d real_normal_basis(const Eigen::Matrix2d& A, std::complex<double> nu_plus,
                                  std::complex<double> nu_minus) {
  Eigen::Matrix2d Q;
  const double scale = std::max(1.0, std::abs(nu_plus));
  if (std::abs(nu_plus.imag()) > 0.0) {
    const std::complex<double> z1 = A(0, 0) - nu_plus;
    Q << 1.0, 0.0, z1.real(), z1.imag();
  } else if (std::abs(nu_plus.real() - nu_minus.real()) <= 1e-12 * scale) {
    const double nu = 0.5 * (nu_plus.real() + nu_minus.real());
    Q << 1.0, 0.0, A(0, 0) - nu, -1.0;
  } else {
    Q << 1.0, 1.0, A(0, 0) - nu_plus.real(), A(0, 0) - nu_minus.real();
  }
  return Q;
}

Eigen::Matrix2d rotation(double theta) {
  Eigen::Matrix2d R;
  R << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
  return R;
}

struct I2Coefficients {
  double a1, a2, a3, a4;
};

I2Coefficients i2_coefficients(const NetworkConfig& cfg) {
  const double m = cfg.m;
  const double al = cfg.alpha;
  const double g = cfg.g_bar_a;
  const double m2 = m * m;
  I2Coefficients c{};
  c.a1 = -3.0 / m2 * al * (al + 1.0) * (4.0 * g - 3.0 * m * al * al);
  c.a2 = -1.0 / m2 *
         ((20.0 * al + 12.0) * g * g - m * al * (12.0 + 59.0 * al + 53.0 * al * al) * g +
          3.0 * m2 * al * al * al * (1.0 + al) * (11.0 * al + 3.0));
  c.a3 = -1.0 / m2 * (g - m * al * al) *
         (8.0 * g * g - m * (4.0 + 21.0 * al + 23.0 * al * al) * g +
          3.0 * m2 * al * al * (1.0 + al) * (5.0 * al + 8.0));
  c.a4 = -9.0 / m * (al + 1.0) * std::pow(g - m * al * al, 2) * (g - m * al * (1.0 + al));
  return c;
}

double mu_bar(const HopfSetup& setup, int i) {
  const double mb = setup.cfg.critical_mu1() - setup.spectral.mu(i);
  if (!(mb > 0.0)) {
    throw DegeneracyError(fmt::format(
        "mu_{} = {:.6g} is not strictly below mu1 = {:.6g}", i + 1, setup.spectral.mu(i),
        setup.cfg.critical_mu1()));
  }
  return mb;
}

}  // namespace

double HopfSetup::conjugation_residual() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i)
    worst = std::max(worst, (A[i] * Q[i] - Q[i] * blocks[i]).cwiseAbs().maxCoeff());
  return worst;
}

HopfSetup hopf_setup(const WeightMatrix& W, const NetworkConfig& cfg, const HopfOptions& options) {
  cfg.validate();
  const SpectralReport input = lemma2_basis(W, cfg);
  if (!input.mu1_simple) throw DegeneracyError("mu1 not simple");
  if (!(input.mu1() > 0.0)) {
    throw DegeneracyError(fmt::format("mu1 = {:.6g} must be positive", input.mu1()));
  }
  const double m = cfg.m;
  if (!(cfg.g_bar_a > m * cfg.alpha * cfg.alpha)) {
    throw NotAtHopfError(fmt::format(
        "g_bar_a = {:.6g} <= m alpha^2 = {:.6g}: no imaginary eigenvalue pair at the critical point",
        cfg.g_bar_a, m * cfg.alpha * cfg.alpha));
  }

  const double crit = cfg.critical_mu1();
  const WeightMatrix Wc = W.scaled(crit / input.mu1());
  HopfSetup out{cfg, Wc, lemma2_basis(Wc, cfg), 0.0, {}, {}, {}, {}, {}, {}, {}};
  out.spectral.mu(0) = crit;
  out.spectral.nu = h_eigenvalues(out.spectral, cfg);
  out.spectral.max_real_part = out.spectral.nu.real().maxCoeff();

  const double w = std::sqrt(cfg.g_bar_a / m - cfg.alpha * cfg.alpha);
  out.lambda0_abs = w;

  const int units = cfg.units();
  const int lead = out.spectral.leading;
  for (int i = 0; i < units; ++i) {
    Eigen::Matrix2d A;
    if (i < lead)
      A << out.spectral.mu(i) / m - 1.0, -1.0, cfg.g_bar_a / m, -cfg.alpha;
    else
      A << -1.0, -1.0, 0.0, -cfg.alpha;
    const std::complex<double> nu_p = out.spectral.nu(2 * i);
    const std::complex<double> nu_m = out.spectral.nu(2 * i + 1);

    Eigen::Matrix2d Q;
    if (i == 0) {
      // Eigenvector (1, alpha - i w) of +i w gives Q1 = [[1, 0], [alpha, -w]];
      // rotations commute with the normal form.
      Q << 1.0, 0.0, cfg.alpha, -w;
      Q = Q * rotation(options.q1_rotation);
    } else {
      Q = real_normal_basis(A, nu_p, nu_m);
      if (std::abs(nu_p) < 1e-12 || std::abs(nu_p - std::complex<double>(0, 2 * w)) < 1e-10 ||
          std::abs(nu_p + std::complex<double>(0, 2 * w)) < 1e-10 || std::abs(nu_m) < 1e-12 ||
          std::abs(nu_m - std::complex<double>(0, 2 * w)) < 1e-10 ||
          std::abs(nu_m + std::complex<double>(0, 2 * w)) < 1e-10) {
        throw ResonanceError(fmt::format(
            "mode {} has eigenvalue {:.6g}{:+.6g}i, resonant with the critical pair", i + 1,
            nu_p.real(), nu_p.imag()));
      }
    }
    const Eigen::Matrix2d Qi = Q.inverse();
    out.A.push_back(A);
    out.Q.push_back(Q);
    out.Q_inv.push_back(Qi);
    out.blocks.push_back(Qi * A * Q);
    out.e.push_back(Qi * Eigen::Vector2d(out.spectral.mu(i), cfg.g_bar_a));
  }

  out.u = Eigen::VectorXd::Zero(units);
  const Eigen::ArrayXd p1_sq = out.spectral.p1.array().square();
  for (int i = 0; i < lead; ++i) out.u(i) = (p1_sq * out.spectral.P.col(i).array()).sum() / m;

  out.H3bar = Eigen::MatrixXd::Zero(2 * units - 2, 2 * units - 2);
  for (int i = 1; i < units; ++i) out.H3bar.block(2 * i - 2, 2 * i - 2, 2, 2) = out.blocks[i];
  return out;
}

double closed_form_I1(const HopfSetup& setup) {
  const double w = setup.lambda0_abs;
  return 3.0 * kPi / (4.0 * w) * (-setup.mu1() * setup.q1_row_norm2() / setup.cfg.m) *
         quartic_margin(setup.spectral.p1, setup.cfg);
}

double closed_form_I3(const HopfSetup& setup) {
  const auto& cfg = setup.cfg;
  const double w = setup.lambda0_abs;
  const double u1 = setup.u(0);
  return 3.0 * kPi * u1 * u1 / (4.0 * w * w) *
         (-setup.mu1() * setup.q1_row_norm2() *
          (cfg.g_bar_a - cfg.m * cfg.alpha * (1.0 + cfg.alpha)) / w);
}

double closed_form_I2(const HopfSetup& setup) {
  const double w = setup.lambda0_abs;
  const I2Coefficients c = i2_coefficients(setup.cfg);
  const Eigen::Matrix2d four_w2 = 4.0 * w * w * Eigen::Matrix2d::Identity();
  double sum = 0.0;
  for (int i = 1; i < setup.spectral.leading; ++i) {
    const double mb = mu_bar(setup, i);
    const Eigen::Matrix2d& B = setup.blocks[i];
    // nu+ nu- and (4w^2 + nu+^2)(4w^2 + nu-^2) as real determinants.
    const double den = B.determinant() * (B * B + four_w2).determinant();
    const double poly = ((c.a1 * mb + c.a2) * mb + c.a3) * mb + c.a4;
    sum += setup.u(i) * setup.u(i) / den * poly;
  }
  return 3.0 * kPi / (4.0 * w) * setup.q1_row_norm2() * sum;
}

double closed_form_I2_complex(const HopfSetup& setup) {
  const double w = setup.lambda0_abs;
  const I2Coefficients c = i2_coefficients(setup.cfg);
  std::complex<double> sum = 0.0;
  for (int i = 1; i < setup.spectral.leading; ++i) {
    const double mb = mu_bar(setup, i);
    const std::complex<double> np = setup.spectral.nu(2 * i);
    const std::complex<double> nm = setup.spectral.nu(2 * i + 1);
    const std::complex<double> den = np * nm * (4.0 * w * w + np * np) * (4.0 * w * w + nm * nm);
    const double poly = ((c.a1 * mb + c.a2) * mb + c.a3) * mb + c.a4;
    sum += setup.u(i) * setup.u(i) / den * poly;
  }
  return 3.0 * kPi / (4.0 * w) * setup.q1_row_norm2() * sum.real();
}

double closed_form_I2_modewise(const HopfSetup& setup) {
  const auto& cfg = setup.cfg;
  const double w = setup.lambda0_abs;
  const double w2 = w * w;
  const double g = cfg.g_bar_a;
  const double al = cfg.alpha;
  const double m = cfg.m;
  const double mu1 = setup.mu1();
  double sum = 0.0;
  for (int i = 1; i < setup.spectral.leading; ++i) {
    mu_bar(setup, i);
    const double mi = setup.spectral.mu(i);
    const std::complex<double> np = setup.spectral.nu(2 * i);
    const std::complex<double> nm = setup.spectral.nu(2 * i + 1);
    const double prod = (np * nm).real();
    const double den = ((4.0 * w2 + np * np) * (4.0 * w2 + nm * nm)).real();
    const double t_hinv_l = (g - al * mi) / prod;
    const double t_h_k_l = (prod * (g - al * mi) + 4.0 * w2 * (mi * (mi / m - 1.0) - g)) / den;
    const double t_k_l = (g / m * (mi - m * (1.0 + al)) + 3.0 * w2 * mi) / den;
    sum += setup.u(i) * setup.u(i) *
           (-2.0 * mu1 * t_hinv_l - mu1 * t_h_k_l + 2.0 * (g - al * mu1) * t_k_l);
  }
  return 3.0 * kPi / (4.0 * w) * setup.q1_row_norm2() * sum;
}

CenterManifoldCoefficient algorithm1_terms(const HopfSetup& setup) {
  const auto& cfg = setup.cfg;
  const int units = cfg.units();
  const int N = 2 * units;
  const int R = N - 2;
  const double w = setup.lambda0_abs;
  const Eigen::MatrixXd& P = setup.spectral.P;
  const Eigen::MatrixXd& Wm = setup.W.entries();

  // v -> (s_bar, a_bar) = M v, pairing columns (2i, 2i+1) with mode i.
  Eigen::MatrixXd M(N, N);
  for (int i = 0; i < units; ++i) {
    const Eigen::Matrix2d& Q = setup.Q[i];
    M.block(0, 2 * i, units, 1) = P.col(i) * Q(0, 0);
    M.block(0, 2 * i + 1, units, 1) = P.col(i) * Q(0, 1);
    M.block(units, 2 * i, units, 1) = P.col(i) * Q(1, 0);
    M.block(units, 2 * i + 1, units, 1) = P.col(i) * Q(1, 1);
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  const Eigen::MatrixXd Hbar = lu.solve(h_matrix(setup.W, cfg) * M);
  const Eigen::MatrixXd H3 = Hbar.bottomRightCorner(R, R);
  const Eigen::MatrixXd S = M.topRows(units);
  const Eigen::VectorXd o0 = Eigen::VectorXd::Constant(units, 1.0 / cfg.m);

  // Nonlinear part of the field pulled back to v: M^-1 [W d; g d] for a
  // derivative d of the softmax.
  auto lift = [&](const Eigen::VectorXd& d) {
    Eigen::VectorXd y(N);
    y << Wm * d, cfg.g_bar_a * d;
    return y;
  };
  auto second = [&](int j, int k) {
    return lu.solve(lift(softmax_second_derivative(o0, S.col(j), S.col(k), cfg))).eval();
  };
  auto third = [&](int j, int k, int l) {
    return lu.solve(lift(softmax_third_derivative(o0, S.col(j), S.col(k), S.col(l), cfg))).eval();
  };

  const Eigen::VectorXd X11 = second(0, 0);
  const Eigen::VectorXd X12 = second(0, 1);
  const Eigen::VectorXd X22 = second(1, 1);

  // Quadratic center-manifold coefficients from the invariance equations.
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(R, R);
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(3 * R, 3 * R);
  sys.block(0, 0, R, R) = H3;
  sys.block(0, R, R, R) = 2.0 * w * I;
  sys.block(R, 0, R, R) = -w * I;
  sys.block(R, R, R, R) = H3;
  sys.block(R, 2 * R, R, R) = w * I;
  sys.block(2 * R, R, R, R) = -2.0 * w * I;
  sys.block(2 * R, 2 * R, R, R) = H3;
  Eigen::VectorXd rhs(3 * R);
  rhs << -X11.tail(R), -X12.tail(R), -X22.tail(R);
  const Eigen::FullPivLU<Eigen::MatrixXd> sys_lu(sys);
  if (!sys_lu.isInvertible()) {
    throw ResonanceError("center-manifold system is singular (resonant eigenvalues)");
  }
  const Eigen::VectorXd gsol = sys_lu.solve(rhs);
  const Eigen::VectorXd g11 = gsol.segment(0, R);
  const Eigen::VectorXd g12 = gsol.segment(R, R);
  const Eigen::VectorXd g22 = gsol.segment(2 * R, R);
  auto g = [&](int a, int b) -> const Eigen::VectorXd& {
    if (a == 0 && b == 0) return g11;
    if (a == 1 && b == 1) return g22;
    return g12;
  };

  // Mixed second derivatives d_r d_j X^{1,2} for each non-critical direction r.
  Eigen::MatrixXd cross0(2, R), cross1(2, R);
  {
    Eigen::MatrixXd lifted(N, 2 * R);
    for (int r = 0; r < R; ++r) {
      lifted.col(r) = lift(softmax_second_derivative(o0, S.col(0), S.col(2 + r), cfg));
      lifted.col(R + r) = lift(softmax_second_derivative(o0, S.col(1), S.col(2 + r), cfg));
    }
    const Eigen::MatrixXd pulled = lu.solve(lifted);
    cross0 = pulled.topLeftCorner(2, R);
    cross1 = pulled.topRightCorner(2, R);
  }
  auto cross = [&](int j) -> const Eigen::MatrixXd& { return j == 0 ? cross0 : cross1; };

  // Correction of d_l d_k d_j X^i on the center manifold.
  auto correction = [&](int i, int j, int k, int l) {
    return cross(j).row(i).dot(g(l, k)) + cross(k).row(i).dot(g(l, j)) +
           cross(l).row(i).dot(g(k, j));
  };

  const Eigen::VectorXd X111 = third(0, 0, 0);
  const Eigen::VectorXd X122 = third(0, 1, 1);
  const Eigen::VectorXd X112 = third(0, 0, 1);
  const Eigen::VectorXd X222 = third(1, 1, 1);

  const double pure = X111(0) + X122(0) + X112(1) + X222(1);
  const double corr = correction(0, 0, 0, 0) + correction(0, 0, 1, 1) + correction(1, 0, 0, 1) +
                      correction(1, 1, 1, 1);
  // Component index first, then the two derivative directions.
  const double quad = -X11(0) * X12(0) + X22(1) * X12(1) + X11(1) * X12(1) - X22(0) * X12(0) +
                      X11(0) * X11(1) - X22(0) * X22(1);

  CenterManifoldCoefficient out;
  out.third_derivative_term = 3.0 * kPi / (4.0 * w) * pure;
  out.center_manifold_term = 3.0 * kPi / (4.0 * w) * corr;
  out.quadratic_term = 3.0 * kPi / (4.0 * w * w) * quad;
  return out;
}

double algorithm1_coefficient(const HopfSetup& setup) { return algorithm1_terms(setup).value(); }

double algorithm1_coefficient(const WeightMatrix& W, const NetworkConfig& cfg) {
  return algorithm1_coefficient(hopf_setup(W, cfg));
}

std::string to_string(HopfVerdict v) {
  return v == HopfVerdict::vague_attractor ? "VAGUE_ATTRACTOR" : "NOT_VAGUE_ATTRACTOR";
}

namespace {

// Which sign shortcut applies; empty when none does. `why` collects the
// failed sub-case conditions.
std::string shortcut_case(const HopfSetup& setup, std::vector<std::string>* why) {
  const auto& cfg = setup.cfg;
  const double bound = cfg.m * (1.0 + cfg.alpha) * (1.0 + cfg.alpha);
  if (cfg.m == 2) return "a";
  if (cfg.g_bar_a < bound) {
    if (why) {
      why->push_back(fmt::format("case ({}) requires g_bar_a >= m(1+alpha)^2 = {:.6g}, got {:.6g}",
                                 cfg.m == 3 ? "b" : "c", bound, cfg.g_bar_a));
    }
    return {};
  }
  if (cfg.m == 3) return "b";
  const double q = quartic_margin(setup.spectral.p1, cfg);
  if (q < 0.0) {
    if (why) why->push_back(fmt::format("case (c) quartic inequality fails by {:.6g}", -q));
    return {};
  }
  return "c";
}

}  // namespace

HopfReport hopf_report(const WeightMatrix& W, const NetworkConfig& cfg, const HopfOptions& options) {
  const HopfSetup setup = hopf_setup(W, cfg, options);
  HopfReport rep;
  rep.lambda0_abs = setup.lambda0_abs;
  rep.I1 = closed_form_I1(setup);
  rep.I2 = closed_form_I2(setup);
  rep.I3 = closed_form_I3(setup);
  rep.total = rep.I1 + rep.I2 + rep.I3;
  rep.numeric_total = algorithm1_coefficient(setup);
  rep.agreement = std::abs(rep.numeric_total - rep.total) / std::max(1.0, std::abs(rep.total));
  rep.verdict = rep.total < 0.0 ? HopfVerdict::vague_attractor : HopfVerdict::not_vague_attractor;
  rep.case_used = shortcut_case(setup, nullptr);
  if (rep.case_used.empty()) rep.case_used = "numeric-only";
  return rep;
}

Theorem3Verdict theorem3_verdict(const WeightMatrix& W, const NetworkConfig& cfg,
                                 const HopfOptions& options) {
  Theorem3Verdict out;
  const SpectralReport spec = lemma2_basis(W, cfg);
  if (!spec.mu1_simple) {
    out.reasons.push_back("mu1 not simple");
    return out;
  }
  std::optional<HopfSetup> setup;
  try {
    setup.emplace(hopf_setup(W, cfg, options));
  } catch (const Error& e) {
    out.reasons.push_back(e.what());
    return out;
  }

  HopfReport rep;
  try {
    rep = hopf_report(W, cfg, options);
  } catch (const Error& e) {
    out.reasons.push_back(e.what());
    return out;
  }
  out.report = rep;
  out.case_used = shortcut_case(*setup, &out.reasons);

  if (!out.case_used.empty()) {
    out.certified = rep.total < 0.0;
    if (!out.certified) {
      out.reasons.push_back(fmt::format(
          "closed-form coefficient {:.6g} is not negative despite case ({})", rep.total,
          out.case_used));
    }
    return out;
  }
  out.case_used = "numeric-only";
  const bool agree = rep.agreement < options.agreement_tolerance;
  if (!agree) {
    out.reasons.push_back(fmt::format("coefficient routes disagree (relative {:.3g})", rep.agreement));
  }
  if (!(rep.total < 0.0 && rep.numeric_total < 0.0)) {
    out.reasons.push_back(fmt::format("coefficient {:.6g} is not negative", rep.total));
  }
  out.certified = agree && rep.total < 0.0 && rep.numeric_total < 0.0;
  return out;
}

}  // namespace recall_dyn
