#include "recall_dyn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "recall_dyn/errors.hpp"
#include "recall_dyn/softmax.hpp"

namespace recall_dyn {

namespace {

// Orthonormal basis of the vectors whose hypercolumn blocks each sum to zero
// (Helmert contrasts, block by block).
Eigen::MatrixXd centered_basis(int n, int m) {
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(n * m, (m - 1) * n);
  int col = 0;
  for (int r = 0; r < n; ++r) {
    for (int k = 1; k < m; ++k, ++col) {
      const double norm = std::sqrt(double(k) * (k + 1));
      for (int t = 0; t < k; ++t) U(r * m + t, col) = 1.0 / norm;
      U(r * m + k, col) = -double(k) / norm;
    }
  }
  return U;
}

// Eigen-decomposition of a symmetric matrix, eigenvalues descending. Ties keep
// the solver's original index order.
void sorted_eigen(const Eigen::MatrixXd& S, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()));
  const Eigen::VectorXd& ev = es.eigenvalues();
  std::vector<int> order(ev.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return ev(a) > ev(b); });
  values.resize(ev.size());
  vectors.resize(S.rows(), ev.size());
  for (int i = 0; i < static_cast<int>(order.size()); ++i) {
    values(i) = ev(order[i]);
    vectors.col(i) = es.eigenvectors().col(order[i]);
  }
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  if (v(idx) < 0) v = -v;
}

}  // namespace

std::pair<std::complex<double>, std::complex<double>> mode_eigenvalues(double mu,
                                                                        const NetworkConfig& cfg) {
  const double m = cfg.m;
  const double centre = (mu - m * (1.0 + cfg.alpha)) / (2.0 * m);
  const double b = cfg.alpha + (mu / m - 1.0);
  const std::complex<double> root = std::sqrt(std::complex<double>(b * b - 4.0 * cfg.g_bar_a / m));
  return {centre + 0.5 * root, centre - 0.5 * root};
}

Eigen::VectorXcd h_eigenvalues(const SpectralReport& report, const NetworkConfig& cfg) {
  const int units = cfg.units();
  Eigen::VectorXcd nu(2 * units);
  for (int i = 0; i < units; ++i) {
    if (i < report.leading) {
      auto [plus, minus] = mode_eigenvalues(report.mu(i), cfg);
      nu(2 * i) = plus;
      nu(2 * i + 1) = minus;
    } else {
      nu(2 * i) = -cfg.alpha;
      nu(2 * i + 1) = -1.0;
    }
  }
  return nu;
}

SpectralReport lemma2_basis(const WeightMatrix& W, const NetworkConfig& cfg) {
  W.check_dims(cfg);
  require_assumptions(W);
  const int n = cfg.n;
  const int m = cfg.m;
  const int lead = (m - 1) * n;

  SpectralReport rep;
  rep.leading = lead;

  // m W Lambda restricted to the centered subspace is U^T W U, since
  // Lambda U = U / m there.
  const Eigen::MatrixXd U = centered_basis(n, m);
  Eigen::VectorXd mu_c;
  Eigen::MatrixXd V_c;
  sorted_eigen(U.transpose() * W.entries() * U, mu_c, V_c);

  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n * m, n);
  for (int k = 0; k < n; ++k) E.block(k * m, k, m, 1).setConstant(1.0 / std::sqrt(double(m)));
  rep.F = W.row_sum_matrix();
  Eigen::VectorXd mu_f;
  Eigen::MatrixXd V_f;
  sorted_eigen(rep.F, mu_f, V_f);

  rep.mu.resize(n * m);
  rep.mu << mu_c, mu_f;
  rep.P.resize(n * m, n * m);
  rep.P << U * V_c, E * V_f;
  for (int c = 0; c < n * m; ++c) fix_sign(rep.P.col(c));
  rep.p1 = rep.P.col(0);

  rep.mu1_simple =
      lead == 1 || (rep.mu(0) - rep.mu(1)) > kSimpleGap * std::max(1.0, std::abs(rep.mu(0)));
  rep.nu = h_eigenvalues(rep, cfg);
  rep.max_real_part = rep.nu.real().maxCoeff();
  return rep;
}

Eigen::MatrixXd h_matrix(const WeightMatrix& W, const NetworkConfig& cfg) {
  W.check_dims(cfg);
  const int u = cfg.units();
  const Eigen::MatrixXd L = lambda_matrix(cfg);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(u, u);
  Eigen::MatrixXd H(2 * u, 2 * u);
  H << W.entries() * L - I, -I, cfg.g_bar_a * L, -cfg.alpha * I;
  return H;
}

double mu_max(const WeightMatrix& W) {
  const auto& E = W.entries();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (E + E.transpose()),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double spectral_norm(const WeightMatrix& W) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(W.entries());
  return svd.singularValues()(0);
}

double quartic_margin(const Eigen::VectorXd& p1, const NetworkConfig& cfg) {
  const int m = cfg.m;
  double squares = 0.0;
  double fourth = 0.0;
  for (int r = 0; r < cfg.n; ++r) {
    const Eigen::ArrayXd blk = p1.segment(r * m, m).array().square();
    squares += blk.sum() * blk.sum();
    fourth += blk.square().sum();
  }
  return 3.0 / m * squares - fourth;
}

WeightMatrix rescale_to_mu1(const WeightMatrix& W, const NetworkConfig& cfg, double target) {
  const SpectralReport rep = lemma2_basis(W, cfg);
  if (!(rep.mu1() > 0.0)) {
    throw DegeneracyError(
        fmt::format("mu1 = {:.6g} is not positive; cannot rescale to {:.6g}", rep.mu1(), target));
  }
  return W.scaled(target / rep.mu1());
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::global_equilibrium:
      return "GLOBAL_EQUILIBRIUM";
    case Regime::local_equilibrium:
      return "LOCAL_EQUILIBRIUM";
    case Regime::hopf_limit_cycle:
      return "HOPF_LIMIT_CYCLE";
    case Regime::unclassified:
      return "UNCLASSIFIED";
  }
  return "UNCLASSIFIED";
}

const ConditionCheck& RegimeClassification::condition(const std::string& name) const {
  for (const auto& c : conditions)
    if (c.name == name) return c;
  throw std::out_of_range("no condition named " + name);
}

RegimeClassification classify_regime(const WeightMatrix& W, const NetworkConfig& cfg) {
  cfg.validate();
  const SpectralReport rep = lemma2_basis(W, cfg);
  const double m = cfg.m;
  const double alpha = cfg.alpha;
  const double g = cfg.g_bar_a;
  const double mu1 = rep.mu1();
  const double crit = cfg.critical_mu1();
  const double wmax = mu_max(W);
  const double wnorm = spectral_norm(W);

  RegimeClassification out;
  auto add = [&](std::string name, double margin, bool strict = true) {
    const bool pass = strict ? margin > 0.0 : margin >= 0.0;
    out.conditions.push_back({std::move(name), pass, margin});
    return pass;
  };

  out.unique_equilibrium = add("unique_equilibrium", g - alpha * (wmax - 2.0));

  const double sigma = 2.0 * (1.0 + alpha) - wmax;
  const bool below = add("global_mu_max_below_2(1+alpha)", sigma);
  const double gain_bound = sigma > 0.0 ? 2.0 * alpha * alpha * (1.0 + alpha) * wnorm * wnorm /
                                              (sigma * sigma)
                                        : std::numeric_limits<double>::infinity();
  const bool gain = add("global_gain_bound", g - gain_bound);

  const bool local_mu = add("local_mu1_below_critical", crit - mu1);
  const bool local_gain = add("local_gain_above_m_alpha^2", g - m * alpha * alpha);
  const double pair_bound = m * std::pow(mu1 / m + alpha - 1.0, 2) / 4.0;
  add("oscillatory_gain_bound", g - pair_bound);

  const bool above = add("hopf_mu1_above_critical", mu1 - crit);
  const double gap = rep.leading > 1 ? rep.mu(0) - rep.mu(1)
                                     : std::numeric_limits<double>::infinity();
  const bool simple = add("hopf_mu1_simple", gap - kSimpleGap * std::max(1.0, std::abs(mu1)));
  const bool hopf_gain = add("hopf_gain_bound", g - pair_bound);
  bool sub_case = false;
  if (cfg.m == 2) {
    out.conditions.push_back({"hopf_case_a_m_equals_2", true, 0.0});
    sub_case = true;
  } else if (cfg.m == 3) {
    sub_case = add("hopf_case_b_gain", g - m * (1.0 + alpha) * (1.0 + alpha), false);
  } else {
    const bool cg = add("hopf_case_c_gain", g - m * (1.0 + alpha) * (1.0 + alpha), false);
    const double q = quartic_margin(rep.p1, cfg);
    sub_case = add("hopf_case_c_quartic", q, false) && cg;
  }

  if (below && gain) out.satisfied.push_back(Regime::global_equilibrium);
  if (local_mu && local_gain) out.satisfied.push_back(Regime::local_equilibrium);
  if (above && simple && hopf_gain && sub_case) out.satisfied.push_back(Regime::hopf_limit_cycle);
  out.regime = out.satisfied.empty() ? Regime::unclassified : out.satisfied.front();
  return out;
}

}  // namespace recall_dyn
