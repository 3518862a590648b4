#include <algorithm>
#include <numeric>

#include <doctest.h>

#include "oracles.hpp"
#include "recall_dyn/errors.hpp"
#include "recall_dyn/learning.hpp"
#include "recall_dyn/softmax.hpp"
#include "recall_dyn/spectral.hpp"

using namespace recall_dyn;

TEST_CASE("single-pattern weights match the enumerated blocks") {
  const int n = 4, m = 5;
  const Pattern z{{1, 3, 5, 2}};
  const Eigen::MatrixXd W = single_pattern_weights(z, n, m);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const Eigen::MatrixXd B = W.block(i * m, k * m, m, m);
      if (i == k) {
        CHECK(B.norm() == 0.0);
      } else {
        CHECK((B - oracle::enumerated_block(z.values[i], z.values[k], m)).norm() < 1e-15);
        // Constant row sums: co-active row 1 - (m-1)/(m-2)... each row sums equally.
        const Eigen::VectorXd rs = B.rowwise().sum();
        CHECK(rs.maxCoeff() - rs.minCoeff() < 1e-15);
      }
    }
  }
}

TEST_CASE("accumulation sums the single-pattern matrices") {
  const auto pats = oracle::reference_patterns();
  LearningSpec spec{pats, 1.0, 6, 3, LearningRule::standard};
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(18, 18);
  for (const auto& p : pats) sum += single_pattern_weights(p, 6, 3);
  CHECK((accumulate_patterns(spec) - sum).norm() < 1e-14);
}

TEST_CASE("learned reference weights satisfy the assumptions and hit the target mu1") {
  const NetworkConfig cfg = oracle::reference_config();
  for (double mu1 : {2 * (1 + cfg.alpha) - 0.1, 3 * (1 + cfg.alpha) + 40, 3 * (1 + cfg.alpha) + 200}) {
    const WeightMatrix W = oracle::reference_weights(mu1);
    CHECK(validate_assumptions(W).all_pass());
    // Independent check: largest eigenvalue of m W Lambda.
    Eigen::EigenSolver<Eigen::MatrixXd> es(cfg.m * W.entries() * lambda_matrix(cfg), false);
    CHECK(es.eigenvalues().real().maxCoeff() == doctest::Approx(mu1).epsilon(1e-10));
    CHECK(lemma2_basis(W, cfg).mu1() == doctest::Approx(mu1).epsilon(1e-10));
  }
}

TEST_CASE("m = 2 needs the two-minicolumn rule") {
  const NetworkConfig cfg{3, 2, 0.2, 1.0};
  const std::vector<Pattern> pats{{{1, 2, 1}}, {{2, 2, 1}}};
  CHECK_THROWS_AS(learn_weights({pats, 1.0, 3, 2, LearningRule::standard}, cfg), UnsupportedRuleError);
  const WeightMatrix W = learn_weights({pats, 1.0, 3, 2, LearningRule::two_minicolumn}, cfg);
  CHECK(validate_assumptions(W).all_pass());
  const Eigen::MatrixXd raw = single_pattern_weights(pats[0], 3, 2, LearningRule::two_minicolumn);
  Eigen::MatrixXd expect(2, 2);
  expect << -1, 1, 1, -1;  // hypercolumn 1 active on 1, hypercolumn 2 active on 2
  CHECK((raw.block(0, 2, 2, 2) - expect).norm() == 0.0);
  CHECK_THROWS_AS(single_pattern_weights(pats[0], 3, 3, LearningRule::two_minicolumn),
                  UnsupportedRuleError);
}

TEST_CASE("normalization rejects a non-positive leading eigenvalue") {
  const NetworkConfig cfg{2, 3, 0.2, 1.0};
  CHECK_THROWS_AS(normalize_weights(Eigen::MatrixXd::Zero(6, 6), 1.0, cfg), DegenerateSpectrumError);
}

TEST_CASE("relabeling hypercolumns permutes the weight blocks") {
  const auto pats = oracle::reference_patterns();
  const NetworkConfig cfg = oracle::reference_config();
  std::vector<int> perm{3, 0, 5, 1, 4, 2};
  std::vector<Pattern> permuted;
  for (const auto& p : pats) {
    Pattern q;
    for (int i = 0; i < 6; ++i) q.values.push_back(p.values[perm[i]]);
    permuted.push_back(q);
  }
  const WeightMatrix A = learn_weights({pats, 5.0, 6, 3, LearningRule::standard}, cfg);
  const WeightMatrix B = learn_weights({permuted, 5.0, 6, 3, LearningRule::standard}, cfg);
  for (int i = 0; i < 6; ++i) {
    for (int k = 0; k < 6; ++k) CHECK((B.block(i, k) - A.block(perm[i], perm[k])).norm() < 1e-12);
  }
}

TEST_CASE("pattern file parsing") {
  const auto pats = parse_patterns("# comment\n1 1 2\n\n3 2 1\n", 3, 3);
  REQUIRE(pats.size() == 2);
  CHECK(pats[1].values == std::vector<int>{3, 2, 1});
  try {
    parse_patterns("1 2 3\n1 2 x\n", 3, 3);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  try {
    parse_patterns("1 2 3\n1 2 4\n", 3, 3);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_patterns("1 2\n", 3, 3), ParseError);
  CHECK_THROWS_AS(parse_patterns("# nothing\n", 3, 3), ParseError);
}
