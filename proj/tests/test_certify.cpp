#include <doctest.h>

#include <cmath>
#include <random>

#include "koopnet/certify.hpp"
#include "koopnet/regression.hpp"

using namespace koopnet;

namespace {

/// Hand-assembled generator model: per-subsystem drift matrix plus direction
/// matrices, on coordinate dictionaries. Dimensions are all `n`.
GeneratorNetworkModel synthetic_model(const Digraph& g, int n, double drift_norm,
                                      double gap) {
  GeneratorNetworkModel model;
  model.graph = g;
  model.dims.assign(g.num_vertices(), n);
  for (int i = 0; i < g.num_vertices(); ++i) {
    model.dicts.push_back(make_monomial_dictionary(n, 1));
    GeneratorFamily fam;
    fam.subsystem = i;
    fam.L0 = -drift_norm * Eigen::MatrixXd::Identity(n, n);
    for (int j : g.in_neighbours(i)) {
      auto& dirs = fam.L_dir[j];
      for (int r = 0; r < n; ++r) {
        Eigen::MatrixXd L = fam.L0;
        L(0, 0) += gap;  // ||L - L0|| = gap
        dirs.push_back(L);
      }
    }
    model.families.push_back(std::move(fam));
  }
  return model;
}

Eigen::MatrixXd random_member(std::mt19937_64& gen, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd A(n, n);
  for (int r = 0; r < n; ++r) {
    double off = 0.0;
    for (int c = 0; c < n; ++c)
      if (r != c) {
        A(r, c) = -u(gen);
        off += -A(r, c);
      }
    A(r, r) = off + 0.1 + u(gen);  // strictly diagonally dominant
  }
  return A;
}

}  // namespace

TEST_SUITE("certify") {
  TEST_CASE("decoupled functionals reduce to twice the drift norm") {
    const GeneratorNetworkModel model = synthetic_model(Digraph(2, {}), 2, 0.7, 0.0);
    std::vector<Box> domains(2, Box::centered(2, 1.0));
    Eigen::VectorXd x0 = Eigen::VectorXd::Constant(4, 0.5);
    const ErrorFunctionals f = compute_functionals(model, domains, 1.0, x0);
    for (int i = 0; i < 2; ++i) {
      CHECK(f.rho[i] == doctest::Approx(0.7));
      CHECK(f.nu[i] == doctest::Approx(1.4));  // 2 ||L0||
      CHECK(f.P_norm[i] == doctest::Approx(1.0));
      CHECK(f.eta[i] == doctest::Approx(1.0 * 1.0));  // ||z0||_1 = 1, T = 1
    }
    CHECK(f.E_zero.empty());
  }

  TEST_CASE("coupled functional formulas by hand") {
    // One arc 0 -> 1 on scalar subsystems: rho and E_10(0,0) have short
    // closed forms to compare against.
    const Digraph g(2, {{0, 1}});
    GeneratorNetworkModel model = synthetic_model(g, 1, 0.5, 0.2);
    std::vector<Box> domains(2, Box::centered(1, 2.0));  // alpha = 2
    Eigen::VectorXd x0(2);
    x0 << 1.5, 1.5;
    const double T = 0.3;
    const ErrorFunctionals f = compute_functionals(model, domains, T, x0);
    CHECK(f.rho[0] == doctest::Approx(0.5));
    // rho_1 = ||L0||(1 + alpha_0) + alpha_0 * ||L^{e}|| with ||L^{e}|| = 0.3
    CHECK(f.rho[1] == doctest::Approx(0.5 * 3.0 + 2.0 * 0.3));
    CHECK(f.nu[1] == doctest::Approx(2.0 * f.rho[1]));
    CHECK(f.coupling_gap.at({1, 0}) == doctest::Approx(0.2));
    const double expected =
        1.0 * 1.5 * T * std::exp(f.nu[1] * T) * 0.2;  // ||P|| ||z0|| T e^{nu T} gap
    CHECK(f.E_zero.at({1, 0}) == doctest::Approx(expected));
    CHECK(f.z0_norm_worst[1] == doctest::Approx(2.0));  // corner of the box
  }

  TEST_CASE("perturbed functionals meet the zero-error limit") {
    const Digraph g(2, {{0, 1}});
    GeneratorNetworkModel model = synthetic_model(g, 2, 0.4, 0.1);
    std::vector<Box> domains(2, Box::centered(2, 1.0));
    Eigen::VectorXd x0 = Eigen::VectorXd::Constant(4, 0.5);
    const ErrorFunctionals f = compute_functionals(model, domains, 0.5, x0);
    const PerturbedFunctionals p0 = compute_functionals_at(model, f, 0.0);
    CHECK(p0.E_i[0] == doctest::Approx(0.0));
    CHECK(p0.E_i[1] == doctest::Approx(0.0));
    CHECK(p0.E_ij.at({1, 0}) == doctest::Approx(f.E_zero.at({1, 0})));
    const PerturbedFunctionals p = compute_functionals_at(model, f, 1e-3);
    CHECK(p.E_i[1] > 0.0);
    CHECK(p.E_ij.at({1, 0}) > f.E_zero.at({1, 0}));
  }

  TEST_CASE("doubling the horizon squares the growth factor") {
    const Digraph g(2, {{0, 1}});
    GeneratorNetworkModel model = synthetic_model(g, 1, 0.3, 0.15);
    std::vector<Box> domains(2, Box::centered(1, 1.0));
    Eigen::VectorXd x0(2);
    x0 << 1.0, 1.0;
    const ErrorFunctionals f1 = compute_functionals(model, domains, 0.4, x0);
    const ErrorFunctionals f2 = compute_functionals(model, domains, 0.8, x0);
    CHECK(f2.eta[1] == doctest::Approx(2.0 * f1.eta[1]));
    const double growth1 = f1.E_zero.at({1, 0}) / (f1.eta[1] * f1.coupling_gap.at({1, 0}));
    const double growth2 = f2.E_zero.at({1, 0}) / (f2.eta[1] * f2.coupling_gap.at({1, 0}));
    CHECK(growth2 == doctest::Approx(growth1 * growth1).epsilon(1e-9));
  }

  TEST_CASE("E values grow monotonically in horizon, lift norm and gaps") {
    const Digraph g(2, {{0, 1}});
    std::vector<Box> domains(2, Box::centered(1, 1.0));
    Eigen::VectorXd x_small(2), x_large(2);
    x_small << 0.5, 0.5;
    x_large << 1.0, 1.0;
    GeneratorNetworkModel model = synthetic_model(g, 1, 0.3, 0.15);
    const double base = compute_functionals(model, domains, 0.4, x_small).E_zero.at({1, 0});
    CHECK(compute_functionals(model, domains, 0.6, x_small).E_zero.at({1, 0}) > base);
    CHECK(compute_functionals(model, domains, 0.4, x_large).E_zero.at({1, 0}) > base);
    GeneratorNetworkModel wider = synthetic_model(g, 1, 0.3, 0.3);
    CHECK(compute_functionals(wider, domains, 0.4, x_small).E_zero.at({1, 0}) > base);
  }

  TEST_CASE("acyclic verdicts") {
    CHECK(check_acyclic(Digraph(3, {{0, 1}, {0, 2}})).pass);
    CHECK_FALSE(check_acyclic(Digraph(2, {{0, 1}, {1, 0}})).pass);
    CHECK(check_acyclic(Digraph(4, {{0, 1}, {0, 2}, {2, 3}})).pass);
  }

  TEST_CASE("weak interconnection passes for decoupled systems") {
    const Digraph g(3, {});
    const GeneratorNetworkModel model = synthetic_model(g, 1, 0.5, 0.0);
    std::vector<Box> domains(3, Box::centered(1, 1.0));
    const ErrorFunctionals f =
        compute_functionals(model, domains, 1.0, Eigen::VectorXd::Ones(3));
    const auto verdict = check_weak_interconnection(f, g);
    CHECK(verdict.pass);
    CHECK(verdict.eps_bar == 0.0);
  }

  TEST_CASE("weak interconnection on a gentle and a harsh 2-cycle") {
    const Digraph g(2, {{0, 1}, {1, 0}});
    std::vector<Box> domains(2, Box::centered(1, 0.5));
    Eigen::VectorXd x0(2);
    x0 << 0.2, 0.2;
    const GeneratorNetworkModel gentle = synthetic_model(g, 1, 0.1, 0.05);
    const ErrorFunctionals fg = compute_functionals(gentle, domains, 0.2, x0);
    CHECK(check_weak_interconnection(fg, g).pass);

    const GeneratorNetworkModel harsh = synthetic_model(g, 1, 2.0, 5.0);
    const ErrorFunctionals fh = compute_functionals(harsh, domains, 1.0, x0);
    const auto verdict = check_weak_interconnection(fh, g);
    CHECK_FALSE(verdict.pass);
    CHECK(verdict.eps_bar >= 1.0);
  }

  TEST_CASE("condensation check only sees within-component arcs") {
    // 3 -> 0 -> 1 <-> 2: only the {1,2} exchange counts, however strong the
    // feed from outside is.
    const Digraph g(4, {{3, 0}, {0, 1}, {1, 2}, {2, 1}});
    GeneratorNetworkModel model = synthetic_model(g, 1, 0.05, 0.02);
    // Make the arc 0 -> 1 carry a huge gap; it is outside the component.
    model.families[1].L_dir.at(0)[0] = Eigen::MatrixXd::Constant(1, 1, 50.0);
    std::vector<Box> domains(4, Box::centered(1, 0.5));
    Eigen::VectorXd x0 = Eigen::VectorXd::Constant(4, 0.2);
    const ErrorFunctionals f = compute_functionals(model, domains, 0.05, x0);
    const Condensation c = condensation(g);
    const auto check = check_condensation_weak(f, c, g);
    REQUIRE(check.components.size() == 1);
    CHECK(check.components[0].component == std::vector<int>{1, 2});
    CHECK(check.pass);
    CHECK_FALSE(check_weak_interconnection(f, g).pass);  // the big arc fails globally
  }

  TEST_CASE("acyclic graphs pass the component checks vacuously") {
    const Digraph g(3, {{0, 1}, {0, 2}});
    const GeneratorNetworkModel model = synthetic_model(g, 1, 0.5, 0.5);
    std::vector<Box> domains(3, Box::centered(1, 1.0));
    const ErrorFunctionals f =
        compute_functionals(model, domains, 1.0, Eigen::VectorXd::Ones(3));
    const Condensation c = condensation(g);
    CHECK(check_condensation_weak(f, c, g).pass);
    CHECK(check_condensation_weak(f, c, g).components.empty());
    CHECK(check_single_cycle_small_gain(f, c, g).pass);
  }

  TEST_CASE("small gain multiplies around the cycle") {
    const Digraph g(2, {{0, 1}, {1, 0}});
    GeneratorNetworkModel model = synthetic_model(g, 1, 0.2, 0.3);
    std::vector<Box> domains(2, Box::centered(1, 0.75));
    Eigen::VectorXd x0(2);
    x0 << 0.5, 0.5;
    const ErrorFunctionals f = compute_functionals(model, domains, 0.4, x0);
    const Condensation c = condensation(g);
    const auto check = check_single_cycle_small_gain(f, c, g);
    REQUIRE(check.components.size() == 1);
    const double expected = f.E_zero.at({0, 1}) * f.E_zero.at({1, 0});
    CHECK(check.components[0].value == doctest::Approx(expected));
    CHECK(check.components[0].pass == (expected < 1.0));
    // pivot trace of [[1, -E01], [-E10, 1]]: last pivot is 1 - product
    REQUIRE(check.components[0].pivots.size() == 2);
    CHECK(check.components[0].pivots[1] == doctest::Approx(1.0 - expected));
  }

  TEST_CASE("small gain refuses graphs with shared cycle vertices") {
    const Digraph g(3, {{0, 1}, {1, 0}, {0, 2}, {2, 0}});
    const GeneratorNetworkModel model = synthetic_model(g, 1, 0.1, 0.1);
    std::vector<Box> domains(3, Box::centered(1, 0.5));
    const ErrorFunctionals f =
        compute_functionals(model, domains, 0.1, Eigen::VectorXd::Constant(3, 0.1));
    const Condensation c = condensation(g);
    CHECK_THROWS_AS(check_single_cycle_small_gain(f, c, g), std::invalid_argument);
    const Certificate cert = certify(model, domains, 0.1, Eigen::VectorXd::Constant(3, 0.1));
    CHECK_FALSE(cert.small_gain.applicable);
  }

  TEST_CASE("certificate selects the first passing regime") {
    const Digraph fan(3, {{0, 1}, {0, 2}});
    const GeneratorNetworkModel model = synthetic_model(fan, 1, 0.2, 0.1);
    std::vector<Box> domains(3, Box::centered(1, 1.0));
    const Certificate cert =
        certify(model, domains, 0.5, Eigen::VectorXd::Constant(3, 0.5));
    CHECK(cert.regime == "acyclic");
    CHECK(cert.acyclic.order == std::vector<int>{0, 1, 2});
  }

  TEST_CASE("membership examples by hand") {
    Eigen::MatrixXd A(2, 2);
    A << 1.0, -0.5, -0.25, 1.0;
    std::vector<double> pivots;
    CHECK(m_matrix_membership(A, &pivots));
    REQUIRE(pivots.size() == 2);
    CHECK(pivots[1] == doctest::Approx(0.875));
    const Eigen::MatrixXd Ainv = A.inverse();
    CHECK(Ainv.minCoeff() >= 0.0);

    CHECK(m_matrix_membership(Eigen::MatrixXd::Identity(4, 4)));

    Eigen::MatrixXd B(2, 2);
    B << 1.0, -2.0, -2.0, 1.0;
    pivots.clear();
    CHECK_FALSE(m_matrix_membership(B, &pivots));
    CHECK(pivots.back() == doctest::Approx(-3.0));

    Eigen::MatrixXd C(2, 2);
    C << 1.0, -1.0, -1.0, 1.0;  // zero pivot, sign pattern fine
    CHECK_FALSE(m_matrix_membership(C));

    Eigen::MatrixXd D(2, 2);
    D << 1.0, 0.5, -0.25, 1.0;  // positive off-diagonal breaks the pattern
    CHECK_FALSE(m_matrix_membership(D));
  }

  TEST_CASE("bound solves the 2-cycle in closed form") {
    const double g1 = 0.4, g2 = 0.6;
    Eigen::MatrixXd A(2, 2);
    A << 1.0, -g1, -g2, 1.0;
    Eigen::VectorXd b(2);
    b << 0.3, 0.7;
    const Eigen::VectorXd e = m_matrix_bound(A, b);
    const double det = 1.0 - g1 * g2;
    CHECK(e[0] == doctest::Approx((b[0] + g1 * b[1]) / det));
    CHECK(e[1] == doctest::Approx((b[1] + g2 * b[0]) / det));
    CHECK(m_matrix_bound(A, Eigen::VectorXd::Zero(2)).norm() == 0.0);
    CHECK_THROWS_AS(m_matrix_bound(Eigen::MatrixXd::Identity(2, 2), -b),
                    std::invalid_argument);
  }

  TEST_CASE("members have entrywise nonnegative inverses") {
    std::mt19937_64 gen(2024);
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 3 + static_cast<int>(gen() % 4);
      const Eigen::MatrixXd A = random_member(gen, n);
      REQUIRE(m_matrix_membership(A));
      REQUIRE(A.inverse().minCoeff() > -1e-12);
    }
  }

  TEST_CASE("the inverse bound is monotone in couplings and loads") {
    std::mt19937_64 gen(515);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
      const int n = 2 + static_cast<int>(gen() % 5);
      // Ahat has the stronger (more negative) off-diagonals; shrinking them
      // toward zero keeps the diagonal dominance, so both are members.
      const Eigen::MatrixXd Ahat = random_member(gen, n);
      Eigen::MatrixXd A = Ahat;
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
          if (r != c) A(r, c) *= u(gen);
      Eigen::VectorXd b(n), bhat(n);
      for (int k = 0; k < n; ++k) {
        b[k] = 0.01 + u(gen);
        bhat[k] = b[k] + u(gen);
      }
      REQUIRE(m_matrix_membership(A));
      const Eigen::VectorXd e = m_matrix_bound(A, b);
      const Eigen::VectorXd ehat = m_matrix_bound(Ahat, bhat);
      REQUIRE(((ehat - e).array() > -1e-10).all());
    }
  }

  TEST_CASE("single cycle small gain is never evaluated on shared vertices") {
    // certify() must route around the inapplicable check without throwing.
    const Digraph g(3, {{0, 1}, {1, 0}, {0, 2}, {2, 0}});
    const GeneratorNetworkModel model = synthetic_model(g, 1, 0.05, 0.01);
    std::vector<Box> domains(3, Box::centered(1, 0.25));
    const Certificate cert =
        certify(model, domains, 0.1, Eigen::VectorXd::Constant(3, 0.1));
    CHECK_FALSE(cert.small_gain.applicable);
    CHECK(cert.small_gain.components.empty());
  }
}
