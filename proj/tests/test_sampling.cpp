#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "koopnet/rng.hpp"
#include "koopnet/sampling.hpp"

using namespace koopnet;

TEST_SUITE("sampling") {
  TEST_CASE("degenerate box gives constant samples") {
    Box box{Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(0.0, 0.0)};
    const Eigen::MatrixXd X = sample_uniform(box, 10, 1);
    CHECK(X.cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("negative-width box is rejected") {
    Box box{Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 0.0)};
    CHECK_THROWS_AS(sample_uniform(box, 1, 1), std::invalid_argument);
  }

  TEST_CASE("per-coordinate mean over many samples is near zero") {
    const Eigen::MatrixXd X = sample_uniform(Box::centered(3, 1.0), 100000, 77);
    CHECK(X.rowwise().mean().cwiseAbs().maxCoeff() < 0.02);
    CHECK(X.minCoeff() >= -1.0);
    CHECK(X.maxCoeff() <= 1.0);
  }

  TEST_CASE("same seed gives identical samples") {
    const Eigen::MatrixXd A = sample_uniform(Box::centered(2, 1.5), 50, 123);
    const Eigen::MatrixXd B = sample_uniform(Box::centered(2, 1.5), 50, 123);
    const Eigen::MatrixXd C = sample_uniform(Box::centered(2, 1.5), 50, 124);
    CHECK(A == B);
    CHECK(A != C);
  }

  TEST_CASE("generator targets with zero input are the drift") {
    const NetworkSystem sys = make_benchmark("duffing3");
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(sys.input_dim(1));
    const SnapshotSet set = generator_data_local(sys, 1, zero, 40, 9);
    for (int l = 0; l < 40; ++l)
      REQUIRE((set.targets.col(l) - sys.drift[1](set.inputs.col(l))).norm() == 0.0);
  }

  TEST_CASE("canonical input shifts the driven coordinate by the gain") {
    const NetworkSystem sys = make_benchmark("duffing3");
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(sys.input_dim(1));
    const SnapshotSet base = generator_data_local(sys, 1, zero, 25, 31);
    const SnapshotSet bumped =
        generator_data_local(sys, 1, sys.canonical_input(1, 0, 0), 25, 31);
    REQUIRE(base.inputs == bumped.inputs);  // same seed, same points
    const Eigen::MatrixXd delta = bumped.targets - base.targets;
    CHECK(delta.row(0).cwiseAbs().maxCoeff() == 0.0);
    CHECK((delta.row(1).array() - 0.25).abs().maxCoeff() < 1e-15);
  }

  TEST_CASE("coupling contributions add linearly over inputs") {
    const NetworkSystem sys = make_benchmark("vdp3");
    const int i = 2;  // neighbours 0 (augmented, 3 coords) and 1 (2 coords)
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(sys.input_dim(i));
    Eigen::VectorXd combo = zero;
    combo[2] = 1.0;  // third coordinate of neighbour 0 (its output)
    combo[4] = 1.0;  // second coordinate of neighbour 1
    const SnapshotSet s0 = generator_data_local(sys, i, zero, 15, 5);
    const SnapshotSet sa = generator_data_local(sys, i, sys.canonical_input(i, 0, 2), 15, 5);
    const SnapshotSet sb = generator_data_local(sys, i, sys.canonical_input(i, 1, 1), 15, 5);
    const SnapshotSet sc = generator_data_local(sys, i, combo, 15, 5);
    const Eigen::MatrixXd lhs = sc.targets - s0.targets;
    const Eigen::MatrixXd rhs = (sa.targets - s0.targets) + (sb.targets - s0.targets);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-14);
  }

  TEST_CASE("flow pairs are Euler-consistent as dt shrinks") {
    const NetworkSystem sys = make_benchmark("duffing3");
    const double dt = 1e-4;
    const SnapshotSet set = flow_data_full(sys, 20, dt, 55);
    for (int l = 0; l < 20; ++l) {
      const Eigen::VectorXd rate = (set.targets.col(l) - set.inputs.col(l)) / dt;
      const Eigen::VectorXd field = full_vector_field(sys, set.inputs.col(l));
      REQUIRE((rate - field).cwiseAbs().maxCoeff() < 10.0 * dt);
    }
  }

  TEST_CASE("zero field keeps targets equal to inputs") {
    NetworkSystem sys;
    sys.graph = Digraph(1, {});
    sys.dims = {2};
    sys.physical_dims = {2};
    sys.drift = {[](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(2); }};
    sys.domain = {Box::centered(2, 1.0)};
    const SnapshotSet set = flow_data_full(sys, 12, 0.05, 3);
    CHECK((set.targets - set.inputs).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("subsystem extraction matches the full-sample blocks") {
    const NetworkSystem sys = make_benchmark("duffing3");
    const SnapshotSet full = flow_data_full(sys, 30, 0.01, 21);
    for (int i = 0; i < 3; ++i) {
      const SnapshotSet sub = extract_subsystem(full, sys, i);
      REQUIRE(sub.inputs == full.inputs.middleRows(sys.offset(i), 2));
      REQUIRE(sub.targets == full.targets.middleRows(sys.offset(i), 2));
    }
  }

  TEST_CASE("frozen local flow agrees with the full system when neighbours are pinned") {
    // Pin the driver at a constant by zeroing its dynamics, then the local
    // flow with v = that constant is the block flow of the full system.
    NetworkSystem sys = make_benchmark("duffing3");
    sys.drift[0] = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(2); };
    Eigen::VectorXd x0(6);
    x0 << 0.7, -0.2, 0.3, 0.1, -0.4, 0.2;
    const Trajectory full = integrate(sys, x0, 0.01, 20);
    const Eigen::VectorXd v = x0.head(2);
    const Trajectory local = local_flow(sys, 1, x0.segment(2, 2), v, 0.01, 20);
    CHECK((full.states.middleRows(2, 2) - local.states).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("local flow pairs integrate the frozen-input subsystem") {
    const NetworkSystem sys = make_benchmark("duffing3");
    const Eigen::VectorXd v = sys.canonical_input(1, 0, 0) * 0.8;
    const SnapshotSet set = flow_data_local(sys, 1, v, 15, 0.01, 77);
    for (int l = 0; l < 15; ++l) {
      const Eigen::VectorXd truth =
          local_flow(sys, 1, set.inputs.col(l), v, 0.01, 1).states.col(1);
      REQUIRE((set.targets.col(l) - truth).norm() == 0.0);
    }
    // Euler consistency of the local pairs
    const SnapshotSet fine = flow_data_local(sys, 1, v, 15, 1e-4, 78);
    for (int l = 0; l < 15; ++l) {
      const Eigen::VectorXd rate = (fine.targets.col(l) - fine.inputs.col(l)) / 1e-4;
      const Eigen::VectorXd field = local_vector_field(sys, 1, fine.inputs.col(l), v);
      REQUIRE((rate - field).cwiseAbs().maxCoeff() < 1e-3);
    }
  }

  TEST_CASE("snapshot sets are reproducible from their seed") {
    const NetworkSystem sys = make_benchmark("transfer_base");
    const SnapshotSet a = flow_data_full(sys, 25, 0.01, 99);
    const SnapshotSet b = flow_data_full(sys, 25, 0.01, 99);
    CHECK(a.inputs == b.inputs);
    CHECK(a.targets == b.targets);
  }

  TEST_CASE("csv export names the column roles and round-trips values") {
    const NetworkSystem sys = make_benchmark("duffing3");
    const SnapshotSet set = flow_data_full(sys, 5, 0.01, 7);
    const std::string prefix = "/tmp/koopnet_test_snap_";
    write_snapshot_csv(set, prefix, sys.dims);
    std::ifstream in(prefix + "inputs.csv");
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    CHECK(header == "x_1_1,x_1_2,x_2_1,x_2_2,x_3_1,x_3_2");
    std::stringstream row(first);
    std::string cell;
    std::getline(row, cell, ',');
    CHECK(std::stod(cell) == set.inputs(0, 0));
    std::remove((prefix + "inputs.csv").c_str());
    std::remove((prefix + "targets.csv").c_str());
  }
}
