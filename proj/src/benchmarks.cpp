#include <cmath>
#include <stdexcept>

#include "koopnet/system.hpp"

namespace koopnet {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::MatrixXd constant_gain(double value, int row, int col, int rows, int cols) {
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(rows, cols);
  G(row, col) = value;
  return G;
}

CouplingFn constant_coupling(double value, int row, int col, int rows, int cols) {
  Eigen::MatrixXd G = constant_gain(value, row, col, rows, cols);
  return [G](const Eigen::VectorXd&) { return G; };
}

/// Three Duffing oscillators, 1 driving 2 and 3. Cubic terms enter as
/// -beta_i * x_{i,1}^3 with beta_2 = beta_3 = -1 for the driven oscillators.
NetworkSystem make_duffing3() {
  NetworkSystem sys;
  sys.graph = Digraph(3, {{0, 1}, {0, 2}});
  sys.dims = {2, 2, 2};
  sys.physical_dims = sys.dims;
  sys.drift.resize(3);
  sys.drift[0] = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd d(2);
    d << 0.5 * x[1], -0.5 * x[1] - x[0] * x[0] * x[0];
    return d;
  };
  const double alpha = 0.5, beta = -1.0;
  for (int i : {1, 2}) {
    sys.drift[i] = [alpha, beta](const Eigen::VectorXd& x) {
      Eigen::VectorXd d(2);
      d << alpha * x[1], -0.5 * x[1] - beta * x[0] * x[0] * x[0];
      return d;
    };
  }
  const double gamma2 = 0.25, gamma3 = 0.5;
  sys.coupling[{1, 0}] = constant_coupling(gamma2, 1, 0, 2, 2);
  sys.coupling[{2, 0}] = constant_coupling(gamma3, 1, 0, 2, 2);
  sys.domain.assign(3, Box::centered(2, 1.5));
  return sys;
}

/// Three Van-der-Pol oscillators coupled through outputs; oscillator 1 feeds
/// y_1 = x_{1,1} x_{1,2} into 2 and 3, which exchange y_i = x_{i,2}. Rewritten
/// to state couplings, which appends y_1 to the state of oscillator 1.
NetworkSystem make_vdp3() {
  const double a1 = 5.2525, a2 = 196.848, a3 = 5266.8;
  const double b1 = 1.0, b23 = 4.0;

  OutputCoupledSystem sys;
  sys.graph = Digraph(3, {{0, 1}, {0, 2}, {1, 2}, {2, 1}});
  sys.dims = {2, 2, 2};
  sys.drift.resize(3);
  sys.drift[0] = [a1, b1](const Eigen::VectorXd& x) {
    Eigen::VectorXd d(2);
    d << x[1], 0.1 * (1.0 - a1 * x[0] * x[0] * x[1]) - b1 * x[0];
    return d;
  };
  auto driven = [b23](double a) {
    return [a, b23](const Eigen::VectorXd& x) {
      Eigen::VectorXd d(2);
      // The self term +0.1 x_{i,2} of the exchange 0.1 (x_{i,2} - y_j) lives
      // in the drift; the -0.1 y_j part is the coupling.
      d << x[1], 0.01 * (1.0 - a * x[0] * x[0] * x[1]) - b23 * x[0] + 0.1 * x[1];
      return d;
    };
  };
  sys.drift[1] = driven(a2);
  sys.drift[2] = driven(a3);

  sys.coupling[{1, 0}] = constant_coupling(0.001, 1, 0, 2, 1);
  sys.coupling[{2, 0}] = constant_coupling(0.001, 1, 0, 2, 1);
  sys.coupling[{1, 2}] = constant_coupling(-0.1, 1, 0, 2, 1);
  sys.coupling[{2, 1}] = constant_coupling(-0.1, 1, 0, 2, 1);

  Box state_box(Eigen::Vector2d(-kPi / 2, -1.0), Eigen::Vector2d(kPi / 2, 1.0));
  sys.domain.assign(3, state_box);

  sys.outputs.resize(3);
  sys.outputs[0].out_dim = 1;
  sys.outputs[0].value = [](const Eigen::VectorXd& x) {
    return Eigen::VectorXd::Constant(1, x[0] * x[1]);
  };
  sys.outputs[0].jacobian = [](const Eigen::VectorXd& x) {
    Eigen::MatrixXd J(1, 2);
    J << x[1], x[0];
    return J;
  };
  sys.outputs[0].range = Box(Eigen::VectorXd::Constant(1, -kPi / 2),
                             Eigen::VectorXd::Constant(1, kPi / 2));
  for (int i : {1, 2}) {
    sys.outputs[i].out_dim = 1;
    Eigen::MatrixXd S(1, 2);
    S << 0.0, 1.0;
    sys.outputs[i].selector = S;
    sys.outputs[i].value = [](const Eigen::VectorXd& x) {
      return Eigen::VectorXd::Constant(1, x[1]);
    };
  }
  return lift_output_coupling(sys);
}

struct TransferParams {
  double a1 = 0.2, a2 = 0.06, a3 = 0.004;
  double b1 = 0.1, b2 = 0.08, b3 = 0.03;
  double g2 = 0.05, g3 = 0.001;
};

DriftFn cubic_drift(double alpha, double beta) {
  return [alpha, beta](const Eigen::VectorXd& x) {
    Eigen::VectorXd d(2);
    d << alpha * x[1], -beta * x[0] * x[0] * x[0];
    return d;
  };
}

/// Slow coupled Duffing system of the transfer studies.
NetworkSystem make_transfer_base() {
  TransferParams p;
  NetworkSystem sys;
  sys.graph = Digraph(3, {{0, 1}, {0, 2}});
  sys.dims = {2, 2, 2};
  sys.physical_dims = sys.dims;
  sys.drift = {cubic_drift(p.a1, p.b1), cubic_drift(p.a2, p.b2), cubic_drift(p.a3, p.b3)};
  sys.coupling[{1, 0}] = constant_coupling(p.g2, 1, 0, 2, 2);
  sys.coupling[{2, 0}] = constant_coupling(p.g3, 1, 0, 2, 2);
  sys.domain.assign(3, Box::centered(2, 1.5));
  return sys;
}

/// Adds subsystem 4, an exact copy of subsystem 2 driven by subsystem 3: its
/// neighbour input enters through the same gain matrix, so a learned model of
/// subsystem 2 carries over verbatim.
NetworkSystem make_transfer_add4() {
  TransferParams p;
  NetworkSystem sys = make_transfer_base();
  sys.graph = Digraph(4, {{0, 1}, {0, 2}, {2, 3}});
  sys.dims.push_back(2);
  sys.physical_dims = sys.dims;
  sys.drift.push_back(cubic_drift(p.a2, p.b2));
  sys.coupling[{3, 2}] = constant_coupling(p.g2, 1, 0, 2, 2);
  sys.domain.push_back(Box::centered(2, 1.5));
  return sys;
}

/// Modifies subsystem 3 with the bilinear interaction 0.08 x_{3,2} x_{2,2}.
NetworkSystem make_transfer_mod3() {
  NetworkSystem sys = make_transfer_base();
  sys.graph = Digraph(3, {{0, 1}, {0, 2}, {1, 2}});
  sys.coupling[{2, 1}] = [](const Eigen::VectorXd& x) {
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2, 2);
    G(1, 1) = 0.08 * x[1];
    return G;
  };
  return sys;
}

/// Both modifications: subsystem 3 gains the bilinear input 0.08 x_{3,2} x_{4,2}
/// from the new subsystem 4, which is a copy of subsystem 2 fed by x_{3,2};
/// vertices 3 and 4 form a directed 2-cycle.
NetworkSystem make_transfer_mod3_add4() {
  TransferParams p;
  NetworkSystem sys = make_transfer_base();
  sys.graph = Digraph(4, {{0, 1}, {0, 2}, {3, 2}, {2, 3}});
  sys.dims.push_back(2);
  sys.physical_dims = sys.dims;
  sys.drift.push_back(cubic_drift(p.a2, p.b2));
  sys.coupling[{2, 3}] = [](const Eigen::VectorXd& x) {
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2, 2);
    G(1, 1) = 0.08 * x[1];
    return G;
  };
  sys.coupling[{3, 2}] = constant_coupling(p.g2, 1, 1, 2, 2);
  sys.domain.push_back(Box::centered(2, 1.5));
  return sys;
}

}  // namespace

NetworkSystem make_benchmark(const std::string& name) {
  if (name == "duffing3") return make_duffing3();
  if (name == "vdp3") return make_vdp3();
  if (name == "transfer_base") return make_transfer_base();
  if (name == "transfer_add4") return make_transfer_add4();
  if (name == "transfer_mod3") return make_transfer_mod3();
  if (name == "transfer_mod3_add4") return make_transfer_mod3_add4();
  throw std::invalid_argument("make_benchmark: unknown system '" + name + "'");
}

std::vector<Box> benchmark_eval_box(const std::string& name) {
  if (name == "duffing3") return std::vector<Box>(3, Box::centered(2, 0.5));
  if (name == "vdp3") {
    Box b(Eigen::Vector2d(-kPi / 5, -0.4), Eigen::Vector2d(kPi / 5, 0.4));
    return std::vector<Box>(3, b);
  }
  if (name == "transfer_base" || name == "transfer_mod3")
    return std::vector<Box>(3, Box::centered(2, 0.5));
  if (name == "transfer_add4" || name == "transfer_mod3_add4")
    return std::vector<Box>(4, Box::centered(2, 0.5));
  throw std::invalid_argument("benchmark_eval_box: unknown system '" + name + "'");
}

}  // namespace koopnet
