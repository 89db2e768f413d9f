#include "koopnet/system.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace koopnet {

int NetworkSystem::total_dim() const { return std::accumulate(dims.begin(), dims.end(), 0); }

int NetworkSystem::total_physical_dim() const {
  return std::accumulate(physical_dims.begin(), physical_dims.end(), 0);
}

int NetworkSystem::offset(int i) const {
  return std::accumulate(dims.begin(), dims.begin() + i, 0);
}

Eigen::VectorBlock<const Eigen::VectorXd> NetworkSystem::block(const Eigen::VectorXd& x,
                                                               int i) const {
  return x.segment(offset(i), dims[i]);
}

int NetworkSystem::input_dim(int i) const {
  int n = 0;
  for (int j : graph.in_neighbours(i)) n += dims[j];
  return n;
}

Eigen::VectorXd NetworkSystem::canonical_input(int i, int j, int r) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(input_dim(i));
  int at = 0;
  for (int k : graph.in_neighbours(i)) {
    if (k == j) {
      if (r < 0 || r >= dims[j])
        throw std::invalid_argument("canonical_input: coordinate out of range");
      v[at + r] = 1.0;
      return v;
    }
    at += dims[k];
  }
  throw std::invalid_argument("canonical_input: " + std::to_string(j) +
                              " is not an in-neighbour of " + std::to_string(i));
}

Eigen::VectorXd full_vector_field(const NetworkSystem& sys, const Eigen::VectorXd& x) {
  if (x.size() != sys.total_dim())
    throw std::invalid_argument("full_vector_field: state dimension mismatch");
  Eigen::VectorXd dx(x.size());
  for (int i = 0; i < sys.num_subsystems(); ++i) {
    auto x_i = sys.block(x, i);
    Eigen::VectorXd dxi = sys.drift[i](x_i);
    for (int j : sys.graph.in_neighbours(i))
      dxi += sys.coupling.at({i, j})(x_i) * sys.block(x, j);
    dx.segment(sys.offset(i), sys.dims[i]) = dxi;
  }
  return dx;
}

Eigen::VectorXd local_vector_field(const NetworkSystem& sys, int i, const Eigen::VectorXd& x_i,
                                   const Eigen::VectorXd& v) {
  if (v.size() != sys.input_dim(i))
    throw std::invalid_argument("local_vector_field: input dimension mismatch");
  Eigen::VectorXd dxi = sys.drift[i](x_i);
  int at = 0;
  for (int j : sys.graph.in_neighbours(i)) {
    dxi += sys.coupling.at({i, j})(x_i) * v.segment(at, sys.dims[j]);
    at += sys.dims[j];
  }
  return dxi;
}

namespace {

template <typename Rhs>
Trajectory rk4(const Rhs& rhs, const Eigen::VectorXd& x0, double dt, int steps, int substeps) {
  if (dt <= 0.0) throw std::invalid_argument("integrate: dt must be positive");
  if (steps < 0 || substeps < 1) throw std::invalid_argument("integrate: bad step counts");
  Trajectory traj;
  traj.times = Eigen::VectorXd::LinSpaced(steps + 1, 0.0, dt * steps);
  traj.states.resize(x0.size(), steps + 1);
  traj.states.col(0) = x0;
  const double h = dt / substeps;
  Eigen::VectorXd x = x0;
  for (int k = 0; k < steps; ++k) {
    for (int s = 0; s < substeps; ++s) {
      Eigen::VectorXd k1 = rhs(x);
      Eigen::VectorXd k2 = rhs(x + 0.5 * h * k1);
      Eigen::VectorXd k3 = rhs(x + 0.5 * h * k2);
      Eigen::VectorXd k4 = rhs(x + h * k3);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!x.allFinite())
      throw std::runtime_error("integrate: non-finite state at step " + std::to_string(k + 1) +
                               " (t = " + std::to_string((k + 1) * dt) + ")");
    traj.states.col(k + 1) = x;
  }
  return traj;
}

}  // namespace

Trajectory integrate(const NetworkSystem& sys, const Eigen::VectorXd& x0, double dt, int steps,
                     int substeps) {
  return rk4([&](const Eigen::VectorXd& x) { return full_vector_field(sys, x); }, x0, dt, steps,
             substeps);
}

Trajectory local_flow(const NetworkSystem& sys, int i, const Eigen::VectorXd& x_i0,
                      const Eigen::VectorXd& v, double dt, int steps, int substeps) {
  return rk4([&](const Eigen::VectorXd& x) { return local_vector_field(sys, i, x, v); }, x_i0, dt,
             steps, substeps);
}

NetworkSystem lift_output_coupling(const OutputCoupledSystem& sys) {
  const int s = sys.graph.num_vertices();
  if (static_cast<int>(sys.outputs.size()) != s)
    throw std::invalid_argument("lift_output_coupling: one output map per subsystem required");

  // A subsystem needs augmentation when some out-neighbour consumes its
  // output and the output is not a plain coordinate selection.
  std::vector<bool> augment(s, false);
  for (int j = 0; j < s; ++j) {
    if (sys.graph.out_neighbours(j).empty()) continue;
    augment[j] = sys.outputs[j].selector.size() == 0;
    if (augment[j] && !sys.outputs[j].jacobian)
      throw std::invalid_argument("lift_output_coupling: missing gradient of output map " +
                                  std::to_string(j));
  }

  NetworkSystem out;
  out.graph = sys.graph;
  out.dims.resize(s);
  out.physical_dims = sys.dims;
  out.domain.resize(s);
  out.drift.resize(s);
  for (int i = 0; i < s; ++i) {
    const int n = sys.dims[i];
    const int q = augment[i] ? sys.outputs[i].out_dim : 0;
    out.dims[i] = n + q;
    out.domain[i] = augment[i] ? Box::product({sys.domain[i], sys.outputs[i].range})
                               : sys.domain[i];
    if (augment[i]) {
      auto f = sys.drift[i];
      auto jac = sys.outputs[i].jacobian;
      out.drift[i] = [f, jac, n](const Eigen::VectorXd& xt) {
        const Eigen::VectorXd x = xt.head(n);
        const Eigen::VectorXd fx = f(x);
        Eigen::VectorXd d(xt.size());
        d.head(n) = fx;
        d.tail(xt.size() - n) = jac(x) * fx;
        return d;
      };
    } else {
      out.drift[i] = sys.drift[i];
    }
  }

  for (const auto& [key, coupling_fn] : sys.coupling) {
    const int i = key.first;
    const int j = key.second;
    const CouplingFn G = coupling_fn;  // owned copy; the lambda outlives `sys`
    const int n_i = sys.dims[i];
    const int q_i = augment[i] ? sys.outputs[i].out_dim : 0;
    const int n_j = sys.dims[j];
    const int q_j = augment[j] ? sys.outputs[j].out_dim : 0;
    // Rows: coupling enters the x-part and, when i is augmented, the y-part
    // through the chain rule. Columns: the neighbour's output either sits in
    // its appended coordinates or is selector * x_j.
    Eigen::MatrixXd S_j;
    if (!augment[j]) S_j = sys.outputs[j].selector;
    auto jac_i = augment[i] ? sys.outputs[i].jacobian
                            : std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>();
    out.coupling[{i, j}] = [G, S_j, jac_i, n_i, q_i, n_j, q_j,
                            aug_j = static_cast<bool>(augment[j])](const Eigen::VectorXd& xt_i) {
      const Eigen::VectorXd x_i = xt_i.head(n_i);
      const Eigen::MatrixXd Gx = G(x_i);  // n_i x q_j
      Eigen::MatrixXd rows(n_i + q_i, Gx.cols());
      rows.topRows(n_i) = Gx;
      if (q_i > 0) rows.bottomRows(q_i) = jac_i(x_i) * Gx;
      Eigen::MatrixXd full = Eigen::MatrixXd::Zero(n_i + q_i, n_j + q_j);
      if (aug_j)
        full.rightCols(q_j) = rows;
      else
        full = rows * S_j;
      return full;
    };
  }

  std::vector<int> phys = sys.dims;
  std::vector<OutputMap> maps = sys.outputs;
  std::vector<bool> aug = augment;
  out.embed_physical = [phys, maps, aug](const Eigen::VectorXd& x) {
    int total = 0;
    for (std::size_t i = 0; i < phys.size(); ++i)
      total += phys[i] + (aug[i] ? maps[i].out_dim : 0);
    Eigen::VectorXd full(total);
    int at_phys = 0, at_full = 0;
    for (std::size_t i = 0; i < phys.size(); ++i) {
      const Eigen::VectorXd x_i = x.segment(at_phys, phys[i]);
      full.segment(at_full, phys[i]) = x_i;
      at_full += phys[i];
      if (aug[i]) {
        full.segment(at_full, maps[i].out_dim) = maps[i].value(x_i);
        at_full += maps[i].out_dim;
      }
      at_phys += phys[i];
    }
    return full;
  };
  return out;
}

}  // namespace koopnet
