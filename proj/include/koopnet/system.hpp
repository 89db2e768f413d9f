#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "koopnet/box.hpp"
#include "koopnet/graph.hpp"

namespace koopnet {

using DriftFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
/// G_ij(x_i): impact of neighbour j on subsystem i, an (n_i x n_j) matrix
/// depending on x_i only; the coupling enters linearly as G_ij(x_i) x_j.
using CouplingFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

/// Interconnected ODE in the structured form  xdot = f(x) + G(x) x:
/// block i evolves as  xdot_i = f_i(x_i) + sum_{j in N_i} G_ij(x_i) x_j,
/// where N_i are the in-neighbours of i in `graph`. Immutable after
/// construction; all evaluation helpers are pure.
struct NetworkSystem {
  Digraph graph;
  std::vector<int> dims;                                  // n_i
  std::vector<DriftFn> drift;                             // f_i
  std::map<std::pair<int, int>, CouplingFn> coupling;     // (i, j) for arc j -> i
  std::vector<Box> domain;                                // X_i

  /// Physical (pre-augmentation) state sizes; equals `dims` unless the system
  /// was produced by lift_output_coupling. Leading coordinates of each block
  /// are always the physical ones.
  std::vector<int> physical_dims;

  /// Maps a stacked physical state to the full (possibly augmented) state.
  /// Unset unless augmented; use embed() for the identity fallback.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> embed_physical;

  Eigen::VectorXd embed(const Eigen::VectorXd& x_physical) const {
    return embed_physical ? embed_physical(x_physical) : x_physical;
  }

  int num_subsystems() const { return static_cast<int>(dims.size()); }
  int total_dim() const;
  int total_physical_dim() const;
  int offset(int i) const;

  Eigen::VectorBlock<const Eigen::VectorXd> block(const Eigen::VectorXd& x, int i) const;

  /// Dimension of the stacked neighbour-input vector of subsystem i
  /// (sum of n_j over in-neighbours, ascending j).
  int input_dim(int i) const;

  /// Canonical input e_j^r: zero except coordinate r of neighbour j's slot.
  Eigen::VectorXd canonical_input(int i, int j, int r) const;
};

/// Uniformly sampled solution states; states.col(k) is the state at times[k].
struct Trajectory {
  Eigen::VectorXd times;
  Eigen::MatrixXd states;

  int steps() const { return static_cast<int>(times.size()) - 1; }
};

/// f(x) + G(x) x, assembled blockwise.
Eigen::VectorXd full_vector_field(const NetworkSystem& sys, const Eigen::VectorXd& x);

/// Local field of subsystem i with the neighbour input frozen at v:
/// f_i(x_i) + sum_j G_ij(x_i) v_j. `v` stacks neighbour blocks ascending.
Eigen::VectorXd local_vector_field(const NetworkSystem& sys, int i, const Eigen::VectorXd& x_i,
                                   const Eigen::VectorXd& v);

/// Classical RK4 with `substeps` internal stages per output step. Throws if
/// the state leaves the finite range, naming the first bad step.
Trajectory integrate(const NetworkSystem& sys, const Eigen::VectorXd& x0, double dt, int steps,
                     int substeps = 10);

/// Flow of the local model of subsystem i with frozen neighbour input v.
Trajectory local_flow(const NetworkSystem& sys, int i, const Eigen::VectorXd& x_i0,
                      const Eigen::VectorXd& v, double dt, int steps, int substeps = 10);

/// Output map y_i = h_i(x_i) with Jacobian, plus the output range used as the
/// sampling box of the appended coordinates. When `selector` is non-empty the
/// output is the linear map selector * x and no augmentation is needed.
struct OutputMap {
  int out_dim = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> value;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;  // q x n
  Box range;
  Eigen::MatrixXd selector;  // optional q x n
};

/// Interconnected system whose couplings act on neighbour *outputs*:
/// xdot_i = f_i(x_i) + sum_j G_ij(x_i) y_j with y_j = h_j(x_j).
struct OutputCoupledSystem {
  Digraph graph;
  std::vector<int> dims;
  std::vector<DriftFn> drift;
  std::map<std::pair<int, int>, CouplingFn> coupling;  // n_i x q_j
  std::vector<Box> domain;
  std::vector<OutputMap> outputs;
};

/// Rewrites output couplings into the state-coupled form by appending y_i to
/// the state of every subsystem whose output is consumed and is not a plain
/// coordinate selection. Throws when a needed Jacobian is missing.
NetworkSystem lift_output_coupling(const OutputCoupledSystem& sys);

/// Built-in benchmark systems: duffing3, vdp3, transfer_base, transfer_add4,
/// transfer_mod3, transfer_mod3_add4. Throws on unknown names.
NetworkSystem make_benchmark(const std::string& name);

/// Evaluation box (initial conditions for prediction studies) conventionally
/// paired with each benchmark, in physical coordinates.
std::vector<Box> benchmark_eval_box(const std::string& name);

}  // namespace koopnet
