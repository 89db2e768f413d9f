#pragma once

#include <Eigen/Dense>

#include "koopnet/learners.hpp"
#include "koopnet/system.hpp"

namespace koopnet {

struct RolloutOptions {
  int substeps = 10;            // RK4 substeps per output step (generator rollouts)
  double blowup_norm = 1e12;    // abort threshold on the lifted max-norm
  bool freeze_coupling_per_step = false;  // hold neighbour reads fixed over each output step
};

/// Predicted physical trajectory. On blow-up the trajectory is truncated at
/// the last finite state and `blew_up` carries the time; downstream statistics
/// treat such runs as infinite error.
struct Rollout {
  Trajectory traj;
  bool blew_up = false;
  double blowup_time = 0.0;
};

/// Integrates the coupled bilinear lifted ODE of a generator model, reading
/// the neighbour states continuously off the leading lifted coordinates, and
/// reports x_i = P_i z_i on the output grid.
Rollout predict_generator(const GeneratorNetworkModel& model, const Eigen::VectorXd& x0, double T,
                          double dt_out, const RolloutOptions& opts = {});

/// Iterates the coupled bilinear discrete map of an operator model.
Rollout predict_operator(const OperatorNetworkModel& model, const Eigen::VectorXd& x0, int steps,
                         const RolloutOptions& opts = {});

/// Plain linear iteration of a full-state EDMD predictor.
Rollout predict_edmd(const Eigen::MatrixXd& K, const Dictionary& dict, const Eigen::VectorXd& x0,
                     int steps, double dt, const RolloutOptions& opts = {});

/// Per-extended-system linear iteration; subsystem i is read off its block.
Rollout predict_sedmd(const SedmdModel& model, const Eigen::VectorXd& x0, int steps,
                      const RolloutOptions& opts = {});

/// Joint iteration of the localized linear predictors.
Rollout predict_ledmd(const LedmdModel& model, const Eigen::VectorXd& x0, int steps,
                      const RolloutOptions& opts = {});

/// ln(max_t ||x_i(t) - xhat_i(t)||_1) per subsystem on a shared time grid.
/// `block_dims` partitions the rows; `compare_dims` restricts each block to
/// its leading coordinates (physical states of augmented systems). Identical
/// trajectories floor at -745; a truncated/blown-up prediction gives +inf.
Eigen::VectorXd prediction_error_log(const Trajectory& truth, const Rollout& predicted,
                                     const std::vector<int>& block_dims,
                                     const std::vector<int>& compare_dims = {});

}  // namespace koopnet
