#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "koopnet/box.hpp"
#include "koopnet/system.hpp"

namespace koopnet {

/// i.i.d. snapshot data. Columns of `inputs` and `targets` are aligned:
/// flow pairs hold (x(0), x(dt)); generator pairs hold (x, F(x)) with the
/// vector field evaluated exactly.
struct SnapshotSet {
  enum class Kind { FlowPairs, GeneratorPairs };

  Kind kind = Kind::FlowPairs;
  double dt = 0.0;  // 0 for generator pairs
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;
  std::uint64_t seed = 0;
};

/// m states drawn i.i.d. uniform on the box, one per column. Deterministic in
/// `seed`; zero-width sides are legal, negative widths are not.
Eigen::MatrixXd sample_uniform(const Box& box, int m, std::uint64_t seed);

/// Generator-regression data for the local model of subsystem i with frozen
/// neighbour input v: inputs uniform on X_i, targets f_i(x) + sum_j G_ij(x) v_j.
SnapshotSet generator_data_local(const NetworkSystem& sys, int i, const Eigen::VectorXd& v, int m,
                                 std::uint64_t seed);

/// Full-system flow pairs: initial states uniform on the product of `boxes`
/// (defaults to the system domain), successors integrated one dt step.
/// Integration blow-ups are reported with the offending sample index.
SnapshotSet flow_data_full(const NetworkSystem& sys, int m, double dt, std::uint64_t seed,
                           const std::vector<Box>& boxes = {}, int substeps = 10);

/// Local flow pairs of subsystem i with the neighbour input held at v for the
/// whole step.
SnapshotSet flow_data_local(const NetworkSystem& sys, int i, const Eigen::VectorXd& v, int m,
                            double dt, std::uint64_t seed, int substeps = 10);

/// Block rows of a full-system snapshot set belonging to subsystem i.
SnapshotSet extract_subsystem(const SnapshotSet& full, const NetworkSystem& sys, int i);

/// Writes `<prefix>inputs.csv` and `<prefix>targets.csv`, one sample per row,
/// with a header naming the column roles (x_{i,k} when `dims` is supplied).
void write_snapshot_csv(const SnapshotSet& set, const std::string& prefix,
                        const std::vector<int>& dims = {});

}  // namespace koopnet
