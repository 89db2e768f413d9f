#include "koopnet/learners.hpp"

#include <algorithm>
#include <iostream>
#include <stdexcept>
#include <string>

#include "koopnet/rng.hpp"

namespace koopnet {

namespace {

void require_kind(const SnapshotSet& data, SnapshotSet::Kind kind, const char* who) {
  if (data.kind != kind) throw std::invalid_argument(std::string(who) + ": wrong snapshot kind");
  if (data.inputs.cols() == 0) throw std::invalid_argument(std::string(who) + ": empty data");
}

/// Rows [z_i; x_{j1} kron z_i; ...] of the operator regression for subsystem i.
Eigen::MatrixXd medmd_regressors(const NetworkSystem& sys, int i, const Dictionary& dict,
                                 const SnapshotSet& full_pairs, const CouplingMask& mask) {
  const Eigen::MatrixXd Z0 =
      dict.lift_batch(full_pairs.inputs.middleRows(sys.offset(i), sys.dims[i]));
  const int N = dict.size();
  const Eigen::Index m = Z0.cols();
  int rows = N;
  for (int j : sys.graph.in_neighbours(i)) rows += sys.dims[j] * N;
  Eigen::MatrixXd X(rows, m);
  X.topRows(N) = Z0;
  int at = N;
  for (int j : sys.graph.in_neighbours(i)) {
    for (int r = 0; r < sys.dims[j]; ++r) {
      if (mask.fits(i, j, r)) {
        const auto xjr = full_pairs.inputs.row(sys.offset(j) + r);
        X.middleRows(at, N) = Z0 * xjr.asDiagonal();
      } else {
        X.middleRows(at, N).setZero();  // masked directions get exactly-zero columns in K
      }
      at += N;
    }
  }
  return X;
}

void split_operator_blocks(const NetworkSystem& sys, int i, const Eigen::MatrixXd& full,
                           OperatorFamily& fam) {
  const int N = static_cast<int>(full.rows());
  fam.subsystem = i;
  fam.K0 = full.leftCols(N);
  int at = N;
  for (int j : sys.graph.in_neighbours(i)) {
    fam.K[j] = full.middleCols(at, sys.dims[j] * N);
    at += sys.dims[j] * N;
  }
}

}  // namespace

Eigen::MatrixXd gedmd_fit(const SnapshotSet& data, const Dictionary& dict,
                          const FitOptions& opts) {
  require_kind(data, SnapshotSet::Kind::GeneratorPairs, "gedmd_fit");
  const Eigen::MatrixXd Phi = dict.lift_batch(data.inputs);
  Eigen::MatrixXd LPhi(dict.size(), data.inputs.cols());
  for (Eigen::Index l = 0; l < data.inputs.cols(); ++l)
    LPhi.col(l) = dict.generator_action(data.inputs.col(l), data.targets.col(l));
  return lsq_operator(Phi, LPhi, opts);
}

Eigen::MatrixXd edmd_fit(const SnapshotSet& data, const Dictionary& dict, const FitOptions& opts) {
  require_kind(data, SnapshotSet::Kind::FlowPairs, "edmd_fit");
  return lsq_operator(dict.lift_batch(data.inputs), dict.lift_batch(data.targets), opts);
}

GeneratorNetworkModel mgedmd_fit(const NetworkSystem& sys, std::vector<Dictionary> dicts,
                                 const std::vector<int>& m, std::uint64_t seed,
                                 const FitOptions& opts, const CouplingMask& mask) {
  const int s = sys.num_subsystems();
  if (static_cast<int>(dicts.size()) != s || static_cast<int>(m.size()) != s)
    throw std::invalid_argument("mgedmd_fit: need one dictionary and sample count per subsystem");
  GeneratorNetworkModel model;
  model.graph = sys.graph;
  model.dims = sys.dims;
  model.seed = seed;
  model.families.resize(s);
  for (int i = 0; i < s; ++i) {
    GeneratorFamily& fam = model.families[i];
    fam.subsystem = i;
    fam.sample_count = m[i];
    int v_index = 0;
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(sys.input_dim(i));
    fam.L0 = gedmd_fit(
        generator_data_local(sys, i, zero, m[i], rng::derive(seed, {rng::tag::generator_data,
                                                                    std::uint64_t(i),
                                                                    std::uint64_t(v_index)})),
        dicts[i], opts);
    for (int j : sys.graph.in_neighbours(i)) {
      auto& dirs = fam.L_dir[j];
      dirs.resize(sys.dims[j]);
      for (int r = 0; r < sys.dims[j]; ++r) {
        ++v_index;
        if (!mask.fits(i, j, r)) {
          dirs[r] = fam.L0;
          continue;
        }
        dirs[r] = gedmd_fit(
            generator_data_local(sys, i, sys.canonical_input(i, j, r), m[i],
                                 rng::derive(seed, {rng::tag::generator_data, std::uint64_t(i),
                                                    std::uint64_t(v_index)})),
            dicts[i], opts);
      }
    }
  }
  model.dicts = std::move(dicts);
  return model;
}

OperatorNetworkModel medmd_fit_from_pairs(const NetworkSystem& sys, std::vector<Dictionary> dicts,
                                          const SnapshotSet& full_pairs, const FitOptions& opts,
                                          const CouplingMask& mask) {
  require_kind(full_pairs, SnapshotSet::Kind::FlowPairs, "medmd_fit_from_pairs");
  const int s = sys.num_subsystems();
  OperatorNetworkModel model;
  model.graph = sys.graph;
  model.dims = sys.dims;
  model.dt = full_pairs.dt;
  model.seed = full_pairs.seed;
  model.families.resize(s);
  for (int i = 0; i < s; ++i) {
    const Eigen::MatrixXd X = medmd_regressors(sys, i, dicts[i], full_pairs, mask);
    const Eigen::MatrixXd Y =
        dicts[i].lift_batch(full_pairs.targets.middleRows(sys.offset(i), sys.dims[i]));
    split_operator_blocks(sys, i, lsq_operator(X, Y, opts), model.families[i]);
    model.families[i].sample_count = static_cast<int>(full_pairs.inputs.cols());
  }
  model.dicts = std::move(dicts);
  return model;
}

OperatorNetworkModel medmd_fit(const NetworkSystem& sys, std::vector<Dictionary> dicts,
                               const std::vector<int>& m, double dt, std::uint64_t seed,
                               MedmdMode mode, int substeps, const FitOptions& opts,
                               const CouplingMask& mask) {
  const int s = sys.num_subsystems();
  if (static_cast<int>(m.size()) != s)
    throw std::invalid_argument("medmd_fit: need one sample count per subsystem");
  if (mode == MedmdMode::ExtractFromFull) {
    if (!std::all_of(m.begin(), m.end(), [&](int v) { return v == m[0]; }))
      throw std::invalid_argument("medmd_fit: extraction mode shares one full-system data set");
    const SnapshotSet full = flow_data_full(
        sys, m[0], dt, rng::derive(seed, {rng::tag::full_pairs}), {}, substeps);
    return medmd_fit_from_pairs(sys, std::move(dicts), full, opts, mask);
  }

  // Frozen mode: per subsystem, joint draws of (x_i(0), neighbour values) and
  // one local step with the neighbour input held fixed. The snapshot layout
  // mimics a full-system set so the regressor assembly can be shared.
  OperatorNetworkModel model;
  model.graph = sys.graph;
  model.dims = sys.dims;
  model.dt = dt;
  model.seed = seed;
  model.families.resize(s);
  for (int i = 0; i < s; ++i) {
    std::vector<Box> boxes{sys.domain[i]};
    for (int j : sys.graph.in_neighbours(i)) boxes.push_back(sys.domain[j]);
    const Box joint = Box::product(boxes);
    const Eigen::MatrixXd draws = sample_uniform(
        joint, m[i], rng::derive(seed, {rng::tag::frozen_pairs, std::uint64_t(i)}));
    const int n_i = sys.dims[i];

    SnapshotSet local;
    local.kind = SnapshotSet::Kind::FlowPairs;
    local.dt = dt;
    local.inputs.setZero(sys.total_dim(), m[i]);
    local.targets.setZero(sys.total_dim(), m[i]);
    for (int l = 0; l < m[i]; ++l) {
      const Eigen::VectorXd x_i0 = draws.col(l).head(n_i);
      const Eigen::VectorXd v = draws.col(l).tail(draws.rows() - n_i);
      local.inputs.col(l).segment(sys.offset(i), n_i) = x_i0;
      int at = n_i;
      for (int j : sys.graph.in_neighbours(i)) {
        local.inputs.col(l).segment(sys.offset(j), sys.dims[j]) = v.segment(at - n_i, sys.dims[j]);
        at += sys.dims[j];
      }
      local.targets.col(l).segment(sys.offset(i), n_i) =
          local_flow(sys, i, x_i0, v, dt, 1, substeps).states.col(1);
    }
    const Eigen::MatrixXd X = medmd_regressors(sys, i, dicts[i], local, mask);
    const Eigen::MatrixXd Y = dicts[i].lift_batch(local.targets.middleRows(sys.offset(i), n_i));
    split_operator_blocks(sys, i, lsq_operator(X, Y, opts), model.families[i]);
    model.families[i].sample_count = m[i];
  }
  model.dicts = std::move(dicts);
  return model;
}

std::vector<std::vector<int>> sedmd_closures(const Digraph& g) {
  const int s = g.num_vertices();
  std::vector<std::vector<int>> closures(s);
  for (int i = 0; i < s; ++i) {
    std::vector<bool> seen(s, false);
    std::vector<int> stack{i};
    seen[i] = true;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int j : g.in_neighbours(v))
        if (!seen[j]) {
          seen[j] = true;
          stack.push_back(j);
        }
    }
    for (int v = 0; v < s; ++v)
      if (seen[v]) closures[i].push_back(v);
  }
  return closures;
}

SedmdModel sedmd_fit_from_pairs(const NetworkSystem& sys, std::vector<Dictionary> extended_dicts,
                                const SnapshotSet& full_pairs, const FitOptions& opts) {
  require_kind(full_pairs, SnapshotSet::Kind::FlowPairs, "sedmd_fit_from_pairs");
  SedmdModel model;
  model.graph = sys.graph;
  model.dims = sys.dims;
  model.dt = full_pairs.dt;
  model.closures = sedmd_closures(sys.graph);
  const int s = sys.num_subsystems();
  model.K.resize(s);
  for (int i = 0; i < s; ++i) {
    if (static_cast<int>(model.closures[i].size()) == s)
      std::cerr << "sedmd: closure of subsystem " << i + 1
                << " covers the whole system; predictor degenerates to EDMD\n";
    int ext_dim = 0;
    for (int v : model.closures[i]) ext_dim += sys.dims[v];
    Eigen::MatrixXd X0(ext_dim, full_pairs.inputs.cols()), X1(ext_dim, full_pairs.inputs.cols());
    int at = 0;
    for (int v : model.closures[i]) {
      X0.middleRows(at, sys.dims[v]) = full_pairs.inputs.middleRows(sys.offset(v), sys.dims[v]);
      X1.middleRows(at, sys.dims[v]) = full_pairs.targets.middleRows(sys.offset(v), sys.dims[v]);
      at += sys.dims[v];
    }
    model.K[i] =
        lsq_operator(extended_dicts[i].lift_batch(X0), extended_dicts[i].lift_batch(X1), opts);
  }
  model.dicts = std::move(extended_dicts);
  return model;
}

SedmdModel sedmd_fit(const NetworkSystem& sys, std::vector<Dictionary> extended_dicts, int m,
                     double dt, std::uint64_t seed, int substeps, const FitOptions& opts) {
  const SnapshotSet full =
      flow_data_full(sys, m, dt, rng::derive(seed, {rng::tag::full_pairs}), {}, substeps);
  return sedmd_fit_from_pairs(sys, std::move(extended_dicts), full, opts);
}

LedmdModel ledmd_fit_from_pairs(const NetworkSystem& sys, std::vector<Dictionary> dicts,
                                const SnapshotSet& full_pairs, const FitOptions& opts) {
  require_kind(full_pairs, SnapshotSet::Kind::FlowPairs, "ledmd_fit_from_pairs");
  LedmdModel model;
  model.graph = sys.graph;
  model.dims = sys.dims;
  model.dt = full_pairs.dt;
  const int s = sys.num_subsystems();
  model.A0.resize(s);
  for (int i = 0; i < s; ++i) {
    const int N_i = dicts[i].size();
    int rows = N_i;
    for (int j : sys.graph.in_neighbours(i)) rows += dicts[j].size();
    Eigen::MatrixXd X(rows, full_pairs.inputs.cols());
    X.topRows(N_i) = dicts[i].lift_batch(full_pairs.inputs.middleRows(sys.offset(i), sys.dims[i]));
    int at = N_i;
    for (int j : sys.graph.in_neighbours(i)) {
      X.middleRows(at, dicts[j].size()) =
          dicts[j].lift_batch(full_pairs.inputs.middleRows(sys.offset(j), sys.dims[j]));
      at += dicts[j].size();
    }
    const Eigen::MatrixXd Y =
        dicts[i].lift_batch(full_pairs.targets.middleRows(sys.offset(i), sys.dims[i]));
    const Eigen::MatrixXd full = lsq_operator(X, Y, opts);
    model.A0[i] = full.leftCols(N_i);
    at = N_i;
    for (int j : sys.graph.in_neighbours(i)) {
      model.B[{i, j}] = full.middleCols(at, dicts[j].size());
      at += dicts[j].size();
    }
  }
  model.dicts = std::move(dicts);
  return model;
}

LedmdModel ledmd_fit(const NetworkSystem& sys, std::vector<Dictionary> dicts, int m, double dt,
                     std::uint64_t seed, int substeps, const FitOptions& opts) {
  const SnapshotSet full =
      flow_data_full(sys, m, dt, rng::derive(seed, {rng::tag::full_pairs}), {}, substeps);
  return ledmd_fit_from_pairs(sys, std::move(dicts), full, opts);
}

namespace {

void check_update_preconditions(const std::vector<int>& have, const Digraph& graph, int i,
                                int j_new, const char* who) {
  const auto& nbrs = graph.in_neighbours(i);
  if (std::find(nbrs.begin(), nbrs.end(), j_new) == nbrs.end())
    throw std::invalid_argument(std::string(who) + ": vertex is not an in-neighbour of target");
  std::vector<int> expected;
  for (int j : nbrs)
    if (j != j_new) expected.push_back(j);
  if (have != expected)
    throw std::invalid_argument(std::string(who) + ": missing prerequisite coupling blocks");
}

}  // namespace

void transfer_update_operator(OperatorNetworkModel& model, const NetworkSystem& modified, int i,
                              int j_new, const SnapshotSet& full_pairs, const FitOptions& opts) {
  require_kind(full_pairs, SnapshotSet::Kind::FlowPairs, "transfer_update_operator");
  OperatorFamily& fam = model.families[i];
  std::vector<int> have;
  for (const auto& [j, K] : fam.K) have.push_back(j);
  check_update_preconditions(have, modified.graph, i, j_new, "transfer_update_operator");

  const Dictionary& dict = model.dicts[i];
  const int N = dict.size();
  const Eigen::MatrixXd Z0 =
      dict.lift_batch(full_pairs.inputs.middleRows(modified.offset(i), modified.dims[i]));
  const Eigen::MatrixXd Z1 =
      dict.lift_batch(full_pairs.targets.middleRows(modified.offset(i), modified.dims[i]));

  // Residual once the known blocks have explained what they can.
  Eigen::MatrixXd Y = Z1 - fam.K0 * Z0;
  for (const auto& [j, Kj] : fam.K) {
    for (int r = 0; r < modified.dims[j]; ++r) {
      const auto xjr = full_pairs.inputs.row(modified.offset(j) + r);
      Y.noalias() -= Kj.middleCols(r * N, N) * (Z0 * xjr.asDiagonal());
    }
  }
  Eigen::MatrixXd X(modified.dims[j_new] * N, Z0.cols());
  for (int r = 0; r < modified.dims[j_new]; ++r) {
    const auto xjr = full_pairs.inputs.row(modified.offset(j_new) + r);
    X.middleRows(r * N, N) = Z0 * xjr.asDiagonal();
  }
  fam.K[j_new] = lsq_operator(X, Y, opts);
  model.graph = modified.graph;
}

void transfer_update_generator(GeneratorNetworkModel& model, const NetworkSystem& modified, int i,
                               int j_new, int m, std::uint64_t seed, const FitOptions& opts) {
  GeneratorFamily& fam = model.families[i];
  std::vector<int> have;
  for (const auto& [j, dirs] : fam.L_dir) have.push_back(j);
  check_update_preconditions(have, modified.graph, i, j_new, "transfer_update_generator");

  auto& dirs = fam.L_dir[j_new];
  dirs.resize(modified.dims[j_new]);
  for (int r = 0; r < modified.dims[j_new]; ++r) {
    const std::uint64_t sub = rng::derive(
        seed, {rng::tag::transfer, std::uint64_t(i), std::uint64_t(j_new), std::uint64_t(r)});
    dirs[r] = gedmd_fit(
        generator_data_local(modified, i, modified.canonical_input(i, j_new, r), m, sub),
        model.dicts[i], opts);
  }
  model.graph = modified.graph;
}

void transfer_update_ledmd(LedmdModel& model, const NetworkSystem& modified, int i, int j_new,
                           const SnapshotSet& full_pairs, const FitOptions& opts) {
  require_kind(full_pairs, SnapshotSet::Kind::FlowPairs, "transfer_update_ledmd");
  std::vector<int> have;
  for (const auto& [key, B] : model.B)
    if (key.first == i) have.push_back(key.second);
  check_update_preconditions(have, modified.graph, i, j_new, "transfer_update_ledmd");

  const Dictionary& dict = model.dicts[i];
  Eigen::MatrixXd Y =
      dict.lift_batch(full_pairs.targets.middleRows(modified.offset(i), modified.dims[i])) -
      model.A0[i] *
          dict.lift_batch(full_pairs.inputs.middleRows(modified.offset(i), modified.dims[i]));
  for (int j : have)
    Y.noalias() -= model.B[{i, j}] * model.dicts[j].lift_batch(full_pairs.inputs.middleRows(
                       modified.offset(j), modified.dims[j]));
  const Eigen::MatrixXd X = model.dicts[j_new].lift_batch(
      full_pairs.inputs.middleRows(modified.offset(j_new), modified.dims[j_new]));
  model.B[{i, j_new}] = lsq_operator(X, Y, opts);
  model.graph = modified.graph;
}

GeneratorFamily copy_generator_family(const GeneratorFamily& donor, int dst_subsystem,
                                      int dst_neighbour, const std::vector<int>& direction_map) {
  if (donor.L_dir.size() != 1)
    throw std::invalid_argument("copy_generator_family: donor must have exactly one neighbour");
  const auto& src_dirs = donor.L_dir.begin()->second;
  if (direction_map.size() != src_dirs.size())
    throw std::invalid_argument("copy_generator_family: direction map size mismatch");
  GeneratorFamily out;
  out.subsystem = dst_subsystem;
  out.L0 = donor.L0;
  out.sample_count = donor.sample_count;
  auto& dirs = out.L_dir[dst_neighbour];
  dirs.resize(direction_map.size());
  for (std::size_t r = 0; r < direction_map.size(); ++r)
    dirs[r] = src_dirs.at(direction_map[r]);
  return out;
}

OperatorFamily copy_operator_family(const OperatorFamily& donor, int dst_subsystem,
                                    int dst_neighbour, const std::vector<int>& direction_map) {
  if (donor.K.size() != 1)
    throw std::invalid_argument("copy_operator_family: donor must have exactly one neighbour");
  const Eigen::MatrixXd& src = donor.K.begin()->second;
  const int N = donor.size();
  if (static_cast<int>(direction_map.size()) * N != src.cols())
    throw std::invalid_argument("copy_operator_family: direction map size mismatch");
  OperatorFamily out;
  out.subsystem = dst_subsystem;
  out.K0 = donor.K0;
  out.sample_count = donor.sample_count;
  Eigen::MatrixXd K(N, src.cols());
  for (std::size_t r = 0; r < direction_map.size(); ++r)
    K.middleCols(static_cast<int>(r) * N, N) = src.middleCols(direction_map[r] * N, N);
  out.K[dst_neighbour] = K;
  return out;
}

}  // namespace koopnet
