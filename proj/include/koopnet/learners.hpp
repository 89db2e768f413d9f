#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <vector>

#include "koopnet/dictionary.hpp"
#include "koopnet/regression.hpp"
#include "koopnet/sampling.hpp"
#include "koopnet/system.hpp"

namespace koopnet {

/// Generator surrogate of one subsystem: the drift generator estimate L0 and
/// one matrix per canonical neighbour direction e_j^r. The bilinear model is
///   zdot_i = (L0 + sum_{j,r} x_{j,r} (L_dir[j][r] - L0)) z_i.
struct GeneratorFamily {
  int subsystem = 0;
  Eigen::MatrixXd L0;
  std::map<int, std::vector<Eigen::MatrixXd>> L_dir;  // j -> matrices for r = 0..n_j-1
  int sample_count = 0;

  int size() const { return static_cast<int>(L0.rows()); }
};

/// Operator surrogate of one subsystem: z_i(l+1) = K0 z_i(l) +
/// sum_j K[j] (x_j(l) kron z_i(l)), with x_j read off the leading coordinates
/// of z_j. K[j] has n_j * N columns; block r acts on x_{j,r} * z_i.
struct OperatorFamily {
  int subsystem = 0;
  Eigen::MatrixXd K0;
  std::map<int, Eigen::MatrixXd> K;
  int sample_count = 0;

  int size() const { return static_cast<int>(K0.rows()); }
};

struct GeneratorNetworkModel {
  Digraph graph;
  std::vector<int> dims;
  std::vector<Dictionary> dicts;
  std::vector<GeneratorFamily> families;
  std::uint64_t seed = 0;
};

struct OperatorNetworkModel {
  Digraph graph;
  std::vector<int> dims;
  std::vector<Dictionary> dicts;
  std::vector<OperatorFamily> families;
  double dt = 0.0;
  std::uint64_t seed = 0;
};

/// Linear predictors on self-contained extended systems (transitive
/// in-closures); subsystem i is read off its block inside closure i.
struct SedmdModel {
  Digraph graph;
  std::vector<int> dims;
  std::vector<std::vector<int>> closures;  // ascending, includes i
  std::vector<Dictionary> dicts;           // on the extended states
  std::vector<Eigen::MatrixXd> K;
  double dt = 0.0;
};

/// Localized linear predictors z_i(l+1) = A0[i] z_i(l) + sum_j B[(i,j)] z_j(l).
struct LedmdModel {
  Digraph graph;
  std::vector<int> dims;
  std::vector<Dictionary> dicts;
  std::vector<Eigen::MatrixXd> A0;
  std::map<std::pair<int, int>, Eigen::MatrixXd> B;
  double dt = 0.0;
};

/// Optional restriction of coupling fits to the neighbour coordinates that
/// actually enter G_ij; unlisted arcs fit all coordinates.
struct CouplingMask {
  std::map<std::pair<int, int>, std::vector<int>> active;

  bool fits(int i, int j, int r) const {
    auto it = active.find({i, j});
    if (it == active.end()) return true;
    for (int a : it->second)
      if (a == r) return true;
    return false;
  }
};

/// Generator regression L = LPhi(X) Phi(X)^T (Phi(X) Phi(X)^T + ridge I)^+,
/// the convention where zdot ~= L z.
Eigen::MatrixXd gedmd_fit(const SnapshotSet& data, const Dictionary& dict,
                          const FitOptions& opts = {});

/// Operator regression K = Phi(Y) Phi(X)^T (Phi(X) Phi(X)^T)^+ with
/// z(l+1) ~= K z(l).
Eigen::MatrixXd edmd_fit(const SnapshotSet& data, const Dictionary& dict,
                         const FitOptions& opts = {});

/// Modularized generator EDMD: per subsystem, one gEDMD fit for the drift and
/// one per canonical neighbour direction, each on m[i] fresh i.i.d. points.
GeneratorNetworkModel mgedmd_fit(const NetworkSystem& sys, std::vector<Dictionary> dicts,
                                 const std::vector<int>& m, std::uint64_t seed,
                                 const FitOptions& opts = {}, const CouplingMask& mask = {});

enum class MedmdMode {
  ExtractFromFull,   // snapshot pairs cut out of full-system samples
  FrozenNeighbours,  // local steps with neighbour states held at their t=0 draw
};

/// Modularized operator EDMD on a shared set of full-system flow pairs.
OperatorNetworkModel medmd_fit_from_pairs(const NetworkSystem& sys, std::vector<Dictionary> dicts,
                                          const SnapshotSet& full_pairs,
                                          const FitOptions& opts = {},
                                          const CouplingMask& mask = {});

OperatorNetworkModel medmd_fit(const NetworkSystem& sys, std::vector<Dictionary> dicts,
                               const std::vector<int>& m, double dt, std::uint64_t seed,
                               MedmdMode mode = MedmdMode::ExtractFromFull, int substeps = 10,
                               const FitOptions& opts = {}, const CouplingMask& mask = {});

/// Transitive in-closure of every subsystem (who reaches i), ascending.
std::vector<std::vector<int>> sedmd_closures(const Digraph& g);

/// Sparse EDMD on extended systems. `extended_dicts[i]` lives on the stacked
/// state of closure i. Emits a warning on stderr when a closure covers the
/// whole graph (the method then degenerates to plain EDMD).
SedmdModel sedmd_fit_from_pairs(const NetworkSystem& sys, std::vector<Dictionary> extended_dicts,
                                const SnapshotSet& full_pairs, const FitOptions& opts = {});

SedmdModel sedmd_fit(const NetworkSystem& sys, std::vector<Dictionary> extended_dicts, int m,
                     double dt, std::uint64_t seed, int substeps = 10,
                     const FitOptions& opts = {});

/// Localized EDMD with lifted neighbour states as extra regressors.
LedmdModel ledmd_fit_from_pairs(const NetworkSystem& sys, std::vector<Dictionary> dicts,
                                const SnapshotSet& full_pairs, const FitOptions& opts = {});

LedmdModel ledmd_fit(const NetworkSystem& sys, std::vector<Dictionary> dicts, int m, double dt,
                     std::uint64_t seed, int substeps = 10, const FitOptions& opts = {});

/// Fits only the coupling block of a newly attached in-neighbour j of
/// subsystem i from fresh pairs of the modified system, subtracting the
/// predictions of all existing blocks; everything else is untouched.
void transfer_update_operator(OperatorNetworkModel& model, const NetworkSystem& modified, int i,
                              int j_new, const SnapshotSet& full_pairs,
                              const FitOptions& opts = {});

/// Same for the generator form: fits the direction matrices of the new
/// neighbour with m fresh points per direction, reusing L0 and all others.
void transfer_update_generator(GeneratorNetworkModel& model, const NetworkSystem& modified, int i,
                               int j_new, int m, std::uint64_t seed, const FitOptions& opts = {});

/// Residual refit of B[(i, j_new)] for the localized linear baseline.
void transfer_update_ledmd(LedmdModel& model, const NetworkSystem& modified, int i, int j_new,
                           const SnapshotSet& full_pairs, const FitOptions& opts = {});

/// Reuses a fitted family at a new vertex whose dynamics are identical up to
/// a renaming of the (single) neighbour's coordinates: direction_map[r] is the
/// donor direction playing the role of recipient direction r.
GeneratorFamily copy_generator_family(const GeneratorFamily& donor, int dst_subsystem,
                                      int dst_neighbour, const std::vector<int>& direction_map);

OperatorFamily copy_operator_family(const OperatorFamily& donor, int dst_subsystem,
                                    int dst_neighbour, const std::vector<int>& direction_map);

}  // namespace koopnet
