#include "koopnet/sampling.hpp"

#include <fstream>
#include <stdexcept>

#include "koopnet/rng.hpp"

namespace koopnet {

Eigen::MatrixXd sample_uniform(const Box& box, int m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("sample_uniform: m must be >= 1");
  if (!box.valid()) throw std::invalid_argument("sample_uniform: box has negative width");
  rng::Stream stream(seed);
  Eigen::MatrixXd X(box.dim(), m);
  for (int l = 0; l < m; ++l)
    for (int d = 0; d < box.dim(); ++d) X(d, l) = stream.uniform(box.lo[d], box.hi[d]);
  return X;
}

SnapshotSet generator_data_local(const NetworkSystem& sys, int i, const Eigen::VectorXd& v, int m,
                                 std::uint64_t seed) {
  SnapshotSet set;
  set.kind = SnapshotSet::Kind::GeneratorPairs;
  set.seed = seed;
  set.inputs = sample_uniform(sys.domain[i], m, seed);
  set.targets.resize(sys.dims[i], m);
  for (int l = 0; l < m; ++l)
    set.targets.col(l) = local_vector_field(sys, i, set.inputs.col(l), v);
  return set;
}

SnapshotSet flow_data_full(const NetworkSystem& sys, int m, double dt, std::uint64_t seed,
                           const std::vector<Box>& boxes, int substeps) {
  const Box box = Box::product(boxes.empty() ? sys.domain : boxes);
  SnapshotSet set;
  set.kind = SnapshotSet::Kind::FlowPairs;
  set.dt = dt;
  set.seed = seed;
  set.inputs = sample_uniform(box, m, seed);
  set.targets.resize(box.dim(), m);
  for (int l = 0; l < m; ++l) {
    try {
      set.targets.col(l) = integrate(sys, set.inputs.col(l), dt, 1, substeps).states.col(1);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("flow_data_full: sample " + std::to_string(l) + ": " + e.what());
    }
  }
  return set;
}

SnapshotSet flow_data_local(const NetworkSystem& sys, int i, const Eigen::VectorXd& v, int m,
                            double dt, std::uint64_t seed, int substeps) {
  SnapshotSet set;
  set.kind = SnapshotSet::Kind::FlowPairs;
  set.dt = dt;
  set.seed = seed;
  set.inputs = sample_uniform(sys.domain[i], m, seed);
  set.targets.resize(sys.dims[i], m);
  for (int l = 0; l < m; ++l) {
    try {
      set.targets.col(l) =
          local_flow(sys, i, set.inputs.col(l), v, dt, 1, substeps).states.col(1);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("flow_data_local: sample " + std::to_string(l) + ": " + e.what());
    }
  }
  return set;
}

SnapshotSet extract_subsystem(const SnapshotSet& full, const NetworkSystem& sys, int i) {
  SnapshotSet set;
  set.kind = full.kind;
  set.dt = full.dt;
  set.seed = full.seed;
  set.inputs = full.inputs.middleRows(sys.offset(i), sys.dims[i]);
  set.targets = full.targets.middleRows(sys.offset(i), sys.dims[i]);
  return set;
}

namespace {

void write_matrix_csv(const Eigen::MatrixXd& M, const std::string& path,
                      const std::vector<int>& dims) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_snapshot_csv: cannot open " + path);
  out.precision(17);
  if (!dims.empty()) {
    int col = 0;
    for (std::size_t i = 0; i < dims.size(); ++i)
      for (int k = 0; k < dims[i]; ++k)
        out << (col++ ? "," : "") << "x_" << i + 1 << "_" << k + 1;
  } else {
    for (int k = 0; k < M.rows(); ++k) out << (k ? "," : "") << "x_" << k + 1;
  }
  out << "\n";
  for (Eigen::Index l = 0; l < M.cols(); ++l) {
    for (Eigen::Index r = 0; r < M.rows(); ++r) out << (r ? "," : "") << M(r, l);
    out << "\n";
  }
}

}  // namespace

void write_snapshot_csv(const SnapshotSet& set, const std::string& prefix,
                        const std::vector<int>& dims) {
  write_matrix_csv(set.inputs, prefix + "inputs.csv", dims);
  write_matrix_csv(set.targets, prefix + "targets.csv", dims);
}

}  // namespace koopnet
