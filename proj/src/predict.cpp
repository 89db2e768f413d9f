#include "koopnet/predict.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace koopnet {

namespace {

constexpr double kLogFloor = -745.0;  // ln of the smallest positive double, floored

struct LiftedLayout {
  std::vector<int> offsets;
  int total = 0;

  explicit LiftedLayout(const std::vector<Dictionary>& dicts) {
    offsets.reserve(dicts.size());
    for (const auto& d : dicts) {
      offsets.push_back(total);
      total += d.size();
    }
  }
};

/// Shared rollout bookkeeping: records the physical part of the lifted state
/// per step and watches for blow-ups.
class Recorder {
 public:
  Recorder(const std::vector<int>& dims, int steps, double dt) {
    int n = 0;
    for (int d : dims) n += d;
    rollout_.traj.times = Eigen::VectorXd::LinSpaced(steps + 1, 0.0, dt * steps);
    rollout_.traj.states.setZero(n, steps + 1);
  }

  /// Returns false once a blow-up is detected; the trajectory is truncated.
  bool record(int step, const Eigen::VectorXd& physical, double norm_seen, double blowup_norm) {
    if (rollout_.blew_up) return false;
    if (!physical.allFinite() || norm_seen > blowup_norm) {
      rollout_.blew_up = true;
      rollout_.blowup_time = rollout_.traj.times[step];
      const int keep = step;  // states [0, keep) are valid
      rollout_.traj.times.conservativeResize(keep);
      rollout_.traj.states.conservativeResize(Eigen::NoChange, keep);
      return false;
    }
    rollout_.traj.states.col(step) = physical;
    return true;
  }

  Rollout take() { return std::move(rollout_); }

 private:
  Rollout rollout_;
};

Eigen::VectorXd lift_blocks(const std::vector<Dictionary>& dicts, const std::vector<int>& dims,
                            const LiftedLayout& layout, const Eigen::VectorXd& x) {
  Eigen::VectorXd z(layout.total);
  int at = 0;
  for (std::size_t i = 0; i < dicts.size(); ++i) {
    z.segment(layout.offsets[i], dicts[i].size()) = dicts[i].lift(x.segment(at, dims[i]));
    at += dims[i];
  }
  return z;
}

Eigen::VectorXd physical_of(const std::vector<int>& dims, const LiftedLayout& layout,
                            const Eigen::VectorXd& z) {
  int n = 0;
  for (int d : dims) n += d;
  Eigen::VectorXd x(n);
  int at = 0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    x.segment(at, dims[i]) = z.segment(layout.offsets[i], dims[i]);
    at += dims[i];
  }
  return x;
}

}  // namespace

Rollout predict_generator(const GeneratorNetworkModel& model, const Eigen::VectorXd& x0, double T,
                          double dt_out, const RolloutOptions& opts) {
  if (dt_out <= 0.0) throw std::invalid_argument("predict_generator: dt_out must be positive");
  const int steps = static_cast<int>(std::llround(T / dt_out));
  const int s = model.graph.num_vertices();
  const LiftedLayout layout(model.dicts);

  // Direction gaps D_{j,r} = L^{e_j^r} - L0 are what the bilinear recombination
  // multiplies by the neighbour coordinates.
  std::vector<const GeneratorFamily*> fams(s);
  std::vector<std::map<int, std::vector<Eigen::MatrixXd>>> gaps(s);
  for (int i = 0; i < s; ++i) {
    fams[i] = &model.families[i];
    for (const auto& [j, dirs] : model.families[i].L_dir) {
      auto& g = gaps[i][j];
      g.reserve(dirs.size());
      for (const auto& L : dirs) g.push_back(L - model.families[i].L0);
    }
  }

  auto rhs = [&](const Eigen::VectorXd& z, Eigen::VectorXd& dz,
                 const Eigen::VectorXd& coupling_state) {
    for (int i = 0; i < s; ++i) {
      auto z_i = z.segment(layout.offsets[i], model.dicts[i].size());
      auto dz_i = dz.segment(layout.offsets[i], model.dicts[i].size());
      dz_i.noalias() = fams[i]->L0 * z_i;
      for (const auto& [j, g] : gaps[i]) {
        for (std::size_t r = 0; r < g.size(); ++r) {
          const double xjr = coupling_state[layout.offsets[j] + static_cast<int>(r)];
          if (xjr != 0.0) dz_i.noalias() += xjr * (g[r] * z_i);
        }
      }
    }
  };

  Recorder rec(model.dims, steps, dt_out);
  Eigen::VectorXd z = lift_blocks(model.dicts, model.dims, layout, x0);
  rec.record(0, x0, z.cwiseAbs().maxCoeff(), opts.blowup_norm);
  const double h = dt_out / opts.substeps;
  Eigen::VectorXd k1(layout.total), k2(layout.total), k3(layout.total), k4(layout.total);
  for (int step = 1; step <= steps; ++step) {
    const Eigen::VectorXd frozen = z;  // only read when freezing is on
    for (int sub = 0; sub < opts.substeps; ++sub) {
      const auto& c1 = opts.freeze_coupling_per_step ? frozen : z;
      rhs(z, k1, c1);
      Eigen::VectorXd z2 = z + 0.5 * h * k1;
      rhs(z2, k2, opts.freeze_coupling_per_step ? frozen : z2);
      Eigen::VectorXd z3 = z + 0.5 * h * k2;
      rhs(z3, k3, opts.freeze_coupling_per_step ? frozen : z3);
      Eigen::VectorXd z4 = z + h * k3;
      rhs(z4, k4, opts.freeze_coupling_per_step ? frozen : z4);
      z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    const double norm = z.allFinite() ? z.cwiseAbs().maxCoeff()
                                      : std::numeric_limits<double>::infinity();
    if (!rec.record(step, physical_of(model.dims, layout, z), norm, opts.blowup_norm)) break;
  }
  return rec.take();
}

Rollout predict_operator(const OperatorNetworkModel& model, const Eigen::VectorXd& x0, int steps,
                         const RolloutOptions& opts) {
  const int s = model.graph.num_vertices();
  const LiftedLayout layout(model.dicts);
  Recorder rec(model.dims, steps, model.dt);
  Eigen::VectorXd z = lift_blocks(model.dicts, model.dims, layout, x0);
  rec.record(0, x0, z.cwiseAbs().maxCoeff(), opts.blowup_norm);
  Eigen::VectorXd next(layout.total);
  for (int step = 1; step <= steps; ++step) {
    for (int i = 0; i < s; ++i) {
      const auto& fam = model.families[i];
      const int N = model.dicts[i].size();
      auto z_i = z.segment(layout.offsets[i], N);
      auto out = next.segment(layout.offsets[i], N);
      out.noalias() = fam.K0 * z_i;
      for (const auto& [j, Kj] : fam.K) {
        for (int r = 0; r < model.dims[j]; ++r) {
          const double xjr = z[layout.offsets[j] + r];  // [I 0] z_j
          if (xjr != 0.0) out.noalias() += xjr * (Kj.middleCols(r * N, N) * z_i);
        }
      }
    }
    z = next;
    const double norm = z.allFinite() ? z.cwiseAbs().maxCoeff()
                                      : std::numeric_limits<double>::infinity();
    if (!rec.record(step, physical_of(model.dims, layout, z), norm, opts.blowup_norm)) break;
  }
  return rec.take();
}

Rollout predict_edmd(const Eigen::MatrixXd& K, const Dictionary& dict, const Eigen::VectorXd& x0,
                     int steps, double dt, const RolloutOptions& opts) {
  const int n = dict.input_dim();
  Recorder rec({n}, steps, dt);
  Eigen::VectorXd z = dict.lift(x0);
  rec.record(0, x0, z.cwiseAbs().maxCoeff(), opts.blowup_norm);
  for (int step = 1; step <= steps; ++step) {
    z = K * z;
    const double norm = z.allFinite() ? z.cwiseAbs().maxCoeff()
                                      : std::numeric_limits<double>::infinity();
    if (!rec.record(step, z.head(n), norm, opts.blowup_norm)) break;
  }
  return rec.take();
}

Rollout predict_sedmd(const SedmdModel& model, const Eigen::VectorXd& x0, int steps,
                      const RolloutOptions& opts) {
  const int s = model.graph.num_vertices();
  std::vector<int> offsets(s, 0);
  for (int i = 1; i < s; ++i) offsets[i] = offsets[i - 1] + model.dims[i - 1];

  Recorder rec(model.dims, steps, model.dt);
  rec.record(0, x0, x0.cwiseAbs().maxCoeff(), opts.blowup_norm);

  std::vector<Eigen::VectorXd> z(s);
  std::vector<int> read_at(s, 0);
  for (int i = 0; i < s; ++i) {
    int ext = 0;
    Eigen::VectorXd xbar(model.dicts[i].input_dim());
    for (int v : model.closures[i]) {
      if (v == i) read_at[i] = ext;
      xbar.segment(ext, model.dims[v]) = x0.segment(offsets[v], model.dims[v]);
      ext += model.dims[v];
    }
    z[i] = model.dicts[i].lift(xbar);
  }
  Eigen::VectorXd x(x0.size());
  for (int step = 1; step <= steps; ++step) {
    double norm = 0.0;
    for (int i = 0; i < s; ++i) {
      z[i] = model.K[i] * z[i];
      const double ni = z[i].allFinite() ? z[i].cwiseAbs().maxCoeff()
                                         : std::numeric_limits<double>::infinity();
      norm = std::max(norm, ni);
      x.segment(offsets[i], model.dims[i]) = z[i].segment(read_at[i], model.dims[i]);
    }
    if (!rec.record(step, x, norm, opts.blowup_norm)) break;
  }
  return rec.take();
}

Rollout predict_ledmd(const LedmdModel& model, const Eigen::VectorXd& x0, int steps,
                      const RolloutOptions& opts) {
  const int s = model.graph.num_vertices();
  const LiftedLayout layout(model.dicts);
  Recorder rec(model.dims, steps, model.dt);
  Eigen::VectorXd z = lift_blocks(model.dicts, model.dims, layout, x0);
  rec.record(0, x0, z.cwiseAbs().maxCoeff(), opts.blowup_norm);
  Eigen::VectorXd next(layout.total);
  for (int step = 1; step <= steps; ++step) {
    for (int i = 0; i < s; ++i) {
      auto out = next.segment(layout.offsets[i], model.dicts[i].size());
      out.noalias() = model.A0[i] * z.segment(layout.offsets[i], model.dicts[i].size());
      for (int j : model.graph.in_neighbours(i))
        out.noalias() +=
            model.B.at({i, j}) * z.segment(layout.offsets[j], model.dicts[j].size());
    }
    z = next;
    const double norm = z.allFinite() ? z.cwiseAbs().maxCoeff()
                                      : std::numeric_limits<double>::infinity();
    if (!rec.record(step, physical_of(model.dims, layout, z), norm, opts.blowup_norm)) break;
  }
  return rec.take();
}

Eigen::VectorXd prediction_error_log(const Trajectory& truth, const Rollout& predicted,
                                     const std::vector<int>& block_dims,
                                     const std::vector<int>& compare_dims) {
  const std::vector<int>& cmp = compare_dims.empty() ? block_dims : compare_dims;
  const int s = static_cast<int>(block_dims.size());
  const Eigen::Index common = predicted.traj.times.size();
  if (!predicted.blew_up && common != truth.times.size())
    throw std::invalid_argument("prediction_error_log: time grids differ");
  if (common > 0 &&
      (truth.times.head(common) - predicted.traj.times).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("prediction_error_log: time grids differ");

  Eigen::VectorXd out(s);
  int at = 0;
  for (int i = 0; i < s; ++i) {
    if (predicted.blew_up) {
      out[i] = std::numeric_limits<double>::infinity();
    } else {
      double worst = 0.0;
      for (Eigen::Index k = 0; k < common; ++k) {
        const double err = (truth.states.col(k).segment(at, cmp[i]) -
                            predicted.traj.states.col(k).segment(at, cmp[i]))
                               .lpNorm<1>();
        worst = std::max(worst, err);
      }
      out[i] = worst > 0.0 ? std::log(worst) : kLogFloor;
    }
    at += block_dims[i];
  }
  return out;
}

}  // namespace koopnet
