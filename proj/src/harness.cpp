#include "koopnet/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "koopnet/parallel.hpp"
#include "koopnet/rng.hpp"

namespace koopnet {

using nlohmann::json;

namespace {

constexpr const char* kCsvVersionLine = "# koopnet-results v1";

std::uint64_t dict_seed(std::uint64_t master, const DictionarySpec& spec, std::uint64_t which,
                        std::uint64_t index) {
  return rng::derive(master, {which, spec.seed, index});
}

Dictionary build_one(const DictionarySpec& spec, int dim, const Box& box, std::uint64_t seed,
                     int size_override = 0) {
  if (spec.type == "monomial") return make_monomial_dictionary(dim, spec.degree);
  if (spec.type == "rbf") {
    const int size = size_override > 0 ? size_override : spec.size;
    return make_thin_plate_rbf_dictionary(dim, size, box, seed);
  }
  throw std::invalid_argument("dictionary.type must be 'rbf' or 'monomial', got '" + spec.type +
                              "'");
}

int steps_of(double horizon, double dt) { return static_cast<int>(std::llround(horizon / dt)); }

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * (static_cast<double>(sorted.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double w = pos - static_cast<double>(lo);
  if (w == 0.0 || sorted[lo] == sorted[lo + 1]) return sorted[lo];
  if (std::isinf(sorted[lo]) || std::isinf(sorted[lo + 1])) return sorted[lo + 1];
  return (1.0 - w) * sorted[lo] + w * sorted[lo + 1];
}

void print_double(std::ostream& out, double v) {
  if (std::isinf(v)) {
    out << (v > 0 ? "inf" : "-inf");
  } else {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  }
}

}  // namespace

std::vector<Dictionary> build_subsystem_dictionaries(const NetworkSystem& sys,
                                                     const DictionarySpec& spec,
                                                     std::uint64_t master_seed) {
  std::vector<Dictionary> dicts;
  for (int i = 0; i < sys.num_subsystems(); ++i)
    dicts.push_back(build_one(spec, sys.dims[i], sys.domain[i],
                              dict_seed(master_seed, spec, rng::tag::dictionary, i)));
  return dicts;
}

Dictionary build_full_dictionary(const NetworkSystem& sys, const DictionarySpec& spec,
                                 std::uint64_t master_seed) {
  const Box box = Box::product(sys.domain);
  // Same overall predictor size as the modularized variants.
  return build_one(spec, sys.total_dim(), box,
                   dict_seed(master_seed, spec, rng::tag::dictionary, 1000),
                   spec.size * sys.num_subsystems());
}

std::vector<Dictionary> build_extended_dictionaries(const NetworkSystem& sys,
                                                    const DictionarySpec& spec,
                                                    std::uint64_t master_seed) {
  const auto closures = sedmd_closures(sys.graph);
  std::vector<Dictionary> dicts;
  for (int i = 0; i < sys.num_subsystems(); ++i) {
    std::vector<Box> boxes;
    int dim = 0;
    for (int v : closures[i]) {
      boxes.push_back(sys.domain[v]);
      dim += sys.dims[v];
    }
    dicts.push_back(build_one(spec, dim, Box::product(boxes),
                              dict_seed(master_seed, spec, rng::tag::extended_dictionary, i)));
  }
  return dicts;
}

AnyModel fit_learner(const std::string& learner, const NetworkSystem& sys,
                     const DictionarySpec& dict_spec, int m, double dt, std::uint64_t master_seed,
                     const std::string& medmd_mode, const FitOptions& opts, int truth_substeps) {
  const std::uint64_t pairs_seed =
      rng::derive(master_seed, {rng::tag::full_pairs, std::uint64_t(m)});
  const std::uint64_t fit_seed = rng::derive(master_seed, {rng::tag::fit, std::uint64_t(m)});
  const std::vector<int> per_subsystem(sys.num_subsystems(), m);

  if (learner == "mgedmd") {
    return mgedmd_fit(sys, build_subsystem_dictionaries(sys, dict_spec, master_seed),
                      per_subsystem, fit_seed, opts);
  }
  if (learner == "medmd") {
    auto dicts = build_subsystem_dictionaries(sys, dict_spec, master_seed);
    if (medmd_mode == "frozen")
      return medmd_fit(sys, std::move(dicts), per_subsystem, dt, fit_seed,
                       MedmdMode::FrozenNeighbours, truth_substeps, opts);
    if (medmd_mode != "extract")
      throw std::invalid_argument("medmd_mode must be 'extract' or 'frozen'");
    const SnapshotSet full = flow_data_full(sys, m, dt, pairs_seed, {}, truth_substeps);
    return medmd_fit_from_pairs(sys, std::move(dicts), full, opts);
  }
  if (learner == "ledmd") {
    const SnapshotSet full = flow_data_full(sys, m, dt, pairs_seed, {}, truth_substeps);
    return ledmd_fit_from_pairs(sys, build_subsystem_dictionaries(sys, dict_spec, master_seed),
                                full, opts);
  }
  if (learner == "sedmd") {
    const SnapshotSet full = flow_data_full(sys, m, dt, pairs_seed, {}, truth_substeps);
    return sedmd_fit_from_pairs(sys, build_extended_dictionaries(sys, dict_spec, master_seed),
                                full, opts);
  }
  if (learner == "edmd") {
    const SnapshotSet full = flow_data_full(sys, m, dt, pairs_seed, {}, truth_substeps);
    EdmdModel model;
    model.dims = sys.dims;
    model.dict = build_full_dictionary(sys, dict_spec, master_seed);
    model.K = edmd_fit(full, model.dict, opts);
    model.dt = dt;
    return model;
  }
  throw std::invalid_argument("unknown learner '" + learner + "'");
}

Rollout rollout_model(const AnyModel& model, const Eigen::VectorXd& x0_full, int steps, double dt,
                      const RolloutOptions& opts) {
  if (const auto* m = std::get_if<GeneratorNetworkModel>(&model))
    return predict_generator(*m, x0_full, steps * dt, dt, opts);
  if (const auto* m = std::get_if<OperatorNetworkModel>(&model))
    return predict_operator(*m, x0_full, steps, opts);
  if (const auto* m = std::get_if<SedmdModel>(&model)) return predict_sedmd(*m, x0_full, steps, opts);
  if (const auto* m = std::get_if<LedmdModel>(&model)) return predict_ledmd(*m, x0_full, steps, opts);
  const auto& m = std::get<EdmdModel>(model);
  return predict_edmd(m.K, m.dict, x0_full, steps, m.dt, opts);
}

namespace {

/// Truth trajectories and rollout evaluation shared by bench and transfer.
struct EvalSetup {
  const NetworkSystem& sys;
  Eigen::MatrixXd ics;  // physical initial conditions, one per column
  std::vector<Trajectory> truth;
  int steps;
  double dt;
  int jobs;
  RolloutOptions rollout_opts;

  EvalSetup(const NetworkSystem& system, const std::vector<Box>& eval_box, int n_sims, int steps_,
            double dt_, std::uint64_t master_seed, int truth_substeps, int predict_substeps,
            int jobs_)
      : sys(system), steps(steps_), dt(dt_), jobs(jobs_) {
    const Box box = Box::product(eval_box);
    ics = sample_uniform(box, n_sims, rng::derive(master_seed, {rng::tag::eval_points}));
    truth.resize(n_sims);
    rollout_opts.substeps = predict_substeps;
    parallel_for(n_sims, jobs, [&](int k) {
      truth[k] = integrate(sys, sys.embed(ics.col(k)), dt, steps, truth_substeps);
    });
  }

  /// Per-subsystem log errors for every simulation (s x n_sims).
  Eigen::MatrixXd evaluate(const AnyModel& model) const {
    Eigen::MatrixXd errors(sys.num_subsystems(), ics.cols());
    parallel_for(static_cast<int>(ics.cols()), jobs, [&](int k) {
      const Rollout roll = rollout_model(model, sys.embed(ics.col(k)), steps, dt, rollout_opts);
      errors.col(k) = prediction_error_log(truth[k], roll, sys.dims, sys.physical_dims);
    });
    return errors;
  }
};

void append_rows(std::vector<ResultRow>& rows, const Eigen::MatrixXd& errors,
                 const std::string& learner, int m,
                 const std::vector<std::string>& provenance = {}) {
  for (int k = 0; k < errors.cols(); ++k)
    for (int i = 0; i < errors.rows(); ++i)
      rows.push_back({learner, m, k, i + 1, errors(i, k),
                      provenance.empty() ? std::string() : provenance[i]});
}

}  // namespace

ExperimentResult run_bench(const BenchConfig& config) {
  const NetworkSystem sys = make_benchmark(config.system);
  const std::vector<Box> eval_box =
      config.eval_box.empty() ? benchmark_eval_box(config.system) : config.eval_box;
  const FitOptions opts{config.ridge, 1e-10};
  const int steps = steps_of(config.horizon, config.dt);

  EvalSetup eval(sys, eval_box, config.n_sims, steps, config.dt, config.seed,
                 config.truth_substeps, config.predict_substeps, config.jobs);

  ExperimentResult result;
  for (const auto& learner : config.learners) {
    for (int m : config.m_values) {
      const AnyModel model = fit_learner(learner, sys, config.dictionary, m, config.dt,
                                         config.seed, config.medmd_mode, opts,
                                         config.truth_substeps);
      append_rows(result.rows, eval.evaluate(model), learner, m);
      std::cerr << "bench: " << config.system << " " << learner << " m=" << m << " done\n";
    }
  }
  result.summary = summarize(result.rows, config.include_blowups);
  return result;
}

namespace {

struct TransferPieces {
  NetworkSystem base;
  NetworkSystem modified;
  int copied_subsystem = -1;      // new vertex receiving a copied family
  int copy_donor = -1;            // its donor
  int copy_neighbour = -1;        // donor neighbour is relabelled to this vertex
  std::vector<int> direction_map; // donor direction playing each recipient direction
  int refit_subsystem = -1;       // vertex with a freshly fitted coupling block
  int refit_neighbour = -1;
};

TransferPieces make_transfer_pieces(const std::string& scenario) {
  TransferPieces p;
  p.base = make_benchmark("transfer_base");
  if (scenario == "add4") {
    p.modified = make_benchmark("transfer_add4");
    p.copied_subsystem = 3;
    p.copy_donor = 1;
    p.copy_neighbour = 2;
    p.direction_map = {0, 1};  // same gain matrix, same coordinate roles
  } else if (scenario == "mod3") {
    p.modified = make_benchmark("transfer_mod3");
    p.refit_subsystem = 2;
    p.refit_neighbour = 1;
  } else if (scenario == "mod3_add4") {
    p.modified = make_benchmark("transfer_mod3_add4");
    p.copied_subsystem = 3;
    p.copy_donor = 1;
    p.copy_neighbour = 2;
    p.direction_map = {1, 0};  // the donor's first input coordinate is played
                               // by the recipient neighbour's second
    p.refit_subsystem = 2;
    p.refit_neighbour = 3;
  } else {
    throw std::invalid_argument("scenario must be add4, mod3 or mod3_add4, got '" + scenario +
                                "'");
  }
  return p;
}

/// Entry permutation induced on a monomial dictionary by relabelling the
/// input coordinates: perm[d] is the recipient coordinate playing the donor
/// coordinate d. Returns `to` with donor entry k corresponding to recipient
/// entry to[k].
std::vector<int> relabel_entries(const Dictionary& dict, const std::vector<int>& perm) {
  auto exponents_of = [&](const Dictionary::Entry& e) {
    Eigen::VectorXi a = Eigen::VectorXi::Zero(dict.input_dim());
    if (e.kind == Dictionary::Kind::Coordinate)
      a[e.coord] = 1;
    else if (e.kind == Dictionary::Kind::Monomial)
      a = e.exponents;
    else
      throw std::invalid_argument("relabel_entries: monomial dictionaries only");
    return a;
  };
  std::vector<int> to(dict.size(), -1);
  for (int k = 0; k < dict.size(); ++k) {
    Eigen::VectorXi a = exponents_of(dict.entries()[k]);
    Eigen::VectorXi b = Eigen::VectorXi::Zero(a.size());
    for (int d = 0; d < a.size(); ++d) b[perm[d]] = a[d];
    for (int l = 0; l < dict.size(); ++l)
      if (exponents_of(dict.entries()[l]) == b) {
        to[k] = l;
        break;
      }
    if (to[k] < 0) throw std::logic_error("relabel_entries: dictionary not closed under relabel");
  }
  return to;
}

std::vector<std::string> provenance_of(const TransferPieces& p) {
  std::vector<std::string> out(p.modified.num_subsystems(), "fitted");
  if (p.copied_subsystem >= 0) out[p.copied_subsystem] = "copied";
  if (p.refit_subsystem >= 0) out[p.refit_subsystem] = "partially_refit";
  return out;
}

}  // namespace

ExperimentResult run_transfer(const TransferConfig& config) {
  const TransferPieces pieces = make_transfer_pieces(config.scenario);
  const NetworkSystem& base = pieces.base;
  const NetworkSystem& mod = pieces.modified;
  const FitOptions opts{config.ridge, 1e-10};
  const std::vector<std::string> provenance = provenance_of(pieces);

  std::vector<Box> eval_box(mod.num_subsystems(), Box::centered(2, config.eval_halfwidth));
  EvalSetup eval(mod, eval_box, config.n_sims, config.steps, config.dt, config.seed,
                 config.truth_substeps, config.predict_substeps, config.jobs);

  auto mod_dicts = [&] { return build_subsystem_dictionaries(mod, config.dictionary, config.seed); };

  ExperimentResult result;
  for (int m : config.m_values) {
    const std::uint64_t transfer_seed =
        rng::derive(config.seed, {rng::tag::transfer, std::uint64_t(m)});
    // Fresh snapshot pairs of the modified system for the residual refits.
    SnapshotSet fresh_pairs;
    if (pieces.refit_subsystem >= 0)
      fresh_pairs = flow_data_full(mod, m, config.dt, rng::derive(transfer_seed, {rng::tag::full_pairs}),
                                   {}, config.truth_substeps);

    for (const auto& learner : config.learners) {
      AnyModel fitted = fit_learner(learner, base, config.dictionary, m, config.dt, config.seed,
                                    "extract", opts, config.truth_substeps);
      AnyModel adapted;
      if (learner == "mgedmd") {
        GeneratorNetworkModel model = std::get<GeneratorNetworkModel>(std::move(fitted));
        model.graph = mod.graph;
        model.dims = mod.dims;
        model.dicts = mod_dicts();
        if (pieces.copied_subsystem >= 0)
          model.families.push_back(copy_generator_family(model.families[pieces.copy_donor],
                                                         pieces.copied_subsystem,
                                                         pieces.copy_neighbour,
                                                         pieces.direction_map));
        if (pieces.refit_subsystem >= 0)
          transfer_update_generator(model, mod, pieces.refit_subsystem, pieces.refit_neighbour, m,
                                    transfer_seed, opts);
        adapted = std::move(model);
      } else if (learner == "medmd") {
        OperatorNetworkModel model = std::get<OperatorNetworkModel>(std::move(fitted));
        model.graph = mod.graph;
        model.dims = mod.dims;
        model.dicts = mod_dicts();
        if (pieces.copied_subsystem >= 0)
          model.families.push_back(copy_operator_family(model.families[pieces.copy_donor],
                                                        pieces.copied_subsystem,
                                                        pieces.copy_neighbour,
                                                        pieces.direction_map));
        if (pieces.refit_subsystem >= 0)
          transfer_update_operator(model, mod, pieces.refit_subsystem, pieces.refit_neighbour,
                                   fresh_pairs, opts);
        adapted = std::move(model);
      } else if (learner == "ledmd") {
        LedmdModel model = std::get<LedmdModel>(std::move(fitted));
        model.graph = mod.graph;
        model.dims = mod.dims;
        model.dicts = mod_dicts();
        if (pieces.copied_subsystem >= 0) {
          model.A0.push_back(model.A0[pieces.copy_donor]);
          const auto donor_key = std::pair<int, int>{pieces.copy_donor, 0};
          // Relabel the lifted neighbour coordinates so the copied block reads
          // the coordinates playing the donor's roles.
          std::vector<int> perm(mod.dims[pieces.copy_neighbour], 0);
          for (std::size_t r = 0; r < pieces.direction_map.size(); ++r)
            perm[pieces.direction_map[r]] = static_cast<int>(r);
          const auto to = relabel_entries(model.dicts[pieces.copy_neighbour], perm);
          const Eigen::MatrixXd& B = model.B.at(donor_key);
          Eigen::MatrixXd Bp(B.rows(), B.cols());
          for (int k = 0; k < B.cols(); ++k) Bp.col(to[k]) = B.col(k);
          model.B[{pieces.copied_subsystem, pieces.copy_neighbour}] = Bp;
        }
        if (pieces.refit_subsystem >= 0)
          transfer_update_ledmd(model, mod, pieces.refit_subsystem, pieces.refit_neighbour,
                                fresh_pairs, opts);
        adapted = std::move(model);
      } else {
        throw std::invalid_argument("transfer supports ledmd, medmd and mgedmd, got '" + learner +
                                    "'");
      }
      append_rows(result.rows, eval.evaluate(adapted), learner, m, provenance);
      std::cerr << "transfer: " << config.scenario << " " << learner << " m=" << m << " done\n";
    }
  }
  result.summary = summarize(result.rows, config.include_blowups);

  if (config.certify) {
    json cj = *config.certify;
    cj["system"] = "transfer_" + config.scenario;
    result.certificate = run_certify(certify_config_from_json(cj)).report;
  }
  return result;
}

CertifyResult run_certify(const CertifyConfig& config) {
  NetworkSystem sys = make_benchmark(config.system);
  std::vector<Box> domains = config.cert_box.empty() ? sys.domain : config.cert_box;
  if (static_cast<int>(domains.size()) != sys.num_subsystems())
    throw std::invalid_argument("certify: cert_box needs one box per subsystem");
  // The surrogate stands in for the unknown compression on the certificate
  // domain, so it is sampled there.
  sys.domain = domains;

  const auto dicts = build_subsystem_dictionaries(sys, config.dictionary, config.seed);
  const std::vector<int> m(sys.num_subsystems(), config.surrogate_m);
  const GeneratorNetworkModel surrogate =
      mgedmd_fit(sys, dicts, m, rng::derive(config.seed, {rng::tag::surrogate}),
                 FitOptions{config.ridge, 1e-10});

  Eigen::VectorXd x0_phys = config.x0;
  if (x0_phys.size() == 0) {
    x0_phys.resize(sys.total_physical_dim());
    int at = 0;
    for (int i = 0; i < sys.num_subsystems(); ++i) {
      x0_phys.segment(at, sys.physical_dims[i]) = domains[i].hi.head(sys.physical_dims[i]);
      at += sys.physical_dims[i];
    }
  }

  CertifyResult out{certify(surrogate, domains, config.horizon, sys.embed(x0_phys), config.delta),
                    {}};
  out.report = certificate_to_json(out.certificate, sys.graph);
  out.report["system"] = config.system;
  out.report["surrogate_samples"] = config.surrogate_m;
  out.report["horizon"] = config.horizon;
  std::vector<double> x0v(x0_phys.data(), x0_phys.data() + x0_phys.size());
  out.report["x0"] = x0v;
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows, bool include_blowups) {
  std::map<std::tuple<std::string, int, int>, std::vector<double>> groups;
  std::map<std::tuple<std::string, int, int>, int> blowups;
  for (const auto& r : rows) {
    const auto key = std::make_tuple(r.learner, r.m, r.subsystem);
    if (std::isinf(r.log_err)) {
      ++blowups[key];
      if (!include_blowups) continue;
    }
    groups[key].push_back(r.log_err);
  }
  std::vector<SummaryRow> out;
  for (auto& [key, values] : groups) {
    std::sort(values.begin(), values.end());
    SummaryRow s;
    std::tie(s.learner, s.m, s.subsystem) = key;
    s.n = static_cast<int>(values.size());
    s.blowups = blowups.count(key) ? blowups[key] : 0;
    s.median = quantile(values, 0.5);
    s.q1 = quantile(values, 0.25);
    s.q3 = quantile(values, 0.75);
    const double iqr = s.q3 - s.q1;
    s.whisker_lo = s.median;
    s.whisker_hi = s.median;
    for (double v : values) {
      if (v >= s.q1 - 1.5 * iqr) {
        s.whisker_lo = v;
        break;
      }
    }
    for (auto it = values.rbegin(); it != values.rend(); ++it) {
      if (*it <= s.q3 + 1.5 * iqr) {
        s.whisker_hi = *it;
        break;
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path,
                       bool with_provenance) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_results_csv: cannot open " + path);
  out << kCsvVersionLine << "\n";
  out << "learner,m,sim,subsystem,log_err";
  if (with_provenance) out << ",provenance";
  out << "\n";
  for (const auto& r : rows) {
    out << r.learner << "," << r.m << "," << r.sim << "," << r.subsystem << ",";
    print_double(out, r.log_err);
    if (with_provenance) out << "," << r.provenance;
    out << "\n";
  }
}

void write_summary_csv(const std::vector<SummaryRow>& summary, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_summary_csv: cannot open " + path);
  out << kCsvVersionLine << "\n";
  out << "learner,m,subsystem,n,blowups,median,q1,q3,whisker_lo,whisker_hi\n";
  for (const auto& s : summary) {
    out << s.learner << "," << s.m << "," << s.subsystem << "," << s.n << "," << s.blowups << ",";
    print_double(out, s.median);
    out << ",";
    print_double(out, s.q1);
    out << ",";
    print_double(out, s.q3);
    out << ",";
    print_double(out, s.whisker_lo);
    out << ",";
    print_double(out, s.whisker_hi);
    out << "\n";
  }
}

void write_trajectory_csv(const Trajectory& traj, const std::vector<int>& dims,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trajectory_csv: cannot open " + path);
  out << kCsvVersionLine << "\n";
  out << "t";
  for (std::size_t i = 0; i < dims.size(); ++i)
    for (int k = 0; k < dims[i]; ++k) out << ",x_" << i + 1 << "_" << k + 1;
  out << "\n";
  for (Eigen::Index c = 0; c < traj.times.size(); ++c) {
    print_double(out, traj.times[c]);
    for (Eigen::Index r = 0; r < traj.states.rows(); ++r) {
      out << ",";
      print_double(out, traj.states(r, c));
    }
    out << "\n";
  }
}

namespace {

// JSON has no infinities; emit them as strings so the report stays faithful.
json json_number(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

json json_numbers(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(json_number(x));
  return out;
}

}  // namespace

nlohmann::json certificate_to_json(const Certificate& cert, const Digraph& g) {
  const ErrorFunctionals& f = cert.functionals;
  json per_subsystem = json::array();
  for (int i = 0; i < f.subsystems(); ++i) {
    per_subsystem.push_back({{"subsystem", i + 1},
                             {"alpha", f.alpha[i]},
                             {"L0_norm", f.L0_norm[i]},
                             {"rho", f.rho[i]},
                             {"nu", f.nu[i]},
                             {"P_norm", f.P_norm[i]},
                             {"z0_norm", f.z0_norm[i]},
                             {"z0_norm_worst_corner", f.z0_norm_worst[i]},
                             {"eta", f.eta[i]}});
  }
  json arcs = json::array();
  for (const auto& [key, E] : f.E_zero)
    arcs.push_back({{"subsystem", key.first + 1},
                    {"neighbour", key.second + 1},
                    {"coupling_gap", f.coupling_gap.at(key)},
                    {"E_zero", json_number(E)}});

  json weak{{"pass", cert.weak.pass},
            {"eps_bar", json_number(cert.weak.eps_bar)},
            {"per_vertex_sums", json_numbers(cert.weak.per_vertex_sums)}};

  auto component_json = [](const ComponentCheck& check, const char* value_name) {
    json comps = json::array();
    for (const auto& c : check.components) {
      json entry{{value_name, json_number(c.value)}, {"pass", c.pass}};
      json verts = json::array();
      for (int v : c.component) verts.push_back(v + 1);
      entry["component"] = verts;
      if (!c.cycle_order.empty()) {
        json order = json::array();
        for (int v : c.cycle_order) order.push_back(v + 1);
        entry["cycle_order"] = order;
        entry["pivots"] = json_numbers(c.pivots);
        entry["propagation_matrix_in_class"] = c.propagation_matrix_ok;
      }
      comps.push_back(std::move(entry));
    }
    return comps;
  };

  json j{{"format", "koopnet-certificate"},
         {"graph", graph_to_json(g)},
         {"regime", cert.regime},
         {"horizon", f.T},
         {"functionals", per_subsystem},
         {"arcs", arcs},
         {"acyclic", {{"pass", cert.acyclic.pass}}},
         {"weak_interconnection", weak},
         {"condensation_weak",
          {{"pass", cert.condensation_weak.pass},
           {"components", component_json(cert.condensation_weak, "eps_bar_k")}}},
         {"single_cycle_small_gain",
          {{"applicable", cert.small_gain.applicable},
           {"pass", cert.small_gain.pass},
           {"components", component_json(cert.small_gain, "product")}}}};
  if (cert.acyclic.pass) {
    json order = json::array();
    for (int v : cert.acyclic.order) order.push_back(v + 1);
    j["acyclic"]["order"] = order;
  }
  if (cert.perturbed) {
    json pj{{"delta", cert.perturbed->delta}, {"E_i", cert.perturbed->E_i}};
    json pe = json::array();
    for (const auto& [key, E] : cert.perturbed->E_ij)
      pe.push_back({{"subsystem", key.first + 1}, {"neighbour", key.second + 1}, {"E", E}});
    pj["E_ij"] = pe;
    j["perturbed"] = pj;
  }
  return j;
}

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config: " + path + ": " + what);
}

template <typename T>
T field(const json& j, const std::string& key, const std::string& path, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(path + "." + key, e.what());
  }
}

DictionarySpec dictionary_spec(const json& j, const std::string& path,
                               const DictionarySpec& defaults) {
  if (!j.contains("dictionary")) return defaults;
  const json& d = j.at("dictionary");
  DictionarySpec spec = defaults;
  spec.type = field<std::string>(d, "type", path + ".dictionary", spec.type);
  spec.size = field<int>(d, "size", path + ".dictionary", spec.size);
  spec.degree = field<int>(d, "degree", path + ".dictionary", spec.degree);
  spec.seed = field<std::uint64_t>(d, "seed", path + ".dictionary", spec.seed);
  if (spec.type != "rbf" && spec.type != "monomial")
    config_error(path + ".dictionary.type", "must be 'rbf' or 'monomial'");
  return spec;
}

std::vector<Box> boxes_from_json(const json& j, const std::string& key, const std::string& path,
                                 const std::vector<int>& dims) {
  if (!j.contains(key)) return {};
  const json& b = j.at(key);
  std::vector<Box> out;
  if (b.is_number()) {
    for (int d : dims) out.push_back(Box::centered(d, b.get<double>()));
    return out;
  }
  if (!b.is_array() || b.size() != dims.size())
    config_error(path + "." + key, "expected a halfwidth or one [lo, hi] list per subsystem");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const json& sub = b.at(i);
    Eigen::VectorXd lo(dims[i]), hi(dims[i]);
    if (static_cast<int>(sub.size()) != dims[i])
      config_error(path + "." + key, "box " + std::to_string(i + 1) + " has wrong dimension");
    for (int d = 0; d < dims[i]; ++d) {
      lo[d] = sub.at(d).at(0).get<double>();
      hi[d] = sub.at(d).at(1).get<double>();
    }
    out.emplace_back(std::move(lo), std::move(hi));
  }
  return out;
}

json dictionary_spec_json(const DictionarySpec& s) {
  return {{"type", s.type}, {"size", s.size}, {"degree", s.degree}, {"seed", s.seed}};
}

}  // namespace

BenchConfig bench_config_from_json(const json& j) {
  BenchConfig c;
  c.system = field<std::string>(j, "system", "$", c.system);
  c.learners = field<std::vector<std::string>>(j, "learners", "$", c.learners);
  c.m_values = field<std::vector<int>>(j, "m_values", "$", c.m_values);
  c.dictionary = dictionary_spec(j, "$", c.dictionary);
  c.dt = field<double>(j, "dt", "$", c.dt);
  c.horizon = field<double>(j, "horizon", "$", c.horizon);
  c.n_sims = field<int>(j, "n_sims", "$", c.n_sims);
  c.seed = field<std::uint64_t>(j, "seed", "$", c.seed);
  c.ridge = field<double>(j, "ridge", "$", c.ridge);
  c.medmd_mode = field<std::string>(j, "medmd_mode", "$", c.medmd_mode);
  c.predict_substeps = field<int>(j, "predict_substeps", "$", c.predict_substeps);
  c.truth_substeps = field<int>(j, "truth_substeps", "$", c.truth_substeps);
  c.include_blowups = field<bool>(j, "include_blowups", "$", c.include_blowups);
  c.jobs = field<int>(j, "jobs", "$", c.jobs);
  if (c.dt <= 0) config_error("$.dt", "must be positive");
  if (c.n_sims < 1) config_error("$.n_sims", "must be >= 1");
  const NetworkSystem sys = make_benchmark(c.system);
  std::vector<int> phys = sys.physical_dims;
  c.eval_box = boxes_from_json(j, "eval_box", "$", phys);
  return c;
}

TransferConfig transfer_config_from_json(const json& j) {
  TransferConfig c;
  c.scenario = field<std::string>(j, "scenario", "$", c.scenario);
  c.learners = field<std::vector<std::string>>(j, "learners", "$", c.learners);
  c.m_values = field<std::vector<int>>(j, "m_values", "$", c.m_values);
  c.dictionary = dictionary_spec(j, "$", c.dictionary);
  c.dt = field<double>(j, "dt", "$", c.dt);
  c.steps = field<int>(j, "steps", "$", c.steps);
  c.n_sims = field<int>(j, "n_sims", "$", c.n_sims);
  c.eval_halfwidth = field<double>(j, "eval_halfwidth", "$", c.eval_halfwidth);
  c.seed = field<std::uint64_t>(j, "seed", "$", c.seed);
  c.ridge = field<double>(j, "ridge", "$", c.ridge);
  c.predict_substeps = field<int>(j, "predict_substeps", "$", c.predict_substeps);
  c.truth_substeps = field<int>(j, "truth_substeps", "$", c.truth_substeps);
  c.include_blowups = field<bool>(j, "include_blowups", "$", c.include_blowups);
  c.jobs = field<int>(j, "jobs", "$", c.jobs);
  if (j.contains("certify")) c.certify = j.at("certify");
  return c;
}

CertifyConfig certify_config_from_json(const json& j) {
  CertifyConfig c;
  c.system = field<std::string>(j, "system", "$", c.system);
  c.dictionary = dictionary_spec(j, "$", c.dictionary);
  c.surrogate_m = field<int>(j, "surrogate_m", "$", c.surrogate_m);
  c.horizon = field<double>(j, "horizon", "$", c.horizon);
  c.delta = field<double>(j, "delta", "$", c.delta);
  c.seed = field<std::uint64_t>(j, "seed", "$", c.seed);
  c.ridge = field<double>(j, "ridge", "$", c.ridge);
  const NetworkSystem sys = make_benchmark(c.system);
  c.cert_box = boxes_from_json(j, "cert_box", "$", sys.dims);
  if (j.contains("x0")) {
    const auto x0 = field<std::vector<double>>(j, "x0", "$", {});
    c.x0 = Eigen::Map<const Eigen::VectorXd>(x0.data(), x0.size());
    if (c.x0.size() != sys.total_physical_dim())
      config_error("$.x0", "expected " + std::to_string(sys.total_physical_dim()) +
                               " physical coordinates");
  }
  return c;
}

json resolved_config_json(const BenchConfig& c) {
  return {{"task", "bench"},
          {"system", c.system},
          {"learners", c.learners},
          {"m_values", c.m_values},
          {"dictionary", dictionary_spec_json(c.dictionary)},
          {"dt", c.dt},
          {"horizon", c.horizon},
          {"n_sims", c.n_sims},
          {"seed", c.seed},
          {"ridge", c.ridge},
          {"medmd_mode", c.medmd_mode},
          {"predict_substeps", c.predict_substeps},
          {"truth_substeps", c.truth_substeps},
          {"include_blowups", c.include_blowups},
          {"jobs", c.jobs},
          {"derived_seeds",
           {{"eval_points", rng::derive(c.seed, {rng::tag::eval_points})},
            {"full_pairs_per_m", [&] {
               json out = json::object();
               for (int m : c.m_values)
                 out[std::to_string(m)] =
                     rng::derive(c.seed, {rng::tag::full_pairs, std::uint64_t(m)});
               return out;
             }()}}}};
}

json resolved_config_json(const TransferConfig& c) {
  json j{{"task", "transfer"},
         {"scenario", c.scenario},
         {"learners", c.learners},
         {"m_values", c.m_values},
         {"dictionary", dictionary_spec_json(c.dictionary)},
         {"dt", c.dt},
         {"steps", c.steps},
         {"n_sims", c.n_sims},
         {"eval_halfwidth", c.eval_halfwidth},
         {"seed", c.seed},
         {"ridge", c.ridge},
         {"predict_substeps", c.predict_substeps},
         {"truth_substeps", c.truth_substeps},
         {"include_blowups", c.include_blowups},
         {"jobs", c.jobs},
         {"derived_seeds",
          {{"eval_points", rng::derive(c.seed, {rng::tag::eval_points})}}}};
  if (c.certify) j["certify"] = *c.certify;
  return j;
}

json resolved_config_json(const CertifyConfig& c) {
  json j{{"task", "certify"},
         {"system", c.system},
         {"dictionary", dictionary_spec_json(c.dictionary)},
         {"surrogate_m", c.surrogate_m},
         {"horizon", c.horizon},
         {"delta", c.delta},
         {"seed", c.seed},
         {"ridge", c.ridge},
         {"derived_seeds", {{"surrogate", rng::derive(c.seed, {rng::tag::surrogate})}}}};
  if (c.x0.size() > 0) {
    std::vector<double> x0(c.x0.data(), c.x0.data() + c.x0.size());
    j["x0"] = x0;
  }
  return j;
}

}  // namespace koopnet
