#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "koopnet/certify.hpp"
#include "koopnet/predict.hpp"
#include "koopnet/serialize.hpp"

namespace koopnet {

/// Per-subsystem observable specification from the experiment config.
struct DictionarySpec {
  std::string type = "rbf";  // rbf | monomial
  int size = 152;            // observables per subsystem (rbf)
  int degree = 3;            // maximum total degree (monomial)
  std::uint64_t seed = 7;    // sub-stream for RBF centers
};

struct BenchConfig {
  std::string system = "duffing3";
  std::vector<std::string> learners{"edmd", "sedmd", "ledmd", "medmd", "mgedmd"};
  std::vector<int> m_values{1500, 5000};
  DictionarySpec dictionary;
  double dt = 0.01;
  double horizon = 0.5;
  int n_sims = 500;
  std::vector<Box> eval_box;  // empty: the benchmark's conventional box
  std::uint64_t seed = 1;
  double ridge = 0.0;
  std::string medmd_mode = "extract";  // extract | frozen
  int predict_substeps = 10;
  int truth_substeps = 10;
  bool include_blowups = true;
  int jobs = 0;
};

struct TransferConfig {
  std::string scenario = "mod3_add4";  // add4 | mod3 | mod3_add4
  std::vector<std::string> learners{"ledmd", "medmd", "mgedmd"};
  std::vector<int> m_values{20, 50};
  DictionarySpec dictionary{"monomial", 0, 3, 7};
  double dt = 0.01;
  int steps = 50;
  int n_sims = 500;
  double eval_halfwidth = 0.5;
  std::uint64_t seed = 1;
  double ridge = 0.0;
  int predict_substeps = 10;
  int truth_substeps = 10;
  bool include_blowups = true;
  int jobs = 0;
  std::optional<nlohmann::json> certify;  // forwarded to run_certify on the scenario system
};

struct CertifyConfig {
  std::string system = "transfer_mod3_add4";
  DictionarySpec dictionary{"monomial", 0, 3, 7};
  int surrogate_m = 100000;
  double horizon = 0.5;
  std::vector<Box> cert_box;   // empty: the system's domain boxes
  Eigen::VectorXd x0;          // physical coordinates; empty: upper corner of cert_box
  double delta = 0.0;          // optional uniform estimation-error magnitude to report
  std::uint64_t seed = 1;
  double ridge = 0.0;
};

struct ResultRow {
  std::string learner;
  int m = 0;
  int sim = 0;
  int subsystem = 0;  // 1-based in all I/O
  double log_err = 0.0;
  std::string provenance;  // fitted | copied | partially_refit (transfer only)
};

struct SummaryRow {
  std::string learner;
  int m = 0, subsystem = 0;
  int n = 0, blowups = 0;
  double median = 0, q1 = 0, q3 = 0, whisker_lo = 0, whisker_hi = 0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<SummaryRow> summary;
  std::optional<nlohmann::json> certificate;
};

struct CertifyResult {
  Certificate certificate;
  nlohmann::json report;
};

std::vector<Dictionary> build_subsystem_dictionaries(const NetworkSystem& sys,
                                                     const DictionarySpec& spec,
                                                     std::uint64_t master_seed);
Dictionary build_full_dictionary(const NetworkSystem& sys, const DictionarySpec& spec,
                                 std::uint64_t master_seed);
std::vector<Dictionary> build_extended_dictionaries(const NetworkSystem& sys,
                                                    const DictionarySpec& spec,
                                                    std::uint64_t master_seed);

/// Fits one learner on the named system with m snapshot pairs (or m points per
/// generator regression for mgedmd). Data seeds derive from `master_seed`, so
/// learners sharing a protocol see identical data.
AnyModel fit_learner(const std::string& learner, const NetworkSystem& sys,
                     const DictionarySpec& dict_spec, int m, double dt, std::uint64_t master_seed,
                     const std::string& medmd_mode = "extract", const FitOptions& opts = {},
                     int truth_substeps = 10);

Rollout rollout_model(const AnyModel& model, const Eigen::VectorXd& x0_full, int steps, double dt,
                      const RolloutOptions& opts = {});

ExperimentResult run_bench(const BenchConfig& config);
ExperimentResult run_transfer(const TransferConfig& config);
CertifyResult run_certify(const CertifyConfig& config);

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows, bool include_blowups);

void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path,
                       bool with_provenance);
void write_summary_csv(const std::vector<SummaryRow>& summary, const std::string& path);
void write_trajectory_csv(const Trajectory& traj, const std::vector<int>& dims,
                          const std::string& path);

nlohmann::json certificate_to_json(const Certificate& cert, const Digraph& g);

BenchConfig bench_config_from_json(const nlohmann::json& j);
TransferConfig transfer_config_from_json(const nlohmann::json& j);
CertifyConfig certify_config_from_json(const nlohmann::json& j);

nlohmann::json resolved_config_json(const BenchConfig& config);
nlohmann::json resolved_config_json(const TransferConfig& config);
nlohmann::json resolved_config_json(const CertifyConfig& config);

}  // namespace koopnet
