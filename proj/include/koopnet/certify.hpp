#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "koopnet/box.hpp"
#include "koopnet/learners.hpp"

namespace koopnet {

/// Ingredients of the finite-data error propagation bound, evaluated at zero
/// estimation error from a reference (surrogate) generator family. All matrix
/// norms are the induced one-norm, all vector norms the one-norm.
struct ErrorFunctionals {
  double T = 0.0;
  std::vector<double> alpha;          // max one-norm over the domain box
  std::vector<double> L0_norm;        // ||L0_i||
  std::vector<double> rho;            // growth exponent of the reference dynamics
  std::vector<double> nu;             // rho_i + E_{V_i}(0,0) = 2 rho_i
  std::vector<double> P_norm;         // ||P_i|| (computed, equals 1 here)
  std::vector<double> z0_norm;        // ||z_i(0)|| at the supplied x(0)
  std::vector<double> z0_norm_worst;  // worst case over the corners of X_i
  std::vector<double> eta;            // ||P_i|| ||z_i(0)|| T

  /// Sum over r of ||L^{e_j^r} - L0|| per arc (i, j), j in-neighbour of i.
  std::map<std::pair<int, int>, double> coupling_gap;
  /// E_ij(0,0) per arc (i, j).
  std::map<std::pair<int, int>, double> E_zero;

  int subsystems() const { return static_cast<int>(alpha.size()); }
};

/// The bound functionals at a uniform estimation-error magnitude delta on all
/// fitted matrices: reported, never used as a pass/fail input.
struct PerturbedFunctionals {
  double delta = 0.0;
  std::vector<double> E_i;
  std::map<std::pair<int, int>, double> E_ij;
};

ErrorFunctionals compute_functionals(const GeneratorNetworkModel& reference,
                                     const std::vector<Box>& domains, double T,
                                     const Eigen::VectorXd& x0);

PerturbedFunctionals compute_functionals_at(const GeneratorNetworkModel& reference,
                                            const ErrorFunctionals& f, double delta);

struct AcyclicVerdict {
  bool pass = false;
  std::vector<int> order;  // topological sort when pass
};

struct WeakInterconnectionVerdict {
  bool pass = false;
  double eps_bar = 0.0;                 // max_i sum_{j out of i} E_ji(0,0)
  std::vector<double> per_vertex_sums;  // the inner sums
};

struct ComponentVerdict {
  std::vector<int> component;
  double value = 0.0;  // eps_bar^k or the cycle product
  bool pass = false;
  // Small-gain check only: the cyclic error-propagation matrix (unit diagonal,
  // -E_ij on the cycle arcs) with its Schur pivot trace; membership in the
  // monotone class is equivalent to the product condition.
  std::vector<int> cycle_order;
  std::vector<double> pivots;
  bool propagation_matrix_ok = false;
};

struct ComponentCheck {
  bool applicable = true;  // small-gain requires cycle-disjoint vertices
  bool pass = false;       // vacuous pass when no non-trivial components
  std::vector<ComponentVerdict> components;
};

AcyclicVerdict check_acyclic(const Digraph& g);
WeakInterconnectionVerdict check_weak_interconnection(const ErrorFunctionals& f, const Digraph& g);
ComponentCheck check_condensation_weak(const ErrorFunctionals& f, const Condensation& c,
                                       const Digraph& g);
/// Requires has_vertex_shared_by_cycles(g) == false; throws otherwise.
ComponentCheck check_single_cycle_small_gain(const ErrorFunctionals& f, const Condensation& c,
                                             const Digraph& g);

struct Certificate {
  ErrorFunctionals functionals;
  std::optional<PerturbedFunctionals> perturbed;
  AcyclicVerdict acyclic;
  WeakInterconnectionVerdict weak;
  ComponentCheck condensation_weak;
  ComponentCheck small_gain;
  std::string regime;  // first passing regime, or "none"
};

/// Runs all applicable regime checks. `delta > 0` additionally reports the
/// perturbed functionals.
Certificate certify(const GeneratorNetworkModel& reference, const std::vector<Box>& domains,
                    double T, const Eigen::VectorXd& x0, double delta = 0.0);

/// Membership in the sign-patterned class with positive Schur pivots
/// (positive diagonal, nonpositive off-diagonal, every pivot of the
/// elimination sequence positive). The pivot trace is appended if requested;
/// a nonpositive pivot ends the sequence.
bool m_matrix_membership(const Eigen::MatrixXd& A, std::vector<double>* pivots = nullptr);

/// e_max = A^{-1} b for a verified member and b >= 0, the envelope of
/// { e >= 0 : A e <= b }. Throws when A is not a member.
Eigen::VectorXd m_matrix_bound(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

}  // namespace koopnet
