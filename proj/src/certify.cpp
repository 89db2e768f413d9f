#include "koopnet/certify.hpp"

#include <cmath>
#include <stdexcept>

#include "koopnet/regression.hpp"

namespace koopnet {

ErrorFunctionals compute_functionals(const GeneratorNetworkModel& reference,
                                     const std::vector<Box>& domains, double T,
                                     const Eigen::VectorXd& x0) {
  const int s = reference.graph.num_vertices();
  if (static_cast<int>(domains.size()) != s)
    throw std::invalid_argument("compute_functionals: one domain box per subsystem required");

  ErrorFunctionals f;
  f.T = T;
  f.alpha.resize(s);
  f.L0_norm.resize(s);
  f.rho.resize(s);
  f.nu.resize(s);
  f.P_norm.resize(s);
  f.z0_norm.resize(s);
  f.z0_norm_worst.resize(s);
  f.eta.resize(s);

  for (int i = 0; i < s; ++i) f.alpha[i] = domains[i].max_one_norm();

  int at = 0;
  for (int i = 0; i < s; ++i) {
    const GeneratorFamily& fam = reference.families[i];
    const Dictionary& dict = reference.dicts[i];
    f.L0_norm[i] = induced_one_norm(fam.L0);

    // rho_i = ||L0||(1 + sum_j alpha_j) + sum_j alpha_j sum_r ||L^{e_j^r}||,
    // summed over in-neighbours; nu_i = 2 rho_i at zero estimation error.
    double alpha_sum = 0.0, weighted_dir_norms = 0.0;
    for (const auto& [j, dirs] : fam.L_dir) {
      alpha_sum += f.alpha[j];
      double dir_norm_sum = 0.0, gap_sum = 0.0;
      for (const auto& L : dirs) {
        dir_norm_sum += induced_one_norm(L);
        gap_sum += induced_one_norm(L - fam.L0);
      }
      weighted_dir_norms += f.alpha[j] * dir_norm_sum;
      f.coupling_gap[{i, j}] = gap_sum;
    }
    f.rho[i] = f.L0_norm[i] * (1.0 + alpha_sum) + weighted_dir_norms;
    f.nu[i] = 2.0 * f.rho[i];

    f.P_norm[i] = induced_one_norm(coordinate_selector(dict));
    f.z0_norm[i] = dict.lift(x0.segment(at, reference.dims[i])).lpNorm<1>();
    double worst = 0.0;
    for (const auto& corner : domains[i].corners())
      worst = std::max(worst, dict.lift(corner).lpNorm<1>());
    f.z0_norm_worst[i] = worst;
    f.eta[i] = f.P_norm[i] * f.z0_norm[i] * T;
    at += reference.dims[i];
  }

  // E_ij(0,0) = ||P_i|| ||z_i(0)|| T exp(nu_i T) sum_r ||L^{e_j^r} - L0||.
  for (const auto& [key, gap] : f.coupling_gap) {
    const int i = key.first;
    f.E_zero[key] = f.eta[i] * std::exp(f.nu[i] * T) * gap;
  }
  return f;
}

PerturbedFunctionals compute_functionals_at(const GeneratorNetworkModel& reference,
                                            const ErrorFunctionals& f, double delta) {
  const int s = reference.graph.num_vertices();
  PerturbedFunctionals out;
  out.delta = delta;
  out.E_i.resize(s);
  for (int i = 0; i < s; ++i) {
    const GeneratorFamily& fam = reference.families[i];
    double alpha_sum = 0.0, weighted_delta = 0.0, E_V = 0.0;
    for (const auto& [j, dirs] : fam.L_dir) {
      alpha_sum += f.alpha[j];
      weighted_delta += f.alpha[j] * delta * static_cast<double>(dirs.size());
      double dir_norm_sum = 0.0;
      for (const auto& L : dirs) dir_norm_sum += induced_one_norm(L);
      E_V += f.alpha[j] * (delta * static_cast<double>(dirs.size()) + dir_norm_sum);
    }
    E_V += (delta + f.L0_norm[i]) * (1.0 + alpha_sum);
    const double E_delta_i = (1.0 + alpha_sum) * delta + weighted_delta;
    const double growth = std::exp((f.rho[i] + E_V) * f.T);
    out.E_i[i] = f.eta[i] * growth * E_delta_i;
    for (const auto& [j, dirs] : fam.L_dir) {
      const double E_delta_ij =
          static_cast<double>(dirs.size()) * 2.0 * delta + f.coupling_gap.at({i, j});
      out.E_ij[{i, j}] = f.eta[i] * growth * E_delta_ij;
    }
  }
  return out;
}

AcyclicVerdict check_acyclic(const Digraph& g) {
  AcyclicVerdict v;
  if (auto order = topological_sort(g)) {
    v.pass = true;
    v.order = *order;
  }
  return v;
}

WeakInterconnectionVerdict check_weak_interconnection(const ErrorFunctionals& f,
                                                      const Digraph& g) {
  WeakInterconnectionVerdict v;
  v.per_vertex_sums.assign(g.num_vertices(), 0.0);
  for (int i = 0; i < g.num_vertices(); ++i) {
    double sum = 0.0;
    for (int j : g.out_neighbours(i)) sum += f.E_zero.at({j, i});
    v.per_vertex_sums[i] = sum;
    v.eps_bar = std::max(v.eps_bar, sum);
  }
  v.pass = v.eps_bar < 1.0;
  return v;
}

ComponentCheck check_condensation_weak(const ErrorFunctionals& f, const Condensation& c,
                                       const Digraph& g) {
  ComponentCheck check;
  check.pass = true;
  for (const auto& comp : c.components) {
    if (comp.size() < 2) continue;  // trivial components pass vacuously
    std::vector<bool> member(g.num_vertices(), false);
    for (int v : comp) member[v] = true;
    ComponentVerdict verdict;
    verdict.component = comp;
    for (int i : comp) {
      double sum = 0.0;
      for (int j : g.out_neighbours(i))
        if (member[j]) sum += f.E_zero.at({j, i});
      verdict.value = std::max(verdict.value, sum);
    }
    verdict.pass = verdict.value < 1.0;
    check.pass = check.pass && verdict.pass;
    check.components.push_back(std::move(verdict));
  }
  return check;
}

ComponentCheck check_single_cycle_small_gain(const ErrorFunctionals& f, const Condensation& c,
                                             const Digraph& g) {
  if (has_vertex_shared_by_cycles(g))
    throw std::invalid_argument(
        "check_single_cycle_small_gain: a vertex is shared by two cycles; "
        "the product condition does not apply");
  ComponentCheck check;
  check.pass = true;
  for (const auto& comp : c.components) {
    if (comp.size() < 2) continue;
    std::vector<bool> member(g.num_vertices(), false);
    for (int v : comp) member[v] = true;
    ComponentVerdict verdict;
    verdict.component = comp;
    verdict.value = 1.0;
    for (int i : comp)
      for (int j : g.in_neighbours(i))
        if (member[j]) verdict.value *= f.E_zero.at({i, j});
    verdict.pass = verdict.value < 1.0;

    // Rearrange the (single) cycle along its arcs, starting at the smallest
    // vertex, and assemble the error-propagation matrix of the cyclic bound.
    int v = comp.front();
    do {
      verdict.cycle_order.push_back(v);
      for (int w : g.out_neighbours(v))
        if (member[w]) {
          v = w;
          break;
        }
    } while (v != comp.front());
    const int len = static_cast<int>(verdict.cycle_order.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(len, len);
    for (int k = 0; k < len; ++k) {
      const int head = verdict.cycle_order[k];
      const int tail = verdict.cycle_order[(k + len - 1) % len];
      A(k, (k + len - 1) % len) = -f.E_zero.at({head, tail});
    }
    verdict.propagation_matrix_ok = m_matrix_membership(A, &verdict.pivots);

    check.pass = check.pass && verdict.pass;
    check.components.push_back(std::move(verdict));
  }
  return check;
}

Certificate certify(const GeneratorNetworkModel& reference, const std::vector<Box>& domains,
                    double T, const Eigen::VectorXd& x0, double delta) {
  Certificate cert;
  cert.functionals = compute_functionals(reference, domains, T, x0);
  if (delta > 0.0)
    cert.perturbed = compute_functionals_at(reference, cert.functionals, delta);

  const Digraph& g = reference.graph;
  const Condensation cond = condensation(g);
  cert.acyclic = check_acyclic(g);
  cert.weak = check_weak_interconnection(cert.functionals, g);
  cert.condensation_weak = check_condensation_weak(cert.functionals, cond, g);
  if (!has_vertex_shared_by_cycles(g)) {
    cert.small_gain = check_single_cycle_small_gain(cert.functionals, cond, g);
  } else {
    cert.small_gain.applicable = false;
    cert.small_gain.pass = false;
  }

  if (cert.acyclic.pass)
    cert.regime = "acyclic";
  else if (cert.weak.pass)
    cert.regime = "weakly_interconnected";
  else if (cert.condensation_weak.pass)
    cert.regime = "condensation_weak";
  else if (cert.small_gain.applicable && cert.small_gain.pass)
    cert.regime = "single_cycle_small_gain";
  else
    cert.regime = "none";
  return cert;
}

bool m_matrix_membership(const Eigen::MatrixXd& A, std::vector<double>* pivots) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n) throw std::invalid_argument("m_matrix_membership: matrix must be square");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j && A(i, i) <= 0.0) return false;
      if (i != j && A(i, j) > 0.0) return false;
    }
  // Schur-complement pivot sequence U^k; all leading pivots must be positive.
  Eigen::MatrixXd U = A;
  if (pivots) pivots->push_back(U(0, 0));
  for (Eigen::Index k = 1; k < n; ++k) {
    const double pivot = U(0, 0);
    if (pivot <= 0.0) return false;
    Eigen::MatrixXd next = U.bottomRightCorner(U.rows() - 1, U.cols() - 1) -
                           U.bottomLeftCorner(U.rows() - 1, 1) * (1.0 / pivot) *
                               U.topRightCorner(1, U.cols() - 1);
    U = std::move(next);
    if (pivots) pivots->push_back(U(0, 0));
    if (U(0, 0) <= 0.0) return false;
  }
  return true;
}

Eigen::VectorXd m_matrix_bound(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  if (!m_matrix_membership(A))
    throw std::invalid_argument("m_matrix_bound: matrix is not in the admissible class");
  if ((b.array() < 0.0).any())
    throw std::invalid_argument("m_matrix_bound: b must be entrywise nonnegative");
  return A.partialPivLu().solve(b);
}

}  // namespace koopnet
