#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "koopnet/box.hpp"

namespace koopnet {

/// Observable dictionary on R^n: scalar functions with gradients. The first n
/// entries are always the coordinate maps x -> x_k, so the leading block of a
/// lifted state recovers the state exactly.
class Dictionary {
 public:
  enum class Kind { Coordinate, ThinPlateRbf, Monomial };

  struct Entry {
    Kind kind;
    int coord = -1;                // Coordinate
    Eigen::VectorXd center;        // ThinPlateRbf
    Eigen::VectorXi exponents;     // Monomial
  };

  Dictionary() = default;
  Dictionary(int input_dim, std::vector<Entry> entries);

  int input_dim() const { return input_dim_; }
  int size() const { return static_cast<int>(entries_.size()); }
  const std::vector<Entry>& entries() const { return entries_; }

  /// z = [phi^1(x), ..., phi^N(x)].
  Eigen::VectorXd lift(const Eigen::VectorXd& x) const;

  /// Columnwise lift of a data matrix (n x m) into (N x m).
  Eigen::MatrixXd lift_batch(const Eigen::MatrixXd& X) const;

  /// Row k is the gradient of phi^k at x (N x n).
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;

  /// Entry k is <grad phi^k(x), w>; w is a vector-field value at x.
  Eigen::VectorXd generator_action(const Eigen::VectorXd& x, const Eigen::VectorXd& w) const;

 private:
  int input_dim_ = 0;
  std::vector<Entry> entries_;
};

/// Coordinate maps followed by thin-plate RBFs phi(x) = r^2 log r with
/// r = ||x - c||_2 and centers drawn uniformly on `box` from `seed`. The value
/// and gradient at a center are 0 (removable singularity).
Dictionary make_thin_plate_rbf_dictionary(int dim, int size, const Box& box, std::uint64_t seed);

/// All monomials x^a with 1 <= |a| <= max_degree in graded lexicographic
/// order, so the degree-1 terms (coordinate maps) come first. No constant
/// term: the generator annihilates constants and the regression would become
/// rank-degenerate in that column.
Dictionary make_monomial_dictionary(int dim, int max_degree);

/// Selector P with x = P z for any dictionary of this module (n x N).
Eigen::MatrixXd coordinate_selector(const Dictionary& d);

}  // namespace koopnet
