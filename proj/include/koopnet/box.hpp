#pragma once

#include <Eigen/Dense>
#include <vector>

namespace koopnet {

/// Axis-aligned box [lo, hi] in R^n. Zero-width sides are allowed; negative
/// widths are rejected where boxes are consumed.
struct Box {
  Eigen::VectorXd lo, hi;

  Box() = default;
  Box(Eigen::VectorXd lo_, Eigen::VectorXd hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {}

  /// Centered cube [-halfwidth, halfwidth]^dim.
  static Box centered(int dim, double halfwidth) {
    return Box(Eigen::VectorXd::Constant(dim, -halfwidth),
               Eigen::VectorXd::Constant(dim, halfwidth));
  }

  int dim() const { return static_cast<int>(lo.size()); }

  bool valid() const { return lo.size() == hi.size() && (hi - lo).minCoeff() >= 0.0; }

  bool contains(const Eigen::VectorXd& x) const {
    return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
  }

  /// max_{x in box} ||x||_1, attained at a corner.
  double max_one_norm() const {
    return lo.cwiseAbs().cwiseMax(hi.cwiseAbs()).sum();
  }

  /// All 2^dim corner points (dim is small everywhere this is used).
  std::vector<Eigen::VectorXd> corners() const {
    const int n = dim();
    std::vector<Eigen::VectorXd> out;
    out.reserve(std::size_t{1} << n);
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      Eigen::VectorXd c(n);
      for (int k = 0; k < n; ++k) c[k] = (mask >> k) & 1 ? hi[k] : lo[k];
      out.push_back(std::move(c));
    }
    return out;
  }

  /// Concatenation along coordinates.
  static Box product(const std::vector<Box>& parts) {
    int n = 0;
    for (const auto& b : parts) n += b.dim();
    Box out{Eigen::VectorXd(n), Eigen::VectorXd(n)};
    int at = 0;
    for (const auto& b : parts) {
      out.lo.segment(at, b.dim()) = b.lo;
      out.hi.segment(at, b.dim()) = b.hi;
      at += b.dim();
    }
    return out;
  }
};

}  // namespace koopnet
