#include "koopnet/dictionary.hpp"

#include <cmath>
#include <stdexcept>

#include "koopnet/rng.hpp"

namespace koopnet {

namespace {

double thin_plate_value(const Eigen::VectorXd& x, const Eigen::VectorXd& c) {
  const double r2 = (x - c).squaredNorm();
  if (r2 == 0.0) return 0.0;
  return 0.5 * r2 * std::log(r2);  // r^2 log r
}

Eigen::VectorXd thin_plate_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& c) {
  const Eigen::VectorXd d = x - c;
  const double r2 = d.squaredNorm();
  if (r2 == 0.0) return Eigen::VectorXd::Zero(x.size());
  return (std::log(r2) + 1.0) * d;  // (2 log r + 1)(x - c)
}

double monomial_value(const Eigen::VectorXd& x, const Eigen::VectorXi& a) {
  double v = 1.0;
  for (int k = 0; k < a.size(); ++k)
    for (int p = 0; p < a[k]; ++p) v *= x[k];
  return v;
}

}  // namespace

Dictionary::Dictionary(int input_dim, std::vector<Entry> entries)
    : input_dim_(input_dim), entries_(std::move(entries)) {
  if (static_cast<int>(entries_.size()) < input_dim_)
    throw std::invalid_argument("Dictionary: fewer entries than coordinates");
  for (int k = 0; k < input_dim_; ++k)
    if (entries_[k].kind != Kind::Coordinate || entries_[k].coord != k)
      throw std::invalid_argument("Dictionary: leading entries must be the coordinate maps");
}

Eigen::VectorXd Dictionary::lift(const Eigen::VectorXd& x) const {
  if (x.size() != input_dim_) throw std::invalid_argument("Dictionary::lift: dimension mismatch");
  Eigen::VectorXd z(size());
  for (int k = 0; k < size(); ++k) {
    const Entry& e = entries_[k];
    switch (e.kind) {
      case Kind::Coordinate: z[k] = x[e.coord]; break;
      case Kind::ThinPlateRbf: z[k] = thin_plate_value(x, e.center); break;
      case Kind::Monomial: z[k] = monomial_value(x, e.exponents); break;
    }
  }
  return z;
}

Eigen::MatrixXd Dictionary::lift_batch(const Eigen::MatrixXd& X) const {
  if (X.rows() != input_dim_)
    throw std::invalid_argument("Dictionary::lift_batch: dimension mismatch");
  Eigen::MatrixXd Z(size(), X.cols());
  for (Eigen::Index l = 0; l < X.cols(); ++l) Z.col(l) = lift(X.col(l));
  return Z;
}

Eigen::MatrixXd Dictionary::jacobian(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(size(), input_dim_);
  for (int k = 0; k < size(); ++k) {
    const Entry& e = entries_[k];
    switch (e.kind) {
      case Kind::Coordinate:
        J(k, e.coord) = 1.0;
        break;
      case Kind::ThinPlateRbf:
        J.row(k) = thin_plate_gradient(x, e.center).transpose();
        break;
      case Kind::Monomial:
        for (int d = 0; d < input_dim_; ++d) {
          if (e.exponents[d] == 0) continue;
          Eigen::VectorXi a = e.exponents;
          a[d] -= 1;
          J(k, d) = e.exponents[d] * monomial_value(x, a);
        }
        break;
    }
  }
  return J;
}

Eigen::VectorXd Dictionary::generator_action(const Eigen::VectorXd& x,
                                             const Eigen::VectorXd& w) const {
  if (w.size() != input_dim_)
    throw std::invalid_argument("Dictionary::generator_action: dimension mismatch");
  Eigen::VectorXd out(size());
  for (int k = 0; k < size(); ++k) {
    const Entry& e = entries_[k];
    switch (e.kind) {
      case Kind::Coordinate:
        out[k] = w[e.coord];
        break;
      case Kind::ThinPlateRbf:
        out[k] = thin_plate_gradient(x, e.center).dot(w);
        break;
      case Kind::Monomial: {
        double acc = 0.0;
        for (int d = 0; d < input_dim_; ++d) {
          if (e.exponents[d] == 0 || w[d] == 0.0) continue;
          Eigen::VectorXi a = e.exponents;
          a[d] -= 1;
          acc += e.exponents[d] * monomial_value(x, a) * w[d];
        }
        out[k] = acc;
        break;
      }
    }
  }
  return out;
}

Dictionary make_thin_plate_rbf_dictionary(int dim, int size, const Box& box, std::uint64_t seed) {
  if (size <= dim)
    throw std::invalid_argument("make_thin_plate_rbf_dictionary: size must exceed dimension");
  if (box.dim() != dim || !box.valid())
    throw std::invalid_argument("make_thin_plate_rbf_dictionary: bad box");
  std::vector<Dictionary::Entry> entries;
  entries.reserve(size);
  for (int k = 0; k < dim; ++k)
    entries.push_back({Dictionary::Kind::Coordinate, k, {}, {}});
  rng::Stream stream(seed);
  for (int k = dim; k < size; ++k) {
    Eigen::VectorXd c(dim);
    for (int d = 0; d < dim; ++d) c[d] = stream.uniform(box.lo[d], box.hi[d]);
    entries.push_back({Dictionary::Kind::ThinPlateRbf, -1, std::move(c), {}});
  }
  return Dictionary(dim, std::move(entries));
}

Dictionary make_monomial_dictionary(int dim, int max_degree) {
  if (max_degree < 1) throw std::invalid_argument("make_monomial_dictionary: degree must be >= 1");
  std::vector<Dictionary::Entry> entries;
  // Graded lexicographic: degree 1 first, and within a degree the exponent of
  // the first coordinate decreases last, matching x1, x2, x1^2, x1 x2, x2^2...
  std::vector<Eigen::VectorXi> level;
  for (int deg = 1; deg <= max_degree; ++deg) {
    std::vector<Eigen::VectorXi> next;
    Eigen::VectorXi a = Eigen::VectorXi::Zero(dim);
    // enumerate all a with |a| = deg in lexicographically decreasing order of
    // (a_1, ..., a_n)
    struct Rec {
      int dim, deg;
      std::vector<Eigen::VectorXi>& sink;
      void fill(Eigen::VectorXi& a, int pos, int rem) {
        if (pos == dim - 1) {
          a[pos] = rem;
          sink.push_back(a);
          return;
        }
        for (int v = rem; v >= 0; --v) {
          a[pos] = v;
          fill(a, pos + 1, rem - v);
        }
      }
    } rec{dim, deg, next};
    rec.fill(a, 0, deg);
    for (auto& e : next) level.push_back(std::move(e));
  }
  for (auto& a : level) {
    Dictionary::Entry e{Dictionary::Kind::Monomial, -1, {}, std::move(a)};
    entries.push_back(std::move(e));
  }
  // Degree-1 exponents enumerate as e_1, e_2, ... so the coordinate-map
  // invariant holds; store them as explicit coordinate entries.
  for (int k = 0; k < dim; ++k)
    entries[k] = {Dictionary::Kind::Coordinate, k, {}, {}};
  return Dictionary(dim, std::move(entries));
}

Eigen::MatrixXd coordinate_selector(const Dictionary& d) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(d.input_dim(), d.size());
  P.leftCols(d.input_dim()).setIdentity();
  return P;
}

}  // namespace koopnet
