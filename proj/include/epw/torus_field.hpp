#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <filesystem>
#include <string>
#include <vector>

namespace epw {

/// Uniform grid on the torus R/LZ with nodes x_j = -L/2 + j h, j = 0..M-1.
/// Node 0 is the trough position -L/2 and node M/2 is the crest x = 0.
class TorusGrid {
 public:
  TorusGrid(double L, int M);

  double L() const { return L_; }
  int M() const { return M_; }
  double h() const { return h_; }
  double x(int j) const { return -0.5 * L_ + j * h_; }
  Eigen::VectorXd nodes() const;

  int crest() const { return M_ / 2; }
  int trough() const { return 0; }
  /// Index of the node at -x_j.
  int mirror(int j) const { return (M_ - j) % M_; }

  /// Symbol of -D2 on cos(2 pi k x / L): (2/h^2)(1 - cos(2 pi k h / L)).
  double symbol(int k) const;

  bool operator==(const TorusGrid& other) const { return L_ == other.L_ && M_ == other.M_; }

 private:
  double L_;
  int M_;
  double h_;
};

/// Real field on a TorusGrid, meant to be even about x = 0.
struct EvenField {
  TorusGrid grid;
  Eigen::VectorXd values;

  EvenField(TorusGrid g, Eigen::VectorXd v);
  static EvenField constant(const TorusGrid& g, double value);
  /// Samples fn at every node.
  template <class Fn>
  static EvenField sample(const TorusGrid& g, Fn&& fn) {
    Eigen::VectorXd v(g.M());
    for (int j = 0; j < g.M(); ++j) v[j] = fn(g.x(j));
    return EvenField(g, std::move(v));
  }

  double operator[](int j) const { return values[j]; }
  double crest_value() const { return values[grid.crest()]; }
  double trough_value() const { return values[grid.trough()]; }

  /// max_k |u(M/2+k) - u(M/2-k)|
  double evenness_defect() const;
};

/// Periodic centered second difference (u_{j-1} - 2u_j + u_{j+1}) / h^2 of
/// any Eigen vector expression.
template <class Derived>
Eigen::VectorXd periodic_second_difference(const Eigen::MatrixBase<Derived>& u, double h) {
  const Eigen::Index m = u.size();
  Eigen::VectorXd out(m);
  const double inv_h2 = 1.0 / (h * h);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::Index jm = j == 0 ? m - 1 : j - 1;
    const Eigen::Index jp = j == m - 1 ? 0 : j + 1;
    out[j] = (u[jm] - 2.0 * u[j] + u[jp]) * inv_h2;
  }
  return out;
}

/// Grid inner product sum_j u_j v_j h.
template <class A, class B>
double grid_dot(const Eigen::MatrixBase<A>& u, const Eigen::MatrixBase<B>& v, double h) {
  return u.dot(v) * h;
}

EvenField second_derivative(const EvenField& u);

/// Sparse periodic second-difference matrix D2 (cyclic tridiagonal).
Eigen::SparseMatrix<double> second_difference_matrix(const TorusGrid& g);

/// (2/L) sum_j u_j cos(2 pi k x_j / L) h for k >= 1, (1/L) sum_j u_j h for k = 0.
double cosine_coefficient(const EvenField& u, int k);
double cosine_coefficient(const TorusGrid& g, const Eigen::Ref<const Eigen::VectorXd>& u, int k);

/// sum_k coeffs[k] cos(2 pi k x / L)
EvenField cosine_synthesis(const TorusGrid& g, const std::vector<double>& coeffs);

/// cos(2 pi k x / L) on the grid.
Eigen::VectorXd cosine_mode(const TorusGrid& g, int k);

/// Even part about x = 0; idempotent.
EvenField enforce_evenness(const EvenField& u);
Eigen::VectorXd even_part(const TorusGrid& g, const Eigen::Ref<const Eigen::VectorXd>& u);

/// Two-column (x, value) CSV with a header row and 17 significant digits.
void write_field_csv(const std::filesystem::path& path, const EvenField& u,
                     const char* value_name = "value");
/// Column CSV with a header row and 17 significant digits; all columns must
/// have the same length.
void write_columns_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                       const std::vector<Eigen::VectorXd>& columns);

/// Reads a two-column (x, value) CSV written by write_field_csv. The grid is
/// recovered from the x column, which must be uniform and start at -L/2.
EvenField read_field_csv(const std::filesystem::path& path);

}  // namespace epw
