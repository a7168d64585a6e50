#include "epw/torus_field.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "epw/errors.hpp"
#include "format.hpp"

namespace epw {

using detail::num;

TorusGrid::TorusGrid(double L, int M) : L_(L), M_(M), h_(L / M) {
  if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("torus period must be positive, got L=" + num(L));
  if (M < 32 || M % 2 != 0) throw DomainError("grid size must be even and >= 32, got M=" + std::to_string(M));
}

Eigen::VectorXd TorusGrid::nodes() const {
  Eigen::VectorXd x(M_);
  for (int j = 0; j < M_; ++j) x[j] = this->x(j);
  return x;
}

double TorusGrid::symbol(int k) const {
  return 2.0 / (h_ * h_) * (1.0 - std::cos(2.0 * std::numbers::pi * k * h_ / L_));
}

EvenField::EvenField(TorusGrid g, Eigen::VectorXd v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.M()) {
    throw DomainError("field length " + std::to_string(values.size()) + " does not match grid size " +
                      std::to_string(grid.M()));
  }
}

EvenField EvenField::constant(const TorusGrid& g, double value) {
  return EvenField(g, Eigen::VectorXd::Constant(g.M(), value));
}

double EvenField::evenness_defect() const {
  double defect = 0.0;
  for (int j = 0; j < grid.M(); ++j) defect = std::max(defect, std::abs(values[j] - values[grid.mirror(j)]));
  return defect;
}

EvenField second_derivative(const EvenField& u) {
  return EvenField(u.grid, periodic_second_difference(u.values, u.grid.h()));
}

Eigen::SparseMatrix<double> second_difference_matrix(const TorusGrid& g) {
  const int m = g.M();
  const double inv_h2 = 1.0 / (g.h() * g.h());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(3 * m));
  for (int j = 0; j < m; ++j) {
    t.emplace_back(j, (j + m - 1) % m, inv_h2);
    t.emplace_back(j, j, -2.0 * inv_h2);
    t.emplace_back(j, (j + 1) % m, inv_h2);
  }
  Eigen::SparseMatrix<double> d2(m, m);
  d2.setFromTriplets(t.begin(), t.end());
  return d2;
}

Eigen::VectorXd cosine_mode(const TorusGrid& g, int k) {
  Eigen::VectorXd v(g.M());
  const double w = 2.0 * std::numbers::pi * k / g.L();
  for (int j = 0; j < g.M(); ++j) v[j] = std::cos(w * g.x(j));
  return v;
}

double cosine_coefficient(const TorusGrid& g, const Eigen::Ref<const Eigen::VectorXd>& u, int k) {
  if (k < 0 || k > g.M() / 2) {
    throw IndexError("cosine mode " + std::to_string(k) + " outside 0.." + std::to_string(g.M() / 2));
  }
  if (k == 0) return u.sum() * g.h() / g.L();
  // The Nyquist mode has discrete norm L rather than L/2.
  const double scale = k == g.M() / 2 ? 1.0 / g.L() : 2.0 / g.L();
  return scale * u.dot(cosine_mode(g, k)) * g.h();
}

double cosine_coefficient(const EvenField& u, int k) { return cosine_coefficient(u.grid, u.values, k); }

EvenField cosine_synthesis(const TorusGrid& g, const std::vector<double>& coeffs) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(g.M());
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (coeffs[k] != 0.0) v += coeffs[k] * cosine_mode(g, static_cast<int>(k));
  }
  return EvenField(g, std::move(v));
}

Eigen::VectorXd even_part(const TorusGrid& g, const Eigen::Ref<const Eigen::VectorXd>& u) {
  Eigen::VectorXd out(g.M());
  for (int j = 0; j < g.M(); ++j) out[j] = 0.5 * (u[j] + u[g.mirror(j)]);
  return out;
}

EvenField enforce_evenness(const EvenField& u) { return EvenField(u.grid, even_part(u.grid, u.values)); }

void write_columns_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                       const std::vector<Eigen::VectorXd>& columns) {
  if (header.size() != columns.size() || columns.empty()) {
    throw ContractError("CSV header/column count mismatch for " + path.string());
  }
  const Eigen::Index rows = columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != rows) throw ContractError("CSV columns differ in length for " + path.string());
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << num(columns[i][r]);
    out << '\n';
  }
}

void write_field_csv(const std::filesystem::path& path, const EvenField& u, const char* value_name) {
  write_columns_csv(path, {"x", value_name}, {u.grid.nodes(), u.values});
}

EvenField read_field_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open field CSV " + path.string());
  std::vector<double> xs, vs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',')) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": expected two columns");
    }
    char* end = nullptr;
    const double x = std::strtod(a.c_str(), &end);
    if (end == a.c_str()) {
      if (line_no == 1) continue;  // header
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": bad x value '" + a + "'");
    }
    const double v = std::strtod(b.c_str(), &end);
    if (end == b.c_str()) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": bad value '" + b + "'");
    }
    xs.push_back(x);
    vs.push_back(v);
  }
  if (xs.size() < 2) throw ValidationError(path.string() + ": too few rows");
  const int m = static_cast<int>(xs.size());
  const double L = -2.0 * xs.front();
  TorusGrid g(L, m);
  for (int j = 0; j < m; ++j) {
    if (std::abs(xs[static_cast<std::size_t>(j)] - g.x(j)) > 1e-9 * L) {
      throw ValidationError(path.string() + ": x column is not the uniform grid -L/2 + j h (row " +
                            std::to_string(j) + ", x=" + num(xs[static_cast<std::size_t>(j)]) + ")");
    }
  }
  return EvenField(g, Eigen::Map<Eigen::VectorXd>(vs.data(), m));
}

}  // namespace epw
