#include "wavetrain/polynomial.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>

namespace wavetrain {

Polynomial Polynomial::monomial(double c, int power) {
  std::vector<double> v(static_cast<size_t>(power) + 1, 0.0);
  v.back() = c;
  return Polynomial(std::move(v));
}

void Polynomial::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
}

double Polynomial::coeff(int power) const {
  if (power < 0 || power > degree()) return 0.0;
  return coeffs_[static_cast<size_t>(power)];
}

double Polynomial::operator()(double x) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

std::complex<double> Polynomial::operator()(std::complex<double> x) const {
  std::complex<double> acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return {};
  std::vector<double> d(coeffs_.size() - 1);
  for (size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = static_cast<double>(i) * coeffs_[i];
  return Polynomial(std::move(d));
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  std::vector<double> r(std::max(coeffs_.size(), o.coeffs_.size()), 0.0);
  for (size_t i = 0; i < coeffs_.size(); ++i) r[i] += coeffs_[i];
  for (size_t i = 0; i < o.coeffs_.size(); ++i) r[i] += o.coeffs_[i];
  return Polynomial(std::move(r));
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + o * -1.0; }

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (is_zero() || o.is_zero()) return {};
  std::vector<double> r(coeffs_.size() + o.coeffs_.size() - 1, 0.0);
  for (size_t i = 0; i < coeffs_.size(); ++i)
    for (size_t j = 0; j < o.coeffs_.size(); ++j) r[i + j] += coeffs_[i] * o.coeffs_[j];
  return Polynomial(std::move(r));
}

Polynomial Polynomial::operator*(double s) const {
  std::vector<double> r = coeffs_;
  for (double& c : r) c *= s;
  return Polynomial(std::move(r));
}

Polynomial Polynomial::pow(int n) const {
  if (n < 0) throw std::invalid_argument("Polynomial::pow: negative exponent");
  Polynomial r{1.0};
  for (int i = 0; i < n; ++i) r = r * *this;
  return r;
}

std::vector<std::complex<double>> Polynomial::roots() const {
  const int n = degree();
  if (n < 1) return {};
  const double lead = coeffs_.back();
  if (n == 1) return {std::complex<double>(-coeffs_[0] / lead, 0.0)};

  // Frobenius companion matrix of the monic polynomial.
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) companion(i, n - 1) = -coeffs_[static_cast<size_t>(i)] / lead;

  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) throw std::runtime_error("companion eigensolve failed");
  std::vector<std::complex<double>> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = solver.eigenvalues()[i];
  return out;
}

double RationalFunction::derivative(double x) const {
  const double d = den(x);
  return (num.derivative()(x) * d - num(x) * den.derivative()(x)) / (d * d);
}

}  // namespace wavetrain
