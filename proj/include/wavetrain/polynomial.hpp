#ifndef WAVETRAIN_POLYNOMIAL_HPP
#define WAVETRAIN_POLYNOMIAL_HPP

#include <complex>
#include <initializer_list>
#include <vector>

namespace wavetrain {

/// Dense real polynomial, coefficients in ascending powers.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(std::initializer_list<double> ascending) : coeffs_(ascending) { trim(); }
  explicit Polynomial(std::vector<double> ascending) : coeffs_(std::move(ascending)) { trim(); }

  static Polynomial constant(double c) { return Polynomial({c}); }
  static Polynomial monomial(double c, int power);

  /// Degree of the trimmed polynomial; -1 for the zero polynomial.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  const std::vector<double>& coeffs() const { return coeffs_; }
  double coeff(int power) const;

  double operator()(double x) const;
  std::complex<double> operator()(std::complex<double> x) const;
  Polynomial derivative() const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double s) const;
  Polynomial pow(int n) const;

  /// All complex roots from the eigenvalues of the companion matrix.
  std::vector<std::complex<double>> roots() const;

 private:
  void trim();
  std::vector<double> coeffs_;
};

/// num(x) / den(x) with an analytic derivative.
struct RationalFunction {
  Polynomial num{1.0};
  Polynomial den{1.0};

  double operator()(double x) const { return num(x) / den(x); }
  double derivative(double x) const;
};

}  // namespace wavetrain

#endif  // WAVETRAIN_POLYNOMIAL_HPP
