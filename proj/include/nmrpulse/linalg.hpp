// Copyright 2026 The nmrpulse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense complex linear algebra for small square operators (propagators,
// Hamiltonians). Dimensions are runtime values; production uses 8x8.

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace nmrpulse::linalg {

using Complex = std::complex<double>;

/// Square complex matrix stored row-major.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  /// Zero matrix of the given dimension.
  explicit ComplexMatrix(std::size_t dim);
  /// Takes ownership of `entries`; throws DimensionMismatch unless size == dim².
  ComplexMatrix(std::size_t dim, std::vector<Complex> entries);

  static ComplexMatrix identity(std::size_t dim);
  static ComplexMatrix zeros(std::size_t dim) { return ComplexMatrix(dim); }
  static ComplexMatrix diagonal(std::span<const Complex> diag);

  std::size_t dim() const noexcept { return dim_; }

  Complex& operator()(std::size_t row, std::size_t col) noexcept {
    return entries_[row * dim_ + col];
  }
  const Complex& operator()(std::size_t row, std::size_t col) const noexcept {
    return entries_[row * dim_ + col];
  }

  std::span<const Complex> entries() const noexcept { return entries_; }
  std::span<Complex> entries() noexcept { return entries_; }

  ComplexMatrix adjoint() const;
  Complex trace() const noexcept;
  double frobenius_norm() const noexcept;

  /// ‖A − A†‖_F ≤ tol.
  bool is_hermitian(double tol) const;
  /// ‖A†A − I‖_F ≤ tol.
  bool is_unitary(double tol) const;

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator-=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(Complex scale) noexcept;

 private:
  std::size_t dim_ = 0;
  std::vector<Complex> entries_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(Complex scale, ComplexMatrix a);
ComplexMatrix operator*(ComplexMatrix a, Complex scale);

/// Tr(a·b) without forming the product.
Complex trace_of_product(const ComplexMatrix& a, const ComplexMatrix& b);

/// ‖a − b‖_F.
double frobenius_distance(const ComplexMatrix& a, const ComplexMatrix& b);

/// Kronecker product; `a` is the most significant factor, so
/// (a⊗b)[i·n + k, j·n + l] = a[i,j]·b[k,l] with n = b.dim().
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

struct HermitianEigen {
  std::vector<double> eigenvalues;  // ascending
  ComplexMatrix eigenvectors;       // columns
};

/// Eigendecomposition h = V diag(λ) V†. Throws NotHermitian unless
/// h.is_hermitian(1e-10).
HermitianEigen herm_eig(const ComplexMatrix& h);

/// exp(-i·tau·h) for Hermitian h.
ComplexMatrix expm_antiherm(const ComplexMatrix& h, double tau);
ComplexMatrix expm_antiherm(const HermitianEigen& eig, double tau);

/// Directional derivative of X ↦ exp(X) at X = -i·tau·h in direction
/// E = -i·tau·e, via the Daleckii–Krein divided-difference formula in the
/// eigenbasis of h. Both h and e must be Hermitian.
ComplexMatrix expm_frechet(const ComplexMatrix& h, const ComplexMatrix& e, double tau);
ComplexMatrix expm_frechet(const HermitianEigen& eig, const ComplexMatrix& e, double tau);

/// Divided differences of f(λ) = exp(-i·tau·λ) over the spectrum; entry
/// (i, j) multiplies (V†eV)(i, j) in the Fréchet derivative.
ComplexMatrix exp_divided_differences(std::span<const double> eigenvalues, double tau);

namespace pauli {
const ComplexMatrix& identity2();
const ComplexMatrix& sigma_x();
const ComplexMatrix& sigma_y();
const ComplexMatrix& sigma_z();
}  // namespace pauli

}  // namespace nmrpulse::linalg
