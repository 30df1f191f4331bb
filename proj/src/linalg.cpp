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

#include "nmrpulse/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

#include "nmrpulse/errors.hpp"

namespace nmrpulse::linalg {

namespace {

constexpr double kHermitianTol = 1e-10;
constexpr double kDegenerateGap = 1e-12;

void require_same_dim(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch(std::string(what) + ": " + std::to_string(a.dim()) + " vs " +
                            std::to_string(b.dim()));
  }
}

void require_hermitian(const ComplexMatrix& h, const char* what) {
  if (!h.is_hermitian(kHermitianTol)) {
    throw NotHermitian(std::string(what) + ": generator is not Hermitian");
  }
}

// sin(x)/x, continuous at 0.
double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t dim) : dim_(dim), entries_(dim * dim) {}

ComplexMatrix::ComplexMatrix(std::size_t dim, std::vector<Complex> entries)
    : dim_(dim), entries_(std::move(entries)) {
  if (entries_.size() != dim * dim) {
    throw DimensionMismatch("ComplexMatrix: expected " + std::to_string(dim * dim) +
                            " entries, got " + std::to_string(entries_.size()));
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t dim) {
  ComplexMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const Complex> diag) {
  ComplexMatrix m(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = 0; j < dim_; ++j) out(j, i) = std::conj((*this)(i, j));
  }
  return out;
}

Complex ComplexMatrix::trace() const noexcept {
  Complex sum = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) sum += (*this)(i, i);
  return sum;
}

double ComplexMatrix::frobenius_norm() const noexcept {
  double sum = 0.0;
  for (const auto& z : entries_) sum += std::norm(z);
  return std::sqrt(sum);
}

bool ComplexMatrix::is_hermitian(double tol) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = 0; j < dim_; ++j) {
      sum += std::norm((*this)(i, j) - std::conj((*this)(j, i)));
    }
  }
  return std::sqrt(sum) <= tol;
}

bool ComplexMatrix::is_unitary(double tol) const {
  const ComplexMatrix gram = adjoint() * (*this);
  return frobenius_distance(gram, identity(dim_)) <= tol;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
  require_same_dim(*this, other, "operator+=");
  for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] += other.entries_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
  require_same_dim(*this, other, "operator-=");
  for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] -= other.entries_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex scale) noexcept {
  for (auto& z : entries_) z *= scale;
  return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(Complex scale, ComplexMatrix a) { return a *= scale; }
ComplexMatrix operator*(ComplexMatrix a, Complex scale) { return a *= scale; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b, "operator*");
  const std::size_t n = a.dim();
  ComplexMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{}) continue;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

Complex trace_of_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b, "trace_of_product");
  const std::size_t n = a.dim();
  Complex sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) sum += a(i, k) * b(k, i);
  }
  return sum;
}

double frobenius_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b, "frobenius_distance");
  double sum = 0.0;
  const auto ea = a.entries();
  const auto eb = b.entries();
  for (std::size_t k = 0; k < ea.size(); ++k) sum += std::norm(ea[k] - eb[k]);
  return std::sqrt(sum);
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const std::size_t m = a.dim();
  const std::size_t n = b.dim();
  ComplexMatrix out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const Complex aij = a(i, j);
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) out(i * n + k, j * n + l) = aij * b(k, l);
      }
    }
  }
  return out;
}

HermitianEigen herm_eig(const ComplexMatrix& h) {
  require_hermitian(h, "herm_eig");
  const auto n = static_cast<Eigen::Index>(h.dim());
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = h(i, j);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
  HermitianEigen out;
  out.eigenvalues.resize(h.dim());
  out.eigenvectors = ComplexMatrix(h.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    out.eigenvalues[i] = solver.eigenvalues()(i);
    for (Eigen::Index j = 0; j < n; ++j) out.eigenvectors(i, j) = solver.eigenvectors()(i, j);
  }
  return out;
}

ComplexMatrix expm_antiherm(const ComplexMatrix& h, double tau) {
  return expm_antiherm(herm_eig(h), tau);
}

ComplexMatrix expm_antiherm(const HermitianEigen& eig, double tau) {
  const ComplexMatrix& v = eig.eigenvectors;
  const std::size_t n = v.dim();
  // (V·diag(phase))·V†
  ComplexMatrix scaled(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Complex phase = std::polar(1.0, -tau * eig.eigenvalues[j]);
    for (std::size_t i = 0; i < n; ++i) scaled(i, j) = v(i, j) * phase;
  }
  ComplexMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const Complex sik = scaled(i, k);
      for (std::size_t j = 0; j < n; ++j) out(i, j) += sik * std::conj(v(j, k));
    }
  }
  return out;
}

ComplexMatrix exp_divided_differences(std::span<const double> eigenvalues, double tau) {
  // (f(λi) − f(λj))/(λi − λj) for f(λ) = e^{-iτλ}, written as
  // −iτ·e^{-iτ(λi+λj)/2}·sinc(τ(λi−λj)/2) to avoid cancellation.
  const std::size_t n = eigenvalues.size();
  const Complex minus_i_tau{0.0, -tau};
  ComplexMatrix dd(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double gap = eigenvalues[i] - eigenvalues[j];
      if (std::abs(gap) < kDegenerateGap) {
        dd(i, j) = minus_i_tau * std::polar(1.0, -tau * eigenvalues[i]);
      } else {
        const double mid = 0.5 * (eigenvalues[i] + eigenvalues[j]);
        dd(i, j) = minus_i_tau * std::polar(1.0, -tau * mid) * sinc(0.5 * tau * gap);
      }
    }
  }
  return dd;
}

ComplexMatrix expm_frechet(const ComplexMatrix& h, const ComplexMatrix& e, double tau) {
  require_hermitian(e, "expm_frechet");
  return expm_frechet(herm_eig(h), e, tau);
}

ComplexMatrix expm_frechet(const HermitianEigen& eig, const ComplexMatrix& e, double tau) {
  const ComplexMatrix& v = eig.eigenvectors;
  require_same_dim(v, e, "expm_frechet");
  const ComplexMatrix vh = v.adjoint();
  ComplexMatrix inner = vh * e * v;
  const ComplexMatrix dd = exp_divided_differences(eig.eigenvalues, tau);
  auto in = inner.entries();
  const auto w = dd.entries();
  for (std::size_t k = 0; k < in.size(); ++k) in[k] *= w[k];
  return v * inner * vh;
}

namespace pauli {

const ComplexMatrix& identity2() {
  static const ComplexMatrix m = ComplexMatrix::identity(2);
  return m;
}

const ComplexMatrix& sigma_x() {
  static const ComplexMatrix m(2, {0.0, 1.0, 1.0, 0.0});
  return m;
}

const ComplexMatrix& sigma_y() {
  static const ComplexMatrix m(2, {0.0, Complex{0.0, -1.0}, Complex{0.0, 1.0}, 0.0});
  return m;
}

const ComplexMatrix& sigma_z() {
  static const ComplexMatrix m(2, {1.0, 0.0, 0.0, -1.0});
  return m;
}

}  // namespace pauli

}  // namespace nmrpulse::linalg
