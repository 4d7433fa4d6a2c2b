#pragma once

#include <array>
#include <complex>
#include <vector>

#include "mzmesh/autodiff.hpp"

namespace mzmesh::ad {

// Complex value over a generic real scalar (double or Rev).
template <class T>
struct Cx {
  T re{};
  T im{};
};

template <class T>
Cx<T> operator+(const Cx<T>& a, const Cx<T>& b) {
  return {a.re + b.re, a.im + b.im};
}

template <class T>
Cx<T> operator-(const Cx<T>& a, const Cx<T>& b) {
  return {a.re - b.re, a.im - b.im};
}

template <class T>
Cx<T> operator*(const Cx<T>& a, const Cx<T>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

template <class T>
Cx<T> conj(const Cx<T>& a) {
  return {a.re, -a.im};
}

// |z|^2 as a real scalar.
template <class T>
T norm2(const Cx<T>& a) {
  return a.re * a.re + a.im * a.im;
}

// e^{-j theta} = cos(theta) - j sin(theta)
template <class T>
Cx<T> expmj(const T& theta) {
  using std::cos;
  using std::sin;
  return {cos(theta), -sin(theta)};
}

inline std::complex<double> to_std(const Cx<double>& z) { return {z.re, z.im}; }
inline Cx<double> from_std(const std::complex<double>& z) { return {z.real(), z.imag()}; }

// Row-major dense complex matrix over a generic scalar. Sized for the small
// port counts of interferometer meshes; not a general linear-algebra type.
template <class T>
class CxMatrix {
 public:
  CxMatrix() = default;
  explicit CxMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n) {}

  static CxMatrix identity(int n) {
    CxMatrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = Cx<T>{T(1.0), T(0.0)};
    return m;
  }

  int size() const { return n_; }
  Cx<T>& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  const Cx<T>& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

 private:
  int n_ = 0;
  std::vector<Cx<T>> a_;
};

// C = A * B with a fixed k-ascending accumulation order.
template <class T>
CxMatrix<T> operator*(const CxMatrix<T>& a, const CxMatrix<T>& b) {
  const int n = a.size();
  CxMatrix<T> c(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Cx<T> acc = a(i, 0) * b(0, j);
      for (int k = 1; k < n; ++k) acc = acc + a(i, k) * b(k, j);
      c(i, j) = acc;
    }
  }
  return c;
}

// 2x2 block in row-major order [t00 t01; t10 t11].
template <class T>
using Block2 = std::array<Cx<T>, 4>;

// Left-multiplies S by a layer matrix that is the identity except for a 2x2
// block on rows (p, p+1). Pass-through rows are untouched, so no zero-product
// arithmetic is recorded on the tape.
template <class T>
void apply_block_left(CxMatrix<T>& s, int p, const Block2<T>& t) {
  const int n = s.size();
  for (int j = 0; j < n; ++j) {
    const Cx<T> top = s(p, j);
    const Cx<T> bot = s(p + 1, j);
    s(p, j) = t[0] * top + t[1] * bot;
    s(p + 1, j) = t[2] * top + t[3] * bot;
  }
}

}  // namespace mzmesh::ad
