// Scalar reference kernels. These define the semantics the vector variants
// are tested against.

#include "qmeta/simd/kernels.hpp"

namespace qmeta::simd {
namespace {

void mul_phase(cplx* a, const cplx* phase, std::size_t len, bool conjugate) {
  if (conjugate) {
    for (std::size_t i = 0; i < len; ++i) a[i] *= std::conj(phase[i]);
  } else {
    for (std::size_t i = 0; i < len; ++i) a[i] *= phase[i];
  }
}

void rx_all(cplx* a, int n, double c, double s) {
  const std::size_t dim = std::size_t{1} << n;
  const cplx mis(0.0, -s);
  for (int q = 0; q < n; ++q) {
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
      for (std::size_t i = base; i < base + stride; ++i) {
        const cplx x = a[i];
        const cplx y = a[i + stride];
        a[i] = c * x + mis * y;
        a[i + stride] = c * y + mis * x;
      }
    }
  }
}

double expect_diag(const cplx* a, const double* d, std::size_t len) {
  double s = 0.0;
  for (std::size_t i = 0; i < len; ++i) s += std::norm(a[i]) * d[i];
  return s;
}

void apply_diag(const cplx* a, const double* d, cplx* out, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) out[i] = d[i] * a[i];
}

double im_inner_diag(const cplx* l, const double* d, const cplx* psi, std::size_t len) {
  double s = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    // Im(conj(l) * psi) = l.re * psi.im - l.im * psi.re
    s += d[i] * (l[i].real() * psi[i].imag() - l[i].imag() * psi[i].real());
  }
  return s;
}

double im_inner_xsum(const cplx* l, const cplx* psi, int n) {
  const std::size_t dim = std::size_t{1} << n;
  double s = 0.0;
  for (int q = 0; q < n; ++q) {
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
      for (std::size_t i = base; i < base + stride; ++i) {
        const std::size_t j = i + stride;
        s += l[i].real() * psi[j].imag() - l[i].imag() * psi[j].real();
        s += l[j].real() * psi[i].imag() - l[j].imag() * psi[i].real();
      }
    }
  }
  return s;
}

double norm2(const cplx* a, std::size_t len) {
  double s = 0.0;
  for (std::size_t i = 0; i < len; ++i) s += std::norm(a[i]);
  return s;
}

void probabilities(const cplx* a, double* p, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) p[i] = std::norm(a[i]);
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar",      mul_phase,     rx_all, expect_diag, apply_diag,
                                 im_inner_diag, im_inner_xsum, norm2,  probabilities};
  return table;
}

}  // namespace qmeta::simd
