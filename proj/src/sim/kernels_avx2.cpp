// AVX2 + FMA kernels. This translation unit is compiled with -mavx2 -mfma
// and must only be entered after a runtime CPU check.
//
// A __m256d holds two interleaved complex doubles: [re0, im0, re1, im1].

#include <immintrin.h>

#include "qmeta/simd/kernels.hpp"

namespace qmeta::simd {
namespace {

inline double* dptr(cplx* p) { return reinterpret_cast<double*>(p); }
inline const double* dptr(const cplx* p) { return reinterpret_cast<const double*>(p); }

// -i * v  ->  [v.im, -v.re]
inline __m256d mul_neg_i(__m256d v) {
  const __m256d sign = _mm256_setr_pd(0.0, -0.0, 0.0, -0.0);
  return _mm256_xor_pd(_mm256_permute_pd(v, 0x5), sign);
}

// [d0, d1] -> [d0, d0, d1, d1]
inline __m256d broadcast_pairs(const double* d) {
  return _mm256_permute4x64_pd(_mm256_castpd128_pd256(_mm_loadu_pd(d)), 0x50);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// even lanes minus odd lanes
inline double alt_sum(__m256d v) {
  alignas(32) double t[4];
  _mm256_store_pd(t, v);
  return (t[0] - t[1]) + (t[2] - t[3]);
}

void mul_phase(cplx* a, const cplx* phase, std::size_t len, bool conjugate) {
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    const __m256d x = _mm256_loadu_pd(dptr(a + i));
    const __m256d p = _mm256_loadu_pd(dptr(phase + i));
    const __m256d pr = _mm256_movedup_pd(p);
    const __m256d pi = _mm256_permute_pd(p, 0xF);
    const __m256d xs = _mm256_mul_pd(_mm256_permute_pd(x, 0x5), pi);
    const __m256d r = conjugate ? _mm256_fmsubadd_pd(x, pr, xs) : _mm256_fmaddsub_pd(x, pr, xs);
    _mm256_storeu_pd(dptr(a + i), r);
  }
  for (; i < len; ++i) a[i] *= conjugate ? std::conj(phase[i]) : phase[i];
}

void rx_all(cplx* a, int n, double c, double s) {
  const std::size_t dim = std::size_t{1} << n;
  const __m256d cv = _mm256_set1_pd(c);
  const __m256d sv = _mm256_set1_pd(s);
  if (n >= 1) {
    // qubit 0: both members of each pair sit in one register
    for (std::size_t i = 0; i < dim; i += 2) {
      const __m256d v = _mm256_loadu_pd(dptr(a + i));
      const __m256d sw = _mm256_permute2f128_pd(v, v, 0x01);
      _mm256_storeu_pd(dptr(a + i), _mm256_fmadd_pd(sv, mul_neg_i(sw), _mm256_mul_pd(cv, v)));
    }
  }
  for (int q = 1; q < n; ++q) {
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
      for (std::size_t i = base; i < base + stride; i += 2) {
        const __m256d x = _mm256_loadu_pd(dptr(a + i));
        const __m256d y = _mm256_loadu_pd(dptr(a + i + stride));
        _mm256_storeu_pd(dptr(a + i), _mm256_fmadd_pd(sv, mul_neg_i(y), _mm256_mul_pd(cv, x)));
        _mm256_storeu_pd(dptr(a + i + stride), _mm256_fmadd_pd(sv, mul_neg_i(x), _mm256_mul_pd(cv, y)));
      }
    }
  }
}

double expect_diag(const cplx* a, const double* d, std::size_t len) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    const __m256d x = _mm256_loadu_pd(dptr(a + i));
    acc = _mm256_fmadd_pd(_mm256_mul_pd(x, x), broadcast_pairs(d + i), acc);
  }
  double s = hsum(acc);
  for (; i < len; ++i) s += std::norm(a[i]) * d[i];
  return s;
}

void apply_diag(const cplx* a, const double* d, cplx* out, std::size_t len) {
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2)
    _mm256_storeu_pd(dptr(out + i), _mm256_mul_pd(_mm256_loadu_pd(dptr(a + i)), broadcast_pairs(d + i)));
  for (; i < len; ++i) out[i] = d[i] * a[i];
}

double im_inner_diag(const cplx* l, const double* d, const cplx* psi, std::size_t len) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    const __m256d lv = _mm256_loadu_pd(dptr(l + i));
    const __m256d pv = _mm256_permute_pd(_mm256_loadu_pd(dptr(psi + i)), 0x5);
    acc = _mm256_fmadd_pd(_mm256_mul_pd(lv, pv), broadcast_pairs(d + i), acc);
  }
  double s = alt_sum(acc);
  for (; i < len; ++i) s += d[i] * (l[i].real() * psi[i].imag() - l[i].imag() * psi[i].real());
  return s;
}

double im_inner_xsum(const cplx* l, const cplx* psi, int n) {
  const std::size_t dim = std::size_t{1} << n;
  __m256d acc = _mm256_setzero_pd();
  if (n >= 1) {
    for (std::size_t i = 0; i < dim; i += 2) {
      const __m256d lv = _mm256_loadu_pd(dptr(l + i));
      const __m256d pv = _mm256_loadu_pd(dptr(psi + i));
      const __m256d px = _mm256_permute_pd(_mm256_permute2f128_pd(pv, pv, 0x01), 0x5);
      acc = _mm256_fmadd_pd(lv, px, acc);
    }
  }
  for (int q = 1; q < n; ++q) {
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
      for (std::size_t i = base; i < base + stride; i += 2) {
        const __m256d li = _mm256_loadu_pd(dptr(l + i));
        const __m256d lj = _mm256_loadu_pd(dptr(l + i + stride));
        const __m256d pi = _mm256_permute_pd(_mm256_loadu_pd(dptr(psi + i)), 0x5);
        const __m256d pj = _mm256_permute_pd(_mm256_loadu_pd(dptr(psi + i + stride)), 0x5);
        acc = _mm256_fmadd_pd(li, pj, acc);
        acc = _mm256_fmadd_pd(lj, pi, acc);
      }
    }
  }
  return alt_sum(acc);
}

double norm2(const cplx* a, std::size_t len) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    const __m256d x = _mm256_loadu_pd(dptr(a + i));
    acc = _mm256_fmadd_pd(x, x, acc);
  }
  double s = hsum(acc);
  for (; i < len; ++i) s += std::norm(a[i]);
  return s;
}

void probabilities(const cplx* a, double* p, std::size_t len) {
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    const __m256d x0 = _mm256_loadu_pd(dptr(a + i));
    const __m256d x1 = _mm256_loadu_pd(dptr(a + i + 2));
    const __m256d h = _mm256_hadd_pd(_mm256_mul_pd(x0, x0), _mm256_mul_pd(x1, x1));
    _mm256_storeu_pd(p + i, _mm256_permute4x64_pd(h, 0xD8));
  }
  for (; i < len; ++i) p[i] = std::norm(a[i]);
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{"avx2",        mul_phase,     rx_all, expect_diag, apply_diag,
                                 im_inner_diag, im_inner_xsum, norm2,  probabilities};
  return &table;
}

}  // namespace qmeta::simd
