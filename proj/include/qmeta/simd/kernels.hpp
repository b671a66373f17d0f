#pragma once

#include <complex>
#include <cstddef>
#include <string_view>

namespace qmeta::simd {

using cplx = std::complex<double>;

/// Statevector inner loops. Every entry has a scalar reference version and
/// an AVX2+FMA version; the two agree to rounding (reduction order differs).
struct KernelTable {
  const char* name;

  /// a[i] *= phase[i]   (or conj(phase[i]) when conjugate is set)
  void (*mul_phase)(cplx* a, const cplx* phase, std::size_t len, bool conjugate);

  /// Applies exp(-i * angle * X) to every one of the n qubits, i.e. on each
  /// bit-flip pair (a, b): a' = cos*a - i sin*b, b' = cos*b - i sin*a.
  void (*rx_all)(cplx* a, int n, double cos_angle, double sin_angle);

  /// sum_i |a_i|^2 d_i
  double (*expect_diag)(const cplx* a, const double* d, std::size_t len);

  /// out[i] = d[i] * a[i]
  void (*apply_diag)(const cplx* a, const double* d, cplx* out, std::size_t len);

  /// Im sum_i conj(l_i) d_i psi_i
  double (*im_inner_diag)(const cplx* l, const double* d, const cplx* psi, std::size_t len);

  /// Im sum_q sum_i conj(l_i) psi_{i xor 2^q}   (the operator sum_q X_q)
  double (*im_inner_xsum)(const cplx* l, const cplx* psi, int n);

  /// sum_i |a_i|^2
  double (*norm2)(const cplx* a, std::size_t len);

  /// p[i] = |a_i|^2
  void (*probabilities)(const cplx* a, double* p, std::size_t len);
};

enum class Backend { Auto, Scalar, Avx2 };

const KernelTable& scalar_kernels();
/// nullptr when the binary was built without AVX2 support.
const KernelTable* avx2_kernels();
bool cpu_supports_avx2();

/// The table used by the simulator. Chosen on first use: AVX2 when the CPU
/// supports it, unless QMETA_SIMD=scalar is set in the environment.
const KernelTable& active_kernels();
/// Forces a backend; Auto re-runs detection. Throws if Avx2 is unavailable.
void select_backend(Backend b);
std::string_view active_backend_name();

}  // namespace qmeta::simd
