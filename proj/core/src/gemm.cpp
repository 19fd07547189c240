#include "rrse/gemm.hpp"

#include <algorithm>
#include <vector>

namespace rrse {
namespace {

constexpr std::size_t kColBlock = 512;
constexpr std::size_t kDepthBlock = 256;

// C[i,j] += sum_k A(i,k) * B[k,j] with A(i,k) = A[i*a_rs + k*a_cs].
// Four C rows share each streamed B row; the inner j loop is contiguous.
template <typename T>
void kernel(std::size_t M, std::size_t N, std::size_t K, const T* A, std::size_t a_rs,
            std::size_t a_cs, const T* B, std::size_t ldb, T* C, std::size_t ldc) {
  for (std::size_t j0 = 0; j0 < N; j0 += kColBlock) {
    const std::size_t jn = std::min(kColBlock, N - j0);
    for (std::size_t k0 = 0; k0 < K; k0 += kDepthBlock) {
      const std::size_t kn = std::min(kDepthBlock, K - k0);
      std::size_t i = 0;
      for (; i + 4 <= M; i += 4) {
        T* __restrict c0 = C + (i + 0) * ldc + j0;
        T* __restrict c1 = C + (i + 1) * ldc + j0;
        T* __restrict c2 = C + (i + 2) * ldc + j0;
        T* __restrict c3 = C + (i + 3) * ldc + j0;
        for (std::size_t k = k0; k < k0 + kn; ++k) {
          const T* __restrict b = B + k * ldb + j0;
          const T a0 = A[(i + 0) * a_rs + k * a_cs];
          const T a1 = A[(i + 1) * a_rs + k * a_cs];
          const T a2 = A[(i + 2) * a_rs + k * a_cs];
          const T a3 = A[(i + 3) * a_rs + k * a_cs];
          for (std::size_t j = 0; j < jn; ++j) {
            const T bj = b[j];
            c0[j] += a0 * bj;
            c1[j] += a1 * bj;
            c2[j] += a2 * bj;
            c3[j] += a3 * bj;
          }
        }
      }
      for (; i < M; ++i) {
        T* __restrict c = C + i * ldc + j0;
        for (std::size_t k = k0; k < k0 + kn; ++k) {
          const T* __restrict b = B + k * ldb + j0;
          const T a = A[i * a_rs + k * a_cs];
          for (std::size_t j = 0; j < jn; ++j) c[j] += a * b[j];
        }
      }
    }
  }
}

template <typename T>
void clear(std::size_t M, std::size_t N, T* C, std::size_t ldc) {
  for (std::size_t i = 0; i < M; ++i) std::fill_n(C + i * ldc, N, T(0));
}

}  // namespace

template <typename T>
void gemm_nn(std::size_t M, std::size_t N, std::size_t K, const T* A, std::size_t lda,
             const T* B, std::size_t ldb, T* C, std::size_t ldc, bool accumulate) {
  if (!accumulate) clear(M, N, C, ldc);
  kernel(M, N, K, A, lda, 1, B, ldb, C, ldc);
}

template <typename T>
void gemm_tn(std::size_t M, std::size_t N, std::size_t K, const T* A, std::size_t lda,
             const T* B, std::size_t ldb, T* C, std::size_t ldc, bool accumulate) {
  if (!accumulate) clear(M, N, C, ldc);
  kernel(M, N, K, A, 1, lda, B, ldb, C, ldc);
}

template <typename T>
void gemm_nt(std::size_t M, std::size_t N, std::size_t K, const T* A, std::size_t lda,
             const T* B, std::size_t ldb, T* C, std::size_t ldc, bool accumulate) {
  // Transpose B once so the kernel streams contiguous rows.
  std::vector<T> bt(K * N);
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t k = 0; k < K; ++k) bt[k * N + n] = B[n * ldb + k];
  }
  if (!accumulate) clear(M, N, C, ldc);
  kernel(M, N, K, A, lda, 1, bt.data(), N, C, ldc);
}

#define RRSE_INSTANTIATE_GEMM(T)                                                               \
  template void gemm_nn<T>(std::size_t, std::size_t, std::size_t, const T*, std::size_t,      \
                           const T*, std::size_t, T*, std::size_t, bool);                     \
  template void gemm_tn<T>(std::size_t, std::size_t, std::size_t, const T*, std::size_t,      \
                           const T*, std::size_t, T*, std::size_t, bool);                     \
  template void gemm_nt<T>(std::size_t, std::size_t, std::size_t, const T*, std::size_t,      \
                           const T*, std::size_t, T*, std::size_t, bool);

RRSE_INSTANTIATE_GEMM(float)
RRSE_INSTANTIATE_GEMM(double)
#undef RRSE_INSTANTIATE_GEMM

}  // namespace rrse
