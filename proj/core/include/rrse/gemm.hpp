#pragma once

#include <cstddef>

namespace rrse {

// Row-major single-threaded matrix products used by the convolution fast
// path. `accumulate` adds into C instead of overwriting it.
//
//   gemm_nn: C[M,N] = A[M,K]   * B[K,N]
//   gemm_tn: C[M,N] = A[K,M]^T * B[K,N]
//   gemm_nt: C[M,N] = A[M,K]   * B[N,K]^T
template <typename T>
void gemm_nn(std::size_t M, std::size_t N, std::size_t K, const T* A, std::size_t lda,
             const T* B, std::size_t ldb, T* C, std::size_t ldc, bool accumulate);

template <typename T>
void gemm_tn(std::size_t M, std::size_t N, std::size_t K, const T* A, std::size_t lda,
             const T* B, std::size_t ldb, T* C, std::size_t ldc, bool accumulate);

template <typename T>
void gemm_nt(std::size_t M, std::size_t N, std::size_t K, const T* A, std::size_t lda,
             const T* B, std::size_t ldb, T* C, std::size_t ldc, bool accumulate);

}  // namespace rrse
