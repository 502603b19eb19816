// Host-only stand-in for the CUDA runtime, enough to type-check emitted
// translation units with a plain C++ compiler. Launch syntax is stripped
// before compiling; nothing here is meant to run.
#pragma once
#include <cstddef>
#include <cstdlib>

#define __global__
#define __device__
#define __host__
#define __managed__
#define __launch_bounds__(...)

struct irgl_shim_dim3 { unsigned int x, y, z; };
static irgl_shim_dim3 blockIdx, threadIdx, blockDim, gridDim;

typedef int cudaError_t;
enum { cudaSuccess = 0 };
struct cudaDeviceProp { int multiProcessorCount; };

inline const char *cudaGetErrorString(cudaError_t) { return ""; }
template <typename T> cudaError_t cudaMallocManaged(T **p, size_t n) { *p = (T *)malloc(n); return 0; }
template <typename T> cudaError_t cudaMalloc(T **p, size_t n) { *p = (T *)malloc(n); return 0; }
inline cudaError_t cudaMemset(void *, int, size_t) { return 0; }
inline cudaError_t cudaFree(void *p) { free(p); return 0; }
inline cudaError_t cudaGetLastError() { return 0; }
inline cudaError_t cudaDeviceSynchronize() { return 0; }
inline cudaError_t cudaGetDeviceProperties(cudaDeviceProp *p, int) { p->multiProcessorCount = 1; return 0; }
template <typename F>
cudaError_t cudaOccupancyMaxActiveBlocksPerMultiprocessor(int *n, F, int, size_t) { *n = 1; return 0; }

inline int atomicAdd(int *a, int v) { int o = *a; *a += v; return o; }
inline unsigned int atomicAdd(unsigned int *a, unsigned int v) { unsigned int o = *a; *a += v; return o; }
inline int atomicCAS(int *a, int c, int v) { int o = *a; if (o == c) *a = v; return o; }
inline int atomicExch(int *a, int v) { int o = *a; *a = v; return o; }
inline int atomicMin(int *a, int v) { int o = *a; if (v < o) *a = v; return o; }
inline int atomicOr(int *a, int v) { int o = *a; *a |= v; return o; }
inline int atomicAnd(int *a, int v) { int o = *a; *a &= v; return o; }
inline void __threadfence() {}
inline void __syncthreads() {}
// Launches run threads of a block from the highest index down, so thread 0
// sees the fold over its whole block.
static int irgl_shim_block_or, irgl_shim_block_and;
inline void irgl_shim_block_start() { irgl_shim_block_or = 0; irgl_shim_block_and = 1; }
inline int __syncthreads_or(int p) { return irgl_shim_block_or |= (p != 0); }
inline int __syncthreads_and(int p) { return irgl_shim_block_and &= (p != 0); }
