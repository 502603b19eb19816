"""Text of the CUDA runtime support emitted with every translation unit.

Everything lives in namespace ``irgl_rt`` or behind ``IRGL_`` macros.
The header never spells the lock-acquire primitive, so each Atomic in a
program accounts for exactly one acquire in the generated file.
"""

HEADER_NAME = "irgl_runtime.cuh"

RUNTIME_HEADER = r"""#ifndef IRGL_RUNTIME_CUH
#define IRGL_RUNTIME_CUH

#include <climits>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cuda_runtime.h>

#define IRGL_INF LLONG_MAX
#define IRGL_FREE_SLOT INT_MAX
#define IRGL_DEFAULT_WL_SIZE (1 << 22)
#define IRGL_CHECK(call)                                                     \
  do {                                                                       \
    cudaError_t irgl_err_ = (call);                                          \
    if (irgl_err_ != cudaSuccess) {                                          \
      fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__,                     \
              cudaGetErrorString(irgl_err_));                                \
      exit(1);                                                               \
    }                                                                        \
  } while (0)

// Graph accessors. Edge ids are CSR positions.
#define IRGL_EDGES_BEGIN(g, n) ((g).row_start[(n)])
#define IRGL_EDGES_END(g, n) ((g).row_start[(n) + 1])
#define IRGL_EDGE_DST(g, e) ((g).edge_dst[(e)])
#define IRGL_EDGE_SRC(g, e) ((g).edge_src[(e)])
#define IRGL_EDGE_WT(g, e) ((g).edge_wt[(e)])

namespace irgl_rt {

typedef long long index_t;
typedef long long item_t;

enum Reduction { RED_NONE = 0, RED_ANY = 1, RED_ALL = 2 };

struct Graph {
  index_t nnodes;
  index_t nedges;
  index_t *row_start;
  index_t *edge_dst;
  index_t *edge_src;
  long long *edge_wt;
};

template <typename T> struct Array {
  T *data;
  index_t length;
  __host__ __device__ T &operator[](index_t i) const { return data[i]; }
};

template <typename T> Array<T> array(index_t n, T init) {
  Array<T> a;
  a.length = n;
  IRGL_CHECK(cudaMallocManaged(&a.data, (n > 0 ? n : 1) * sizeof(T)));
  for (index_t i = 0; i < n; i++) a.data[i] = init;
  return a;
}

inline Array<long long> iota(index_t n) {
  Array<long long> a = array<long long>(n, 0);
  for (index_t i = 0; i < n; i++) a.data[i] = i;
  return a;
}

// Small per-thread array used by operator code (cavities and the like).
#define IRGL_LOCAL_ARRAY_MAX 64
struct LocalArray {
  index_t length;
  long long data[IRGL_LOCAL_ARRAY_MAX];
  __host__ __device__ long long &operator[](index_t i) { return data[i]; }
};

template <typename T> __host__ __device__ index_t len(const Array<T> &a) { return a.length; }
__host__ __device__ inline index_t len(const LocalArray &a) { return a.length; }

__host__ __device__ inline LocalArray neighbors(const Graph &g, index_t n) {
  LocalArray r;
  r.length = 0;
  for (index_t e = IRGL_EDGES_BEGIN(g, n); e < IRGL_EDGES_END(g, n) && r.length < IRGL_LOCAL_ARRAY_MAX; e++)
    r.data[r.length++] = IRGL_EDGE_DST(g, e);
  return r;
}

__host__ __device__ inline LocalArray append(LocalArray a, long long x) {
  if (a.length < IRGL_LOCAL_ARRAY_MAX) a.data[a.length++] = x;
  return a;
}

__host__ __device__ inline LocalArray range_array(index_t lo, index_t hi) {
  LocalArray r;
  r.length = 0;
  for (index_t i = lo; i < hi && r.length < IRGL_LOCAL_ARRAY_MAX; i++) r.data[r.length++] = i;
  return r;
}

template <typename T> __host__ __device__ LocalArray slice(const T &a, index_t lo, index_t hi) {
  LocalArray r;
  r.length = 0;
  for (index_t i = lo; i < hi && r.length < IRGL_LOCAL_ARRAY_MAX; i++) r.data[r.length++] = a[i];
  return r;
}

template <typename T> __host__ __device__ T min(T a, T b) { return a < b ? a : b; }
template <typename T> __host__ __device__ T max(T a, T b) { return a > b ? a : b; }
template <typename T> __host__ __device__ T abs(T a) { return a < 0 ? -a : a; }

__device__ inline index_t global_tid() { return (index_t)blockIdx.x * blockDim.x + threadIdx.x; }
__device__ inline index_t nthreads() { return (index_t)gridDim.x * blockDim.x; }

// Bulk-synchronous worklist: a single array and a counter. Pops read
// items pushed before the current launch; pushes land in another list.
struct Worklist {
  item_t *items;
  int *count;
  int capacity;
};

struct PipeContext {
  Worklist in;
  Worklist out;
  Worklist retry;
};

__device__ inline item_t pop(const Worklist &wl, index_t i) { return wl.items[i]; }

__device__ inline void push(const Worklist &wl, item_t v) {
  int slot = atomicAdd(wl.count, 1);
  if (slot < wl.capacity) wl.items[slot] = v;
}

__host__ __device__ inline index_t size(const Worklist &wl) { return *wl.count; }

inline Worklist wl_alloc(int capacity) {
  Worklist wl;
  wl.capacity = capacity;
  IRGL_CHECK(cudaMallocManaged(&wl.items, capacity * sizeof(item_t)));
  IRGL_CHECK(cudaMallocManaged(&wl.count, sizeof(int)));
  *wl.count = 0;
  return wl;
}

inline void wl_free(Worklist &wl) {
  IRGL_CHECK(cudaFree(wl.items));
  IRGL_CHECK(cudaFree(wl.count));
}

inline PipeContext pipe_alloc(int capacity) {
  PipeContext p;
  p.in = wl_alloc(capacity);
  p.out = wl_alloc(capacity);
  p.retry = wl_alloc(capacity);
  return p;
}

inline void pipe_free(PipeContext &p) {
  wl_free(p.in);
  wl_free(p.out);
  wl_free(p.retry);
}

inline void pipe_init_item(PipeContext &p, item_t v) {
  if (*p.in.count >= p.in.capacity) {
    fprintf(stderr, "irgl: worklist initializer overflows its size\n");
    exit(1);
  }
  p.in.items[(*p.in.count)++] = v;
}

template <typename A> void pipe_init_array(PipeContext &p, const A &a, index_t n) {
  for (index_t i = 0; i < n; i++) pipe_init_item(p, a[i]);
}

__host__ __device__ inline void swap_in_out(PipeContext &p) {
  Worklist t = p.in;
  p.in = p.out;
  p.out = t;
}

__host__ __device__ inline void swap_in_retry(PipeContext &p) {
  Worklist t = p.in;
  p.in = p.retry;
  p.retry = t;
}

__host__ __device__ inline void reset(Worklist &wl) { *wl.count = 0; }

// Device-wide barrier among co-resident blocks, the arrive-and-wait
// counter scheme of merrill2012: every block arrives on a counter and the
// last one to arrive bumps the generation the others spin on. Only valid
// when every launched block is resident, hence the occupancy-capped grid.
struct GlobalBarrier {
  unsigned int *arrived;
  volatile unsigned int *generation;
};

inline GlobalBarrier barrier_alloc() {
  GlobalBarrier b;
  unsigned int *mem;
  IRGL_CHECK(cudaMalloc(&mem, 2 * sizeof(unsigned int)));
  IRGL_CHECK(cudaMemset(mem, 0, 2 * sizeof(unsigned int)));
  b.arrived = mem;
  b.generation = mem + 1;
  return b;
}

__device__ inline void sync_running_threads(const GlobalBarrier &b) {
  __syncthreads();
  if (threadIdx.x == 0) {
    unsigned int gen = *b.generation;
    __threadfence();
    if (atomicAdd(b.arrived, 1) == gridDim.x - 1) {
      *b.arrived = 0;
      __threadfence();
      atomicAdd((unsigned int *)b.generation, 1);
    } else {
      while (*b.generation == gen) {
      }
    }
    __threadfence();
  }
  __syncthreads();
}

struct KernelEnv {
  PipeContext wl;
  GlobalBarrier bar;
  int *ret;
};

__device__ inline void lock_release(int *lock) { atomicExch(lock, 0); }

// Per-object lock slots for Exclusive. A slot holds the priority of the
// thread that currently owns it, or IRGL_FREE_SLOT.
struct ExclusiveLocks {
  int *slots;
  index_t n;
};

inline ExclusiveLocks exclusive_alloc(index_t n) {
  ExclusiveLocks x;
  x.n = n;
  IRGL_CHECK(cudaMallocManaged(&x.slots, (n > 0 ? n : 1) * sizeof(int)));
  for (index_t i = 0; i < n; i++) x.slots[i] = IRGL_FREE_SLOT;
  return x;
}

// Number of lock slots an Exclusive object provides.
inline index_t lock_domain(const Graph &g) { return g.nnodes; }
template <typename T> index_t lock_domain(const Array<T> &a) { return a.length; }
inline index_t lock_domain(index_t n) { return n; }

template <int RED> __host__ __device__ bool identity() { return RED == RED_ALL; }

template <int RED> __device__ bool reduce(bool acc, bool v) {
  return RED == RED_ALL ? (acc && v) : (acc || v);
}

// One atomic per block into the invocation's return cell.
template <int RED> __device__ void block_combine(int *ret, bool acc) {
  if (RED == RED_ANY) {
    int any = __syncthreads_or(acc);
    if (threadIdx.x == 0 && any) atomicOr(ret, 1);
  } else if (RED == RED_ALL) {
    int all = __syncthreads_and(acc);
    if (threadIdx.x == 0 && !all) atomicAnd(ret, 0);
  }
}

template <int RED> __device__ bool grid_reduce(int *cell, bool acc, const GlobalBarrier &bar) {
  if (global_tid() == 0) *cell = identity<RED>();
  sync_running_threads(bar);
  block_combine<RED>(cell, acc);
  sync_running_threads(bar);
  return *cell != 0;
}

inline int *ret_alloc() {
  int *r;
  IRGL_CHECK(cudaMallocManaged(&r, sizeof(int)));
  return r;
}

inline KernelEnv make_env(PipeContext *p, GlobalBarrier bar, int *ret) {
  KernelEnv env;
  if (p) env.wl = *p;
  else env.wl = PipeContext();
  env.bar = bar;
  env.ret = ret;
  return env;
}

inline GlobalBarrier &barrier() {
  static GlobalBarrier b = barrier_alloc();
  return b;
}

inline int sm_count() {
  static int n = 0;
  if (n == 0) {
    cudaDeviceProp prop;
    IRGL_CHECK(cudaGetDeviceProperties(&prop, 0));
    n = prop.multiProcessorCount;
  }
  return n;
}

}  // namespace irgl_rt

#endif  // IRGL_RUNTIME_CUH
"""
