// Generated by irglc from module dmr. Do not edit.

#ifndef IRGL_RUNTIME_CUH
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

// Program globals, visible to host and device code.
// Bound by the driver before irgl_host_main(): mesh, target.
__managed__ irgl_rt::Graph mesh;
__managed__ irgl_rt::Array<long long> level;
__managed__ irgl_rt::Array<long long> created;
__managed__ int nbad_lock;
__managed__ long long nbad;
__managed__ irgl_rt::Array<long long> target;

// Kernel identify_bad_triangles: Elastic, block 1024, FixedFromSM(8)
__device__ void irgl_identify_bad_triangles_body(irgl_rt::Graph mesh, irgl_rt::KernelEnv &irgl_env) {
  // ForAll t: consecutive mapping
  {
    const irgl_rt::index_t irgl_n_1 = mesh.nnodes;
    for (irgl_rt::index_t irgl_i_1 = irgl_rt::global_tid(); irgl_i_1 < irgl_n_1; irgl_i_1 += irgl_rt::nthreads()) {
      const irgl_rt::index_t t = irgl_i_1;
      if (level[t] < target[t]) {
        irgl_rt::push(irgl_env.wl.out, t);
        // Atomic(nbad_lock): divergence-safe acquire loop
        {
          bool irgl_done_2 = false;
          while (!irgl_done_2) {
            if (atomicCAS(&(nbad_lock), 0, 1) == 0) {
              __threadfence();
              {
                nbad = nbad + 1;
              }
              __threadfence();
              irgl_rt::lock_release(&(nbad_lock));
              irgl_done_2 = true;
            }
          }
        }
      }
    }
  }
}

__launch_bounds__(1024)
__global__ void irgl_identify_bad_triangles(irgl_rt::Graph mesh, irgl_rt::KernelEnv irgl_env) {
  irgl_identify_bad_triangles_body(mesh, irgl_env);
}

static void irgl_launch_identify_bad_triangles(irgl_rt::Graph mesh, irgl_rt::KernelEnv irgl_env) {
  const int irgl_block = 1024;
  const int irgl_grid = irgl_rt::sm_count() * 8;
  irgl_identify_bad_triangles<<<irgl_grid, irgl_block>>>(mesh, irgl_env);
  IRGL_CHECK(cudaGetLastError());
  IRGL_CHECK(cudaDeviceSynchronize());
}

// Kernel refine: Elastic, block 1024, OccupancyCapped
__managed__ irgl_rt::ExclusiveLocks irgl_xlocks_refine_0;
__device__ void irgl_refine_body(irgl_rt::Graph mesh, irgl_rt::KernelEnv &irgl_env) {
  long long bad_triangle;
  irgl_rt::LocalArray cavity;
  long long cavity_size;
  // ForAll btidx: consecutive mapping, uniform rounds
  {
    const irgl_rt::index_t irgl_n_1 = irgl_rt::size(irgl_env.wl.in);
    const irgl_rt::index_t irgl_rounds_1 = (irgl_n_1 + irgl_rt::nthreads() - 1) / irgl_rt::nthreads();
    for (irgl_rt::index_t irgl_r_1 = 0; irgl_r_1 < irgl_rounds_1; irgl_r_1++) {
      const irgl_rt::index_t irgl_i_1 = irgl_rt::global_tid() + irgl_r_1 * irgl_rt::nthreads();
      bool irgl_active_1 = irgl_i_1 < irgl_n_1;
      const irgl_rt::index_t btidx = irgl_active_1 ? irgl_i_1 : 0;
      if (irgl_active_1) {
        bad_triangle = irgl_rt::pop(irgl_env.wl.in, btidx);
        cavity = irgl_rt::append(irgl_rt::neighbors(mesh, bad_triangle), bad_triangle);
        cavity_size = irgl_rt::len(cavity);
      }
      // Exclusive(mesh): race, priority check, check
      {
        const int irgl_prio_2 = (int)irgl_rt::global_tid();
        const irgl_rt::index_t irgl_nclaims_2 = irgl_active_1 ? (irgl_rt::index_t)(cavity_size) : 0;
        // phase 1: race for every slot
        for (irgl_rt::index_t irgl_k_2 = 0; irgl_k_2 < irgl_nclaims_2; irgl_k_2++) irgl_xlocks_refine_0.slots[cavity[irgl_k_2]] = irgl_prio_2;
        irgl_rt::sync_running_threads(irgl_env.bar);
        // phase 2: losers try to win priority over the claim (lower wins)
        for (irgl_rt::index_t irgl_k_2 = 0; irgl_k_2 < irgl_nclaims_2; irgl_k_2++) {
          if (irgl_xlocks_refine_0.slots[cavity[irgl_k_2]] > irgl_prio_2) atomicMin(&irgl_xlocks_refine_0.slots[cavity[irgl_k_2]], irgl_prio_2);
        }
        irgl_rt::sync_running_threads(irgl_env.bar);
        // phase 3: a thread holding every claim wins; free own slots
        bool irgl_won_2 = true;
        for (irgl_rt::index_t irgl_k_2 = 0; irgl_k_2 < irgl_nclaims_2; irgl_k_2++) if (irgl_xlocks_refine_0.slots[cavity[irgl_k_2]] != irgl_prio_2) irgl_won_2 = false;
        for (irgl_rt::index_t irgl_k_2 = 0; irgl_k_2 < irgl_nclaims_2; irgl_k_2++) if (irgl_xlocks_refine_0.slots[cavity[irgl_k_2]] == irgl_prio_2) irgl_xlocks_refine_0.slots[cavity[irgl_k_2]] = IRGL_FREE_SLOT;
        if (irgl_active_1) {
          if (irgl_won_2) {
            if (level[bad_triangle] < target[bad_triangle]) {
              level[bad_triangle] = level[bad_triangle] + 1;
              for (irgl_rt::index_t irgl_i_3 = 0; irgl_i_3 < irgl_rt::len(cavity); irgl_i_3++) {
                const irgl_rt::index_t t = cavity[irgl_i_3];
                created[t] = 1;
              }
            }
          } else {
            irgl_rt::push(irgl_env.wl.retry, bad_triangle);  // Retry
          }
        }
        irgl_rt::sync_running_threads(irgl_env.bar);
      }
      irgl_rt::sync_running_threads(irgl_env.bar);
    }
  }
}

__launch_bounds__(1024)
__global__ void irgl_refine(irgl_rt::Graph mesh, irgl_rt::KernelEnv irgl_env) {
  irgl_refine_body(mesh, irgl_env);
}

static void irgl_prepare_refine(irgl_rt::Graph mesh) {
  if (!irgl_xlocks_refine_0.slots) irgl_xlocks_refine_0 = irgl_rt::exclusive_alloc(irgl_rt::lock_domain(mesh));
}

static void irgl_launch_refine(irgl_rt::Graph mesh, irgl_rt::KernelEnv irgl_env) {
  const int irgl_block = 1024;
  int irgl_blocks_per_sm = 0;
  IRGL_CHECK(cudaOccupancyMaxActiveBlocksPerMultiprocessor(&irgl_blocks_per_sm, irgl_refine, irgl_block, 0));
  const int irgl_grid = irgl_blocks_per_sm * irgl_rt::sm_count();
  irgl_prepare_refine(mesh);
  irgl_refine<<<irgl_grid, irgl_block>>>(mesh, irgl_env);
  IRGL_CHECK(cudaGetLastError());
  IRGL_CHECK(cudaDeviceSynchronize());
}

// Kernel incremental_id_bad_triangles: Elastic, block 1024, FixedFromSM(8)
__device__ void irgl_incremental_id_bad_triangles_body(irgl_rt::Graph mesh, irgl_rt::KernelEnv &irgl_env) {
  // ForAll t: consecutive mapping
  {
    const irgl_rt::index_t irgl_n_1 = mesh.nnodes;
    for (irgl_rt::index_t irgl_i_1 = irgl_rt::global_tid(); irgl_i_1 < irgl_n_1; irgl_i_1 += irgl_rt::nthreads()) {
      const irgl_rt::index_t t = irgl_i_1;
      if (created[t] == 1) {
        created[t] = 0;
        if (level[t] < target[t]) {
          irgl_rt::push(irgl_env.wl.out, t);
        }
      }
    }
  }
}

__launch_bounds__(1024)
__global__ void irgl_incremental_id_bad_triangles(irgl_rt::Graph mesh, irgl_rt::KernelEnv irgl_env) {
  irgl_incremental_id_bad_triangles_body(mesh, irgl_env);
}

static void irgl_launch_incremental_id_bad_triangles(irgl_rt::Graph mesh, irgl_rt::KernelEnv irgl_env) {
  const int irgl_block = 1024;
  const int irgl_grid = irgl_rt::sm_count() * 8;
  irgl_incremental_id_bad_triangles<<<irgl_grid, irgl_block>>>(mesh, irgl_env);
  IRGL_CHECK(cudaGetLastError());
  IRGL_CHECK(cudaDeviceSynchronize());
}

// Control kernel: the pipe loop runs on the device; member kernels
// are called through their __device__ bodies.
__launch_bounds__(1024)
__global__ void irgl_control_main_0(irgl_rt::KernelEnv irgl_env) {
  // Invoke identify_bad_triangles (device variant)
  {
    irgl_identify_bad_triangles_body(mesh, irgl_env);
    irgl_rt::sync_running_threads(irgl_env.bar);
    irgl_rt::swap_in_out(irgl_env.wl);
    irgl_rt::sync_running_threads(irgl_env.bar);
    if (irgl_rt::global_tid() == 0) irgl_rt::reset(irgl_env.wl.out);
    irgl_rt::sync_running_threads(irgl_env.bar);
  }
  if (irgl_rt::global_tid() == 0) {
    printf("initial bad: %lld\n", (long long)(nbad));
  }
  irgl_rt::sync_running_threads(irgl_env.bar);
  while (irgl_rt::size(irgl_env.wl.in) > 0) {
    // Invoke refine (device variant)
    {
      irgl_refine_body(mesh, irgl_env);
      irgl_rt::sync_running_threads(irgl_env.bar);
      while (irgl_rt::size(irgl_env.wl.retry) > 0) {
        irgl_rt::swap_in_retry(irgl_env.wl);
        irgl_rt::sync_running_threads(irgl_env.bar);
        if (irgl_rt::global_tid() == 0) irgl_rt::reset(irgl_env.wl.retry);
        irgl_rt::sync_running_threads(irgl_env.bar);
        irgl_refine_body(mesh, irgl_env);
        irgl_rt::sync_running_threads(irgl_env.bar);
      }
      irgl_rt::swap_in_out(irgl_env.wl);
      irgl_rt::sync_running_threads(irgl_env.bar);
      if (irgl_rt::global_tid() == 0) irgl_rt::reset(irgl_env.wl.out);
      irgl_rt::sync_running_threads(irgl_env.bar);
    }
    // Invoke incremental_id_bad_triangles (device variant)
    {
      irgl_incremental_id_bad_triangles_body(mesh, irgl_env);
      irgl_rt::sync_running_threads(irgl_env.bar);
      irgl_rt::swap_in_out(irgl_env.wl);
      irgl_rt::sync_running_threads(irgl_env.bar);
      if (irgl_rt::global_tid() == 0) irgl_rt::reset(irgl_env.wl.out);
      irgl_rt::sync_running_threads(irgl_env.bar);
    }
  }
  if (irgl_rt::global_tid() == 0) {
    nbad = 0;
  }
  irgl_rt::sync_running_threads(irgl_env.bar);
  // Invoke identify_bad_triangles (device variant)
  {
    irgl_identify_bad_triangles_body(mesh, irgl_env);
    irgl_rt::sync_running_threads(irgl_env.bar);
    irgl_rt::swap_in_out(irgl_env.wl);
    irgl_rt::sync_running_threads(irgl_env.bar);
    if (irgl_rt::global_tid() == 0) irgl_rt::reset(irgl_env.wl.out);
    irgl_rt::sync_running_threads(irgl_env.bar);
  }
  if (irgl_rt::global_tid() == 0) {
    printf("final bad: %lld\n", (long long)(nbad));
  }
  irgl_rt::sync_running_threads(irgl_env.bar);
}

static void irgl_launch_control_main_0(irgl_rt::KernelEnv irgl_env) {
  const int irgl_block = 1024;
  int irgl_blocks_per_sm = 0;
  IRGL_CHECK(cudaOccupancyMaxActiveBlocksPerMultiprocessor(&irgl_blocks_per_sm, irgl_control_main_0, irgl_block, 0));
  const int irgl_grid = irgl_blocks_per_sm * irgl_rt::sm_count();
  irgl_control_main_0<<<irgl_grid, irgl_block>>>(irgl_env);
  IRGL_CHECK(cudaGetLastError());
  IRGL_CHECK(cudaDeviceSynchronize());
}

void irgl_host_main() {
  level = irgl_rt::array<long long>(mesh.nnodes, 0);
  created = irgl_rt::array<long long>(mesh.nnodes, 0);
  nbad_lock = 0;
  nbad = 0;
  // Pipe Once: outlined into irgl_control_main_0 (block size 1024)
  {
    irgl_rt::PipeContext irgl_pipe = irgl_rt::pipe_alloc(IRGL_DEFAULT_WL_SIZE);
    irgl_prepare_refine(mesh);
    int *irgl_ret = irgl_rt::ret_alloc();
    irgl_launch_control_main_0(irgl_rt::make_env(&irgl_pipe, irgl_rt::barrier(), irgl_ret));
    IRGL_CHECK(cudaFree(irgl_ret));
    irgl_rt::pipe_free(irgl_pipe);
  }
}
