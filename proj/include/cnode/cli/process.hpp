#pragma once

#if defined(__GLIBC__) || __has_include(<malloc.h>)
#include <malloc.h>
#endif

namespace cnode::cli {

/**
 * Keeps freed tape buffers in the heap instead of returning them to the OS
 * after every epoch. Without this, glibc maps and unmaps the large rollout
 * matrices each step and page faults dominate training time.
 */
inline void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
#endif
}

}  // namespace cnode::cli
