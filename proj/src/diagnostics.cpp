#include "erlocal/diagnostics.hpp"

#include <atomic>
#include <cctype>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <thread>

#include "erlocal/parallel.hpp"
#include "lapack.hpp"

namespace erlocal {

namespace {
std::atomic<bool> warnings_enabled{true};
std::mutex warn_mutex;
}  // namespace

void warn(const std::string& message) {
  if (!warnings_enabled.load()) return;
  std::lock_guard lock(warn_mutex);
  std::cerr << "warning: " << message << '\n';
}

void set_warnings_enabled(bool enabled) { warnings_enabled.store(enabled); }

unsigned default_thread_count() {
  if (const char* env = std::getenv("ERLOCAL_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void configure_blas_single_threaded() { openblas_set_num_threads(1); }

std::string blas_core_name() {
  const char* name = openblas_get_corename();
  return name ? name : "";
}

void check_blas_core() {
  std::string core = blas_core_name();
  for (char& c : core) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  if (core == "prescott" && __builtin_cpu_supports("avx2"))
    warn("OpenBLAS selected its Prescott kernels on an AVX2 CPU; linear algebra will be slow. "
         "Set OPENBLAS_CORETYPE=Haswell (or SkylakeX) to override");
#endif
}

}  // namespace erlocal
