#pragma once

#include <string>

namespace erlocal {

/// Writes "warning: <message>" to stderr unless warnings are disabled.
void warn(const std::string& message);
void set_warnings_enabled(bool enabled);

/// Kernel family OpenBLAS picked at load time.
std::string blas_core_name();
/// Warns when OpenBLAS fell back to generic kernels on a CPU with AVX2.
void check_blas_core();

}  // namespace erlocal
