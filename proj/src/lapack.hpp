#pragma once

// LAPACKE is told to use std::complex so Eigen buffers can be passed directly.
#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>
#include <cblas.h>
