#pragma once

#include <complex>

#include <Eigen/Core>

namespace wendy {

/// Unnormalized forward DFT, X_m = sum_n x_n e^{-2 pi i m n / N}.
/// Thread-safe; plans are cached per length.
Eigen::VectorXcd fft_forward(const Eigen::VectorXcd& x);

}  // namespace wendy
