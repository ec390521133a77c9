#pragma once

#include "adc/linalg.hpp"

namespace adc {

// Learnable tensors of one selective-scan recurrence. The state matrix is
// parameterized as A = -exp(A_log) so it stays strictly negative.
struct ScanParams {
  Mat A_log;  // d_inner x n
  Mat W_B;    // d_inner x n
  Mat W_C;    // d_inner x n
  Mat W_dt;   // d_inner x d_inner
  Vec b_dt;   // d_inner
  Vec D;      // d_inner
};

// Data-dependent linear recurrence over L steps. Per channel c:
//   Abar_t = exp(dt[t,c] * A[c,:])            (elementwise over n states)
//   h_t    = Abar_t .* h_{t-1} + dt[t,c] * x[t,c] * B[t,:]
//   y[t,c] = <C[t,:], h_t> + D[c] * x[t,c]
// with h_0 = 0. Shapes: x, dt: L x d_inner; A: d_inner x n; B, C: L x n.
Mat selective_scan(const Mat& x, const Mat& dt, const Mat& A, const Mat& B, const Mat& C,
                   const Vec& D);

// The recurrence without the D skip term; `reverse` scans right-to-left
// (used for the non-causal direction of a bidirectional block).
Mat scan_core(const Mat& x, const Mat& dt, const Mat& A, const Mat& B, const Mat& C,
              bool reverse);

struct ScanGrads {
  Mat dx;   // L x d_inner
  Mat ddt;  // L x d_inner
  Mat dA;   // d_inner x n
  Mat dB;   // L x n
  Mat dC;   // L x n
};

// Reverse-mode gradients of scan_core. Recomputes the state trajectory for
// the block transiently (memory O(L * d_inner * n), freed on return).
ScanGrads scan_core_backward(const Mat& x, const Mat& dt, const Mat& A, const Mat& B,
                             const Mat& C, const Mat& dy, bool reverse);

// Bytes of recurrent state the scan keeps per step: d_inner * n doubles.
long scan_state_bytes(int d_inner, int n_state);

}  // namespace adc
