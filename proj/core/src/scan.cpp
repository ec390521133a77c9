#include "adc/scan.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "adc/workspace.hpp"

namespace adc {

namespace {

// Steps whose exp factors are computed in one vectorized batch. Bounds the
// forward scratch at kTile * d * n regardless of sequence length.
constexpr long kTile = 128;

void check_shapes(const Mat& x, const Mat& dt, const Mat& A, const Mat& B, const Mat& C) {
  const auto L = x.rows();
  const auto d = x.cols();
  const auto n = A.cols();
  if (L < 1) throw std::invalid_argument("scan needs at least one step");
  if (dt.rows() != L || dt.cols() != d || A.rows() != d || B.rows() != L ||
      B.cols() != n || C.rows() != L || C.cols() != n) {
    throw std::invalid_argument("scan input shapes are inconsistent");
  }
}

// Rows [base, base+nt) of m in scan order: ascending time going forward,
// descending time in reverse.
Mat scan_rows(const Mat& m, long base, long nt, bool reverse) {
  if (!reverse) return m.middleRows(base, nt);
  return m.middleRows(m.rows() - base - nt, nt).colwise().reverse();
}

}  // namespace

long scan_state_bytes(int d_inner, int n_state) {
  return static_cast<long>(d_inner) * n_state * static_cast<long>(sizeof(double));
}

Mat scan_core(const Mat& x, const Mat& dt, const Mat& A, const Mat& B, const Mat& C,
              bool reverse) {
  check_shapes(x, dt, A, B, C);
  const long L = x.rows();
  const long d = x.cols();
  const long n = A.cols();
  const long plane = d * n;

  Mat y(L, d);
  const long tile = std::min(kTile, L);
  // Recurrent state plus tile scratch; size independent of L.
  TrackedAlloc scratch(
      static_cast<size_t>(plane + tile * (plane + 2 * d + 2 * n)) * sizeof(double));
  Mat h = Mat::Zero(d, n);
  Mat G(tile, plane);  // exp(dt * A), one row per step of the tile
  Mat dtx(tile, d);
  Mat Bt(tile, n), Ct(tile, n);

  for (long base = 0; base < L; base += tile) {
    const long nt = std::min(tile, L - base);
    const Mat dts = scan_rows(dt, base, nt, reverse);
    dtx.topRows(nt) = dts.cwiseProduct(scan_rows(x, base, nt, reverse));
    Bt.topRows(nt) = scan_rows(B, base, nt, reverse);
    Ct.topRows(nt) = scan_rows(C, base, nt, reverse);
    for (long c = 0; c < d; ++c) {
      G.block(0, c * n, nt, n).noalias() = dts.col(c) * A.row(c);
    }
    G.topRows(nt) = G.topRows(nt).array().exp();

    for (long i = 0; i < nt; ++i) {
      const long t = reverse ? L - 1 - (base + i) : base + i;
      const double* g = G.data() + i * plane;
      const double* brow = Bt.data() + i * n;
      const double* crow = Ct.data() + i * n;
      const double* dxrow = dtx.data() + i * d;
      double* yrow = y.data() + t * d;
      for (long c = 0; c < d; ++c) {
        double* hrow = h.data() + c * n;
        const double* grow = g + c * n;
        const double a = dxrow[c];
        double acc = 0.0;
        for (long j = 0; j < n; ++j) {
          const double hv = hrow[j] * grow[j] + a * brow[j];
          hrow[j] = hv;
          acc += hv * crow[j];
        }
        yrow[c] = acc;
      }
    }
  }
  return y;
}

Mat selective_scan(const Mat& x, const Mat& dt, const Mat& A, const Mat& B, const Mat& C,
                   const Vec& D) {
  check_shapes(x, dt, A, B, C);
  if (D.size() != x.cols()) throw std::invalid_argument("D size mismatch");
  if (!x.allFinite() || !dt.allFinite() || !A.allFinite() || !B.allFinite() ||
      !C.allFinite() || !D.allFinite()) {
    throw std::invalid_argument("non-finite scan input");
  }
  if ((dt.array() < 0.0).any()) throw std::invalid_argument("negative step size");

  Mat y = scan_core(x, dt, A, B, C, false);
  y.array() += x.array().rowwise() * D.transpose().array();
  return y;
}

ScanGrads scan_core_backward(const Mat& x, const Mat& dt, const Mat& A, const Mat& B,
                             const Mat& C, const Mat& dy, bool reverse) {
  check_shapes(x, dt, A, B, C);
  const long L = x.rows();
  const long d = x.cols();
  const long n = A.cols();
  if (dy.rows() != L || dy.cols() != d) throw std::invalid_argument("dy shape mismatch");

  ScanGrads gr;
  gr.dx = Mat::Zero(L, d);
  gr.ddt = Mat::Zero(L, d);
  gr.dA = Mat::Zero(d, n);
  gr.dB = Mat::Zero(L, n);
  gr.dC = Mat::Zero(L, n);

  // Materialize the exp factors (indexed by time) and the state trajectory
  // (indexed by scan step) so the adjoint sweep below can run right-to-left.
  const size_t plane = static_cast<size_t>(d) * n;
  TrackedAlloc scratch(((2 * static_cast<size_t>(L) + 1) * plane +
                        static_cast<size_t>(L) * d) *
                       sizeof(double));
  std::vector<double> gbuf(static_cast<size_t>(L) * plane);
  std::vector<double> hbuf(static_cast<size_t>(L) * plane);

  {
    Eigen::Map<Mat> G(gbuf.data(), L, static_cast<long>(plane));
    for (long c = 0; c < d; ++c) {
      G.middleCols(c * n, n).noalias() = dt.col(c) * A.row(c);
    }
    G = G.array().exp();
  }
  const Mat dtx = dt.cwiseProduct(x);

  for (long k = 0; k < L; ++k) {
    const long t = reverse ? L - 1 - k : k;
    const double* g = gbuf.data() + static_cast<size_t>(t) * plane;
    const double* hprev = k > 0 ? hbuf.data() + static_cast<size_t>(k - 1) * plane : nullptr;
    double* hk = hbuf.data() + static_cast<size_t>(k) * plane;
    const double* brow = B.data() + t * n;
    const double* dxrow = dtx.data() + t * d;
    for (long c = 0; c < d; ++c) {
      const double a = dxrow[c];
      const size_t off = static_cast<size_t>(c) * n;
      for (long j = 0; j < n; ++j) {
        const double prev = hprev ? hprev[off + j] * g[off + j] : 0.0;
        hk[off + j] = prev + a * brow[j];
      }
    }
  }

  Mat dh = Mat::Zero(d, n);
  for (long k = L - 1; k >= 0; --k) {
    const long t = reverse ? L - 1 - k : k;
    const double* g = gbuf.data() + static_cast<size_t>(t) * plane;
    const double* hk = hbuf.data() + static_cast<size_t>(k) * plane;
    const double* dyrow = dy.data() + t * d;
    const double* brow = B.data() + t * n;
    const double* crow = C.data() + t * n;
    const double* dxrow = dtx.data() + t * d;
    double* dCrow = gr.dC.data() + t * n;
    double* dBrow = gr.dB.data() + t * n;
    for (long c = 0; c < d; ++c) {
      const size_t off = static_cast<size_t>(c) * n;
      double* dhrow = dh.data() + off;
      double* dArow = gr.dA.data() + off;
      const double* arow = A.data() + off;
      const double dyc = dyrow[c];
      const double a = dxrow[c];
      const double dtc = dt(t, c);
      double wc = 0.0;    // <dh_c, B_t>, feeds the x and dt adjoints
      double ddtc = 0.0;  // sum_j m_cj * A_cj
      for (long j = 0; j < n; ++j) {
        const double hv = hk[off + j];
        const double dhv = dhrow[j] + dyc * crow[j];
        dCrow[j] += dyc * hv;
        dBrow[j] += a * dhv;
        wc += dhv * brow[j];
        // h_{t-1} .* g_t = h_t - (dt.*x)_t B_t, so the A/dt adjoints need
        // no separate previous-state read.
        const double mv = (hv - a * brow[j]) * dhv;
        dArow[j] += mv * dtc;
        ddtc += mv * arow[j];
        dhrow[j] = dhv * g[off + j];
      }
      gr.dx(t, c) = dtc * wc;
      gr.ddt(t, c) = x(t, c) * wc + ddtc;
    }
  }
  return gr;
}

}  // namespace adc
