#include "mfl/spectral.hpp"

#include <algorithm>

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

namespace mfl {

namespace {

// FFTW's planner is not thread-safe; execution on distinct plans is. All
// plans use FFTW_ESTIMATE so the chosen algorithm (and therefore the exact
// floating-point result) never depends on measurement noise.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct Workspace {
  TorusGrid grid;
  double* real = nullptr;
  fftw_complex* cplx = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  std::size_t n_real = 0, n_cplx = 0;

  explicit Workspace(const TorusGrid& g) : grid(g) {
    const int M = g.M;
    n_real = static_cast<std::size_t>(g.size());
    n_cplx = (g.d == 1) ? static_cast<std::size_t>(M / 2 + 1)
                        : static_cast<std::size_t>(M) * (M / 2 + 1);
    real = fftw_alloc_real(n_real);
    cplx = fftw_alloc_complex(n_cplx);
    if (!real || !cplx) throw std::bad_alloc();
    std::lock_guard lock(planner_mutex());
    if (g.d == 1) {
      fwd = fftw_plan_dft_r2c_1d(M, real, cplx, FFTW_ESTIMATE);
      bwd = fftw_plan_dft_c2r_1d(M, cplx, real, FFTW_ESTIMATE);
    } else {
      fwd = fftw_plan_dft_r2c_2d(M, M, real, cplx, FFTW_ESTIMATE);
      bwd = fftw_plan_dft_c2r_2d(M, M, cplx, real, FFTW_ESTIMATE);
    }
    if (!fwd || !bwd) throw std::runtime_error("fftw plan creation failed");
  }
  ~Workspace() {
    std::lock_guard lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    fftw_free(real);
    fftw_free(cplx);
  }
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;
};

Workspace& workspace_for(const TorusGrid& g) {
  thread_local std::unordered_map<std::uint64_t, std::unique_ptr<Workspace>> cache;
  std::uint64_t key = (static_cast<std::uint64_t>(g.d) << 32) | static_cast<std::uint32_t>(g.M);
  auto& slot = cache[key];
  if (!slot) slot = std::make_unique<Workspace>(g);
  return *slot;
}

}  // namespace

Spectrum forward(const Field& f) {
  Workspace& w = workspace_for(f.grid);
  std::memcpy(w.real, f.v.data(), w.n_real * sizeof(double));
  fftw_execute(w.fwd);
  Spectrum s{f.grid, std::vector<std::complex<double>>(w.n_cplx)};
  // fftw_complex is double[2] with the same layout the standard guarantees
  // for std::complex<double>.
  std::copy_n(reinterpret_cast<const std::complex<double>*>(w.cplx), w.n_cplx, s.c.data());
  return s;
}

Field backward(const Spectrum& s) {
  Workspace& w = workspace_for(s.grid);
  if (s.c.size() != w.n_cplx) throw std::invalid_argument("backward: spectrum size mismatch");
  // c2r destroys its input, hence the copy into the workspace buffer.
  std::copy_n(s.c.data(), w.n_cplx, reinterpret_cast<std::complex<double>*>(w.cplx));
  fftw_execute(w.bwd);
  Field f(s.grid);
  const double scale = 1.0 / static_cast<double>(s.grid.size());
  for (std::size_t i = 0; i < w.n_real; ++i) f.v[i] = w.real[i] * scale;
  return f;
}

Field convolve(const Field& f, const Field& g) {
  if (!(f.grid == g.grid)) throw std::invalid_argument("convolve: grid mismatch");
  Spectrum sf = forward(f);
  Spectrum sg = forward(g);
  double hd = f.grid.h();
  if (f.grid.d == 2) hd *= f.grid.h();
  const int M = f.grid.M;
  const int half = M / 2 + 1;
  if (f.grid.d == 1) {
    for (int k = 0; k < half; ++k) {
      double sign = (k % 2 == 0) ? 1.0 : -1.0;
      sf.c[static_cast<std::size_t>(k)] *= sg.c[static_cast<std::size_t>(k)] * (hd * sign);
    }
  } else {
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < half; ++j) {
        double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
        std::size_t idx = static_cast<std::size_t>(i) * half + j;
        sf.c[idx] *= sg.c[idx] * (hd * sign);
      }
  }
  return backward(sf);
}

std::vector<Field> spectral_gradient(const Field& f, double* top_octave) {
  if (top_octave) *top_octave = top_octave_fraction(f);
  Spectrum s = forward(f);
  const double two_pi = 2.0 * std::numbers::pi;
  const int M = f.grid.M;
  std::vector<Field> out;
  out.reserve(f.grid.d);
  for (int a = 0; a < f.grid.d; ++a) {
    Spectrum da = s;
    for_each_mode(da, [&](int k1, int k2, std::complex<double>& c) {
      int ka = (a == 0) ? k1 : k2;
      if (std::abs(k1) == M / 2 || k2 == M / 2)
        c = 0.0;
      else
        c *= std::complex<double>(0.0, two_pi * ka);
    });
    out.push_back(backward(da));
  }
  return out;
}

double top_octave_fraction(const Field& f) {
  Spectrum s = forward(f);
  const int M = f.grid.M;
  double total = 0.0, top = 0.0;
  for_each_mode(s, [&](int k1, int k2, std::complex<double>& c) {
    if (k1 == 0 && k2 == 0) return;
    // Stored half-spectrum: modes with k2 in (0, M/2) stand for a conjugate
    // pair, the k2 = 0 and k2 = M/2 columns do not (d=1: only k=0..M/2 held).
    double mult = (k2 == 0 || k2 == M / 2) ? 1.0 : 2.0;
    if (f.grid.d == 1) mult = (k1 == 0 || k1 == M / 2) ? 1.0 : 2.0;
    double e = mult * std::norm(c);
    total += e;
    if (std::max(std::abs(k1), std::abs(k2)) > M / 4) top += e;
  });
  return total > 0.0 ? top / total : 0.0;
}

Field shift_field(const Field& f, const double* y) {
  Spectrum s = forward(f);
  const double two_pi = 2.0 * std::numbers::pi;
  const int M = f.grid.M;
  for_each_mode(s, [&](int k1, int k2, std::complex<double>& c) {
    double phase = -two_pi * (k1 * y[0] + (f.grid.d == 2 ? k2 * y[1] : 0.0));
    if (std::abs(k1) == M / 2 || k2 == M / 2)
      c *= std::cos(phase);
    else
      c *= std::complex<double>(std::cos(phase), std::sin(phase));
  });
  return backward(s);
}

void dealias_23(Spectrum& s) {
  const int cut = s.grid.M / 3;
  for_each_mode(s, [&](int k1, int k2, std::complex<double>& c) {
    if (std::abs(k1) > cut || k2 > cut) c = 0.0;
  });
}

Field heat_semigroup(const Field& f, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("heat_semigroup: t must be >= 0");
  Spectrum s = forward(f);
  const double two_pi = 2.0 * std::numbers::pi;
  for_each_mode(s, [&](int k1, int k2, std::complex<double>& c) {
    double w2 = two_pi * two_pi * (static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2);
    c *= std::exp(-0.5 * t * w2);
  });
  return backward(s);
}

}  // namespace mfl
