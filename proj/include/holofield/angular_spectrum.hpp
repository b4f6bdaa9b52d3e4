#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "holofield/config.hpp"
#include "holofield/error.hpp"
#include "holofield/grid.hpp"
#include "holofield/hologram.hpp"
#include "holofield/parallel.hpp"

namespace holofield {

namespace detail {

// Planner calls are not thread safe; execution on distinct arrays is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

struct ComplexBuffer {
  std::unique_ptr<Complex, FftwFree> ptr;
  std::size_t n = 0;

  explicit ComplexBuffer(std::size_t count)
      : ptr(static_cast<Complex*>(fftw_malloc(sizeof(Complex) * count))), n(count) {
    if (!ptr) throw std::bad_alloc();
    std::fill(ptr.get(), ptr.get() + n, Complex{});
  }
  Complex* data() const { return ptr.get(); }
  fftw_complex* fftw() const { return reinterpret_cast<fftw_complex*>(ptr.get()); }
  Complex& operator[](std::size_t i) const { return ptr.get()[i]; }
};

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

}  // namespace detail

/// Angular-spectrum propagator for N x N fields sampled at the config pitch.
/// Fields are zero padded to 2N x 2N (centered) before transforming and
/// center-cropped afterwards. Transfer function:
///   H(fx, fy) = exp(i 2 pi z sqrt(1/lambda^2 - fx^2 - fy^2)), zero where evanescent.
class AngularSpectrum {
 public:
  AngularSpectrum(std::size_t n, const OpticalConfig& config)
      : n_(n), m_(2 * n), wavelength_(config.wavelength), scratch_(m_ * m_), kz_(m_ * m_) {
    if (n == 0) throw Error(ErrorKind::validation, "AngularSpectrum: empty field");
    {
      std::lock_guard lock(detail::fftw_planner_mutex());
      const int m = static_cast<int>(m_);
      forward_.reset(fftw_plan_dft_2d(m, m, scratch_.fftw(), scratch_.fftw(), FFTW_FORWARD,
                                      FFTW_ESTIMATE));
      inverse_.reset(fftw_plan_dft_2d(m, m, scratch_.fftw(), scratch_.fftw(), FFTW_BACKWARD,
                                      FFTW_ESTIMATE));
    }
    if (!forward_ || !inverse_) throw Error(ErrorKind::internal, "FFTW planning failed");
    const double df = 1.0 / (static_cast<double>(m_) * config.pixel_pitch);
    const double inv_l2 = 1.0 / (wavelength_ * wavelength_);
    for (std::size_t r = 0; r < m_; ++r) {
      const double fy = df * (r < m_ / 2 ? static_cast<double>(r) : static_cast<double>(r) - m_);
      for (std::size_t c = 0; c < m_; ++c) {
        const double fx = df * (c < m_ / 2 ? static_cast<double>(c) : static_cast<double>(c) - m_);
        const double arg = inv_l2 - fx * fx - fy * fy;
        kz_[r * m_ + c] = arg > 0.0 ? 2.0 * std::numbers::pi * std::sqrt(arg) : -1.0;
      }
    }
  }

  AngularSpectrum(const AngularSpectrum&) = delete;
  AngularSpectrum& operator=(const AngularSpectrum&) = delete;

  std::size_t size() const { return n_; }
  std::size_t padded_size() const { return m_; }

  /// Spectrum of the zero-padded field, reusable for many distances.
  detail::ComplexBuffer spectrum(const ComplexField& field) const {
    check(field);
    detail::ComplexBuffer buf(m_ * m_);
    const std::size_t off = n_ / 2;
    for (std::size_t r = 0; r < n_; ++r) {
      for (std::size_t c = 0; c < n_; ++c) buf[(r + off) * m_ + c + off] = field(r, c);
    }
    fftw_execute_dft(forward_.get(), buf.fftw(), buf.fftw());
    return buf;
  }

  /// Applies H(z) to `spectrum`, inverse transforms into `work` and crops.
  /// `work` must be an m x m buffer owned by the calling thread.
  ComplexField from_spectrum(const detail::ComplexBuffer& spectrum, double z,
                             detail::ComplexBuffer& work) const {
    const double norm = 1.0 / static_cast<double>(m_ * m_);
    for (std::size_t k = 0; k < m_ * m_; ++k) {
      const double kz = kz_[k];
      if (kz < 0.0) {
        work[k] = Complex{};
      } else {
        const double ph = kz * z;
        work[k] = spectrum[k] * Complex{std::cos(ph) * norm, std::sin(ph) * norm};
      }
    }
    fftw_execute_dft(inverse_.get(), work.fftw(), work.fftw());
    ComplexField out(n_, n_);
    const std::size_t off = n_ / 2;
    for (std::size_t r = 0; r < n_; ++r) {
      for (std::size_t c = 0; c < n_; ++c) out(r, c) = work[(r + off) * m_ + c + off];
    }
    return out;
  }

  ComplexField propagate(const ComplexField& field, double z) const {
    const auto spec = spectrum(field);
    detail::ComplexBuffer work(m_ * m_);
    return from_spectrum(spec, z, work);
  }

  /// Phase a uniform plane wave picks up over distance z.
  Complex plane_wave_factor(double z) const {
    const double ph = 2.0 * std::numbers::pi * z / wavelength_;
    return {std::cos(ph), std::sin(ph)};
  }

 private:
  void check(const ComplexField& f) const {
    if (f.rows() != n_ || f.cols() != n_) {
      throw Error(ErrorKind::validation, "AngularSpectrum: field size does not match propagator");
    }
  }

  std::size_t n_;
  std::size_t m_;
  double wavelength_;
  detail::ComplexBuffer scratch_;  // planning only
  std::vector<double> kz_;         // 2 pi * axial spatial frequency; -1 marks evanescent
  detail::Plan forward_;
  detail::Plan inverse_;
};

/// One-shot propagation of a square field by distance z (negative = backwards).
inline ComplexField angular_spectrum_propagate(const ComplexField& field, double z,
                                               const OpticalConfig& config) {
  if (field.rows() != field.cols()) {
    throw Error(ErrorKind::validation, "angular_spectrum_propagate: field must be square");
  }
  AngularSpectrum prop(field.rows(), config);
  return prop.propagate(field, z);
}

/// Back-propagated amplitude images over a uniform grid of depths.
struct SliceStack {
  std::vector<double> z_values;
  std::vector<Grid<float>> amplitude;    // |b_z + o_z|, empty when not requested
  std::vector<Grid<float>> fluctuation;  // |o_z|, empty when not requested
  double background = 0.0;               // mean of sqrt(I)

  std::size_t size() const { return z_values.size(); }
};

struct ReconstructOptions {
  bool keep_amplitude = true;
  bool keep_fluctuation = true;
  unsigned jobs = 1;
};

/// Uniform depth grid z_min + k (z_max - z_min) / (n - 1), k = 0..n-1.
inline std::vector<double> slice_depths(std::size_t n_slices, const OpticalConfig& config) {
  if (n_slices < 2) throw Error(ErrorKind::validation, "reconstruct_volume: need at least 2 slices");
  std::vector<double> z(n_slices);
  const double step = (config.z_max - config.z_min) / static_cast<double>(n_slices - 1);
  for (std::size_t k = 0; k < n_slices; ++k) z[k] = config.z_min + step * static_cast<double>(k);
  z.back() = config.z_max;
  return z;
}

/// Back-propagates sqrt(I) to every depth. The field is split into its mean b
/// and fluctuation; only the fluctuation goes through the padded transform and
/// the plane wave b is propagated analytically, so a uniform hologram yields
/// exactly uniform slices instead of window-edge diffraction.
inline SliceStack reconstruct_volume(const Hologram& hologram, std::size_t n_slices,
                                     const OpticalConfig& config,
                                     const ReconstructOptions& options = {}) {
  const Grid<float> intensity = raw_intensity(hologram);
  const std::size_t n = intensity.rows();
  if (n == 0 || n != intensity.cols()) {
    throw Error(ErrorKind::validation, "reconstruct_volume: hologram must be square and non-empty");
  }
  SliceStack stack;
  stack.z_values = slice_depths(n_slices, config);

  ComplexField field(n, n);
  double mean = 0.0;
  for (std::size_t k = 0; k < intensity.size(); ++k) {
    const double a = std::sqrt(std::max(0.0f, intensity.values()[k]));
    field.values()[k] = a;
    mean += a;
  }
  mean /= static_cast<double>(intensity.size());
  for (auto& v : field.values()) v -= mean;
  stack.background = mean;

  AngularSpectrum prop(n, config);
  const auto spectrum = prop.spectrum(field);
  if (options.keep_amplitude) stack.amplitude.resize(n_slices);
  if (options.keep_fluctuation) stack.fluctuation.resize(n_slices);

  const unsigned jobs = std::max(1u, options.jobs);
  std::vector<std::unique_ptr<detail::ComplexBuffer>> work(jobs);
  std::mutex work_mutex;
  std::vector<detail::ComplexBuffer*> free_work;
  parallel_for(n_slices, jobs, [&](std::size_t k) {
    detail::ComplexBuffer* buf = nullptr;
    {
      std::lock_guard lock(work_mutex);
      if (!free_work.empty()) {
        buf = free_work.back();
        free_work.pop_back();
      } else {
        for (auto& w : work) {
          if (!w) {
            w = std::make_unique<detail::ComplexBuffer>(prop.padded_size() * prop.padded_size());
            buf = w.get();
            break;
          }
        }
      }
    }
    const double z = stack.z_values[k];
    const ComplexField o = prop.from_spectrum(spectrum, -z, *buf);
    const Complex b = mean * prop.plane_wave_factor(-z);
    if (options.keep_amplitude) {
      Grid<float> amp(n, n);
      for (std::size_t i = 0; i < o.size(); ++i) {
        amp.values()[i] = static_cast<float>(std::abs(b + o.values()[i]));
      }
      stack.amplitude[k] = std::move(amp);
    }
    if (options.keep_fluctuation) {
      Grid<float> fl(n, n);
      for (std::size_t i = 0; i < o.size(); ++i) fl.values()[i] = static_cast<float>(std::abs(o.values()[i]));
      stack.fluctuation[k] = std::move(fl);
    }
    std::lock_guard lock(work_mutex);
    free_work.push_back(buf);
  });
  return stack;
}

}  // namespace holofield
