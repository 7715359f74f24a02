//! Flat unit torus `[0,1)^2` sampled on an `N x N` grid, with FFT-based
//! spectral operators.
//!
//! Grid values are stored row-major, `values[iy * n + ix]` at `(ix/n, iy/n)`.
//! Spectral arrays use the same layout with `(ky, kx)` in FFT order.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Spectral coefficients of a real field: the `kx >= 0` half of the 2D
/// spectrum, stored column-major as `spec[ix * n + iy]` with `iy` in FFT
/// order. Unnormalized, like the forward transform.
type HalfSpectrum = Vec<Complex64>;

pub(crate) struct TorusGrid {
    n: usize,
    row_forward: Arc<dyn RealToComplex<f64>>,
    row_inverse: Arc<dyn ComplexToReal<f64>>,
    col_forward: Arc<dyn Fft<f64>>,
    col_inverse: Arc<dyn Fft<f64>>,
    /// Signed wavenumber per FFT index.
    wavenumbers: Vec<i64>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid").field("n", &self.n).finish()
    }
}

impl TorusGrid {
    pub(crate) fn new(n: usize) -> Self {
        let mut real = RealFftPlanner::new();
        let mut complex = FftPlanner::new();
        let wavenumbers = (0..n)
            .map(|i| {
                if i <= n / 2 {
                    i as i64
                } else {
                    i as i64 - n as i64
                }
            })
            .collect();
        Self {
            n,
            row_forward: real.plan_fft_forward(n),
            row_inverse: real.plan_fft_inverse(n),
            col_forward: complex.plan_fft_forward(n),
            col_inverse: complex.plan_fft_inverse(n),
            wavenumbers,
        }
    }

    /// Number of stored `kx` columns.
    fn half(&self) -> usize {
        self.n / 2 + 1
    }

    pub(crate) fn node_count(&self) -> usize {
        self.n * self.n
    }

    pub(crate) fn coords(&self, node: usize) -> (f64, f64) {
        let n = self.n as f64;
        ((node % self.n) as f64 / n, (node / self.n) as f64 / n)
    }

    fn is_nyquist(&self, index: usize) -> bool {
        self.n.is_multiple_of(2) && index == self.n / 2
    }

    /// Largest magnitude of a Laplacian eigenvalue representable on the grid.
    pub(crate) fn max_eigenvalue(&self) -> f64 {
        let k = (self.n / 2) as f64;
        4.0 * PI * PI * 2.0 * k * k
    }

    /// Unnormalized forward transform.
    pub(crate) fn forward(&self, values: &[f64]) -> HalfSpectrum {
        let (n, h) = (self.n, self.half());
        let mut spec = vec![Complex64::new(0.0, 0.0); h * n];
        let mut row = self.row_forward.make_input_vec();
        let mut out = self.row_forward.make_output_vec();
        for iy in 0..n {
            row.copy_from_slice(&values[iy * n..(iy + 1) * n]);
            self.row_forward
                .process(&mut row, &mut out)
                .expect("row buffers sized by the plan");
            for (ix, c) in out.iter().enumerate() {
                spec[ix * n + iy] = *c;
            }
        }
        self.col_forward.process(&mut spec);
        spec
    }

    /// Inverse of [`forward`](Self::forward). The input is treated as the
    /// half of a Hermitian spectrum.
    pub(crate) fn inverse_real(&self, mut spec: HalfSpectrum) -> Vec<f64> {
        let (n, h) = (self.n, self.half());
        self.col_inverse.process(&mut spec);
        let mut row = self.row_inverse.make_input_vec();
        let mut out = self.row_inverse.make_output_vec();
        let mut values = vec![0.0; n * n];
        let scale = 1.0 / self.node_count() as f64;
        for iy in 0..n {
            for (ix, c) in row.iter_mut().enumerate() {
                *c = spec[ix * n + iy];
            }
            // the DC and Nyquist columns of a real row are real
            row[0].im = 0.0;
            if n % 2 == 0 {
                row[h - 1].im = 0.0;
            }
            self.row_inverse
                .process(&mut row, &mut out)
                .expect("row buffers sized by the plan");
            for (v, o) in values[iy * n..(iy + 1) * n].iter_mut().zip(&out) {
                *v = o * scale;
            }
        }
        values
    }

    /// `(kx, ky)` of every stored coefficient, in storage order.
    fn modes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.half()).flat_map(move |ix| (0..self.n).map(move |iy| (ix, iy)))
    }

    /// Multiply every Fourier mode by `symbol(lambda)` where `lambda` is the
    /// mode's Laplacian eigenvalue `-4 pi^2 |k|^2`.
    pub(crate) fn apply_symbol(&self, values: &[f64], symbol: impl Fn(f64) -> f64) -> Vec<f64> {
        let n = self.n;
        let mut spec = self.forward(values);
        for (ix, iy) in self.modes() {
            let (kx, ky) = (self.wavenumbers[ix] as f64, self.wavenumbers[iy] as f64);
            spec[ix * n + iy] *= symbol(-4.0 * PI * PI * (kx * kx + ky * ky));
        }
        self.inverse_real(spec)
    }

    /// Spectral partial derivatives `(d/dx, d/dy)`. The Nyquist mode has no
    /// well-defined odd derivative and is dropped.
    pub(crate) fn gradient(&self, values: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let spec = self.forward(values);
        let mut dx = spec.clone();
        let mut dy = spec;
        for (ix, iy) in self.modes() {
            let idx = ix * n + iy;
            let kx = if self.is_nyquist(ix) {
                0.0
            } else {
                self.wavenumbers[ix] as f64
            };
            let ky = if self.is_nyquist(iy) {
                0.0
            } else {
                self.wavenumbers[iy] as f64
            };
            dx[idx] *= Complex64::new(0.0, 2.0 * PI * kx);
            dy[idx] *= Complex64::new(0.0, 2.0 * PI * ky);
        }
        (self.inverse_real(dx), self.inverse_real(dy))
    }

    /// Zero every mode with `max(|kx|, |ky|) > band`.
    pub(crate) fn truncate(&self, values: &[f64], band: usize) -> Vec<f64> {
        let n = self.n;
        let band = band as i64;
        let mut spec = self.forward(values);
        for (ix, iy) in self.modes() {
            if self.wavenumbers[ix].abs() > band || self.wavenumbers[iy].abs() > band {
                spec[ix * n + iy] = Complex64::new(0.0, 0.0);
            }
        }
        self.inverse_real(spec)
    }

    /// Spectral resampling onto another torus grid (truncation or zero padding).
    /// Nyquist content of the source is discarded.
    pub(crate) fn resample(&self, values: &[f64], target: &TorusGrid) -> Vec<f64> {
        let spec = self.forward(values);
        let (n, m) = (self.n, target.n);
        let keep = ((n.min(m) - 1) / 2) as i64;
        let mut out = vec![Complex64::new(0.0, 0.0); target.half() * m];
        let wrap = |k: i64, len: usize| {
            if k >= 0 {
                k as usize
            } else {
                (len as i64 + k) as usize
            }
        };
        let scale = (m * m) as f64 / (n * n) as f64;
        for ky in -keep..=keep {
            for kx in 0..=keep as usize {
                out[kx * m + wrap(ky, m)] = spec[kx * n + wrap(ky, n)] * scale;
            }
        }
        target.inverse_real(out)
    }

    /// Synthesize `Re sum_k c_k exp(2 pi i k.x)` from complex amplitudes given
    /// per wavenumber pair.
    pub(crate) fn synthesize(&self, modes: &[((i64, i64), Complex64)]) -> Vec<f64> {
        let n = self.n;
        let mut spec = vec![Complex64::new(0.0, 0.0); self.half() * n];
        let wrap = |k: i64| {
            if k >= 0 {
                k as usize
            } else {
                (n as i64 + k) as usize
            }
        };
        let norm = (n * n) as f64;
        for &((kx, ky), c) in modes {
            // Re(c e_k) = (c e_k + conj(c) e_{-k}) / 2; store the kx >= 0 halves
            for (kx, ky, c) in [(kx, ky, c), (-kx, -ky, c.conj())] {
                let ix = wrap(kx);
                if ix < self.half() {
                    spec[ix * n + wrap(ky)] += 0.5 * c * norm;
                }
            }
        }
        self.inverse_real(spec)
    }
}
