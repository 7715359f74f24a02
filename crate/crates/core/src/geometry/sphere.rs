//! Round sphere of unit area on a Gauss–Legendre x equiangular grid with a
//! direct (non-fast) real spherical-harmonic transform.
//!
//! Harmonics are orthonormal with respect to the normalized area measure, so a
//! field's coefficients are plain quadrature inner products. Associated
//! Legendre functions are normalized to `1/2 * int_{-1}^{1} P^2 dx = 1`; the
//! Condon–Shortley phase is not used.

use std::f64::consts::PI;

/// Index of `(l, m)` in triangular coefficient storage, `0 <= m <= l`.
#[inline]
pub(crate) fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Real spherical-harmonic coefficients up to degree `lmax`. `sin` entries with
/// `m = 0` are always zero.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SphCoeffs {
    pub(crate) lmax: usize,
    pub(crate) cos: Vec<f64>,
    pub(crate) sin: Vec<f64>,
}

impl SphCoeffs {
    pub(crate) fn zeros(lmax: usize) -> Self {
        let len = tri(lmax, lmax) + 1;
        Self {
            lmax,
            cos: vec![0.0; len],
            sin: vec![0.0; len],
        }
    }
}

#[derive(Debug)]
pub(crate) struct SphereGrid {
    lmax: usize,
    nlat: usize,
    nlon: usize,
    /// `cos(theta_j)`, descending.
    mu: Vec<f64>,
    /// Gauss–Legendre weights on `[-1, 1]` (sum 2).
    gl_weights: Vec<f64>,
    /// `legendre[tri(l, m) * nlat + j]`.
    legendre: Vec<f64>,
    /// `cos(m phi_k)` and `sin(m phi_k)` at `[m * nlon + k]`.
    cos_table: Vec<f64>,
    sin_table: Vec<f64>,
}

/// Gauss–Legendre nodes (descending) and weights on `[-1, 1]`.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Three-term recurrence for P_n and its derivative.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let (pn, pn1) = if n == 0 {
                (1.0, 0.0)
            } else if n == 1 {
                (x, 1.0)
            } else {
                (p1, p0)
            };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Normalized associated Legendre functions `P^_l^m(mu)` for all `m <= l <= lmax`.
pub(crate) fn legendre_all(lmax: usize, mu: f64) -> Vec<f64> {
    let mut out = vec![0.0; tri(lmax, lmax) + 1];
    let s = (1.0 - mu * mu).max(0.0).sqrt();
    let mut pmm = 1.0;
    for m in 0..=lmax {
        if m > 0 {
            let mf = m as f64;
            pmm *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s;
        }
        out[tri(m, m)] = pmm;
        if m == lmax {
            break;
        }
        let mf = m as f64;
        out[tri(m + 1, m)] = (2.0 * mf + 3.0).sqrt() * mu * pmm;
        for l in (m + 2)..=lmax {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                .sqrt();
            out[tri(l, m)] = a * (mu * out[tri(l - 1, m)] - b * out[tri(l - 2, m)]);
        }
    }
    out
}

impl SphereGrid {
    pub(crate) fn new(lmax: usize) -> Self {
        let nlat = lmax + 1;
        let nlon = 2 * (lmax + 1);
        let (mu, gl_weights) = gauss_legendre(nlat);
        let ncoef = tri(lmax, lmax) + 1;
        let mut legendre = vec![0.0; ncoef * nlat];
        for (j, &x) in mu.iter().enumerate() {
            for (idx, p) in legendre_all(lmax, x).into_iter().enumerate() {
                legendre[idx * nlat + j] = p;
            }
        }
        let mut cos_table = vec![0.0; (lmax + 1) * nlon];
        let mut sin_table = vec![0.0; (lmax + 1) * nlon];
        for m in 0..=lmax {
            for k in 0..nlon {
                let phi = 2.0 * PI * k as f64 / nlon as f64;
                cos_table[m * nlon + k] = (m as f64 * phi).cos();
                sin_table[m * nlon + k] = (m as f64 * phi).sin();
            }
        }
        Self {
            lmax,
            nlat,
            nlon,
            mu,
            gl_weights,
            legendre,
            cos_table,
            sin_table,
        }
    }

    pub(crate) fn node_count(&self) -> usize {
        self.nlat * self.nlon
    }

    /// Colatitude and longitude of a node.
    pub(crate) fn coords(&self, node: usize) -> (f64, f64) {
        let j = node / self.nlon;
        let k = node % self.nlon;
        (self.mu[j].acos(), 2.0 * PI * k as f64 / self.nlon as f64)
    }

    /// Quadrature weight of every node; sums to one.
    pub(crate) fn node_weights(&self) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.node_count());
        for j in 0..self.nlat {
            let wj = self.gl_weights[j] / (2.0 * self.nlon as f64);
            w.extend(std::iter::repeat_n(wj, self.nlon));
        }
        w
    }

    /// `4 pi l (l + 1)`: the Laplacian eigenvalue magnitude at degree `l` for
    /// the sphere of area one (`r^2 = 1/(4 pi)`).
    pub(crate) fn eigenvalue(l: usize) -> f64 {
        -4.0 * PI * (l * (l + 1)) as f64
    }

    pub(crate) fn max_eigenvalue(&self) -> f64 {
        -Self::eigenvalue(self.lmax)
    }

    pub(crate) fn analysis(&self, values: &[f64]) -> SphCoeffs {
        let (nlat, nlon, lmax) = (self.nlat, self.nlon, self.lmax);
        let mut fc = vec![0.0; nlat * (lmax + 1)];
        let mut fs = vec![0.0; nlat * (lmax + 1)];
        for j in 0..nlat {
            let ring = &values[j * nlon..(j + 1) * nlon];
            let scale = self.gl_weights[j] / (2.0 * nlon as f64);
            for m in 0..=lmax {
                let ct = &self.cos_table[m * nlon..(m + 1) * nlon];
                let st = &self.sin_table[m * nlon..(m + 1) * nlon];
                let (mut c, mut s) = (0.0, 0.0);
                for k in 0..nlon {
                    c += ring[k] * ct[k];
                    s += ring[k] * st[k];
                }
                fc[j * (lmax + 1) + m] = c * scale;
                fs[j * (lmax + 1) + m] = s * scale;
            }
        }
        let mut out = SphCoeffs::zeros(lmax);
        for m in 0..=lmax {
            let norm = if m == 0 {
                1.0
            } else {
                std::f64::consts::SQRT_2
            };
            for l in m..=lmax {
                let idx = tri(l, m);
                let p = &self.legendre[idx * nlat..(idx + 1) * nlat];
                let (mut c, mut s) = (0.0, 0.0);
                for j in 0..nlat {
                    c += p[j] * fc[j * (lmax + 1) + m];
                    s += p[j] * fs[j * (lmax + 1) + m];
                }
                out.cos[idx] = c * norm;
                out.sin[idx] = if m == 0 { 0.0 } else { s * norm };
            }
        }
        out
    }

    pub(crate) fn synthesis(&self, coeffs: &SphCoeffs) -> Vec<f64> {
        let (nlat, nlon, lmax) = (self.nlat, self.nlon, self.lmax);
        let top = coeffs.lmax.min(lmax);
        let mut values = vec![0.0; nlat * nlon];
        let mut gc = vec![0.0; top + 1];
        let mut gs = vec![0.0; top + 1];
        for j in 0..nlat {
            for m in 0..=top {
                let norm = if m == 0 {
                    1.0
                } else {
                    std::f64::consts::SQRT_2
                };
                let (mut c, mut s) = (0.0, 0.0);
                for l in m..=top {
                    let p = self.legendre[tri(l, m) * nlat + j];
                    c += coeffs.cos[tri(l, m)] * p;
                    s += coeffs.sin[tri(l, m)] * p;
                }
                gc[m] = c * norm;
                gs[m] = s * norm;
            }
            let ring = &mut values[j * nlon..(j + 1) * nlon];
            for m in 0..=top {
                let ct = &self.cos_table[m * nlon..(m + 1) * nlon];
                let st = &self.sin_table[m * nlon..(m + 1) * nlon];
                for k in 0..nlon {
                    ring[k] += gc[m] * ct[k] + gs[m] * st[k];
                }
            }
        }
        values
    }

    pub(crate) fn apply_symbol(&self, values: &[f64], symbol: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut c = self.analysis(values);
        for l in 0..=self.lmax {
            let factor = symbol(Self::eigenvalue(l));
            for m in 0..=l {
                c.cos[tri(l, m)] *= factor;
                c.sin[tri(l, m)] *= factor;
            }
        }
        self.synthesis(&c)
    }

    pub(crate) fn truncate(&self, values: &[f64], band: usize) -> Vec<f64> {
        let mut c = self.analysis(values);
        for l in (band + 1)..=self.lmax {
            for m in 0..=l {
                c.cos[tri(l, m)] = 0.0;
                c.sin[tri(l, m)] = 0.0;
            }
        }
        self.synthesis(&c)
    }

    pub(crate) fn resample(&self, values: &[f64], target: &SphereGrid) -> Vec<f64> {
        let c = self.analysis(values);
        let mut out = SphCoeffs::zeros(target.lmax);
        let top = self.lmax.min(target.lmax);
        for l in 0..=top {
            for m in 0..=l {
                out.cos[tri(l, m)] = c.cos[tri(l, m)];
                out.sin[tri(l, m)] = c.sin[tri(l, m)];
            }
        }
        target.synthesis(&out)
    }
}
