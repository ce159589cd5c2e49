//! Fourier representation of real periodic velocity fields on the 2π box.
//!
//! Coefficients are normalized so that the L² norm over the box is the plain
//! coefficient sum, `‖u‖²_H = Σ_k |û(k)|²`. Concretely
//! `u(x) = (2π)⁻¹ Σ_k û(k) e^{ik·x}`, so `û = (2π / n²) · DFT(u)`.
//!
//! Storage is the full `n × n` DFT layout per component, row index for `k_x`
//! and column index for `k_y`. The Nyquist row and column are always zero and
//! so is the mean mode. On this box with zero-mean fields the lowest Stokes
//! eigenvalue is `λ₁ = 1` and the Poincaré constant is `c_ρ = 1`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DOMAIN_LENGTH: f64 = 2.0 * PI;

/// Smallest eigenvalue of the Stokes operator on the zero-mean 2π box.
pub fn stokes_lambda1() -> f64 {
    1.0
}

/// Best Poincaré constant `c_ρ = λ₁^{-1/2}`.
pub fn poincare_constant() -> f64 {
    stokes_lambda1().powf(-0.5)
}

/// Largest retained wavenumber component under the 2/3 rule: `3K < n`.
pub fn dealias_cutoff(n: usize) -> i64 {
    ((n - 1) / 3) as i64
}

/// Signed wavenumber of DFT index `i` on an `n`-point grid.
#[inline]
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

#[inline]
pub(crate) fn mirror(i: usize, n: usize) -> usize {
    (n - i) % n
}

pub(crate) fn check_resolution(n: usize) -> Result<()> {
    if n < 8 || !n.is_multiple_of(2) {
        return Err(Error::Structural(format!(
            "resolution must be even and at least 8, got {n}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// FFT plans

pub(crate) struct Plan {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Plan {
    fn scratch(&self) -> Vec<Complex64> {
        let len = self
            .fwd
            .get_inplace_scratch_len()
            .max(self.inv.get_inplace_scratch_len());
        vec![Complex64::new(0.0, 0.0); len]
    }

    fn transform(&self, buf: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let mut scratch = self.scratch();
        fft.process_with_scratch(buf, &mut scratch);
        transpose(buf, self.n);
        fft.process_with_scratch(buf, &mut scratch);
        transpose(buf, self.n);
    }

    /// Unnormalized forward 2D DFT.
    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        self.transform(buf, &self.fwd);
    }

    /// Unnormalized inverse 2D DFT.
    pub(crate) fn inverse(&self, buf: &mut [Complex64]) {
        self.transform(buf, &self.inv);
    }
}

fn transpose(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

pub(crate) fn plan(n: usize) -> Arc<Plan> {
    static PLANS: OnceLock<Mutex<HashMap<usize, Arc<Plan>>>> = OnceLock::new();
    let plans = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = plans.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plan {
                n,
                fwd: planner.plan_fft_forward(n),
                inv: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

/// Synthesizes two real grids from two Hermitian spectra with one complex transform.
pub(crate) fn to_physical_pair(n: usize, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    let i = Complex64::new(0.0, 1.0);
    let mut buf: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x + i * y).collect();
    plan(n).inverse(&mut buf);
    let s = 1.0 / DOMAIN_LENGTH;
    let re = buf.iter().map(|z| z.re * s).collect();
    let im = buf.iter().map(|z| z.im * s).collect();
    (re, im)
}

/// Analyzes two real grids with one complex transform. Nyquist modes are dropped.
pub(crate) fn from_physical_pair(
    n: usize,
    a: &[f64],
    b: &[f64],
) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut buf: Vec<Complex64> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| Complex64::new(x, y))
        .collect();
    plan(n).forward(&mut buf);
    let s = DOMAIN_LENGTH / (n * n) as f64;
    let mut ah = vec![Complex64::new(0.0, 0.0); n * n];
    let mut bh = vec![Complex64::new(0.0, 0.0); n * n];
    let half = n / 2;
    for ix in 0..n {
        if ix == half {
            continue;
        }
        let mx = mirror(ix, n);
        for iy in 0..n {
            if iy == half {
                continue;
            }
            let z = buf[ix * n + iy];
            let zc = buf[mx * n + mirror(iy, n)].conj();
            ah[ix * n + iy] = (z + zc) * (0.5 * s);
            // (z - zc) / 2i
            let d = (z - zc) * (0.5 * s);
            bh[ix * n + iy] = Complex64::new(d.im, -d.re);
        }
    }
    (ah, bh)
}

pub(crate) fn grid_points(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| DOMAIN_LENGTH * i as f64 / n as f64)
        .collect()
}

// ---------------------------------------------------------------------------
// Random spectra

/// Radial envelope used to draw seeded random fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Spectrum {
    /// Flat amplitude for `k_lo ≤ |k| ≤ k_hi`.
    Band { k_lo: f64, k_hi: f64 },
    /// Gaussian shell `exp(-(|k| - center)² / 2 width²)`.
    Shell { center: f64, width: f64 },
}

impl Spectrum {
    fn weight(&self, kmag: f64) -> f64 {
        match *self {
            Spectrum::Band { k_lo, k_hi } => {
                if kmag >= k_lo && kmag <= k_hi {
                    1.0
                } else {
                    0.0
                }
            }
            Spectrum::Shell { center, width } => {
                let d = (kmag - center) / width;
                let w = (-0.5 * d * d).exp();
                if w < 1e-30 {
                    0.0
                } else {
                    w
                }
            }
        }
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

// ---------------------------------------------------------------------------
// Vector fields

/// Real, zero-mean 2D vector field stored as Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    n: usize,
    c: [Vec<Complex64>; 2],
}

/// The three norms of the Gelfand triple `V ⊂ H ⊂ V'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub h_norm: f64,
    pub v_norm: f64,
    pub vdual_norm: f64,
}

impl SpectralField {
    pub fn zeros(n: usize) -> Result<Self> {
        check_resolution(n)?;
        let z = vec![Complex64::new(0.0, 0.0); n * n];
        Ok(Self {
            n,
            c: [z.clone(), z],
        })
    }

    /// Wraps raw coefficients. Conjugate symmetry is checked; Nyquist entries must be zero.
    pub fn from_coefficients(n: usize, u1: Vec<Complex64>, u2: Vec<Complex64>) -> Result<Self> {
        check_resolution(n)?;
        if u1.len() != n * n || u2.len() != n * n {
            return Err(Error::Structural(format!(
                "expected {} coefficients per component, got {} and {}",
                n * n,
                u1.len(),
                u2.len()
            )));
        }
        let field = Self { n, c: [u1, u2] };
        let scale = field.h_norm_raw().max(f64::MIN_POSITIVE);
        let half = n / 2;
        for comp in &field.c {
            for ix in 0..n {
                for iy in 0..n {
                    let z = comp[ix * n + iy];
                    if (ix == half || iy == half) && z != Complex64::new(0.0, 0.0) {
                        return Err(Error::Structural("nonzero Nyquist coefficient".into()));
                    }
                    let zm = comp[mirror(ix, n) * n + mirror(iy, n)];
                    if (z - zm.conj()).norm() > 1e-12 * scale {
                        return Err(Error::Precondition(format!(
                            "coefficients are not conjugate symmetric at ({}, {})",
                            wavenumber(ix, n),
                            wavenumber(iy, n)
                        )));
                    }
                }
            }
        }
        Ok(field)
    }

    pub(crate) fn from_raw(n: usize, u1: Vec<Complex64>, u2: Vec<Complex64>) -> Self {
        Self { n, c: [u1, u2] }
    }

    /// Samples `f` on the collocation grid. The result is mean-free but not projected.
    pub fn from_fn<F: Fn(f64, f64) -> [f64; 2]>(n: usize, f: F) -> Result<Self> {
        check_resolution(n)?;
        let xs = grid_points(n);
        let mut a = vec![0.0; n * n];
        let mut b = vec![0.0; n * n];
        for (ix, &x) in xs.iter().enumerate() {
            for (iy, &y) in xs.iter().enumerate() {
                let v = f(x, y);
                a[ix * n + iy] = v[0];
                b[ix * n + iy] = v[1];
            }
        }
        let (u1, u2) = from_physical_pair(n, &a, &b);
        let mut field = Self { n, c: [u1, u2] };
        field.pin_mean();
        Ok(field)
    }

    /// Divergence-free single Fourier mode `A k⊥/|k| cos(k·x)` with `‖u‖_H = h_norm`.
    pub fn single_mode(n: usize, k: [i64; 2], h_norm: f64) -> Result<Self> {
        check_resolution(n)?;
        let kmax = (n / 2) as i64;
        if k == [0, 0] || k[0].abs() >= kmax || k[1].abs() >= kmax {
            return Err(Error::Precondition(format!(
                "mode {k:?} not representable at n = {n}"
            )));
        }
        let mut field = Self::zeros(n)?;
        let kn = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
        let dir = [-(k[1] as f64) / kn, k[0] as f64 / kn];
        // cos(k·x) carries two conjugate coefficients of magnitude h/√2 each.
        let amp = h_norm / 2f64.sqrt();
        let idx = field.index(k[0], k[1]);
        let idx_m = field.index(-k[0], -k[1]);
        for d in 0..2 {
            field.c[d][idx] += Complex64::new(amp * dir[d], 0.0);
            field.c[d][idx_m] += Complex64::new(amp * dir[d], 0.0);
        }
        Ok(field)
    }

    /// Taylor–Green cell `A (sin x cos y, −cos x sin y)`.
    pub fn taylor_green(n: usize, amplitude: f64) -> Result<Self> {
        let f = Self::from_fn(n, |x, y| {
            [
                amplitude * x.sin() * y.cos(),
                -amplitude * x.cos() * y.sin(),
            ]
        })?;
        Ok(f.leray_project())
    }

    /// Seeded random divergence-free field inside the dealiased band, scaled to `h_norm`.
    pub fn random_solenoidal<R: Rng + ?Sized>(
        n: usize,
        spectrum: Spectrum,
        h_norm: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let mut f = Self::random_with(n, spectrum, rng, |kx, ky, s| {
            let kn = ((kx * kx + ky * ky) as f64).sqrt();
            [s[0] * (-(ky as f64) / kn), s[0] * (kx as f64 / kn)]
        })?;
        f.normalize_to(h_norm)?;
        Ok(f)
    }

    /// Seeded random field with independent components (generally not divergence-free).
    pub fn random_vector<R: Rng + ?Sized>(
        n: usize,
        spectrum: Spectrum,
        h_norm: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let mut f = Self::random_with(n, spectrum, rng, |_, _, s| [s[0], s[1]])?;
        f.normalize_to(h_norm)?;
        Ok(f)
    }

    fn random_with<R, G>(n: usize, spectrum: Spectrum, rng: &mut R, shape: G) -> Result<Self>
    where
        R: Rng + ?Sized,
        G: Fn(i64, i64, [Complex64; 2]) -> [Complex64; 2],
    {
        let mut field = Self::zeros(n)?;
        let kd = dealias_cutoff(n);
        for kx in 0..=kd {
            for ky in -kd..=kd {
                // one representative per conjugate pair
                if kx == 0 && ky <= 0 {
                    continue;
                }
                let s = [complex_normal(rng), complex_normal(rng)];
                let kmag = ((kx * kx + ky * ky) as f64).sqrt();
                let w = spectrum.weight(kmag);
                if w == 0.0 {
                    continue;
                }
                let v = shape(kx, ky, [s[0] * w, s[1] * w]);
                let idx = field.index(kx, ky);
                let idx_m = field.index(-kx, -ky);
                for d in 0..2 {
                    field.c[d][idx] = v[d];
                    field.c[d][idx_m] = v[d].conj();
                }
            }
        }
        Ok(field)
    }

    fn normalize_to(&mut self, h_norm: f64) -> Result<()> {
        let h = self.h_norm_raw();
        if h == 0.0 {
            return Err(Error::Degenerate("spectrum selects no modes".into()));
        }
        self.scale_in_place(h_norm / h);
        Ok(())
    }

    #[inline]
    pub fn resolution(&self) -> usize {
        self.n
    }

    /// Storage index of wavevector `(kx, ky)`.
    #[inline]
    pub fn index(&self, kx: i64, ky: i64) -> usize {
        let n = self.n as i64;
        (kx.rem_euclid(n) * n + ky.rem_euclid(n)) as usize
    }

    #[inline]
    pub fn wavevector(&self, idx: usize) -> (i64, i64) {
        (
            wavenumber(idx / self.n, self.n),
            wavenumber(idx % self.n, self.n),
        )
    }

    pub fn component(&self, d: usize) -> &[Complex64] {
        &self.c[d]
    }

    pub(crate) fn component_mut(&mut self, d: usize) -> &mut [Complex64] {
        &mut self.c[d]
    }

    pub fn coefficient(&self, kx: i64, ky: i64) -> [Complex64; 2] {
        let i = self.index(kx, ky);
        [self.c[0][i], self.c[1][i]]
    }

    pub(crate) fn same_grid(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Structural(format!(
                "resolution mismatch: {} vs {}",
                self.n, other.n
            )));
        }
        Ok(())
    }

    pub fn pin_mean(&mut self) {
        let zero = Complex64::new(0.0, 0.0);
        self.c[0][0] = zero;
        self.c[1][0] = zero;
    }

    pub fn mean_is_zero(&self) -> bool {
        let zero = Complex64::new(0.0, 0.0);
        self.c[0][0] == zero && self.c[1][0] == zero
    }

    pub fn scale_in_place(&mut self, s: f64) {
        for comp in &mut self.c {
            for z in comp.iter_mut() {
                *z *= s;
            }
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.scale_in_place(s);
        out
    }

    /// `self + s · other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        let mut out = self.clone();
        for d in 0..2 {
            for (z, w) in out.c[d].iter_mut().zip(&other.c[d]) {
                *z += w * s;
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// `(u, v)_H`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.same_grid(other)?;
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &Self) -> f64 {
        let mut acc = 0.0;
        for d in 0..2 {
            for (a, b) in self.c[d].iter().zip(&other.c[d]) {
                acc += a.re * b.re + a.im * b.im;
            }
        }
        acc
    }

    fn weighted_sum(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for idx in 0..self.n * self.n {
            let (kx, ky) = self.wavevector(idx);
            let k2 = (kx * kx + ky * ky) as f64;
            let m = self.c[0][idx].norm_sqr() + self.c[1][idx].norm_sqr();
            if m != 0.0 {
                acc += weight(k2) * m;
            }
        }
        acc
    }

    fn h_norm_raw(&self) -> f64 {
        self.weighted_sum(|_| 1.0).sqrt()
    }

    /// `‖u‖_H`; defined for any field.
    pub fn h_norm(&self) -> f64 {
        self.h_norm_raw()
    }

    /// `‖u‖_V = |u|_{H¹}`.
    pub fn v_norm(&self) -> f64 {
        self.weighted_sum(|k2| k2).sqrt()
    }

    /// `‖A^{-1/2} u‖_H`; the mean mode is skipped.
    pub fn vdual_norm(&self) -> f64 {
        self.weighted_sum(|k2| if k2 > 0.0 { 1.0 / k2 } else { 0.0 })
            .sqrt()
    }

    /// Spectral divergence `(Σ_k |k·û(k)|²)^{1/2}`.
    pub fn divergence_norm(&self) -> f64 {
        let mut acc = 0.0;
        for idx in 0..self.n * self.n {
            let (kx, ky) = self.wavevector(idx);
            let d = self.c[0][idx] * kx as f64 + self.c[1][idx] * ky as f64;
            acc += d.norm_sqr();
        }
        acc.sqrt()
    }

    /// Largest per-mode ratio `|k·û(k)| / (|k| |û(k)|)` over nonzero modes.
    pub fn max_modal_divergence(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for idx in 1..self.n * self.n {
            let (kx, ky) = self.wavevector(idx);
            let m = (self.c[0][idx].norm_sqr() + self.c[1][idx].norm_sqr()).sqrt();
            if m == 0.0 {
                continue;
            }
            let d = (self.c[0][idx] * kx as f64 + self.c[1][idx] * ky as f64).norm();
            let kn = ((kx * kx + ky * ky) as f64).sqrt();
            worst = worst.max(d / (kn * m));
        }
        worst
    }

    /// Divergence-free up to `1e-10` relative to `‖u‖_V`.
    pub fn is_solenoidal(&self) -> bool {
        self.divergence_norm() <= 1e-10 * self.v_norm().max(f64::MIN_POSITIVE)
    }

    pub(crate) fn require_solenoidal(&self, what: &str) -> Result<()> {
        if self.is_solenoidal() {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "{what} is not divergence-free (divergence norm {:.3e})",
                self.divergence_norm()
            )))
        }
    }

    /// Leray projection `(I − k kᵀ/|k|²) û(k)`, evaluated as `k⊥ (k⊥·û)/|k|²`.
    pub fn leray_project(&self) -> Self {
        let mut out = self.clone();
        out.leray_in_place();
        out
    }

    pub(crate) fn leray_in_place(&mut self) {
        let n = self.n;
        for idx in 1..n * n {
            let (kx, ky) = self.wavevector(idx);
            let (kx, ky) = (kx as f64, ky as f64);
            let k2 = kx * kx + ky * ky;
            let s = (self.c[0][idx] * (-ky) + self.c[1][idx] * kx) / k2;
            self.c[0][idx] = s * (-ky);
            self.c[1][idx] = s * kx;
        }
        self.pin_mean();
    }

    /// Zeroes every mode outside the 2/3-rule band.
    pub fn dealias(&self) -> Self {
        let mut out = self.clone();
        out.dealias_in_place();
        out
    }

    pub(crate) fn dealias_in_place(&mut self) {
        let kd = dealias_cutoff(self.n);
        for idx in 0..self.n * self.n {
            let (kx, ky) = self.wavevector(idx);
            if kx.abs() > kd || ky.abs() > kd {
                self.c[0][idx] = Complex64::new(0.0, 0.0);
                self.c[1][idx] = Complex64::new(0.0, 0.0);
            }
        }
    }

    pub fn is_band_limited(&self) -> bool {
        let kd = dealias_cutoff(self.n);
        (0..self.n * self.n).all(|idx| {
            let (kx, ky) = self.wavevector(idx);
            (kx.abs() <= kd && ky.abs() <= kd)
                || (self.c[0][idx].norm_sqr() + self.c[1][idx].norm_sqr()) == 0.0
        })
    }

    /// Velocity components on the collocation grid, row-major in `(x, y)`.
    pub fn to_physical(&self) -> [Vec<f64>; 2] {
        let (a, b) = to_physical_pair(self.n, &self.c[0], &self.c[1]);
        [a, b]
    }

    /// Spectral partial derivatives `[∂x u_d, ∂y u_d]` of component `d`.
    pub(crate) fn gradient_spectra(&self, d: usize) -> [Vec<Complex64>; 2] {
        let n = self.n;
        let mut gx = vec![Complex64::new(0.0, 0.0); n * n];
        let mut gy = vec![Complex64::new(0.0, 0.0); n * n];
        for idx in 0..n * n {
            let (kx, ky) = self.wavevector(idx);
            let z = self.c[d][idx];
            gx[idx] = Complex64::new(-z.im * kx as f64, z.re * kx as f64);
            gy[idx] = Complex64::new(-z.im * ky as f64, z.re * ky as f64);
        }
        [gx, gy]
    }

    /// Max over the grid of `|u₁| + |u₂|`.
    pub fn max_speed(&self) -> f64 {
        let [a, b] = self.to_physical();
        a.iter()
            .zip(&b)
            .map(|(x, y)| x.abs() + y.abs())
            .fold(0.0, f64::max)
    }

    /// Fraction of `‖u‖²_H` carried by modes with `|k| ≥ kmin`.
    pub fn tail_energy_fraction(&self, kmin: f64) -> f64 {
        let total = self.weighted_sum(|_| 1.0);
        if total == 0.0 {
            return 0.0;
        }
        let k2min = kmin * kmin;
        self.weighted_sum(|k2| if k2 >= k2min { 1.0 } else { 0.0 }) / total
    }

    pub fn is_finite(&self) -> bool {
        self.c
            .iter()
            .all(|comp| comp.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    /// Pointwise evaluation of the trigonometric series at `(x, y)`.
    pub fn evaluate(&self, x: f64, y: f64) -> [f64; 2] {
        let mut out = [0.0; 2];
        for idx in 0..self.n * self.n {
            let (kx, ky) = self.wavevector(idx);
            let ph = kx as f64 * x + ky as f64 * y;
            let e = Complex64::new(ph.cos(), ph.sin());
            for d in 0..2 {
                out[d] += (self.c[d][idx] * e).re;
            }
        }
        out[0] /= DOMAIN_LENGTH;
        out[1] /= DOMAIN_LENGTH;
        out
    }

    /// Iterator over `(kx, ky, û₁, û₂)` for every stored mode.
    pub fn modes(&self) -> impl Iterator<Item = (i64, i64, Complex64, Complex64)> + '_ {
        (0..self.n * self.n).map(move |idx| {
            let (kx, ky) = self.wavevector(idx);
            (kx, ky, self.c[0][idx], self.c[1][idx])
        })
    }
}

/// H, V and V′ norms of a zero-mean field.
pub fn compute_norms(field: &SpectralField) -> Result<NormReport> {
    if !field.mean_is_zero() {
        return Err(Error::Precondition(
            "nonzero mean mode; the V' norm is undefined here".into(),
        ));
    }
    Ok(NormReport {
        h_norm: field.h_norm(),
        v_norm: field.v_norm(),
        vdual_norm: field.vdual_norm(),
    })
}

/// Leray projection as a free function.
pub fn leray_project(field: &SpectralField) -> SpectralField {
    field.leray_project()
}

// ---------------------------------------------------------------------------
// Scalar fields

/// Real scalar field on the periodic box; unlike velocity it keeps its mean.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    n: usize,
    c: Vec<Complex64>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn from_fn<F: Fn(f64, f64) -> f64>(n: usize, f: F) -> Result<Self> {
        check_resolution(n)?;
        let xs = grid_points(n);
        let mut values = vec![0.0; n * n];
        for (ix, &x) in xs.iter().enumerate() {
            for (iy, &y) in xs.iter().enumerate() {
                values[ix * n + iy] = f(x, y);
            }
        }
        let zeros = vec![0.0; n * n];
        let (c, _) = from_physical_pair(n, &values, &zeros);
        Ok(Self { n, c, values })
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::from_fn(n, |_, _| value)
    }

    #[inline]
    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.c
    }

    pub fn mean(&self) -> f64 {
        self.c[0].re / DOMAIN_LENGTH
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// True when every coefficient except the mean is zero.
    pub fn is_constant(&self) -> bool {
        self.c
            .iter()
            .skip(1)
            .all(|z| z.norm() <= 1e-14 * self.c[0].norm().max(1.0))
    }

    /// Retains only modes inside the dealiased band.
    pub(crate) fn band_limited_values(&self) -> Vec<f64> {
        let n = self.n;
        let kd = dealias_cutoff(n);
        let mut c = self.c.clone();
        for (idx, z) in c.iter_mut().enumerate() {
            let kx = wavenumber(idx / n, n);
            let ky = wavenumber(idx % n, n);
            if kx.abs() > kd || ky.abs() > kd {
                *z = Complex64::new(0.0, 0.0);
            }
        }
        let zeros = vec![Complex64::new(0.0, 0.0); n * n];
        to_physical_pair(n, &c, &zeros).0
    }

    /// Band-limited `[∂x ν, ∂y ν]` on the grid.
    pub(crate) fn gradient_values(&self) -> [Vec<f64>; 2] {
        let n = self.n;
        let kd = dealias_cutoff(n);
        let mut gx = vec![Complex64::new(0.0, 0.0); n * n];
        let mut gy = vec![Complex64::new(0.0, 0.0); n * n];
        for idx in 0..n * n {
            let kx = wavenumber(idx / n, n);
            let ky = wavenumber(idx % n, n);
            if kx.abs() > kd || ky.abs() > kd {
                continue;
            }
            let z = self.c[idx];
            gx[idx] = Complex64::new(-z.im * kx as f64, z.re * kx as f64);
            gy[idx] = Complex64::new(-z.im * ky as f64, z.re * ky as f64);
        }
        let (a, b) = to_physical_pair(n, &gx, &gy);
        [a, b]
    }
}
