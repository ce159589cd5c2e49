//! Bilinear and trilinear forms, the advection term and the variable-viscosity
//! terms, evaluated pseudo-spectrally with 2/3-rule truncation.
//!
//! Inputs are truncated to the dealiased band before any product is formed and
//! products are truncated again afterwards. Aliases of a product of two band-limited
//! factors land outside the band, so all in-band results are exact up to round-off.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    dealias_cutoff, from_physical_pair, to_physical_pair, ScalarField, SpectralField, DOMAIN_LENGTH,
};

/// A scalar form value with a nonnegative error indicator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormValue {
    pub value: f64,
    /// Round-off scale plus a bound on the contribution of modes outside the band.
    pub residual_estimate: f64,
}

/// Velocity and its gradient on the collocation grid.
pub(crate) struct GridVelocity {
    pub u: [Vec<f64>; 2],
    /// `grad[i][j] = ∂_j u_i`.
    pub grad: [[Vec<f64>; 2]; 2],
}

impl GridVelocity {
    /// Three complex transforms: velocity pair, then one gradient pair per component.
    pub(crate) fn new(u: &SpectralField) -> Self {
        let n = u.resolution();
        let (u0, u1) = to_physical_pair(n, u.component(0), u.component(1));
        let [g00, g01] = u.gradient_spectra(0);
        let [g10, g11] = u.gradient_spectra(1);
        let (a, b) = to_physical_pair(n, &g00, &g01);
        let (c, d) = to_physical_pair(n, &g10, &g11);
        Self {
            u: [u0, u1],
            grad: [[a, b], [c, d]],
        }
    }

    /// Convective term `(u·∇)u`, truncated to the band, not projected.
    pub(crate) fn advection(&self, n: usize) -> SpectralField {
        let len = self.u[0].len();
        let mut p = [vec![0.0; len], vec![0.0; len]];
        for i in 0..2 {
            for x in 0..len {
                p[i][x] = self.u[0][x] * self.grad[i][0][x] + self.u[1][x] * self.grad[i][1][x];
            }
        }
        band_field(n, &p[0], &p[1])
    }

    /// `∫ ν |∇u|²` by grid quadrature; exact for band-limited data.
    pub(crate) fn weighted_dissipation(&self, nu: Option<&[f64]>) -> f64 {
        let len = self.u[0].len();
        let mut acc = 0.0;
        for x in 0..len {
            let g2 = self.grad[0][0][x].powi(2)
                + self.grad[0][1][x].powi(2)
                + self.grad[1][0][x].powi(2)
                + self.grad[1][1][x].powi(2);
            acc += nu.map_or(1.0, |v| v[x]) * g2;
        }
        let h = DOMAIN_LENGTH / (len as f64).sqrt();
        acc * h * h
    }

    /// `∇·(ν ∇u)` from the physical fluxes `ν ∂_j u_i`, truncated to the band.
    pub(crate) fn flux_divergence(&self, n: usize, nu: &[f64]) -> SpectralField {
        let len = nu.len();
        let flux = |i: usize, j: usize| -> Vec<f64> {
            (0..len).map(|x| nu[x] * self.grad[i][j][x]).collect()
        };
        let (q00, q01) = from_physical_pair(n, &flux(0, 0), &flux(0, 1));
        let (q10, q11) = from_physical_pair(n, &flux(1, 0), &flux(1, 1));
        let mut out = SpectralField::zeros(n).expect("resolution already validated");
        for idx in 0..n * n {
            let (kx, ky) = out.wavevector(idx);
            let (kx, ky) = (kx as f64, ky as f64);
            let i = Complex64::new(0.0, 1.0);
            out.component_mut(0)[idx] = i * (q00[idx] * kx + q01[idx] * ky);
            out.component_mut(1)[idx] = i * (q10[idx] * kx + q11[idx] * ky);
        }
        out.dealias_in_place();
        out.pin_mean();
        out
    }
}

fn band_field(n: usize, a: &[f64], b: &[f64]) -> SpectralField {
    let (c0, c1) = from_physical_pair(n, a, b);
    let mut out = SpectralField::from_raw(n, c0, c1);
    out.dealias_in_place();
    out.pin_mean();
    out
}

fn same3(u: &SpectralField, v: &SpectralField, w: &SpectralField) -> Result<()> {
    u.same_grid(v)?;
    u.same_grid(w)
}

fn check_nu(nu: &ScalarField, u: &SpectralField) -> Result<()> {
    if nu.resolution() != u.resolution() {
        return Err(Error::Structural(format!(
            "viscosity grid {} vs velocity grid {}",
            nu.resolution(),
            u.resolution()
        )));
    }
    if !(nu.min() > 0.0) || !nu.max().is_finite() {
        return Err(Error::Precondition(format!(
            "viscosity must be positive and finite; grid range [{}, {}]",
            nu.min(),
            nu.max()
        )));
    }
    Ok(())
}

/// Ladyzhenskaya-type bound `√2 ‖u‖_H^{1/2}‖u‖_V^{1/2}‖v‖_V‖w‖_H^{1/2}‖w‖_V^{1/2}`.
pub fn ladyzhenskaya_bound(u: &SpectralField, v: &SpectralField, w: &SpectralField) -> f64 {
    2f64.sqrt() * (u.h_norm() * u.v_norm()).sqrt() * v.v_norm() * (w.h_norm() * w.v_norm()).sqrt()
}

fn roundoff(n: usize, scale: f64) -> f64 {
    f64::EPSILON * (n * n) as f64 * scale
}

/// `a(u, v) = (∇u, ∇v)_H`.
pub fn bilinear_a(u: &SpectralField, v: &SpectralField) -> Result<FormValue> {
    u.same_grid(v)?;
    if !u.mean_is_zero() || !v.mean_is_zero() {
        return Err(Error::Precondition(
            "bilinear form needs zero-mean fields".into(),
        ));
    }
    let mut acc = 0.0;
    for ((kx, ky, a1, a2), (_, _, b1, b2)) in u.modes().zip(v.modes()) {
        let k2 = (kx * kx + ky * ky) as f64;
        acc += k2 * ((a1 * b1.conj()).re + (a2 * b2.conj()).re);
    }
    Ok(FormValue {
        value: acc,
        residual_estimate: roundoff(u.resolution(), u.v_norm() * v.v_norm()),
    })
}

/// Convective term `(u·∇)v` on the band, unprojected.
pub fn convection(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.same_grid(v)?;
    let n = u.resolution();
    let ud = u.dealias();
    let vd = v.dealias();
    let (u0, u1) = to_physical_pair(n, ud.component(0), ud.component(1));
    let mut out = [Vec::new(), Vec::new()];
    for (i, slot) in out.iter_mut().enumerate() {
        let [gx, gy] = vd.gradient_spectra(i);
        let (dx, dy) = to_physical_pair(n, &gx, &gy);
        *slot = (0..n * n).map(|x| u0[x] * dx[x] + u1[x] * dy[x]).collect();
    }
    Ok(band_field(n, &out[0], &out[1]))
}

/// `b(u, v, w) = ((u·∇)v, w)_H`.
pub fn trilinear_b(u: &SpectralField, v: &SpectralField, w: &SpectralField) -> Result<FormValue> {
    same3(u, v, w)?;
    u.require_solenoidal("u")?;
    v.require_solenoidal("v")?;
    w.require_solenoidal("w")?;
    let c = convection(u, v)?;
    let wd = w.dealias();
    let value = c.inner_unchecked(&wd);
    // discarded tails, bounded term by term with the Ladyzhenskaya estimate
    let ud = u.dealias();
    let vd = v.dealias();
    let ut = u.sub(&ud)?;
    let vt = v.sub(&vd)?;
    let wt = w.sub(&wd)?;
    let tail = ladyzhenskaya_bound(&ut, v, w)
        + ladyzhenskaya_bound(&ud, &vt, w)
        + ladyzhenskaya_bound(&ud, &vd, &wt);
    Ok(FormValue {
        value,
        residual_estimate: tail + roundoff(u.resolution(), ladyzhenskaya_bound(u, v, w)),
    })
}

/// `B(u, u) = P[(u·∇)u]`.
pub fn nonlinear_b(u: &SpectralField) -> Result<SpectralField> {
    u.require_solenoidal("u")?;
    let n = u.resolution();
    let grid = GridVelocity::new(&u.dealias());
    let mut out = grid.advection(n);
    out.leray_in_place();
    Ok(out)
}

/// `P[∇ν·∇u_i]` per component, mean pinned.
pub fn gradnu_gradu(nu: &ScalarField, u: &SpectralField) -> Result<SpectralField> {
    check_nu(nu, u)?;
    u.require_solenoidal("u")?;
    Ok(gradnu_gradu_unchecked(nu, u))
}

pub(crate) fn gradnu_gradu_unchecked(nu: &ScalarField, u: &SpectralField) -> SpectralField {
    let n = u.resolution();
    let [nx, ny] = nu.gradient_values();
    let ud = u.dealias();
    let mut comps = [Vec::new(), Vec::new()];
    for (i, slot) in comps.iter_mut().enumerate() {
        let [gx, gy] = ud.gradient_spectra(i);
        let (dx, dy) = to_physical_pair(n, &gx, &gy);
        *slot = (0..n * n).map(|x| nx[x] * dx[x] + ny[x] * dy[x]).collect();
    }
    let mut out = band_field(n, &comps[0], &comps[1]);
    out.leray_in_place();
    out
}

/// Dealiased product `ν u` with the full (unprojected) spectrum of the band.
fn nu_times(nu: &ScalarField, u: &SpectralField) -> SpectralField {
    let n = u.resolution();
    let nv = nu.band_limited_values();
    let ud = u.dealias();
    let (a, b) = to_physical_pair(n, ud.component(0), ud.component(1));
    let pa: Vec<f64> = a.iter().zip(&nv).map(|(x, y)| x * y).collect();
    let pb: Vec<f64> = b.iter().zip(&nv).map(|(x, y)| x * y).collect();
    let (c0, c1) = from_physical_pair(n, &pa, &pb);
    // keep the mean here; a(·,·) weights it by |k|² = 0 anyway
    let mut out = SpectralField::from_raw(n, c0, c1);
    out.dealias_in_place();
    out
}

/// `a(νu, v) = (∇(νu), ∇v)_H`.
pub fn a_nu(nu: &ScalarField, u: &SpectralField, v: &SpectralField) -> Result<FormValue> {
    check_nu(nu, u)?;
    u.same_grid(v)?;
    let p = nu_times(nu, u);
    let vd = v.dealias();
    let mut acc = 0.0;
    for ((kx, ky, a1, a2), (_, _, b1, b2)) in p.modes().zip(vd.modes()) {
        let k2 = (kx * kx + ky * ky) as f64;
        acc += k2 * ((a1 * b1.conj()).re + (a2 * b2.conj()).re);
    }
    Ok(FormValue {
        value: acc,
        residual_estimate: roundoff(u.resolution(), nu.max() * u.v_norm() * v.v_norm()),
    })
}

/// The literal pairing `a(νu, η) − (∇ν·∇u, η)_H`.
///
/// Exposed for comparison only; the solver evolves `∇·(ν∇u)`, whose pairing is
/// `−(ν∇u, ∇η)`.
pub fn weak_form_viscous_pairing(
    nu: &ScalarField,
    u: &SpectralField,
    eta: &SpectralField,
) -> Result<FormValue> {
    let a = a_nu(nu, u, eta)?;
    let g = gradnu_gradu(nu, u)?;
    let value = a.value - g.inner(&eta.dealias())?;
    Ok(FormValue {
        value,
        residual_estimate: a.residual_estimate
            + roundoff(u.resolution(), g.h_norm() * eta.h_norm()),
    })
}

/// `(ν ∇u, ∇v)_H`, the viscous pairing of the simulated equation.
pub fn viscous_pairing(
    nu: &ScalarField,
    u: &SpectralField,
    v: &SpectralField,
) -> Result<FormValue> {
    check_nu(nu, u)?;
    u.same_grid(v)?;
    let n = u.resolution();
    let nv = nu.band_limited_values();
    let gu = GridVelocity::new(&u.dealias());
    let gv = GridVelocity::new(&v.dealias());
    let mut acc = 0.0;
    for x in 0..n * n {
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                s += gu.grad[i][j][x] * gv.grad[i][j][x];
            }
        }
        acc += nv[x] * s;
    }
    let h = DOMAIN_LENGTH / n as f64;
    Ok(FormValue {
        value: acc * h * h,
        residual_estimate: roundoff(n, nu.max() * u.v_norm() * v.v_norm()),
    })
}

/// Number of retained components per axis under the 2/3 rule.
pub fn band_width(n: usize) -> i64 {
    2 * dealias_cutoff(n) + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Spectrum;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rand_sol(n: usize, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SpectralField::random_solenoidal(
            n,
            Spectrum::Band {
                k_lo: 1.0,
                k_hi: 10.0,
            },
            1.0,
            &mut rng,
        )
        .unwrap()
    }

    #[test]
    fn a_of_unit_mode() {
        let u = SpectralField::single_mode(16, [1, 0], 1.0).unwrap();
        assert!((bilinear_a(&u, &u).unwrap().value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn a_is_symmetric_and_orthogonal() {
        let u = rand_sol(32, 1);
        let v = rand_sol(32, 2);
        let ab = bilinear_a(&u, &v).unwrap().value;
        let ba = bilinear_a(&v, &u).unwrap().value;
        assert!((ab - ba).abs() <= 1e-13 * ab.abs().max(1.0));
        let m1 = SpectralField::single_mode(16, [1, 2], 1.0).unwrap();
        let m2 = SpectralField::single_mode(16, [3, 0], 1.0).unwrap();
        assert_eq!(bilinear_a(&m1, &m2).unwrap().value, 0.0);
    }

    #[test]
    fn taylor_green_advection_is_a_gradient() {
        let tg = SpectralField::taylor_green(32, 1.0).unwrap();
        assert!(nonlinear_b(&tg).unwrap().h_norm() < 1e-14);
    }

    #[test]
    fn shear_advection_vanishes() {
        let u = SpectralField::from_fn(32, |_, y| [y.sin(), 0.0]).unwrap();
        assert!(nonlinear_b(&u).unwrap().h_norm() < 1e-15);
    }

    #[test]
    fn b_skew_symmetry() {
        let u = rand_sol(32, 3);
        let v = rand_sol(32, 4);
        let w = rand_sol(32, 5);
        let scale = u.v_norm() * v.v_norm() * w.v_norm();
        assert!(trilinear_b(&u, &v, &v).unwrap().value.abs() < 1e-12 * scale);
        let s = trilinear_b(&u, &v, &w).unwrap().value + trilinear_b(&u, &w, &v).unwrap().value;
        assert!(s.abs() < 1e-12 * scale);
    }

    #[test]
    fn b_rejects_divergent_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = SpectralField::random_vector(
            16,
            Spectrum::Band {
                k_lo: 1.0,
                k_hi: 4.0,
            },
            1.0,
            &mut rng,
        )
        .unwrap();
        let u = rand_sol(16, 1);
        assert!(matches!(
            trilinear_b(&g, &u, &u),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn constant_viscosity_terms() {
        let nu = ScalarField::constant(32, 0.7).unwrap();
        let u = rand_sol(32, 6);
        let v = rand_sol(32, 7);
        assert!(gradnu_gradu(&nu, &u).unwrap().h_norm() < 1e-13);
        let a = bilinear_a(&u, &v).unwrap().value;
        let an = a_nu(&nu, &u, &v).unwrap().value;
        assert!((an - 0.7 * a).abs() <= 1e-12 * a.abs());
    }

    #[test]
    fn gradnu_orthogonal_to_shear() {
        let nu = ScalarField::from_fn(32, |x, _| 1.0 + 0.2 * x.sin()).unwrap();
        let u = SpectralField::from_fn(32, |_, y| [y.sin(), 0.0]).unwrap();
        assert!(gradnu_gradu(&nu, &u).unwrap().h_norm() < 1e-15);
    }

    #[test]
    fn nonpositive_viscosity_rejected() {
        let nu = ScalarField::from_fn(16, |x, _| x.sin()).unwrap();
        let u = rand_sol(16, 1);
        assert!(matches!(gradnu_gradu(&nu, &u), Err(Error::Precondition(_))));
        assert!(matches!(a_nu(&nu, &u, &u), Err(Error::Precondition(_))));
    }

    #[test]
    fn flux_divergence_splits_into_laplacian_and_gradient_term() {
        // P∇·(ν∇u) = ν_m P Δu + P[(ν-ν_m)Δu] + P[∇ν·∇u]; check against a(νu)-free identity
        let n = 32;
        let nu =
            ScalarField::from_fn(n, |x, y| 1.0 + 0.3 * x.sin() + 0.1 * (2.0 * y).cos()).unwrap();
        let u = rand_sol(n, 8);
        let w = rand_sol(n, 9);
        let grid = GridVelocity::new(&u);
        let d = grid.flux_divergence(n, &nu.band_limited_values());
        let lhs = -d.inner(&w).unwrap();
        let rhs = viscous_pairing(&nu, &u, &w).unwrap().value;
        assert!(
            (lhs - rhs).abs() < 1e-11 * rhs.abs().max(1.0),
            "{lhs} vs {rhs}"
        );
    }
}
