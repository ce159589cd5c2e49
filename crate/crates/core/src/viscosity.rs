//! Viscosity models: constant, time-dependent profiles and smooth spatial fields.
//!
//! Every profile has closed-form extrema and a closed-form cumulative integral
//! `φ_s(t) = ∫_s^t ν`, so bounds and `φ` are exact rather than sampled.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::spectral::ScalarField;

/// Time profile `ν(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum TimeProfile {
    Constant {
        value: f64,
    },
    /// `base · (1 + eps · sin(omega · t))`.
    Sinusoidal {
        base: f64,
        eps: f64,
        omega: f64,
    },
    /// `values[i]` on `[starts[i], starts[i+1])`; the last value persists.
    Piecewise {
        starts: Vec<f64>,
        values: Vec<f64>,
    },
    /// `floor + (initial − floor) · e^{−rate · t}`.
    DecayToFloor {
        initial: f64,
        floor: f64,
        rate: f64,
    },
}

/// Spatial profile `ν(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum SpatialProfile {
    Constant {
        value: f64,
    },
    /// `base + amplitude · sin(kx · x + ky · y)`.
    Sinusoid {
        base: f64,
        amplitude: f64,
        kx: i64,
        ky: i64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViscosityModel {
    Constant { value: f64 },
    TimeVarying(TimeProfile),
    SpaceVarying(SpatialProfile),
}

/// `K̄` together with the trailing window it was maximized over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KbarEstimate {
    pub value: f64,
    pub window_start: f64,
    pub window_end: f64,
    /// Time at which the maximum was attained.
    pub argmax: f64,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::ModelInvalid(msg.into())
}

fn positive_finite(x: f64, what: &str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "{what} must be positive and finite, got {x}"
        )))
    }
}

impl TimeProfile {
    pub fn validate(&self) -> Result<()> {
        match self {
            TimeProfile::Constant { value } => positive_finite(*value, "viscosity"),
            TimeProfile::Sinusoidal { base, eps, omega } => {
                if !eps.is_finite() || !omega.is_finite() {
                    return Err(invalid("sinusoidal parameters must be finite"));
                }
                positive_finite(*base, "base viscosity")?;
                if *omega != 0.0 {
                    positive_finite(
                        base * (1.0 - eps.abs()),
                        "minimum of the sinusoidal profile",
                    )?;
                }
                Ok(())
            }
            TimeProfile::Piecewise { starts, values } => {
                if starts.is_empty() || starts.len() != values.len() {
                    return Err(invalid(
                        "piecewise schedule needs matching, nonempty starts and values",
                    ));
                }
                if starts[0] != 0.0 {
                    return Err(invalid("piecewise schedule must start at t = 0"));
                }
                if starts.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(invalid("piecewise breakpoints must increase strictly"));
                }
                values
                    .iter()
                    .try_for_each(|v| positive_finite(*v, "piecewise value"))
            }
            TimeProfile::DecayToFloor {
                initial,
                floor,
                rate,
            } => {
                positive_finite(*initial, "initial viscosity")?;
                positive_finite(*floor, "floor viscosity")?;
                if !(*rate >= 0.0) || !rate.is_finite() {
                    return Err(invalid(format!(
                        "decay rate must be nonnegative, got {rate}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            TimeProfile::Constant { value } => *value,
            TimeProfile::Sinusoidal { base, eps, omega } => base * (1.0 + eps * (omega * t).sin()),
            TimeProfile::Piecewise { starts, values } => {
                let i = starts.partition_point(|&s| s <= t);
                values[i.saturating_sub(1)]
            }
            TimeProfile::DecayToFloor {
                initial,
                floor,
                rate,
            } => floor + (initial - floor) * (-rate * t).exp(),
        }
    }

    fn bounds(&self, t0: f64, t1: f64) -> (f64, f64) {
        match self {
            TimeProfile::Constant { value } => (*value, *value),
            TimeProfile::Sinusoidal { base, eps, omega } => {
                let mut lo = self.value(t0).min(self.value(t1));
                let mut hi = self.value(t0).max(self.value(t1));
                if *omega != 0.0 {
                    // interior critical points ω t = π/2 + mπ
                    let (a, b) = if *omega > 0.0 {
                        (omega * t0, omega * t1)
                    } else {
                        (omega * t1, omega * t0)
                    };
                    let m0 = ((a - PI / 2.0) / PI).ceil() as i64;
                    let m1 = ((b - PI / 2.0) / PI).floor() as i64;
                    for m in m0..=m1.min(m0 + 1) {
                        let s = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                        let v = base * (1.0 + eps * s);
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                }
                (lo, hi)
            }
            TimeProfile::Piecewise { starts, values } => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for (i, v) in values.iter().enumerate() {
                    let a = starts[i];
                    let b = starts.get(i + 1).copied().unwrap_or(f64::INFINITY);
                    if a < t1 && b > t0 {
                        lo = lo.min(*v);
                        hi = hi.max(*v);
                    }
                }
                (lo, hi)
            }
            TimeProfile::DecayToFloor { .. } => {
                let (a, b) = (self.value(t0), self.value(t1));
                (a.min(b), a.max(b))
            }
        }
    }

    /// `∫_s^t ν(z) dz` in closed form.
    pub fn phi(&self, s: f64, t: f64) -> f64 {
        match self {
            TimeProfile::Constant { value } => value * (t - s),
            TimeProfile::Sinusoidal { base, eps, omega } => {
                if *omega == 0.0 {
                    base * (t - s)
                } else {
                    base * ((t - s) - eps * ((omega * t).cos() - (omega * s).cos()) / omega)
                }
            }
            TimeProfile::Piecewise { starts, values } => {
                let mut acc = 0.0;
                for (i, v) in values.iter().enumerate() {
                    let a = starts[i].max(s);
                    let b = starts.get(i + 1).copied().unwrap_or(f64::INFINITY).min(t);
                    if b > a {
                        acc += v * (b - a);
                    }
                }
                acc
            }
            TimeProfile::DecayToFloor {
                initial,
                floor,
                rate,
            } => {
                if *rate == 0.0 {
                    initial * (t - s)
                } else {
                    floor * (t - s)
                        + (initial - floor) * ((-rate * s).exp() - (-rate * t).exp()) / rate
                }
            }
        }
    }
}

impl SpatialProfile {
    pub fn validate(&self) -> Result<()> {
        match self {
            SpatialProfile::Constant { value } => positive_finite(*value, "viscosity"),
            SpatialProfile::Sinusoid {
                base,
                amplitude,
                kx,
                ky,
            } => {
                if !amplitude.is_finite() {
                    return Err(invalid("amplitude must be finite"));
                }
                if *kx == 0 && *ky == 0 {
                    positive_finite(*base, "viscosity")
                } else {
                    positive_finite(base - amplitude.abs(), "minimum of the spatial profile")
                }
            }
        }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        match self {
            SpatialProfile::Constant { value } => *value,
            SpatialProfile::Sinusoid {
                base,
                amplitude,
                kx,
                ky,
            } => base + amplitude * (*kx as f64 * x + *ky as f64 * y).sin(),
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match self {
            SpatialProfile::Constant { value } => (*value, *value),
            SpatialProfile::Sinusoid {
                base,
                amplitude,
                kx,
                ky,
            } => {
                if *kx == 0 && *ky == 0 {
                    (*base, *base)
                } else {
                    (base - amplitude.abs(), base + amplitude.abs())
                }
            }
        }
    }

    /// Spatial mean over the box.
    pub fn mean(&self) -> f64 {
        match self {
            SpatialProfile::Constant { value } => *value,
            SpatialProfile::Sinusoid { base, .. } => *base,
        }
    }

    /// Largest wavenumber component present in the profile.
    pub fn max_wavenumber(&self) -> i64 {
        match self {
            SpatialProfile::Constant { .. } => 0,
            SpatialProfile::Sinusoid { kx, ky, .. } => kx.abs().max(ky.abs()),
        }
    }
}

impl ViscosityModel {
    pub fn constant(value: f64) -> Self {
        ViscosityModel::Constant { value }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ViscosityModel::Constant { value } => positive_finite(*value, "viscosity"),
            ViscosityModel::TimeVarying(p) => p.validate(),
            ViscosityModel::SpaceVarying(p) => p.validate(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ViscosityModel::Constant { .. } => "constant",
            ViscosityModel::TimeVarying(_) => "time_varying",
            ViscosityModel::SpaceVarying(_) => "space_varying",
        }
    }

    /// `(ν̲, ν̄)` over the window `(t0, t1)`; spatial models ignore the window.
    pub fn bounds(&self, window: (f64, f64)) -> Result<(f64, f64)> {
        let (t0, t1) = window;
        if !(t1 > t0) {
            return Err(Error::Precondition(format!("empty window ({t0}, {t1})")));
        }
        self.validate()?;
        let (lo, hi) = match self {
            ViscosityModel::Constant { value } => (*value, *value),
            ViscosityModel::TimeVarying(p) => p.bounds(t0, t1),
            ViscosityModel::SpaceVarying(p) => p.bounds(),
        };
        if !(lo > 0.0) {
            return Err(invalid(format!("viscosity reaches {lo} in the window")));
        }
        Ok((lo, hi))
    }

    /// Spatially uniform viscosity at time `t`; `None` for spatial models.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        match self {
            ViscosityModel::Constant { value } => Some(*value),
            ViscosityModel::TimeVarying(p) => Some(p.value(t)),
            ViscosityModel::SpaceVarying(_) => None,
        }
    }

    /// Spatial viscosity sampled on an `n × n` grid.
    pub fn scalar_field(&self, n: usize) -> Result<ScalarField> {
        match self {
            ViscosityModel::Constant { value } => ScalarField::constant(n, *value),
            ViscosityModel::SpaceVarying(p) => ScalarField::from_fn(n, |x, y| p.value(x, y)),
            ViscosityModel::TimeVarying(_) => Err(Error::WrongModel {
                estimate: "scalar_field".into(),
                detail: "time-varying viscosity has no fixed spatial field".into(),
            }),
        }
    }

    fn time_profile(&self, what: &str) -> Result<TimeProfile> {
        match self {
            ViscosityModel::Constant { value } => Ok(TimeProfile::Constant { value: *value }),
            ViscosityModel::TimeVarying(p) => Ok(p.clone()),
            ViscosityModel::SpaceVarying(_) => Err(Error::WrongModel {
                estimate: what.into(),
                detail: "space-varying viscosity carries no time integral".into(),
            }),
        }
    }

    /// `φ_s(t) = ∫_s^t ν(z) dz`.
    pub fn phi(&self, s: f64, t: f64) -> Result<f64> {
        if s > t {
            return Err(Error::Precondition(format!(
                "phi needs s ≤ t, got s = {s}, t = {t}"
            )));
        }
        let p = self.time_profile("phi")?;
        p.validate()?;
        Ok(p.phi(s, t))
    }

    /// `K(t) = ∫_0^t exp(−φ_s(t)/c²) ds`.
    pub fn k_of_t(&self, c_rho: f64, t: f64) -> Result<f64> {
        let p = self.time_profile("kbar")?;
        p.validate()?;
        Ok(k_integral(&p, c_rho * c_rho, t))
    }

    /// `K̄`, the lim sup of `K(t)`, realized as the maximum over the trailing
    /// `tail_fraction` of `[0, horizon]`.
    pub fn kbar(&self, c_rho: f64, horizon: f64, tail_fraction: f64) -> Result<KbarEstimate> {
        if !(tail_fraction > 0.0 && tail_fraction < 1.0) {
            return Err(Error::Precondition(format!(
                "tail fraction must lie in (0, 1), got {tail_fraction}"
            )));
        }
        if !(c_rho > 0.0) || !(horizon > 0.0) {
            return Err(Error::Precondition(
                "c_rho and horizon must be positive".into(),
            ));
        }
        let p = self.time_profile("kbar")?;
        p.validate()?;
        let c2 = c_rho * c_rho;
        let start = horizon * (1.0 - tail_fraction);
        let decay = (-p.phi(0.0, start) / c2).exp();
        if !(decay < 1e-12) {
            return Err(Error::InsufficientHorizon(format!(
                "exp(-phi_0({start})/c^2) = {decay:.3e} is not below 1e-12"
            )));
        }
        let k = |t: f64| k_integral(&p, c2, t);
        let samples = 256;
        let grid: Vec<f64> = (0..=samples)
            .map(|i| start + (horizon - start) * i as f64 / samples as f64)
            .collect();
        let values: Vec<f64> = grid.iter().map(|&t| k(t)).collect();
        let (imax, _) = values
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
            );
        let lo = grid[imax.saturating_sub(1)];
        let hi = grid[(imax + 1).min(samples)];
        let (argmax, best) = golden_max(&k, lo, hi, values[imax], grid[imax]);
        Ok(KbarEstimate {
            value: best,
            window_start: start,
            window_end: horizon,
            argmax,
        })
    }
}

fn k_integral(p: &TimeProfile, c2: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let f = |s: f64| (-p.phi(s, t) / c2).exp();
    // the integrand is localized near s = t; split off the bulk where it underflows
    let nu_lo = match p {
        TimeProfile::Constant { value } => *value,
        TimeProfile::Sinusoidal { base, eps, omega } => {
            if *omega == 0.0 {
                *base
            } else {
                base * (1.0 - eps.abs())
            }
        }
        TimeProfile::Piecewise { values, .. } => {
            values.iter().copied().fold(f64::INFINITY, f64::min)
        }
        TimeProfile::DecayToFloor { initial, floor, .. } => initial.min(*floor),
    };
    let cut = (t - 60.0 * c2 / nu_lo).max(0.0);
    let (near, _) = quadrature::integrate(f, cut, t, 1e-12, 0.0);
    let far = if cut > 0.0 {
        quadrature::integrate(f, 0.0, cut, 1e-8, 1e-14 * near).0
    } else {
        0.0
    };
    near + far
}

fn golden_max<F: Fn(f64) -> f64>(
    f: &F,
    mut a: f64,
    mut b: f64,
    seed_val: f64,
    seed_at: f64,
) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..80 {
        if (b - a).abs() < 1e-10 * b.abs().max(1.0) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let (t, v) = if fc > fd { (c, fc) } else { (d, fd) };
    if v >= seed_val {
        (t, v)
    } else {
        (seed_at, seed_val)
    }
}
