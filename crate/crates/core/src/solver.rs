//! CNAB2 pseudo-spectral integrator for the projected Navier–Stokes system
//! `du/dt + B(u, u) = P ∇·(ν ∇u) + f`.
//!
//! The viscous term is Crank–Nicolson with a spatially uniform coefficient
//! (`ν`, `ν(t + dt/2)` or the spatial mean of `ν(x)`); advection, forcing and the
//! spatially varying viscous remainder are second-order Adams–Bashforth, with a
//! forward Euler start. The state stays inside the 2/3-rule band.

use std::f64::consts::PI;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{gradnu_gradu_unchecked, GridVelocity};
use crate::spectral::{
    check_resolution, dealias_cutoff, ScalarField, SpectralField, Spectrum, DOMAIN_LENGTH,
};
use crate::viscosity::ViscosityModel;

/// Advective CFL safety factor: `dt · max(|u₁| + |u₂|) / dx ≤ CFL_SAFETY`.
pub const CFL_SAFETY: f64 = 0.4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ForcingSpec {
    Zero,
    /// `(a sin(k_f y), 0)`.
    Kolmogorov {
        amplitude: f64,
        wavenumber: i64,
    },
    /// `(a (1 + eps sin(omega t)) sin(k_f y), 0)`.
    Modulated {
        amplitude: f64,
        wavenumber: i64,
        eps: f64,
        omega: f64,
    },
    /// `base + e^{−sigma t} d`, where `d` is a seeded divergence-free field with
    /// `‖d‖_{V'} = magnitude` supported on `1 ≤ |k| ≤ 4`.
    Perturbed {
        base: Box<ForcingSpec>,
        sigma: f64,
        magnitude: f64,
        direction_seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitialCondition {
    Zero,
    TaylorGreen {
        amplitude: f64,
    },
    SingleMode {
        kx: i64,
        ky: i64,
        h_norm: f64,
    },
    /// Seeded from the run seed; flat spectrum on `k_lo ≤ |k| ≤ k_hi`.
    RandomBand {
        k_lo: f64,
        k_hi: f64,
        h_norm: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub resolution: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Steps between recorded samples.
    pub sample_stride: usize,
    pub seed: u64,
    /// Keep a field snapshot every this many samples; 0 disables.
    #[serde(default)]
    pub snapshot_every: usize,
    pub viscosity: ViscosityModel,
    pub forcing: ForcingSpec,
    pub initial: InitialCondition,
}

#[derive(Clone, Copy)]
enum Modulation {
    One,
    Sine { eps: f64, omega: f64 },
    Decay { sigma: f64 },
}

impl Modulation {
    fn at(&self, t: f64) -> f64 {
        match *self {
            Modulation::One => 1.0,
            Modulation::Sine { eps, omega } => 1.0 + eps * (omega * t).sin(),
            Modulation::Decay { sigma } => (-sigma * t).exp(),
        }
    }
}

/// A forcing evaluated as a finite sum of time-modulated, projected fields.
#[derive(Clone)]
pub struct Forcing {
    terms: Vec<(Modulation, SpectralField)>,
    n: usize,
}

fn kolmogorov_field(n: usize, amplitude: f64, k: i64) -> Result<SpectralField> {
    if k < 1 || k > dealias_cutoff(n) {
        return Err(Error::Config(format!(
            "forcing wavenumber {k} outside 1..={} at resolution {n}",
            dealias_cutoff(n)
        )));
    }
    let f = SpectralField::from_fn(n, |_, y| [amplitude * (k as f64 * y).sin(), 0.0])?;
    Ok(f.leray_project())
}

impl Forcing {
    pub fn new(spec: &ForcingSpec, n: usize) -> Result<Self> {
        let mut terms = Vec::new();
        Self::collect(spec, n, &mut terms)?;
        Ok(Self { terms, n })
    }

    fn collect(
        spec: &ForcingSpec,
        n: usize,
        terms: &mut Vec<(Modulation, SpectralField)>,
    ) -> Result<()> {
        match spec {
            ForcingSpec::Zero => {}
            ForcingSpec::Kolmogorov {
                amplitude,
                wavenumber,
            } => {
                terms.push((
                    Modulation::One,
                    kolmogorov_field(n, *amplitude, *wavenumber)?,
                ));
            }
            ForcingSpec::Modulated {
                amplitude,
                wavenumber,
                eps,
                omega,
            } => {
                terms.push((
                    Modulation::Sine {
                        eps: *eps,
                        omega: *omega,
                    },
                    kolmogorov_field(n, *amplitude, *wavenumber)?,
                ));
            }
            ForcingSpec::Perturbed {
                base,
                sigma,
                magnitude,
                direction_seed,
            } => {
                if !(*sigma >= 0.0) || !sigma.is_finite() {
                    return Err(Error::Config(format!(
                        "perturbation rate must be nonnegative, got {sigma}"
                    )));
                }
                Self::collect(base, n, terms)?;
                let mut rng = ChaCha8Rng::seed_from_u64(*direction_seed);
                let mut d = SpectralField::random_solenoidal(
                    n,
                    Spectrum::Band {
                        k_lo: 1.0,
                        k_hi: 4.0,
                    },
                    1.0,
                    &mut rng,
                )?;
                d.scale_in_place(magnitude / d.vdual_norm());
                terms.push((Modulation::Decay { sigma: *sigma }, d));
            }
        }
        Ok(())
    }

    pub fn at(&self, t: f64) -> SpectralField {
        let mut out = SpectralField::zeros(self.n).expect("resolution validated");
        for (m, f) in &self.terms {
            let c = m.at(t);
            for d in 0..2 {
                for (z, w) in out.component_mut(d).iter_mut().zip(f.component(d)) {
                    *z += w * c;
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl InitialCondition {
    pub fn build(&self, n: usize, seed: u64) -> Result<SpectralField> {
        let u = match self {
            InitialCondition::Zero => SpectralField::zeros(n)?,
            InitialCondition::TaylorGreen { amplitude } => {
                SpectralField::taylor_green(n, *amplitude)?
            }
            InitialCondition::SingleMode { kx, ky, h_norm } => {
                SpectralField::single_mode(n, [*kx, *ky], *h_norm)?
            }
            InitialCondition::RandomBand { k_lo, k_hi, h_norm } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                SpectralField::random_solenoidal(
                    n,
                    Spectrum::Band {
                        k_lo: *k_lo,
                        k_hi: *k_hi,
                    },
                    *h_norm,
                    &mut rng,
                )?
            }
        };
        Ok(u.dealias())
    }
}

impl SolverConfig {
    pub fn steps(&self) -> Result<usize> {
        let steps = (self.t_end / self.dt).round();
        if !(steps >= 1.0) || (steps * self.dt - self.t_end).abs() > 1e-9 * self.t_end {
            return Err(Error::Config(format!(
                "t_end = {} is not a whole number of steps of dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(steps as usize)
    }

    /// Structural checks plus the initial CFL bound.
    pub fn validate(&self) -> Result<()> {
        check_resolution(self.resolution).map_err(|e| Error::Config(e.to_string()))?;
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::Config(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.sample_stride == 0 {
            return Err(Error::Config("sample_stride must be at least 1".into()));
        }
        self.steps()?;
        self.viscosity.validate()?;
        if let ViscosityModel::SpaceVarying(p) = &self.viscosity {
            if p.max_wavenumber() > dealias_cutoff(self.resolution) {
                return Err(Error::Config(
                    "spatial viscosity profile is not resolved on this grid".into(),
                ));
            }
            // explicit remainder (ν − ν_m)Δu must sit inside the AB2 stability interval
            let (lo, hi) = p.bounds();
            let excess = (hi - p.mean()).max(p.mean() - lo);
            let kd = dealias_cutoff(self.resolution) as f64;
            let limit = 1.0 / (excess * 2.0 * kd * kd);
            if self.dt > limit {
                return Err(Error::Stability {
                    time: 0.0,
                    dt: self.dt,
                    limit,
                });
            }
        }
        Forcing::new(&self.forcing, self.resolution)?;
        let u0 = self.initial.build(self.resolution, self.seed)?;
        let limit = cfl_limit(self.resolution, u0.max_speed());
        if self.dt > limit {
            return Err(Error::Stability {
                time: 0.0,
                dt: self.dt,
                limit,
            });
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }
}

fn cfl_limit(n: usize, speed: f64) -> f64 {
    if speed == 0.0 {
        f64::INFINITY
    } else {
        CFL_SAFETY * (DOMAIN_LENGTH / n as f64) / speed
    }
}

/// Diagnostics of the state a step started from.
#[derive(Debug, Clone, Copy)]
pub struct StepDiagnostics {
    /// `(f(t) + extra, u)_H`.
    pub power: f64,
    /// `∫ ν |∇u|²`.
    pub dissipation: f64,
    /// `max(|u₁| + |u₂|)` on the grid.
    pub max_speed: f64,
}

/// Stateful CNAB2 integrator; keeps the previous explicit term.
pub struct Stepper {
    n: usize,
    dt: f64,
    k2: Vec<f64>,
    viscosity: ViscosityModel,
    forcing: Forcing,
    /// `(ν − ν_m)` on the grid and `ν_m`, for spatial models.
    spatial: Option<(Vec<f64>, f64, Vec<f64>)>,
    prev: Option<SpectralField>,
}

impl Stepper {
    pub fn new(config: &SolverConfig) -> Result<Self> {
        Self::with_forcing(config, Forcing::new(&config.forcing, config.resolution)?)
    }

    pub fn with_forcing(config: &SolverConfig, forcing: Forcing) -> Result<Self> {
        let n = config.resolution;
        check_resolution(n)?;
        config.viscosity.validate()?;
        let probe = SpectralField::zeros(n)?;
        let k2 = (0..n * n)
            .map(|idx| {
                let (kx, ky) = probe.wavevector(idx);
                (kx * kx + ky * ky) as f64
            })
            .collect();
        let spatial = match &config.viscosity {
            ViscosityModel::SpaceVarying(p) => {
                let field = config.viscosity.scalar_field(n)?;
                let full = field.band_limited_values();
                let mean = p.mean();
                let excess = full.iter().map(|v| v - mean).collect();
                Some((excess, mean, full))
            }
            _ => None,
        };
        Ok(Self {
            n,
            dt: config.dt,
            k2,
            viscosity: config.viscosity.clone(),
            forcing,
            spatial,
            prev: None,
        })
    }

    pub fn forcing(&self) -> &Forcing {
        &self.forcing
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Forgets the stored explicit term so the next step starts with Euler.
    pub fn reset(&mut self) {
        self.prev = None;
    }

    fn implicit_nu(&self, t: f64) -> f64 {
        match &self.spatial {
            Some((_, mean, _)) => *mean,
            None => self
                .viscosity
                .value_at(t + 0.5 * self.dt)
                .expect("uniform viscosity"),
        }
    }

    /// Viscosity used in the dissipation integral at time `t`.
    pub fn nu_at(&self, t: f64) -> f64 {
        match &self.spatial {
            Some((_, mean, _)) => *mean,
            None => self.viscosity.value_at(t).expect("uniform viscosity"),
        }
    }

    /// Advances `u` from `t` to `t + dt`. `extra` is added to the right-hand side.
    pub fn advance(
        &mut self,
        u: &SpectralField,
        t: f64,
        extra: Option<&SpectralField>,
    ) -> Result<(SpectralField, StepDiagnostics)> {
        let n = self.n;
        if u.resolution() != n {
            return Err(Error::Structural(format!(
                "state at resolution {} for a {n} stepper",
                u.resolution()
            )));
        }
        let grid = GridVelocity::new(u);
        let max_speed = grid.u[0]
            .iter()
            .zip(&grid.u[1])
            .map(|(a, b)| a.abs() + b.abs())
            .fold(0.0, f64::max);
        let limit = cfl_limit(n, max_speed);
        if self.dt > limit || !max_speed.is_finite() {
            if !max_speed.is_finite() {
                return Err(Error::BlowUp {
                    time: t,
                    reason: "non-finite velocity".into(),
                });
            }
            return Err(Error::Stability {
                time: t,
                dt: self.dt,
                limit,
            });
        }
        let f = self.forcing.at(t);
        let mut rhs = f;
        if let Some(e) = extra {
            rhs = rhs.add(e)?;
        }
        let power = rhs.inner_unchecked(u);
        let adv = grid.advection(n);
        let dissipation = match &self.spatial {
            Some((excess, _, full)) => {
                let div = grid.flux_divergence(n, excess);
                rhs = rhs.add(&div)?;
                grid.weighted_dissipation(Some(full))
            }
            None => self.nu_at(t) * u.v_norm().powi(2),
        };
        let mut nl = rhs.sub(&adv)?;
        nl.dealias_in_place();
        nl.leray_in_place();

        let nu = self.implicit_nu(t);
        let dt = self.dt;
        let mut next = u.clone();
        {
            let prev = self.prev.as_ref();
            for d in 0..2 {
                let cur = nl.component(d);
                let old = prev.map(|p| p.component(d));
                let out = next.component_mut(d);
                for idx in 0..n * n {
                    let a = 0.5 * dt * nu * self.k2[idx];
                    let explicit = match old {
                        Some(o) => cur[idx] * 1.5 - o[idx] * 0.5,
                        None => cur[idx],
                    };
                    out[idx] = (out[idx] * (1.0 - a) + explicit * dt) / (1.0 + a);
                }
            }
        }
        next.pin_mean();
        if !next.is_finite() {
            return Err(Error::BlowUp {
                time: t + dt,
                reason: "non-finite coefficients".into(),
            });
        }
        self.prev = Some(nl);
        Ok((
            next,
            StepDiagnostics {
                power,
                dissipation,
                max_speed,
            },
        ))
    }

    /// `‖P(∇ν·∇u)‖_{V'}`; zero for spatially uniform viscosity.
    pub fn gradnu_vdual(&self, u: &SpectralField) -> f64 {
        match &self.spatial {
            Some(_) => {
                let field = self.viscosity.scalar_field(self.n).expect("spatial model");
                gradnu_gradu_unchecked(&field, u).vdual_norm()
            }
            None => 0.0,
        }
    }

    /// Power and dissipation of `u` at `t` without stepping.
    pub fn diagnostics(
        &self,
        u: &SpectralField,
        t: f64,
        extra: Option<&SpectralField>,
    ) -> Result<StepDiagnostics> {
        let grid = GridVelocity::new(u);
        let mut rhs = self.forcing.at(t);
        if let Some(e) = extra {
            rhs = rhs.add(e)?;
        }
        let dissipation = match &self.spatial {
            Some((_, _, full)) => grid.weighted_dissipation(Some(full)),
            None => self.nu_at(t) * u.v_norm().powi(2),
        };
        let max_speed = grid.u[0]
            .iter()
            .zip(&grid.u[1])
            .map(|(a, b)| a.abs() + b.abs())
            .fold(0.0, f64::max);
        Ok(StepDiagnostics {
            power: rhs.inner_unchecked(u),
            dissipation,
            max_speed,
        })
    }
}

/// One step from `state` at time `t` with an Euler start (no history).
pub fn step(
    state: &SpectralField,
    t: f64,
    dt: f64,
    config: &SolverConfig,
) -> Result<SpectralField> {
    state.require_solenoidal("state")?;
    if !state.mean_is_zero() {
        return Err(Error::Precondition("state must have zero mean".into()));
    }
    let mut cfg = config.clone();
    cfg.dt = dt;
    let mut stepper = Stepper::new(&cfg)?;
    Ok(stepper.advance(&state.dealias(), t, None)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub time: f64,
    pub h_norm: f64,
    pub v_norm: f64,
    pub f_vdual: f64,
    /// `ν(t)`, or `ν̲` for spatial models.
    pub nu: f64,
    /// Relative energy-balance defect over the interval ending here.
    pub residual: f64,
    pub power: f64,
    pub dissipation: f64,
    /// `∫_0^t (f, u)` by the trapezoid rule over steps.
    pub work: f64,
    /// `∫_0^t ∫ ν |∇u|²` by the trapezoid rule over steps.
    pub dissipated: f64,
    pub gradnu_vdual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub config: SolverConfig,
    pub samples: Vec<Sample>,
    pub snapshots: Vec<(f64, SpectralField)>,
    pub final_state: SpectralField,
}

pub const CSV_COLUMNS: [&str; 11] = [
    "time",
    "h_norm",
    "v_norm",
    "f_vdual",
    "nu",
    "residual",
    "power",
    "dissipation",
    "work",
    "dissipated",
    "gradnu_vdual",
];

impl TrajectoryRecord {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.samples.iter().map(|s| s.residual).fold(0.0, f64::max)
    }

    /// Writes the trajectory as CSV; the config is echoed as `# `-prefixed TOML.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for line in self.config.to_toml()?.lines() {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "{}", CSV_COLUMNS.join(","))?;
        for s in &self.samples {
            let row = [
                s.time,
                s.h_norm,
                s.v_norm,
                s.f_vdual,
                s.nu,
                s.residual,
                s.power,
                s.dissipation,
                s.work,
                s.dissipated,
                s.gradnu_vdual,
            ];
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv is utf-8"))
    }
}

fn relative_residual(dh: f64, dwork: f64, ddiss: f64) -> f64 {
    let num = dh - (dwork - ddiss);
    if num == 0.0 {
        0.0
    } else {
        num.abs() / ddiss.abs().max(f64::MIN_POSITIVE)
    }
}

/// Runs the configured simulation over `[0, t_end]`.
pub fn integrate(config: &SolverConfig) -> Result<TrajectoryRecord> {
    config.validate()?;
    let n = config.resolution;
    let steps = config.steps()?;
    let mut stepper = Stepper::new(config)?;
    let nu_lower = config.viscosity.bounds((0.0, config.t_end))?.0;
    let mut u = config.initial.build(n, config.seed)?;

    let mut samples = Vec::new();
    let mut snapshots = Vec::new();
    let mut work = 0.0;
    let mut dissipated = 0.0;
    let mut last_sample: Option<(f64, f64, f64)> = None;

    let mut record = |samples: &mut Vec<Sample>,
                      snapshots: &mut Vec<(f64, SpectralField)>,
                      u: &SpectralField,
                      t: f64,
                      diag: &StepDiagnostics,
                      work: f64,
                      dissipated: f64,
                      stepper: &Stepper| {
        let energy = 0.5 * u.h_norm().powi(2);
        let residual = match last_sample {
            Some((e0, w0, d0)) => relative_residual(energy - e0, work - w0, dissipated - d0),
            None => 0.0,
        };
        last_sample = Some((energy, work, dissipated));
        let nu = match config.viscosity {
            ViscosityModel::SpaceVarying(_) => nu_lower,
            _ => stepper.nu_at(t),
        };
        samples.push(Sample {
            time: t,
            h_norm: u.h_norm(),
            v_norm: u.v_norm(),
            f_vdual: stepper.forcing().at(t).vdual_norm(),
            nu,
            residual,
            power: diag.power,
            dissipation: diag.dissipation,
            work,
            dissipated,
            gradnu_vdual: stepper.gradnu_vdual(u),
        });
        if config.snapshot_every > 0 && (samples.len() - 1).is_multiple_of(config.snapshot_every) {
            snapshots.push((t, u.clone()));
        }
    };

    let mut diag = stepper.diagnostics(&u, 0.0, None)?;
    record(
        &mut samples,
        &mut snapshots,
        &u,
        0.0,
        &diag,
        work,
        dissipated,
        &stepper,
    );
    for k in 0..steps {
        let t = k as f64 * config.dt;
        let (next, d0) = stepper.advance(&u, t, None)?;
        let t1 = (k + 1) as f64 * config.dt;
        let d1 = stepper.diagnostics(&next, t1, None)?;
        work += 0.5 * config.dt * (d0.power + d1.power);
        dissipated += 0.5 * config.dt * (d0.dissipation + d1.dissipation);
        u = next;
        diag = d1;
        if (k + 1) % config.sample_stride == 0 || k + 1 == steps {
            record(
                &mut samples,
                &mut snapshots,
                &u,
                t1,
                &diag,
                work,
                dissipated,
                &stepper,
            );
        }
    }
    Ok(TrajectoryRecord {
        config: config.clone(),
        samples,
        snapshots,
        final_state: u,
    })
}

/// Relative energy-balance defect per sample interval:
/// `|Δ(½‖u‖²) − (Δwork − Δdissipated)| / Δdissipated`.
pub fn energy_balance_residual(record: &TrajectoryRecord) -> Result<Vec<f64>> {
    if record.samples.len() < 3 {
        return Err(Error::Precondition(
            "energy balance needs at least 3 samples".into(),
        ));
    }
    Ok(record
        .samples
        .windows(2)
        .map(|w| {
            let e0 = 0.5 * w[0].h_norm.powi(2);
            let e1 = 0.5 * w[1].h_norm.powi(2);
            relative_residual(
                e1 - e0,
                w[1].work - w[0].work,
                w[1].dissipated - w[0].dissipated,
            )
        })
        .collect())
}

/// `‖(a sin(k y), 0)‖_{V'} = a π √2 / k` on the 2π box.
pub fn kolmogorov_vdual_norm(amplitude: f64, wavenumber: i64) -> f64 {
    amplitude.abs() * PI * 2f64.sqrt() / wavenumber as f64
}

/// Laminar fixed point amplitude `a / (ν k²)` of Kolmogorov forcing.
pub fn kolmogorov_laminar_amplitude(amplitude: f64, wavenumber: i64, nu: f64) -> f64 {
    amplitude / (nu * (wavenumber * wavenumber) as f64)
}

/// Spatial viscosity of a record's model on its grid, if any.
pub fn spatial_viscosity(config: &SolverConfig) -> Option<ScalarField> {
    match &config.viscosity {
        ViscosityModel::SpaceVarying(_) => config.viscosity.scalar_field(config.resolution).ok(),
        _ => None,
    }
}
