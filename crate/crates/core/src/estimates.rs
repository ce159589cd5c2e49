//! Grashof number, the sufficient projection count, a priori energy bounds checked
//! against trajectories, the coercivity predicate and Gronwall-type checkers.
//!
//! Asymptotic quantities are realized on finite records: a lim sup is the maximum
//! over the trailing half of the record, and a lim sup of window averages is the
//! maximum over windows starting in the trailing half.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{a_nu, bilinear_a};
use crate::solver::TrajectoryRecord;
use crate::spectral::{poincare_constant, stokes_lambda1, ScalarField, SpectralField};
use crate::viscosity::ViscosityModel;

/// Records must span this many dissipation times `c_ρ²/ν̲`.
pub const MIN_DISSIPATION_TIMES: f64 = 10.0;
/// Tail fraction of the `K̄` horizon searched for the maximum.
pub const KBAR_TAIL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateId {
    Energy1,
    Energy2,
    TimeEnergy1,
    TimeEnergy3,
    Energy2Time,
    Energy1Space,
    Energy2Space,
}

impl EstimateId {
    pub const ALL: [EstimateId; 7] = [
        EstimateId::Energy1,
        EstimateId::Energy2,
        EstimateId::TimeEnergy1,
        EstimateId::TimeEnergy3,
        EstimateId::Energy2Time,
        EstimateId::Energy1Space,
        EstimateId::Energy2Space,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimateId::Energy1 => "energy1",
            EstimateId::Energy2 => "energy2",
            EstimateId::TimeEnergy1 => "time-energy1",
            EstimateId::TimeEnergy3 => "time-energy3",
            EstimateId::Energy2Time => "energy2-time",
            EstimateId::Energy1Space => "energy1-space",
            EstimateId::Energy2Space => "energy2-space",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown estimate id `{s}`")))
    }

    /// Whether the estimate is a time average over windows of length `T`.
    pub fn is_time_average(self) -> bool {
        matches!(
            self,
            EstimateId::Energy2
                | EstimateId::TimeEnergy3
                | EstimateId::Energy2Time
                | EstimateId::Energy2Space
        )
    }

    /// Estimate ids that apply to a viscosity model.
    pub fn applicable(model: &ViscosityModel) -> Vec<EstimateId> {
        match model {
            ViscosityModel::Constant { .. } => vec![EstimateId::Energy1, EstimateId::Energy2],
            ViscosityModel::TimeVarying(_) => vec![
                EstimateId::TimeEnergy1,
                EstimateId::TimeEnergy3,
                EstimateId::Energy2Time,
            ],
            ViscosityModel::SpaceVarying(_) => {
                vec![EstimateId::Energy1Space, EstimateId::Energy2Space]
            }
        }
    }
}

/// `a(νu, u)` against `ν̲‖u‖²_V`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoercivityReport {
    pub a_nu_uu: f64,
    pub lower: f64,
    pub margin: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub id: EstimateId,
    pub measured: f64,
    pub bound: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub satisfied: bool,
    /// Trailing window `[start, end]` over which lim sup / averages were taken.
    pub window: (f64, f64),
    /// Averaging length `T` for time-averaged estimates.
    pub averaging_length: Option<f64>,
    pub nu_lower: f64,
    pub f_limsup_sq: f64,
    pub gradnu_limsup_sq: Option<f64>,
    pub kbar: Option<f64>,
    /// Worst coercivity margin over the stored states, for spatial models.
    pub coercivity: Option<CoercivityReport>,
}

pub const REPORT_CSV_HEADER: &str =
    "id,measured,bound,margin,tolerance,satisfied,window_start,window_end,averaging_length";

impl EstimateReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.17e},{:.17e},{:.17e},{:.17e},{},{:.17e},{:.17e},{}",
            self.id.name(),
            self.measured,
            self.bound,
            self.margin,
            self.tolerance,
            self.satisfied,
            self.window.0,
            self.window.1,
            self.averaging_length
                .map(|t| format!("{t:.17e}"))
                .unwrap_or_default()
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Maximum of `values` over samples with `time ≥ start`.
fn trailing_max(times: &[f64], values: &[f64], start: f64) -> Option<f64> {
    times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= start)
        .map(|(_, v)| *v)
        .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
}

fn trailing_start(times: &[f64]) -> f64 {
    let t0 = times[0];
    let t1 = *times.last().expect("nonempty");
    t0 + 0.5 * (t1 - t0)
}

/// Cumulative trapezoid integral.
fn cumulative(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..times.len() {
        acc += 0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1]);
        out.push(acc);
    }
    out
}

fn interp(times: &[f64], values: &[f64], t: f64) -> f64 {
    let i = times.partition_point(|&s| s <= t);
    if i == 0 {
        return values[0];
    }
    if i >= times.len() {
        return *values.last().expect("nonempty");
    }
    let (a, b) = (times[i - 1], times[i]);
    let w = (t - a) / (b - a);
    values[i - 1] * (1.0 - w) + values[i] * w
}

/// Window averages `(1/T)∫_t^{t+T} q` for every sample start `t ≥ from` with `t + T ≤ end`.
fn window_averages(times: &[f64], values: &[f64], window: f64, from: f64) -> Vec<(f64, f64)> {
    let cum = cumulative(times, values);
    let end = *times.last().expect("nonempty");
    times
        .iter()
        .enumerate()
        .filter(|(_, &t)| t >= from && t + window <= end * (1.0 + 1e-12))
        .map(|(i, &t)| (t, (interp(times, &cum, t + window) - cum[i]) / window))
        .collect()
}

/// `Gr = F / (λ₁ ν̲²)` with `F` the trailing maximum of `√λ₁ ‖f‖_{V'}`.
pub fn grashof(record: &TrajectoryRecord, nu_lower: f64) -> Result<f64> {
    if record.samples.len() < 2 {
        return Err(Error::Precondition(
            "grashof needs a nonempty trailing window".into(),
        ));
    }
    if !(nu_lower > 0.0) {
        return Err(Error::Precondition(format!(
            "nu_lower must be positive, got {nu_lower}"
        )));
    }
    let times = record.times();
    let f: Vec<f64> = record.samples.iter().map(|s| s.f_vdual).collect();
    let l1 = stokes_lambda1();
    let big_f =
        l1.sqrt() * trailing_max(&times, &f, trailing_start(&times)).expect("nonempty window");
    Ok(grashof_from(big_f, nu_lower))
}

pub fn grashof_from(f_limsup: f64, nu_lower: f64) -> f64 {
    f_limsup / (stokes_lambda1() * nu_lower * nu_lower)
}

/// Smallest integer `N` with `N^{2γ} > threshold`, saturating at `u64::MAX`.
pub fn smallest_n(threshold: f64, gamma: f64) -> u64 {
    let root = threshold.max(0.0).powf(1.0 / (2.0 * gamma));
    if !(root < 1e18) {
        return u64::MAX;
    }
    let mut n = root.floor().max(0.0) as u64 + 1;
    // guard against round-off in the root on either side
    while n > 1 && ((n - 1) as f64).powf(2.0 * gamma) > threshold {
        n -= 1;
    }
    while (n as f64).powf(2.0 * gamma) <= threshold {
        n += 1;
    }
    n
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NBoundReport {
    pub n_bound: u64,
    /// Right side `X` of `N^{2γ} > X`.
    pub threshold: f64,
    pub c1: f64,
    pub gamma: f64,
    pub nu_lower: f64,
    pub f_limsup: f64,
    pub kbar: Option<f64>,
    pub gradnu_limsup: Option<f64>,
    /// `theorem` for constant viscosity, `derived extension` otherwise.
    pub basis: String,
    /// Extra conditions the value depends on.
    pub conditions: Option<String>,
}

/// Inputs to the projection-count threshold, independent of any record.
#[derive(Debug, Clone, Copy)]
pub enum NBoundInputs {
    Constant {
        nu: f64,
        f_limsup: f64,
    },
    TimeVarying {
        nu_lower: f64,
        kbar: f64,
        f_limsup: f64,
    },
    SpaceVarying {
        nu_lower: f64,
        f_limsup: f64,
        gradnu_limsup: f64,
    },
}

/// `N^{2γ} > (4C1²/ν̲²) · B`, where `B` bounds the lim sup of `T`-averages of `‖u‖²_V`.
pub fn n_bound_from(inputs: NBoundInputs, c1: f64, gamma: f64) -> Result<NBoundReport> {
    if !(c1 > 0.0 && c1.is_finite()) || !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Uncertified(format!("C1 = {c1}, gamma = {gamma}")));
    }
    let c2 = poincare_constant().powi(2);
    let (nu, f, h1, kbar, g, basis, cond) = match inputs {
        NBoundInputs::Constant { nu, f_limsup } => (
            nu,
            f_limsup,
            2.0 / (nu * nu) * f_limsup * f_limsup,
            None,
            None,
            "theorem",
            None,
        ),
        NBoundInputs::TimeVarying {
            nu_lower,
            kbar,
            f_limsup,
        } => {
            let b = (kbar * nu_lower + c2) / (nu_lower * nu_lower * c2) * f_limsup * f_limsup;
            (
                nu_lower,
                f_limsup,
                b,
                Some(kbar),
                None,
                "derived extension",
                None,
            )
        }
        NBoundInputs::SpaceVarying {
            nu_lower,
            f_limsup,
            gradnu_limsup,
        } => {
            let b = (f_limsup * f_limsup + gradnu_limsup * gradnu_limsup) / (nu_lower * nu_lower);
            (
                nu_lower,
                f_limsup,
                b,
                None,
                Some(gradnu_limsup),
                "derived extension",
                Some("conditional on coercivity and on the measured ∇ν·∇u term".to_string()),
            )
        }
    };
    if !(nu > 0.0) {
        return Err(Error::Precondition(format!(
            "viscosity lower bound must be positive, got {nu}"
        )));
    }
    let threshold = 4.0 * c1 * c1 / (nu * nu) * h1;
    Ok(NBoundReport {
        n_bound: smallest_n(threshold, gamma),
        threshold,
        c1,
        gamma,
        nu_lower: nu,
        f_limsup: f,
        kbar,
        gradnu_limsup: g,
        basis: basis.into(),
        conditions: cond,
    })
}

/// Sufficient projection count for the record's viscosity model.
pub fn n_bound(
    record: &TrajectoryRecord,
    model: &ViscosityModel,
    c1: f64,
    gamma: f64,
) -> Result<NBoundReport> {
    if record.samples.len() < 2 {
        return Err(Error::Precondition("record too short for a lim sup".into()));
    }
    let times = record.times();
    let from = trailing_start(&times);
    let f: Vec<f64> = record.samples.iter().map(|s| s.f_vdual).collect();
    let f_limsup = trailing_max(&times, &f, from).expect("nonempty");
    let end = *times.last().expect("nonempty");
    let (nu_lower, _) = model.bounds((0.0, end))?;
    let inputs = match model {
        ViscosityModel::Constant { value } => NBoundInputs::Constant {
            nu: *value,
            f_limsup,
        },
        ViscosityModel::TimeVarying(_) => NBoundInputs::TimeVarying {
            nu_lower,
            kbar: kbar_for(model, nu_lower, end)?,
            f_limsup,
        },
        ViscosityModel::SpaceVarying(_) => {
            let g: Vec<f64> = record.samples.iter().map(|s| s.gradnu_vdual).collect();
            NBoundInputs::SpaceVarying {
                nu_lower,
                f_limsup,
                gradnu_limsup: trailing_max(&times, &g, from).expect("nonempty"),
            }
        }
    };
    n_bound_from(inputs, c1, gamma)
}

/// `K̄` with a horizon long enough for the decay criterion.
pub fn kbar_for(model: &ViscosityModel, nu_lower: f64, record_end: f64) -> Result<f64> {
    let c2 = poincare_constant().powi(2);
    // exp(-ν̲ t/c²) < 1e-12 needs t > 27.7 c²/ν̲ at the start of the tail
    let horizon = record_end.max(64.0 * c2 / nu_lower);
    Ok(model.kbar(poincare_constant(), horizon, KBAR_TAIL)?.value)
}

/// Closed-form right-hand sides of the a priori bounds.
pub fn estimate_bound(
    id: EstimateId,
    nu_lower: f64,
    f_sq: f64,
    kbar: Option<f64>,
    g_sq: Option<f64>,
) -> f64 {
    let c2 = poincare_constant().powi(2);
    let nu = nu_lower;
    let k = kbar.unwrap_or(c2 / nu);
    let g = g_sq.unwrap_or(0.0);
    match id {
        EstimateId::Energy1 => c2 / (nu * nu) * f_sq,
        EstimateId::Energy2 => 2.0 / (nu * nu) * f_sq,
        EstimateId::TimeEnergy1 => k / nu * f_sq,
        EstimateId::TimeEnergy3 => (k * nu + c2) / (nu * nu * c2) * f_sq,
        EstimateId::Energy2Time => (k * nu + c2) / (nu * c2) * f_sq,
        EstimateId::Energy1Space => c2 / (2.0 * nu * nu) * (f_sq + g),
        EstimateId::Energy2Space => (f_sq + g) / (nu * nu),
    }
}

fn model_matches(id: EstimateId, model: &ViscosityModel) -> bool {
    match id {
        EstimateId::Energy1 | EstimateId::Energy2 => {
            matches!(model, ViscosityModel::Constant { .. })
        }
        EstimateId::TimeEnergy1 | EstimateId::TimeEnergy3 | EstimateId::Energy2Time => {
            matches!(
                model,
                ViscosityModel::Constant { .. } | ViscosityModel::TimeVarying(_)
            )
        }
        EstimateId::Energy1Space | EstimateId::Energy2Space => {
            matches!(model, ViscosityModel::SpaceVarying(_))
        }
    }
}

/// Checks one a priori estimate on a trajectory.
///
/// `averaging_length` is the window `T` of time-averaged estimates and must be at
/// least one dissipation time; it is ignored for pointwise lim sup estimates.
pub fn verify_apriori(
    record: &TrajectoryRecord,
    model: &ViscosityModel,
    which: EstimateId,
    averaging_length: f64,
) -> Result<EstimateReport> {
    if !model_matches(which, model) {
        return Err(Error::WrongModel {
            estimate: which.name().into(),
            detail: format!("model kind is {}", model.kind_name()),
        });
    }
    if record.samples.len() < 3 {
        return Err(Error::InsufficientHorizon(
            "record has fewer than 3 samples".into(),
        ));
    }
    let times = record.times();
    let (t0, end) = (times[0], *times.last().expect("nonempty"));
    let (nu_lower, _) = model.bounds((t0, end))?;
    let c2 = poincare_constant().powi(2);
    let dissipation_time = c2 / nu_lower;
    if end - t0 < MIN_DISSIPATION_TIMES * dissipation_time * (1.0 - 1e-12) {
        return Err(Error::InsufficientHorizon(format!(
            "record spans {:.4} but {MIN_DISSIPATION_TIMES} dissipation times are {:.4}",
            end - t0,
            MIN_DISSIPATION_TIMES * dissipation_time
        )));
    }
    let from = trailing_start(&times);
    let f_sq: Vec<f64> = record
        .samples
        .iter()
        .map(|s| s.f_vdual * s.f_vdual)
        .collect();
    let f_limsup_sq = trailing_max(&times, &f_sq, from).expect("nonempty");

    let spatial = matches!(model, ViscosityModel::SpaceVarying(_));
    let g_limsup_sq = if spatial {
        let g: Vec<f64> = record
            .samples
            .iter()
            .map(|s| s.gradnu_vdual * s.gradnu_vdual)
            .collect();
        Some(trailing_max(&times, &g, from).expect("nonempty"))
    } else {
        None
    };
    let kbar = match which {
        EstimateId::TimeEnergy1 | EstimateId::TimeEnergy3 | EstimateId::Energy2Time => {
            Some(kbar_for(model, nu_lower, end)?)
        }
        _ => None,
    };

    let (measured, averaging) = if which.is_time_average() {
        if averaging_length < dissipation_time * (1.0 - 1e-12) {
            return Err(Error::Precondition(format!(
                "averaging length {averaging_length} is below the dissipation time {dissipation_time}"
            )));
        }
        if averaging_length > end - from {
            return Err(Error::InsufficientHorizon(format!(
                "averaging length {averaging_length} exceeds the trailing half of the record"
            )));
        }
        let q: Vec<f64> = record
            .samples
            .iter()
            .map(|s| {
                let v2 = s.v_norm * s.v_norm;
                if which == EstimateId::Energy2Time {
                    s.nu * v2
                } else {
                    v2
                }
            })
            .collect();
        let avgs = window_averages(&times, &q, averaging_length, from);
        let m = avgs.iter().map(|a| a.1).fold(f64::NEG_INFINITY, f64::max);
        (m, Some(averaging_length))
    } else {
        let h: Vec<f64> = record.samples.iter().map(|s| s.h_norm * s.h_norm).collect();
        (trailing_max(&times, &h, from).expect("nonempty"), None)
    };

    let bound = estimate_bound(which, nu_lower, f_limsup_sq, kbar, g_limsup_sq);
    let rho = record.max_residual();
    let tolerance = 1e-8f64.max(5.0 * rho) * bound;
    let margin = bound - measured;

    let coercivity = if spatial {
        let nu = model.scalar_field(record.config.resolution)?;
        let mut worst: Option<CoercivityReport> = None;
        let states = record
            .snapshots
            .iter()
            .map(|(_, f)| f)
            .chain(std::iter::once(&record.final_state));
        for u in states {
            let rep = coercivity_check_with(&nu, u, nu_lower)?;
            if worst.is_none_or(|w| rep.margin < w.margin) {
                worst = Some(rep);
            }
        }
        worst
    } else {
        None
    };

    Ok(EstimateReport {
        id: which,
        measured,
        bound,
        margin,
        tolerance,
        satisfied: margin >= -tolerance,
        window: (from, end),
        averaging_length: averaging,
        nu_lower,
        f_limsup_sq,
        gradnu_limsup_sq: g_limsup_sq,
        kbar,
        coercivity,
    })
}

/// Measures `a(νu, u)` against `ν̲‖u‖²_V` with `ν̲` the grid minimum of `ν`.
pub fn coercivity_check(nu: &ScalarField, u: &SpectralField) -> Result<CoercivityReport> {
    coercivity_check_with(nu, u, nu.min())
}

pub fn coercivity_check_with(
    nu: &ScalarField,
    u: &SpectralField,
    nu_lower: f64,
) -> Result<CoercivityReport> {
    let a = a_nu(nu, u, u)?.value;
    let lower = nu_lower * bilinear_a(u, u)?.value;
    let margin = a - lower;
    let tol = 1e-12 * a.abs().max(lower.abs());
    Ok(CoercivityReport {
        a_nu_uu: a,
        lower,
        margin,
        holds: margin >= -tol,
    })
}

// ---------------------------------------------------------------------------
// Gronwall

fn check_series(times: &[f64], series: &[&[f64]]) -> Result<()> {
    if times.len() < 2 {
        return Err(Error::Precondition(
            "series needs at least two samples".into(),
        ));
    }
    for s in series {
        if s.len() != times.len() {
            return Err(Error::Structural(format!(
                "series of length {} on a grid of {}",
                s.len(),
                times.len()
            )));
        }
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition(
            "time grid must increase strictly".into(),
        ));
    }
    Ok(())
}

/// Cubic Lagrange interpolant through the four samples around interval `i`.
fn cubic_at(times: &[f64], values: &[f64], i: usize, t: f64) -> f64 {
    let n = times.len();
    if n < 4 {
        let w = (t - times[i]) / (times[i + 1] - times[i]);
        return values[i] * (1.0 - w) + values[i + 1] * w;
    }
    let s = i.saturating_sub(1).min(n - 4);
    let mut acc = 0.0;
    for a in s..s + 4 {
        let mut l = 1.0;
        for b in s..s + 4 {
            if a != b {
                l *= (t - times[b]) / (times[a] - times[b]);
            }
        }
        acc += l * values[a];
    }
    acc
}

const GL4_X: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_26,
    0.339_981_043_584_856_26,
    0.861_136_311_594_052_6,
];
const GL4_W: [f64; 4] = [
    0.347_854_845_137_453_85,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_85,
];

fn gl4<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    GL4_X
        .iter()
        .zip(&GL4_W)
        .map(|(x, w)| w * f(c + h * x))
        .sum::<f64>()
        * h
}

/// `y0 e^{−∫_0^t α} + ∫_0^t β(s) e^{−∫_s^t α} ds` on the sample grid.
///
/// `α` and `β` are interpolated by local cubics, so the result is fourth-order
/// accurate in the grid spacing.
pub fn gronwall_classical(y0: f64, alpha: &[f64], beta: &[f64], times: &[f64]) -> Result<Vec<f64>> {
    check_series(times, &[alpha, beta])?;
    if let Some(i) = alpha.iter().position(|&a| a < 0.0) {
        return Err(Error::Precondition(format!(
            "alpha is negative at t = {}",
            times[i]
        )));
    }
    if let Some(i) = beta.iter().position(|&b| b < 0.0) {
        return Err(Error::Precondition(format!(
            "beta is negative at t = {}",
            times[i]
        )));
    }
    let mut out = Vec::with_capacity(times.len());
    let mut bound = y0;
    out.push(bound);
    for i in 0..times.len() - 1 {
        let (a, b) = (times[i], times[i + 1]);
        let al = |t: f64| cubic_at(times, alpha, i, t);
        // ∫_s^b α for s inside the interval
        let tail = |s: f64| gl4(al, s, b);
        let decay = (-tail(a)).exp();
        let local = gl4(|s| cubic_at(times, beta, i, s) * (-tail(s)).exp(), a, b);
        bound = bound * decay + local;
        out.push(bound);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Hypotheses hold on the data and `y` has decayed below threshold.
    Consistent,
    HypothesesNotMet,
    /// Hypotheses hold but `y` has not decayed within the record.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GronwallVerdict {
    /// Minimum window average of `α` over windows in the trailing half.
    pub m: f64,
    /// Maximum window average of `α⁻`.
    pub big_m: f64,
    /// Average of `β⁺` over the final window.
    pub beta_plus_limit: f64,
    /// Maximum of `y` over the final window.
    pub y_limit_estimate: f64,
    pub window: f64,
    /// `β⁺` and `y` count as vanished below these values.
    pub beta_threshold: f64,
    pub y_threshold: f64,
    pub verdict: Verdict,
}

/// Relative thresholds for "tends to zero" on a finite record.
pub const VANISHING_RELATIVE: f64 = 1e-10;

/// Classifies sampled `(α, β, y)` against the generalized Gronwall hypotheses.
pub fn gronwall_generalized_check(
    alpha: &[f64],
    beta: &[f64],
    y: &[f64],
    times: &[f64],
    window: f64,
) -> Result<GronwallVerdict> {
    check_series(times, &[alpha, beta, y])?;
    let (t0, end) = (times[0], *times.last().expect("nonempty"));
    if !(window > 0.0) || window > end - t0 {
        return Err(Error::Precondition(format!(
            "window {window} does not fit in the series span {}",
            end - t0
        )));
    }
    let mid = t0 + 0.5 * (end - t0);
    let from = if window <= end - mid { mid } else { t0 };
    let a_avg = window_averages(times, alpha, window, from);
    let minus: Vec<f64> = alpha.iter().map(|a| (-a).max(0.0)).collect();
    let plus: Vec<f64> = beta.iter().map(|b| b.max(0.0)).collect();
    let m = a_avg.iter().map(|a| a.1).fold(f64::INFINITY, f64::min);
    let big_m = window_averages(times, &minus, window, from)
        .iter()
        .map(|a| a.1)
        .fold(0.0, f64::max);
    let last_start = end - window;
    let cum = cumulative(times, &plus);
    let beta_plus_limit =
        (cum.last().copied().unwrap_or(0.0) - interp(times, &cum, last_start)) / window;
    let y_limit_estimate = trailing_max(times, y, last_start).unwrap_or(0.0);
    let beta_scale = plus.iter().copied().fold(0.0, f64::max);
    let y_scale = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let beta_threshold = VANISHING_RELATIVE * beta_scale;
    let y_threshold = VANISHING_RELATIVE * y_scale;
    let hypotheses = m > 0.0 && big_m.is_finite() && beta_plus_limit <= beta_threshold;
    let verdict = if !hypotheses {
        Verdict::HypothesesNotMet
    } else if y_limit_estimate <= y_threshold {
        Verdict::Consistent
    } else {
        Verdict::Inconclusive
    };
    Ok(GronwallVerdict {
        m,
        big_m,
        beta_plus_limit,
        y_limit_estimate,
        window,
        beta_threshold,
        y_threshold,
        verdict,
    })
}

/// `α`, `β`, `y` of the difference inequality `d/dt‖w‖² + α‖w‖² ≤ β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceSeries {
    pub times: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub y: Vec<f64>,
}

/// Builds the difference-inequality series from sampled norms.
///
/// `alpha = νN^{2γ}/(2C1²) − (2/ν)‖u‖²_V`,
/// `beta = (2/ν)‖f − g‖²_{V'} + (νN^{2γ}/C1²)‖R_N w‖²`, `y = ‖w‖²_H`.
#[allow(clippy::too_many_arguments)]
pub fn difference_series(
    nu: f64,
    count: usize,
    c1: f64,
    gamma: f64,
    times: &[f64],
    u_v_norm: &[f64],
    forcing_gap_vdual: &[f64],
    projected_gap: &[f64],
    w_h_norm: &[f64],
) -> Result<DifferenceSeries> {
    check_series(
        times,
        &[u_v_norm, forcing_gap_vdual, projected_gap, w_h_norm],
    )?;
    let ng = (count as f64).powf(2.0 * gamma);
    let alpha = u_v_norm
        .iter()
        .map(|v| nu * ng / (2.0 * c1 * c1) - 2.0 / nu * v * v)
        .collect();
    let beta = forcing_gap_vdual
        .iter()
        .zip(projected_gap)
        .map(|(g, r)| 2.0 / nu * g * g + nu * ng / (c1 * c1) * r * r)
        .collect();
    let y = w_h_norm.iter().map(|w| w * w).collect();
    Ok(DifferenceSeries {
        times: times.to_vec(),
        alpha,
        beta,
        y,
    })
}

/// Young's inequality `ab ≤ a^p/p + b^q/q` for conjugate exponents; returns `(ab, rhs)`.
pub fn young(a: f64, b: f64, p: f64) -> Result<(f64, f64)> {
    if !(a >= 0.0 && b >= 0.0 && p > 1.0) {
        return Err(Error::Precondition(format!(
            "young needs a, b ≥ 0 and p > 1, got {a}, {b}, {p}"
        )));
    }
    let q = p / (p - 1.0);
    Ok((a * b, a.powf(p) / p + b.powf(q) / q))
}
