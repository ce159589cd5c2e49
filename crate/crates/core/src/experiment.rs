//! Twin-solution experiments, estimate suites and projection certification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates::{
    difference_series, grashof, n_bound_from, verify_apriori, DifferenceSeries, EstimateId,
    EstimateReport, NBoundInputs, NBoundReport, REPORT_CSV_HEADER,
};
use crate::projections::{
    estimate_constants, Certification, Ensemble, FamilyKind, ProjectionOperator, ProjectionSpec,
};
use crate::solver::{
    integrate, Forcing, ForcingSpec, InitialCondition, SolverConfig, Stepper, TrajectoryRecord,
};
use crate::spectral::{poincare_constant, stokes_lambda1, SpectralField};

/// Twin runs should span this many dissipation times before a verdict is trusted.
pub const TWIN_DISSIPATION_TIMES: f64 = 50.0;
/// Fraction of the horizon treated as "trailing" for the twin verdict.
pub const TWIN_TRAILING_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TwinMode {
    /// Overwrite `R_N v` with `R_N u` after every step; spectral projections only.
    Slaving,
    /// Add `−μ P R_N(v − u)` to the right side of `v`. Default `μ = 10 ν̲ λ₁`.
    Nudging {
        #[serde(default)]
        mu: Option<f64>,
    },
}

/// `g = f + e^{−σt} d` with `‖d‖_{V'} = magnitude`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub sigma: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxConstants {
    pub c1: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Seeds the initial data of `v` and the forcing perturbation direction.
    pub seed: u64,
    pub epsilon_h: f64,
    #[serde(default)]
    pub report_dir: Option<String>,
    pub solver: SolverConfig,
    pub projection: ProjectionSpec,
    pub twin: TwinMode,
    pub perturbation: Perturbation,
    /// Initial data for `v`; defaults to the solver's initial condition drawn with `seed`.
    #[serde(default)]
    pub v_initial: Option<InitialCondition>,
    /// Certified approximation constants, used for `n_bound` and the difference series.
    #[serde(default)]
    pub constants: Option<ApproxConstants>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if !(self.epsilon_h > 0.0) {
            return Err(Error::Config(format!(
                "epsilon_h must be positive, got {}",
                self.epsilon_h
            )));
        }
        if !(self.perturbation.sigma >= 0.0) || !(self.perturbation.magnitude >= 0.0) {
            return Err(Error::Config(
                "perturbation sigma and magnitude must be non-negative".into(),
            ));
        }
        if let TwinMode::Nudging { mu: Some(mu) } = self.twin {
            if !(mu > 0.0) {
                return Err(Error::Config(format!(
                    "nudging mu must be positive, got {mu}"
                )));
            }
        }
        let op = ProjectionOperator::new(self.projection, self.solver.resolution)
            .map_err(|e| Error::Config(e.to_string()))?;
        if matches!(self.twin, TwinMode::Slaving) && !op.is_spectral() {
            return Err(Error::Config(
                "slaving needs a projection that is idempotent on V; use mode = \"nudging\" for volume projections".into(),
            ));
        }
        if let Some(c) = self.constants {
            if !(c.c1 > 0.0 && c.gamma > 0.0) {
                return Err(Error::Config(format!(
                    "constants must be positive, got C1 = {}, gamma = {}",
                    c.c1, c.gamma
                )));
            }
        }
        Ok(())
    }

    pub fn nu_lower(&self) -> Result<f64> {
        Ok(self.solver.viscosity.bounds((0.0, self.solver.t_end))?.0)
    }

    pub fn nudging_strength(&self) -> Result<Option<f64>> {
        Ok(match self.twin {
            TwinMode::Slaving => None,
            TwinMode::Nudging { mu: Some(mu) } => Some(mu),
            TwinMode::Nudging { mu: None } => Some(10.0 * self.nu_lower()? * stokes_lambda1()),
        })
    }

    pub fn perturbed_forcing(&self) -> ForcingSpec {
        ForcingSpec::Perturbed {
            base: Box::new(self.solver.forcing.clone()),
            sigma: self.perturbation.sigma,
            magnitude: self.perturbation.magnitude,
            direction_seed: self.seed,
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwinVerdict {
    Determined,
    NotDeterminedWithinHorizon,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwinSample {
    pub time: f64,
    /// `‖R_N(u − v)‖_{L²}`.
    pub projected_gap: f64,
    /// `‖u − v‖_H`.
    pub gap: f64,
    pub u_h_norm: f64,
    pub u_v_norm: f64,
    /// `‖f − g‖_{V'}`.
    pub forcing_gap: f64,
}

pub const TWIN_CSV_COLUMNS: [&str; 6] = [
    "time",
    "projected_gap",
    "gap",
    "u_h_norm",
    "u_v_norm",
    "forcing_gap",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwinReport {
    pub config: ExperimentConfig,
    pub count: usize,
    pub nudging_mu: Option<f64>,
    pub n_bound: Option<NBoundReport>,
    /// Max of `‖u − v‖_H` over the trailing tenth of the horizon.
    pub trailing_gap: f64,
    pub trailing_projected_gap: f64,
    pub horizon_dissipation_times: f64,
    pub verdict: TwinVerdict,
    pub samples: Vec<TwinSample>,
    /// `α`, `β`, `y` of the difference inequality, when constants are supplied.
    pub difference: Option<DifferenceSeries>,
}

impl TwinReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = TWIN_CSV_COLUMNS.join(",");
        out.push('\n');
        for s in &self.samples {
            let row = [
                s.time,
                s.projected_gap,
                s.gap,
                s.u_h_norm,
                s.u_v_norm,
                s.forcing_gap,
            ];
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Replaces the `R_N` part of `v` with that of `u`.
fn slave(op: &ProjectionOperator, u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    let ru = op.apply_spectral(u)?;
    let rv = op.apply_spectral(v)?;
    v.sub(&rv)?.add(&ru)
}

/// Evolves `u` under `f` and `v` under the perturbed forcing `g`, enforcing the
/// projection hypothesis by slaving or nudging, and classifies `‖u − v‖_H`.
pub fn twin_run(config: &ExperimentConfig) -> Result<TwinReport> {
    config.validate()?;
    let sc = &config.solver;
    let n = sc.resolution;
    let steps = sc.steps()?;
    let op = ProjectionOperator::new(config.projection, n)?;
    let mu = config.nudging_strength()?;
    let nu_lower = config.nu_lower()?;

    let mut su = Stepper::new(sc)?;
    let mut sv = Stepper::with_forcing(sc, Forcing::new(&config.perturbed_forcing(), n)?)?;
    let mut u = sc.initial.build(n, sc.seed)?;
    let v_init = config
        .v_initial
        .clone()
        .unwrap_or_else(|| sc.initial.clone());
    let mut v = v_init.build(n, config.seed)?;
    if mu.is_none() {
        v = slave(&op, &u, &v)?;
    }

    let mut samples = Vec::new();
    let sample = |t: f64,
                  u: &SpectralField,
                  v: &SpectralField,
                  su: &Stepper,
                  sv: &Stepper|
     -> Result<TwinSample> {
        let w = u.sub(v)?;
        let dg = su.forcing().at(t).sub(&sv.forcing().at(t))?;
        Ok(TwinSample {
            time: t,
            projected_gap: op.projected_norm(&w)?,
            gap: w.h_norm(),
            u_h_norm: u.h_norm(),
            u_v_norm: u.v_norm(),
            forcing_gap: dg.vdual_norm(),
        })
    };
    samples.push(sample(0.0, &u, &v, &su, &sv)?);
    for k in 0..steps {
        let t = k as f64 * sc.dt;
        let nudge = match mu {
            Some(mu) => {
                let rw = op.apply_spectral(&v.sub(&u)?)?;
                Some(rw.leray_project().scaled(-mu))
            }
            None => None,
        };
        let (un, _) = su.advance(&u, t, None)?;
        let (mut vn, _) = sv.advance(&v, t, nudge.as_ref())?;
        if mu.is_none() {
            vn = slave(&op, &un, &vn)?;
        }
        u = un;
        v = vn;
        if (k + 1) % sc.sample_stride == 0 || k + 1 == steps {
            samples.push(sample((k + 1) as f64 * sc.dt, &u, &v, &su, &sv)?);
        }
    }

    let t_end = samples.last().map(|s| s.time).unwrap_or(0.0);
    let from = t_end * (1.0 - TWIN_TRAILING_FRACTION);
    let trailing = samples.iter().filter(|s| s.time >= from);
    let trailing_gap = trailing.clone().map(|s| s.gap).fold(0.0, f64::max);
    let trailing_projected_gap = trailing.map(|s| s.projected_gap).fold(0.0, f64::max);
    let verdict = if trailing_gap < config.epsilon_h && trailing_projected_gap < config.epsilon_h {
        TwinVerdict::Determined
    } else {
        TwinVerdict::NotDeterminedWithinHorizon
    };

    let (n_bound, difference) = match config.constants {
        Some(c) => {
            let f_limsup = samples
                .iter()
                .filter(|s| s.time >= 0.5 * t_end)
                .map(|s| su.forcing().at(s.time).vdual_norm())
                .fold(0.0, f64::max);
            let bound = match &sc.viscosity {
                crate::viscosity::ViscosityModel::Constant { value } => Some(n_bound_from(
                    NBoundInputs::Constant {
                        nu: *value,
                        f_limsup,
                    },
                    c.c1,
                    c.gamma,
                )?),
                _ => None,
            };
            let times: Vec<f64> = samples.iter().map(|s| s.time).collect();
            let col = |f: fn(&TwinSample) -> f64| samples.iter().map(f).collect::<Vec<f64>>();
            let diff = difference_series(
                nu_lower,
                op.count(),
                c.c1,
                c.gamma,
                &times,
                &col(|s| s.u_v_norm),
                &col(|s| s.forcing_gap),
                &col(|s| s.projected_gap),
                &col(|s| s.gap),
            )?;
            (bound, Some(diff))
        }
        None => (None, None),
    };

    Ok(TwinReport {
        config: config.clone(),
        count: op.count(),
        nudging_mu: mu,
        n_bound,
        trailing_gap,
        trailing_projected_gap,
        horizon_dissipation_times: t_end * nu_lower / poincare_constant().powi(2),
        verdict,
        samples,
        difference,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub grashof: f64,
    pub max_residual: f64,
    pub reports: Vec<EstimateReport>,
    pub all_satisfied: bool,
}

impl SuiteReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per estimate and a trailing summary row.
    pub fn to_csv_string(&self) -> String {
        let mut out = format!("{REPORT_CSV_HEADER}\n");
        for r in &self.reports {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out.push_str(&format!("summary,,,,,{},,,\n", self.all_satisfied));
        out
    }
}

/// Verifies every estimate applicable to an existing record.
///
/// `averaging_length` defaults to one dissipation time.
pub fn estimate_suite_for(
    record: &TrajectoryRecord,
    averaging_length: Option<f64>,
) -> Result<SuiteReport> {
    let model = &record.config.viscosity;
    let nu_lower = model.bounds((0.0, record.config.t_end))?.0;
    let t = averaging_length.unwrap_or(poincare_constant().powi(2) / nu_lower);
    let reports = EstimateId::applicable(model)
        .into_iter()
        .map(|id| verify_apriori(record, model, id, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport {
        grashof: grashof(record, nu_lower)?,
        max_residual: record.max_residual(),
        all_satisfied: reports.iter().all(|r| r.satisfied),
        reports,
    })
}

/// Integrates `config` and verifies every applicable estimate.
pub fn estimate_suite(config: &SolverConfig, averaging_length: Option<f64>) -> Result<SuiteReport> {
    let nu_lower = config.viscosity.bounds((0.0, config.t_end))?.0;
    let needed = crate::estimates::MIN_DISSIPATION_TIMES * poincare_constant().powi(2) / nu_lower;
    if config.t_end < needed * (1.0 - 1e-12) {
        return Err(Error::InsufficientHorizon(format!(
            "t_end = {} is below 10 dissipation times ({needed})",
            config.t_end
        )));
    }
    estimate_suite_for(&integrate(config)?, averaging_length)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyConfig {
    pub family: FamilyKind,
    pub parameters: Vec<usize>,
    pub resolution: usize,
    pub samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub ensemble: Ensemble,
}

impl CertifyConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }
}

/// Measures `(C1, γ)` for a projection family.
pub fn certify_projection(config: &CertifyConfig) -> Result<Certification> {
    estimate_constants(
        config.family,
        &config.parameters,
        config.resolution,
        config.samples,
        config.seed,
        config.ensemble,
    )
}

/// Serializes a certification as a TOML artifact.
pub fn certification_artifact(cert: &Certification) -> Result<String> {
    Ok(toml::to_string(cert)?)
}

pub fn read_certification(s: &str) -> Result<Certification> {
    Ok(toml::from_str(s)?)
}
