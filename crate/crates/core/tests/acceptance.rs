//! Acceptance harness: one PASS/FAIL line per criterion.
//!
//! The process exits 0 so the workspace test run stays usable while a failing
//! criterion is reported; set `DETPROJ_ACCEPTANCE_STRICT=1` to exit 1 on any FAIL.

use std::f64::consts::PI;
use std::time::Instant;

use detproj::estimates::{
    estimate_bound, gronwall_classical, gronwall_generalized_check, verify_apriori, EstimateId,
    Verdict,
};
use detproj::experiment::{
    certification_artifact, certify_projection, estimate_suite_for, twin_run, ApproxConstants,
    CertifyConfig, ExperimentConfig, Perturbation, TwinMode, TwinVerdict,
};
use detproj::operators::{gradnu_gradu, ladyzhenskaya_bound, trilinear_b};
use detproj::projections::{
    check_approx_inequalities, Ensemble, FamilyKind, ProjectionOperator, ProjectionSpec,
};
use detproj::solver::{
    integrate, kolmogorov_laminar_amplitude, ForcingSpec, InitialCondition, SolverConfig, Stepper,
};
use detproj::viscosity::{SpatialProfile, TimeProfile, ViscosityModel};
use detproj::{ScalarField, SpectralField, Spectrum};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn run(id: u32, budget_s: f64, f: impl FnOnce() -> Outcome) -> bool {
    let t0 = Instant::now();
    let out = f();
    let secs = t0.elapsed().as_secs_f64();
    let pass = out.pass && secs < budget_s;
    println!(
        "criterion {id:>2}: {} ({secs:.1}s, budget {budget_s:.0}s) {}",
        if pass { "PASS" } else { "FAIL" },
        out.detail
    );
    pass
}

fn chaotic(t_end: f64) -> SolverConfig {
    SolverConfig {
        resolution: 64,
        dt: 0.01,
        t_end,
        sample_stride: 10,
        seed: 5,
        snapshot_every: 0,
        viscosity: ViscosityModel::constant(1.0 / 30.0),
        forcing: ForcingSpec::Kolmogorov {
            amplitude: 1.0,
            wavenumber: 4,
        },
        initial: InitialCondition::RandomBand {
            k_lo: 1.0,
            k_hi: 8.0,
            h_norm: 1.0,
        },
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn criterion1() -> Outcome {
    let cfg = chaotic(100.0);
    let mut stepper = Stepper::new(&cfg).unwrap();
    let mut u = cfg.initial.build(64, cfg.seed).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..10_000 {
        let (next, _) = stepper.advance(&u, k as f64 * cfg.dt, None).unwrap();
        u = next;
        worst = worst.max(u.divergence_norm() / u.h_norm());
    }
    let mut r = rng(1);
    let (mut idem, mut adj): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let a = SpectralField::random_vector(
            64,
            Spectrum::Band {
                k_lo: 1.0,
                k_hi: 21.0,
            },
            1.0,
            &mut r,
        )
        .unwrap();
        let b = SpectralField::random_vector(
            64,
            Spectrum::Band {
                k_lo: 1.0,
                k_hi: 21.0,
            },
            1.0,
            &mut r,
        )
        .unwrap();
        let pa = a.leray_project();
        idem = idem.max(pa.leray_project().sub(&pa).unwrap().h_norm());
        adj = adj.max((pa.inner(&b).unwrap() - a.inner(&b.leray_project()).unwrap()).abs());
    }
    Outcome {
        pass: worst <= 1e-12 && idem <= 1e-12 && adj <= 1e-12,
        detail: format!(
            "max div/|u|_H = {worst:.2e}; |P²a − Pa| = {idem:.2e}; adjoint defect = {adj:.2e}"
        ),
    }
}

fn criterion2() -> Outcome {
    let mut r = rng(2);
    let band = Spectrum::Band {
        k_lo: 1.0,
        k_hi: 10.0,
    };
    let (mut e_vv, mut e_anti, mut e_diff): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut lady_violations = 0;
    for _ in 0..1000 {
        let u = SpectralField::random_solenoidal(32, band, 1.0, &mut r).unwrap();
        let v = SpectralField::random_solenoidal(32, band, 1.0, &mut r).unwrap();
        let w = SpectralField::random_solenoidal(32, band, 1.0, &mut r).unwrap();
        let scale = u.v_norm() * v.v_norm() * w.v_norm();
        let b = |a: &SpectralField, c: &SpectralField, d: &SpectralField| {
            trilinear_b(a, c, d).unwrap().value
        };
        e_vv = e_vv.max(b(&u, &v, &v).abs() / scale);
        let buvw = b(&u, &v, &w);
        e_anti = e_anti.max((buvw + b(&u, &w, &v)).abs() / scale);
        let d = u.sub(&v).unwrap();
        let lhs = b(&u, &u, &w) - b(&v, &v, &w);
        let rhs = b(&d, &u, &w) + b(&v, &d, &w);
        e_diff = e_diff.max((lhs - rhs).abs() / scale);
        if buvw.abs() > ladyzhenskaya_bound(&u, &v, &w) {
            lady_violations += 1;
        }
    }
    Outcome {
        pass: e_vv <= 1e-10 && e_anti <= 1e-10 && e_diff <= 1e-10 && lady_violations == 0,
        detail: format!(
            "b(u,v,v) {e_vv:.1e}, antisymmetry {e_anti:.1e}, difference identity {e_diff:.1e}, Ladyzhenskaya violations {lady_violations}/1000"
        ),
    }
}

fn criterion3() -> Outcome {
    let nu = 0.1;
    let err = |dt: f64| {
        let cfg = SolverConfig {
            resolution: 16,
            dt,
            t_end: 1.0,
            sample_stride: 1000,
            seed: 0,
            snapshot_every: 0,
            viscosity: ViscosityModel::constant(nu),
            forcing: ForcingSpec::Zero,
            initial: InitialCondition::TaylorGreen { amplitude: 1.0 },
        };
        let rec = integrate(&cfg).unwrap();
        let exact = SpectralField::taylor_green(16, (-2.0 * nu).exp()).unwrap();
        rec.final_state.sub(&exact).unwrap().h_norm()
    };
    let es: Vec<f64> = [0.1, 0.05, 0.025, 0.0125]
        .iter()
        .map(|&dt| err(dt))
        .collect();
    let orders: Vec<f64> = es.windows(2).map(|w| (w[0] / w[1]).log2()).collect();

    let lam = SolverConfig {
        resolution: 32,
        dt: 0.05,
        t_end: 30.0,
        sample_stride: 100,
        seed: 0,
        snapshot_every: 0,
        viscosity: ViscosityModel::constant(0.5),
        forcing: ForcingSpec::Kolmogorov {
            amplitude: 1.0,
            wavenumber: 2,
        },
        initial: InitialCondition::Zero,
    };
    let rec = integrate(&lam).unwrap();
    let amp = kolmogorov_laminar_amplitude(1.0, 2, 0.5);
    let exact = SpectralField::from_fn(32, |_, y| [amp * (2.0 * y).sin(), 0.0]).unwrap();
    let lam_err = rec.final_state.sub(&exact).unwrap().h_norm() / exact.h_norm();
    Outcome {
        pass: orders.iter().all(|p| (p - 2.0).abs() <= 0.2) && lam_err <= 1e-8,
        detail: format!(
            "Taylor–Green orders {orders:.3?}; laminar Kolmogorov relative error {lam_err:.2e}"
        ),
    }
}

fn criterion4() -> Outcome {
    let cfg = chaotic(300.0);
    let rec = integrate(&cfg).unwrap();
    let suite = estimate_suite_for(&rec, None).unwrap();
    let lines: Vec<String> = suite
        .reports
        .iter()
        .map(|r| {
            format!(
                "{} {:.3e} ≤ {:.3e} (tol {:.1e}) {}",
                r.id.name(),
                r.measured,
                r.bound,
                r.tolerance,
                r.satisfied
            )
        })
        .collect();
    Outcome {
        pass: suite.all_satisfied
            && (500.0..2000.0).contains(&suite.grashof)
            && suite.reports.len() == 2,
        detail: format!(
            "Gr = {:.1}, max residual {:.1e}; {}",
            suite.grashof,
            suite.max_residual,
            lines.join("; ")
        ),
    }
}

fn criterion5() -> Outcome {
    let nu0: f64 = 0.7;
    let c2 = 1.0;
    let model = ViscosityModel::TimeVarying(TimeProfile::Constant { value: nu0 });
    let kbar = model.kbar(1.0, 64.0 / nu0, 0.5).unwrap().value;
    let kbar_err = (kbar - c2 / nu0).abs() / (c2 / nu0);
    let f2 = 2.3;
    let pairs = [
        (
            EstimateId::TimeEnergy1,
            estimate_bound(EstimateId::Energy1, nu0, f2, None, None),
        ),
        (
            EstimateId::TimeEnergy3,
            estimate_bound(EstimateId::Energy2, nu0, f2, None, None),
        ),
        (
            EstimateId::Energy2Time,
            nu0 * estimate_bound(EstimateId::Energy2, nu0, f2, None, None),
        ),
    ];
    let bound_err = pairs
        .iter()
        .map(|(id, b)| (estimate_bound(*id, nu0, f2, Some(kbar), None) - b).abs() / b)
        .fold(0.0, f64::max);

    let cfg = SolverConfig {
        resolution: 64,
        dt: 0.001,
        t_end: 20.0,
        sample_stride: 20,
        seed: 5,
        snapshot_every: 0,
        viscosity: ViscosityModel::TimeVarying(TimeProfile::Sinusoidal {
            base: 1.0,
            eps: 0.5,
            omega: 1.0,
        }),
        forcing: ForcingSpec::Kolmogorov {
            amplitude: 225.0,
            wavenumber: 4,
        },
        initial: InitialCondition::RandomBand {
            k_lo: 1.0,
            k_hi: 8.0,
            h_norm: 1.0,
        },
    };
    let rec = integrate(&cfg).unwrap();
    let suite = estimate_suite_for(&rec, None).unwrap();
    let lines: Vec<String> = suite
        .reports
        .iter()
        .map(|r| {
            format!(
                "{} {:.3e} ≤ {:.3e} {}",
                r.id.name(),
                r.measured,
                r.bound,
                r.satisfied
            )
        })
        .collect();
    Outcome {
        pass: kbar_err <= 1e-6
            && bound_err <= 1e-10
            && suite.all_satisfied
            && suite.reports.len() == 3,
        detail: format!(
            "K̄ relative error {kbar_err:.1e}; bound mismatch {bound_err:.1e}; Gr = {:.0}; {}",
            suite.grashof,
            lines.join("; ")
        ),
    }
}

fn criterion6() -> Outcome {
    let n = 128;
    let modal = certify_projection(&CertifyConfig {
        family: FamilyKind::Modal,
        parameters: vec![2, 4, 8, 16],
        resolution: n,
        samples: 200,
        seed: 6,
        ensemble: Ensemble::default(),
    })
    .unwrap();
    let volume = certify_projection(&CertifyConfig {
        family: FamilyKind::Volume,
        parameters: vec![4, 8, 16],
        resolution: n,
        samples: 200,
        seed: 6,
        ensemble: Ensemble::default(),
    })
    .unwrap();
    let mut r = rng(66);
    let mut total = 0;
    let mut held = 0;
    for i in 0..1000 {
        let spectrum = if i % 2 == 0 {
            Spectrum::Band {
                k_lo: 1.0,
                k_hi: 42.0,
            }
        } else {
            Spectrum::Shell {
                center: 1.0 + (i % 40) as f64,
                width: 0.5,
            }
        };
        let u = SpectralField::random_solenoidal(n, spectrum, 1.0, &mut r).unwrap();
        for cert in [&modal, &volume] {
            for &p in &cert.parameters {
                let op = ProjectionOperator::new(cert.family.spec(p), n).unwrap();
                let rep = check_approx_inequalities(&op, &u, cert.c1, cert.gamma).unwrap();
                total += 1;
                if rep.l2_bound.holds && rep.h1_lower_bound.holds {
                    held += 1;
                }
            }
        }
    }
    let in_range = |g: f64| (0.45..=0.55).contains(&g);
    Outcome {
        pass: in_range(modal.gamma) && in_range(volume.gamma) && held == total,
        detail: format!(
            "modal γ = {:.4} (C1 = {:.3}), volume γ = {:.4} (C1 = {:.3}); inequalities held {held}/{total}",
            modal.gamma, modal.c1, volume.gamma, volume.c1
        ),
    }
}

struct TwinRuns {
    slaved: detproj::experiment::TwinReport,
    outcome7: Outcome,
    feasible: detproj::experiment::TwinReport,
}

fn criterion7() -> TwinRuns {
    let cert = certify_projection(&CertifyConfig {
        family: FamilyKind::Modal,
        parameters: vec![2, 4, 8, 16],
        resolution: 64,
        samples: 200,
        seed: 7,
        ensemble: Ensemble::default(),
    })
    .unwrap();
    let constants = ApproxConstants {
        c1: cert.c1,
        gamma: cert.gamma,
    };
    let mut cfg = ExperimentConfig {
        seed: 11,
        epsilon_h: 1e-6,
        report_dir: None,
        solver: SolverConfig {
            sample_stride: 100,
            ..chaotic(1500.0)
        },
        // largest cutoff inside the dealiased band
        projection: ProjectionSpec::Modal { k_cut: 21 },
        twin: TwinMode::Slaving,
        perturbation: Perturbation {
            sigma: 0.5,
            magnitude: 0.1,
        },
        v_initial: None,
        constants: Some(constants),
    };
    let slaved = twin_run(&cfg).unwrap();
    cfg.projection = ProjectionSpec::Empty;
    let empty = twin_run(&cfg).unwrap();
    let min_sep = empty
        .samples
        .iter()
        .skip(1)
        .map(|s| s.gap)
        .fold(f64::INFINITY, f64::min);
    let nb = slaved.n_bound.as_ref().unwrap();

    // low-Grashof companion where N ≥ n_bound is attainable
    let feasible_cfg = ExperimentConfig {
        solver: SolverConfig {
            resolution: 16,
            dt: 0.02,
            t_end: 50.0,
            sample_stride: 5,
            seed: 5,
            snapshot_every: 0,
            viscosity: ViscosityModel::constant(1.0),
            forcing: ForcingSpec::Kolmogorov {
                amplitude: 0.05,
                wavenumber: 2,
            },
            initial: InitialCondition::RandomBand {
                k_lo: 1.0,
                k_hi: 5.0,
                h_norm: 1.0,
            },
        },
        projection: ProjectionSpec::Modal { k_cut: 1 },
        ..cfg.clone()
    };
    let feasible = twin_run(&feasible_cfg).unwrap();
    let fnb = feasible.n_bound.as_ref().unwrap();

    let n_ok = slaved.count as u64 >= nb.n_bound;
    let outcome7 = Outcome {
        pass: n_ok && slaved.verdict == TwinVerdict::Determined && slaved.trailing_gap < 1e-6 && min_sep > 1e-2,
        detail: format!(
            "chaotic Gr ≈ {:.0}: certified C1 = {:.3}, γ = {:.4} give n_bound = {} but the largest modal N at n = 64 is {}{}; \
             slaved trailing gap {:.1e} ({:?}); empty-projection min separation {:.3} over {:.0} dissipation times; \
             low-Gr companion: N = {} ≥ n_bound = {}, trailing gap {:.1e} ({:?})",
            nb.f_limsup / (nb.nu_lower * nb.nu_lower),
            cert.c1,
            cert.gamma,
            nb.n_bound,
            slaved.count,
            if n_ok { "" } else { " (N ≥ n_bound unattainable)" },
            slaved.trailing_gap,
            slaved.verdict,
            min_sep,
            empty.horizon_dissipation_times,
            feasible.count,
            fnb.n_bound,
            feasible.trailing_gap,
            feasible.verdict,
        ),
    };
    TwinRuns {
        slaved,
        outcome7,
        feasible,
    }
}

fn rk4_equality(
    alpha: &dyn Fn(f64) -> f64,
    beta: &dyn Fn(f64) -> f64,
    y0: f64,
    times: &[f64],
) -> Vec<f64> {
    let f = |t: f64, y: f64| -alpha(t) * y + beta(t);
    let mut out = vec![y0];
    let mut y = y0;
    for w in times.windows(2) {
        let h = (w[1] - w[0]) / 20.0;
        let mut t = w[0];
        for _ in 0..20 {
            let k1 = f(t, y);
            let k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
            let k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
            let k4 = f(t + h, y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += h;
        }
        out.push(y);
    }
    out
}

fn criterion8(twins: &TwinRuns) -> Outcome {
    let times: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.005).collect();
    type F = Box<dyn Fn(f64) -> f64>;
    let cases: Vec<(F, F, f64)> = vec![
        (
            Box::new(|t: f64| 2.0 + t.sin()),
            Box::new(|t: f64| (-t).exp()),
            1.0,
        ),
        (Box::new(|_| 0.5), Box::new(|t: f64| 1.0 + t.cos()), 2.0),
        (
            Box::new(|t: f64| 0.3 * t),
            Box::new(|t: f64| t * t * (-t).exp()),
            0.5,
        ),
    ];
    let mut classical: f64 = 0.0;
    for (a, b, y0) in &cases {
        let al: Vec<f64> = times.iter().map(|&t| a(t)).collect();
        let be: Vec<f64> = times.iter().map(|&t| b(t)).collect();
        let bound = gronwall_classical(*y0, &al, &be, &times).unwrap();
        let oracle = rk4_equality(a.as_ref(), b.as_ref(), *y0, &times);
        classical = bound
            .iter()
            .zip(&oracle)
            .map(|(p, q)| (p - q).abs())
            .fold(classical, f64::max);
    }

    let long: Vec<f64> = (0..=6000).map(|i| i as f64 * 0.01).collect();
    let one = vec![1.0; long.len()];
    let decay: Vec<f64> = long.iter().map(|t| (-t).exp()).collect();
    let y: Vec<f64> = long.iter().map(|t| (1.0 + t) * (-t).exp()).collect();
    let c1 = gronwall_generalized_check(&one, &decay, &y, &long, 1.0)
        .unwrap()
        .verdict;
    let minus = vec![-1.0; long.len()];
    let zero = vec![0.0; long.len()];
    let grow: Vec<f64> = long.iter().map(|t| t.exp()).collect();
    let c2 = gronwall_generalized_check(&minus, &zero, &grow, &long, 1.0)
        .unwrap()
        .verdict;

    let d = twins.slaved.difference.as_ref().unwrap();
    let chaotic = gronwall_generalized_check(&d.alpha, &d.beta, &d.y, &d.times, 30.0).unwrap();
    let fd = twins.feasible.difference.as_ref().unwrap();
    let companion = gronwall_generalized_check(&fd.alpha, &fd.beta, &fd.y, &fd.times, 1.0).unwrap();
    Outcome {
        pass: classical <= 1e-8 && c1 == Verdict::Consistent && c2 == Verdict::HypothesesNotMet && chaotic.verdict == Verdict::Consistent,
        detail: format!(
            "classical vs RK4 max error {classical:.1e}; analytic cases {c1:?} / {c2:?}; criterion-7 series {:?} (m = {:.3e}); \
             low-Gr companion series {:?} (m = {:.3e})",
            chaotic.verdict, chaotic.m, companion.verdict, companion.m
        ),
    }
}

fn criterion9() -> Outcome {
    let model = ViscosityModel::SpaceVarying(SpatialProfile::Sinusoid {
        base: 1.0,
        amplitude: 0.1,
        kx: 1,
        ky: 0,
    });
    let cfg = SolverConfig {
        resolution: 64,
        dt: 0.001,
        t_end: 12.0,
        sample_stride: 20,
        seed: 5,
        snapshot_every: 50,
        viscosity: model.clone(),
        forcing: ForcingSpec::Kolmogorov {
            amplitude: 225.0,
            wavenumber: 4,
        },
        initial: InitialCondition::RandomBand {
            k_lo: 1.0,
            k_hi: 8.0,
            h_norm: 1.0,
        },
    };
    let rec = integrate(&cfg).unwrap();
    let reports: Vec<_> = [EstimateId::Energy1Space, EstimateId::Energy2Space]
        .iter()
        .map(|&id| verify_apriori(&rec, &model, id, 10.0 / 9.0).unwrap())
        .collect();
    let verdicts: Vec<String> = reports
        .iter()
        .map(|r| {
            let c = r.coercivity.unwrap();
            format!(
                "{} {:.3e} ≤ {:.3e} {} (coercivity holds {}, margin {:.3e})",
                r.id.name(),
                r.measured,
                r.bound,
                r.satisfied,
                c.holds,
                c.margin
            )
        })
        .collect();

    let oracle_err = gradnu_oracle_error();
    Outcome {
        pass: reports
            .iter()
            .all(|r| r.satisfied && r.coercivity.is_some())
            && oracle_err <= 1e-10,
        detail: format!(
            "{}; gradnu_gradu vs 4× oracle {oracle_err:.1e}",
            verdicts.join("; ")
        ),
    }
}

/// Largest coefficient error of `P(∇ν·∇u)` against direct DFT on a 4× grid.
fn gradnu_oracle_error() -> f64 {
    let n = 64;
    let m = 4 * n;
    let u = SpectralField::random_solenoidal(
        n,
        Spectrum::Band {
            k_lo: 1.0,
            k_hi: 4.0,
        },
        1.0,
        &mut rng(9),
    )
    .unwrap();
    let nu = ScalarField::from_fn(n, |x, _| 1.0 + 0.1 * x.sin()).unwrap();
    let got = gradnu_gradu(&nu, &u).unwrap();
    let modes: Vec<_> = u
        .modes()
        .filter(|md| md.2.norm() > 0.0 || md.3.norm() > 0.0)
        .collect();
    let xs: Vec<f64> = (0..m).map(|i| 2.0 * PI * i as f64 / m as f64).collect();
    // ∂x u_i by direct summation, separable in x and y
    let mut q = [vec![0.0; m * m], vec![0.0; m * m]];
    for (ix, &x) in xs.iter().enumerate() {
        for (iy, &y) in xs.iter().enumerate() {
            let mut g = [0.0; 2];
            for &(kx, ky, a, b) in &modes {
                let e = Complex64::i()
                    * kx as f64
                    * Complex64::from_polar(1.0, kx as f64 * x + ky as f64 * y);
                g[0] += (a * e).re;
                g[1] += (b * e).re;
            }
            for i in 0..2 {
                q[i][ix * m + iy] = 0.1 * x.cos() * g[i] / (2.0 * PI);
            }
        }
    }
    let scale = 2.0 * PI / (m * m) as f64;
    let mut worst: f64 = 0.0;
    for kx in -6i64..=6 {
        for ky in -6i64..=6 {
            if kx == 0 && ky == 0 {
                continue;
            }
            let mut qh = [Complex64::new(0.0, 0.0); 2];
            for (ix, &x) in xs.iter().enumerate() {
                for (iy, &y) in xs.iter().enumerate() {
                    let e = Complex64::from_polar(1.0, -(kx as f64 * x + ky as f64 * y));
                    qh[0] += e * q[0][ix * m + iy];
                    qh[1] += e * q[1][ix * m + iy];
                }
            }
            let (fx, fy) = (kx as f64, ky as f64);
            let dot = (qh[0] * fx + qh[1] * fy) * scale / (fx * fx + fy * fy);
            let expect = [qh[0] * scale - dot * fx, qh[1] * scale - dot * fy];
            let c = got.coefficient(kx, ky);
            worst = worst
                .max((c[0] - expect[0]).norm())
                .max((c[1] - expect[1]).norm());
        }
    }
    let outside = got
        .modes()
        .filter(|md| md.0.abs() > 6 || md.1.abs() > 6)
        .map(|md| md.2.norm() + md.3.norm())
        .fold(0.0, f64::max);
    worst.max(outside)
}

fn criterion10() -> Outcome {
    let cfg = SolverConfig {
        t_end: 20.0,
        ..chaotic(20.0)
    };
    let a = integrate(&cfg).unwrap().to_csv_string().unwrap();
    let b = integrate(&cfg).unwrap().to_csv_string().unwrap();
    let suite_cfg = SolverConfig {
        resolution: 32,
        t_end: 300.0,
        ..chaotic(300.0)
    };
    let sa = estimate_suite_for(&integrate(&suite_cfg).unwrap(), None).unwrap();
    let sb = estimate_suite_for(&integrate(&suite_cfg).unwrap(), None).unwrap();
    let twin_cfg = ExperimentConfig {
        seed: 3,
        epsilon_h: 1e-6,
        report_dir: None,
        solver: SolverConfig {
            resolution: 32,
            t_end: 10.0,
            ..chaotic(10.0)
        },
        projection: ProjectionSpec::Volume { cells: 4 },
        twin: TwinMode::Nudging { mu: None },
        perturbation: Perturbation {
            sigma: 0.5,
            magnitude: 0.1,
        },
        v_initial: None,
        constants: None,
    };
    let ta = twin_run(&twin_cfg).unwrap();
    let tb = twin_run(&twin_cfg).unwrap();
    let cc = CertifyConfig {
        family: FamilyKind::Volume,
        parameters: vec![2, 4, 8],
        resolution: 32,
        samples: 60,
        seed: 10,
        ensemble: Ensemble::default(),
    };
    let ca = certification_artifact(&certify_projection(&cc).unwrap()).unwrap();
    let cb = certification_artifact(&certify_projection(&cc).unwrap()).unwrap();
    let checks = [
        ("trajectory CSV", a == b),
        ("suite JSON", sa.to_json().unwrap() == sb.to_json().unwrap()),
        ("suite CSV", sa.to_csv_string() == sb.to_csv_string()),
        ("twin JSON", ta.to_json().unwrap() == tb.to_json().unwrap()),
        ("twin CSV", ta.to_csv_string() == tb.to_csv_string()),
        ("certification artifact", ca == cb),
    ];
    Outcome {
        pass: checks.iter().all(|c| c.1),
        detail: checks
            .iter()
            .map(|(k, ok)| format!("{k} {}", if *ok { "identical" } else { "DIFFERS" }))
            .collect::<Vec<_>>()
            .join(", "),
    }
}

fn main() {
    let mut results = Vec::new();
    results.push(run(1, 60.0, criterion1));
    results.push(run(2, 60.0, criterion2));
    results.push(run(3, 120.0, criterion3));
    results.push(run(4, 300.0, criterion4));
    results.push(run(5, 300.0, criterion5));
    results.push(run(6, 120.0, criterion6));
    let t0 = Instant::now();
    let twins = criterion7();
    let secs = t0.elapsed().as_secs_f64();
    let pass7 = twins.outcome7.pass && secs < 600.0;
    println!(
        "criterion  7: {} ({secs:.1}s, budget 600s) {}",
        if pass7 { "PASS" } else { "FAIL" },
        twins.outcome7.detail
    );
    results.push(pass7);
    results.push(run(8, 60.0, || criterion8(&twins)));
    results.push(run(9, 300.0, criterion9));
    results.push(run(10, 120.0, criterion10));
    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed < results.len() && std::env::var("DETPROJ_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1")
    {
        std::process::exit(1);
    }
}
