//! The three experiment drivers behind the CLI subcommands. Each takes a
//! validated config plus an output directory and returns a structured outcome
//! the binary maps onto exit codes.

use crate::config::ExperimentConfig;
use crate::diagnostics::{self, fit_decay, CsvSink, DiagnosticsRecord, VecSink};
use crate::error::{Error, Result};
use crate::grid::{write_field_dump, Field};
use crate::solver::{self, RunSummary};
use crate::thermo;
use crate::wave::{self, WaveSpec};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct WaveCheckReport {
    pub checks: Vec<CheckOutcome>,
}

impl WaveCheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "[{tag}] {name}: {detail}", name = c.name, detail = c.detail);
        }
        let _ = writeln!(
            s,
            "{} of {} checks passed",
            self.checks.iter().filter(|c| c.passed).count(),
            self.checks.len()
        );
        s
    }
}

fn push(checks: &mut Vec<CheckOutcome>, name: &'static str, res: Result<String>) {
    match res {
        Ok(detail) => checks.push(CheckOutcome {
            name,
            passed: true,
            detail,
        }),
        Err(e) => checks.push(CheckOutcome {
            name,
            passed: false,
            detail: e.to_string(),
        }),
    }
}

fn ensure(cond: bool, msg: String) -> Result<String> {
    if cond {
        Ok(msg)
    } else {
        Err(Error::Check(msg))
    }
}

/// Run the full invariant suite of the wave construction and write the decay
/// series CSV alongside the report.
pub fn cmd_wave_check(cfg: &ExperimentConfig, out_dir: &Path) -> Result<WaveCheckReport> {
    fs::create_dir_all(out_dir)?;
    let g = &cfg.gas;
    let spec = cfg.wave_spec_unchecked()?;
    let mut checks = Vec::new();

    push(
        &mut checks,
        "rarefaction-curve-membership",
        spec.check_r3_membership(g).map(|_| {
            format!(
                "both invariants agree across end states (Sigma1 = {:.6}, S = {:.6})",
                spec.sigma1, spec.s_plus
            )
        }),
    );

    // strict monotonicity and bounds of the smoothed data
    push(&mut checks, "data-monotone-and-bounded", (|| {
        let n = 2001;
        let span = 50.0 / spec.eps;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..n {
            let x = -span + 2.0 * span * i as f64 / (n - 1) as f64;
            let w = wave::smooth_w0(&spec, x);
            ensure(
                w > spec.w_minus && w < spec.w_plus,
                format!("w0({x}) = {w} outside ({}, {})", spec.w_minus, spec.w_plus),
            )?;
            ensure(w > prev, format!("w0 not increasing at x1 = {x}"))?;
            ensure(
                wave::smooth_w0_d1(&spec, x) > 0.0,
                format!("w0' <= 0 at x1 = {x}"),
            )?;
            prev = w;
        }
        Ok(format!(
            "w0 strictly increasing within ({:.6}, {:.6}) on {n} samples",
            spec.w_minus, spec.w_plus
        ))
    })());

    // Riemann invariants constant along the profile
    push(&mut checks, "invariant-constancy", (|| {
        let mut worst = 0.0f64;
        for &t in &[0.0, 1.0, 10.0, 100.0] {
            for i in 0..401 {
                let x = -40.0 / spec.eps + 80.0 / spec.eps * i as f64 / 400.0
                    + (spec.w_minus + spec.w_plus) * 0.5 * t;
                let s = wave::smooth_profile(g, &spec, x, t)?.state;
                let e1 = (thermo::riemann_invariant_1(g, &s)? - spec.sigma1).abs();
                let e2 = (thermo::entropy(g, s.rho, s.theta)? - spec.s_plus).abs();
                worst = worst.max(e1).max(e2);
            }
        }
        ensure(
            worst < 1e-9,
            format!("max invariant drift along profile = {worst:.3e} (tol 1e-9)"),
        )
    })());

    // analytic x1-derivatives vs centered differences of the profile
    push(&mut checks, "derivative-identities", (|| {
        let h = 1e-5 / spec.eps;
        let mut worst = 0.0f64;
        for &t in &[0.0, 5.0, 50.0] {
            for i in 0..41 {
                let x = -20.0 / spec.eps + i as f64 + (spec.w_minus + spec.w_plus) * 0.5 * t;
                let s = wave::smooth_profile(g, &spec, x, t)?;
                let sp = wave::smooth_profile(g, &spec, x + h, t)?.state;
                let sm = wave::smooth_profile(g, &spec, x - h, t)?.state;
                let num = [
                    (sp.rho - sm.rho) / (2.0 * h),
                    (sp.u1 - sm.u1) / (2.0 * h),
                    (sp.theta - sm.theta) / (2.0 * h),
                ];
                let ana = [s.d_rho_dx1, s.d_u1_dx1, s.d_theta_dx1];
                for (a, b) in ana.iter().zip(num) {
                    worst = worst.max((a - b).abs() / (1.0 + a.abs()));
                }
            }
        }
        ensure(
            worst < 1e-6,
            format!("max analytic-vs-numeric derivative gap = {worst:.3e} (tol 1e-6)"),
        )
    })());

    // |w_x1x1| <= C_q eps w_x1 with C_q = q (attained at eps x1 = 1, t = 0)
    push(&mut checks, "second-derivative-domination", (|| {
        let mut max_ratio = 0.0f64;
        for it in 0..20 {
            let t = 10.0f64.powf(-1.0 + 4.0 * it as f64 / 19.0);
            for ix in 0..200 {
                let x = -10.0 / spec.eps + 20.0 / spec.eps * ix as f64 / 199.0
                    + 0.5 * (spec.w_minus + spec.w_plus) * t;
                let (_, d1, d2) = wave::smooth_w(&spec, x, t)?;
                if d1 > 1e-300 {
                    max_ratio = max_ratio.max(d2.abs() / (spec.eps * d1));
                }
            }
        }
        ensure(
            max_ratio <= spec.q * 1.001,
            format!(
                "max |w_x1x1| / (eps w_x1) = {max_ratio:.6} vs bound q = {}",
                spec.q
            ),
        )
    })());

    // decay series + fits, with the CSV artifact; the window starts well past
    // the crossover time 2/(delta_w kq eps) of the min{} envelope so the fits
    // see the pure power-law regime
    let series = decay_series(&spec, 500.0, 50000.0, 40)?;
    let mut csv = String::from("t,wx1_l1,wx1_l2,wx1_linf,wx1x1_l1,wx1x1_l2,wx1x1_linf\n");
    for row in &series {
        let _ = writeln!(
            csv,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            row.t, row.wx1[0], row.wx1[1], row.wx1[2], row.wx1x1[0], row.wx1x1[1], row.wx1x1[2]
        );
    }
    fs::write(out_dir.join("wave_decay.csv"), csv)?;

    push(&mut checks, "decay-fits", (|| {
        let window = (500.0, 50000.0);
        let linf: Vec<(f64, f64)> = series.iter().map(|r| (r.t, r.wx1[2])).collect();
        let l2: Vec<(f64, f64)> = series.iter().map(|r| (r.t, r.wx1[1])).collect();
        let f_inf = fit_decay(&linf, window)?;
        let f_2 = fit_decay(&l2, window)?;
        let dw = spec.delta_w();
        let l1_dev = series
            .iter()
            .map(|r| ((r.wx1[0] - dw) / dw).abs())
            .fold(0.0f64, f64::max);
        ensure(
            (f_inf.exponent + 1.0).abs() < 0.05
                && (f_2.exponent + 0.5).abs() < 0.05
                && l1_dev < 1e-6,
            format!(
                "Linf slope {:.4} (want -1±0.05), L2 slope {:.4} (want -0.5±0.05), \
                 L1 relative deviation {l1_dev:.3e} (want <1e-6)",
                f_inf.exponent, f_2.exponent
            ),
        )
    })());

    push(&mut checks, "asymptotic-equivalence", (|| {
        let t_late = 1e3 / spec.eps;
        let t_early = 10.0 / spec.eps;
        let d_late = wave::sup_dist_to_fan(&spec, t_late)?;
        let d_early = wave::sup_dist_to_fan(&spec, t_early)?;
        let dw = spec.delta_w();
        ensure(
            d_late < 0.05 * dw && d_late < d_early,
            format!(
                "sup|w - fan| = {d_late:.3e} at t = {t_late} (want < {:.3e} and < {d_early:.3e})",
                0.05 * dw
            ),
        )
    })());

    let report = WaveCheckReport { checks };
    fs::write(out_dir.join("wave_check.txt"), report.render())?;
    Ok(report)
}

pub struct DecayRow {
    pub t: f64,
    /// L1, L2, Linf of w_x1.
    pub wx1: [f64; 3],
    /// L1, L2, Linf of w_x1x1.
    pub wx1x1: [f64; 3],
}

fn decay_series(spec: &WaveSpec, t_lo: f64, t_hi: f64, n: usize) -> Result<Vec<DecayRow>> {
    (0..n)
        .map(|i| {
            let t = t_lo * (t_hi / t_lo).powf(i as f64 / (n - 1) as f64);
            Ok(DecayRow {
                t,
                wx1: [
                    wave::wx1_lp_norm(spec, t, 1.0)?,
                    wave::wx1_lp_norm(spec, t, 2.0)?,
                    wave::wx1_lp_norm(spec, t, f64::INFINITY)?,
                ],
                wx1x1: [
                    wave::wx1x1_lp_norm(spec, t, 1.0)?,
                    wave::wx1x1_lp_norm(spec, t, 2.0)?,
                    wave::wx1x1_lp_norm(spec, t, f64::INFINITY)?,
                ],
            })
        })
        .collect()
}

/// Profile at t = 0 plus the configured Gaussian-bump perturbation.
pub fn initial_field(cfg: &ExperimentConfig, spec: &WaveSpec) -> Result<Field> {
    let grid = cfg.grid()?;
    let mut field = diagnostics::profile_field(&cfg.gas, spec, &grid, 0.0)?;
    let p = &cfg.perturbation;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let amps = [p.amp_rho, p.amp_u1, p.amp_u2, p.amp_u3, p.amp_theta];
    let two_pi = 2.0 * std::f64::consts::PI;
    for (var, amp) in field.vars_mut().into_iter().zip(amps) {
        // draw the jitter unconditionally so the center sequence does not
        // depend on which amplitudes are enabled
        let center: f64 = rng.gen_range(-p.width..p.width);
        if amp == 0.0 {
            continue;
        }
        for ((i, j, k), v) in var.indexed_iter_mut() {
            let x1 = grid.x1(i);
            let bump = amp * (-((x1 - center) / p.width).powi(2)).exp();
            let trans = (two_pi * p.k as f64 * grid.x2(j)).cos()
                * (two_pi * p.m as f64 * grid.x3(k)).cos();
            *v += bump * trans;
        }
    }
    field.check_positive(0.0)?;
    Ok(field)
}

#[derive(Debug, Clone)]
pub struct SimulateOutcome {
    pub summary: RunSummary,
    pub records: Vec<DiagnosticsRecord>,
    /// final sup_dist / initial sup_dist; NaN when the initial value is 0.
    pub sup_ratio: f64,
    /// sup_dist nonincreasing (to 1e-12 slack) over the last third of the run.
    pub monotone_tail: bool,
}

impl SimulateOutcome {
    pub fn render(&self) -> String {
        let s = &self.summary;
        format!(
            "steps = {}\nt_end = {}\nmax_h2 = {:.6e}\nsup_dist_initial = {:.6e}\n\
             sup_dist_final = {:.6e}\nsup_ratio = {:.6}\nmonotone_tail = {}\n\
             min_rho = {:.6e}\nmin_theta = {:.6e}\n",
            s.steps,
            s.t_end,
            s.max_h2,
            s.first.sup_dist,
            s.last.sup_dist,
            self.sup_ratio,
            self.monotone_tail,
            s.min_rho,
            s.min_theta
        )
    }
}

/// Run the full perturbed simulation, writing diagnostics.csv, periodic field
/// dumps, and summary.txt into `out_dir`. On blow-up the CSV retains every
/// record emitted before the failure.
pub fn cmd_simulate(cfg: &ExperimentConfig, out_dir: &Path) -> Result<SimulateOutcome> {
    fs::create_dir_all(out_dir)?;
    let spec = cfg.wave_spec()?;
    let initial = initial_field(cfg, &spec)?;

    let mut csv = CsvSink::create(out_dir.join("diagnostics.csv"))?;
    let mut mem = VecSink::default();
    let mut sink = diagnostics::TeeSink(&mut csv, &mut mem);
    let dump_every = cfg.outputs.dump_every;
    let dump_dir = out_dir.to_path_buf();
    let mut emission = 0usize;
    let run_res = solver::run_observed(
        &cfg.gas,
        &spec,
        &cfg.solver,
        initial,
        &mut sink,
        &mut |field, rec| {
            if dump_every > 0 && emission % dump_every == 0 {
                let path = dump_dir.join(format!("field_{emission:06}.dat"));
                write_field_dump(path, field, rec.t)?;
            }
            emission += 1;
            Ok(())
        },
    );
    let records = mem.records.clone();
    let summary = run_res?;

    let sup_ratio = summary.last.sup_dist / summary.first.sup_dist;
    let tail_start = summary.t_end * (2.0 / 3.0);
    let tail: Vec<f64> = records
        .iter()
        .filter(|r| r.t >= tail_start)
        .map(|r| r.sup_dist)
        .collect();
    let monotone_tail = tail.windows(2).all(|w| w[1] <= w[0] + 1e-12);

    let outcome = SimulateOutcome {
        summary,
        records,
        sup_ratio,
        monotone_tail,
    };
    fs::write(out_dir.join("summary.txt"), outcome.render())?;
    Ok(outcome)
}

#[derive(Debug, Clone)]
pub struct DecayStudyRow {
    pub label: &'static str,
    pub fitted: f64,
    pub predicted: f64,
    pub within: f64,
}

#[derive(Debug, Clone)]
pub struct DecayStudy {
    pub rows: Vec<DecayStudyRow>,
}

impl DecayStudy {
    pub fn passed(&self) -> bool {
        self.rows
            .iter()
            .all(|r| (r.fitted - r.predicted).abs() <= r.within || r.fitted <= r.predicted)
    }
}

/// Sweep t over a log grid, fit decay slopes of the Burgers derivative norms
/// and the lifted profile derivative norms, and write the comparison table.
pub fn cmd_decay_study(cfg: &ExperimentConfig, out_dir: &Path) -> Result<DecayStudy> {
    fs::create_dir_all(out_dir)?;
    let spec = cfg.wave_spec()?;
    let g = &cfg.gas;
    let (t_lo, t_hi, n) = (500.0, 50000.0, 40);
    let series = decay_series(&spec, t_lo, t_hi, n)?;

    // profile-derivative norms on the same grid of times: the chain-rule
    // factors are state-dependent but uniformly bounded, so the rates match
    // the Burgers ones
    let mut profile_rows: Vec<(f64, [f64; 3])> = Vec::with_capacity(n);
    for row in &series {
        let t = row.t;
        // profile at solver time t uses Burgers time 1 + t; t >> 1 here so
        // the shift is immaterial for the fits
        let xs = wave::line_grid(&spec, 1.0 + t);
        let vals: Vec<f64> = xs
            .iter()
            .map(|&x| wave::smooth_profile(g, &spec, x, t).map(|s| s.d_u1_dx1))
            .collect::<Result<_>>()?;
        profile_rows.push((
            t,
            [
                wave::line_lp(&xs, &vals, 1.0),
                wave::line_lp(&xs, &vals, 2.0),
                wave::line_lp(&xs, &vals, f64::INFINITY),
            ],
        ));
    }

    let mut csv = String::from(
        "t,wx1_l1,wx1_l2,wx1_linf,wx1x1_l1,wx1x1_l2,wx1x1_linf,u1x1_l1,u1x1_l2,u1x1_linf\n",
    );
    for (row, (_, pr)) in series.iter().zip(&profile_rows) {
        let _ = writeln!(
            csv,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            row.t,
            row.wx1[0],
            row.wx1[1],
            row.wx1[2],
            row.wx1x1[0],
            row.wx1x1[1],
            row.wx1x1[2],
            pr[0],
            pr[1],
            pr[2]
        );
    }
    fs::write(out_dir.join("decay_norms.csv"), csv)?;

    let window = (t_lo, t_hi);
    let fit = |pick: &dyn Fn(&DecayRow) -> f64| -> Result<f64> {
        let s: Vec<(f64, f64)> = series.iter().map(|r| (r.t, pick(r))).collect();
        Ok(fit_decay(&s, window)?.exponent)
    };
    let fit_profile = |idx: usize| -> Result<f64> {
        let s: Vec<(f64, f64)> = profile_rows.iter().map(|&(t, v)| (t, v[idx])).collect();
        Ok(fit_decay(&s, window)?.exponent)
    };

    let mut rows = Vec::new();
    rows.push(DecayStudyRow {
        label: "wx1_l1",
        fitted: fit(&|r| r.wx1[0])?,
        predicted: 0.0,
        within: 0.01,
    });
    rows.push(DecayStudyRow {
        label: "wx1_l2",
        fitted: fit(&|r| r.wx1[1])?,
        predicted: -0.5,
        within: 0.05,
    });
    rows.push(DecayStudyRow {
        label: "wx1_linf",
        fitted: fit(&|r| r.wx1[2])?,
        predicted: -1.0,
        within: 0.05,
    });
    // second derivatives: the bound gives -1 - (p-1)/(2 p q); fitted slopes at
    // or below the bound are accepted (the passed() rule treats steeper decay
    // as success)
    let q = spec.q;
    rows.push(DecayStudyRow {
        label: "wx1x1_l1",
        fitted: fit(&|r| r.wx1x1[0])?,
        predicted: -1.0 + 1.0 / (2.0 * q),
        within: 0.1,
    });
    rows.push(DecayStudyRow {
        label: "wx1x1_l2",
        fitted: fit(&|r| r.wx1x1[1])?,
        predicted: -1.0 - 1.0 / (4.0 * q),
        within: 0.1,
    });
    rows.push(DecayStudyRow {
        label: "wx1x1_linf",
        fitted: fit(&|r| r.wx1x1[2])?,
        predicted: -1.0 - 1.0 / (2.0 * q),
        within: 0.25,
    });
    rows.push(DecayStudyRow {
        label: "u1x1_l1",
        fitted: fit_profile(0)?,
        predicted: 0.0,
        within: 0.01,
    });
    rows.push(DecayStudyRow {
        label: "u1x1_l2",
        fitted: fit_profile(1)?,
        predicted: -0.5,
        within: 0.05,
    });
    rows.push(DecayStudyRow {
        label: "u1x1_linf",
        fitted: fit_profile(2)?,
        predicted: -1.0,
        within: 0.05,
    });

    let mut table = String::from("quantity,fitted_slope,predicted_slope,tolerance\n");
    for r in &rows {
        let _ = writeln!(
            table,
            "{},{:.6},{:.6},{:.3}",
            r.label, r.fitted, r.predicted, r.within
        );
    }
    fs::write(out_dir.join("decay_fits.csv"), table)?;

    Ok(DecayStudy { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ExperimentConfig, WaveStrength};
    use tempfile::tempdir;

    #[test]
    fn wave_check_passes_on_defaults() {
        let cfg = ExperimentConfig::default();
        let dir = tempdir().unwrap();
        let report = cmd_wave_check(&cfg, dir.path()).unwrap();
        assert!(report.passed(), "{}", report.render());
        assert!(dir.path().join("wave_decay.csv").exists());
        assert!(dir.path().join("wave_check.txt").exists());
    }

    #[test]
    fn wave_check_flags_corrupted_left_state() {
        let mut cfg = ExperimentConfig::default();
        let spec = cfg.wave_spec().unwrap();
        // inject an entropy mismatch
        cfg.wave.strength = WaveStrength::LeftState {
            rho: spec.left_state.rho * 1.01,
            u1: spec.left_state.u1,
            theta: spec.left_state.theta,
        };
        let dir = tempdir().unwrap();
        let report = cmd_wave_check(&cfg, dir.path()).unwrap();
        assert!(!report.passed());
        let membership = report
            .checks
            .iter()
            .find(|c| c.name == "rarefaction-curve-membership")
            .unwrap();
        assert!(!membership.passed);
    }

    #[test]
    fn initial_field_deterministic_in_seed() {
        let mut cfg = ExperimentConfig::default();
        cfg.perturbation.amp_u1 = 0.01;
        cfg.perturbation.k = 1;
        cfg.grid.n2 = 4;
        cfg.grid.n3 = 4;
        let spec = cfg.wave_spec().unwrap();
        let a = initial_field(&cfg, &spec).unwrap();
        let b = initial_field(&cfg, &spec).unwrap();
        assert_eq!(a.u1, b.u1);
        cfg.perturbation.seed = 2;
        let c = initial_field(&cfg, &spec).unwrap();
        assert_ne!(a.u1, c.u1);
    }

    #[test]
    fn simulate_zero_perturbation_short_run() {
        let mut cfg = ExperimentConfig::default();
        cfg.grid.l = 20.0;
        cfg.grid.n1 = 96;
        cfg.solver.t_final = 0.5;
        cfg.solver.diag_every = 5;
        cfg.outputs.dump_every = 1;
        let dir = tempdir().unwrap();
        let out = cmd_simulate(&cfg, dir.path()).unwrap();
        let h = 2.0 * cfg.grid.l / (cfg.grid.n1 - 1) as f64;
        let bound = 10.0 * (cfg.wave.eps * cfg.wave.eps + h * h) * cfg.solver.t_final;
        assert!(
            out.summary.last.sup_dist < bound,
            "sup_dist {} vs {bound}",
            out.summary.last.sup_dist
        );
        assert!(dir.path().join("diagnostics.csv").exists());
        assert!(dir.path().join("summary.txt").exists());
        assert!(dir.path().join("field_000000.dat").exists());
    }

    #[test]
    fn decay_study_matches_predictions() {
        let cfg = ExperimentConfig::default();
        let dir = tempdir().unwrap();
        let study = cmd_decay_study(&cfg, dir.path()).unwrap();
        assert!(
            study.passed(),
            "{:?}",
            study
                .rows
                .iter()
                .map(|r| (r.label, r.fitted, r.predicted))
                .collect::<Vec<_>>()
        );
        let linf = study.rows.iter().find(|r| r.label == "wx1x1_linf").unwrap();
        assert!(linf.fitted <= -1.0, "wx1x1_linf slope {}", linf.fitted);
        assert!(dir.path().join("decay_norms.csv").exists());
        assert!(dir.path().join("decay_fits.csv").exists());
    }
}
