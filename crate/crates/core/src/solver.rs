//! Explicit time-marching of the primitive-form compressible
//! Navier-Stokes-Fourier system with the smooth rarefaction profile as
//! boundary data.
//!
//! Nonconservative primitive form with centered differences and SSP-RK3;
//! stability comes from the physical viscosity under the advective and
//! diffusive Courant limits, not from upwinding. Blow-up aborts, nothing is
//! clamped.

use crate::diagnostics::{self, DiagnosticsRecord, DiagnosticsSink};
use crate::error::{Error, Result};
use crate::grid::{ddx, divergence, laplacian, Field};
use crate::thermo::GasConstants;
use crate::wave::{self, WaveSpec};
use ndarray::{Array3, Zip};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcMode {
    /// Pin boundary nodes to the smooth profile at the stage time.
    DirichletProfile,
    /// Copy the interior neighbor's perturbation onto the boundary, then add
    /// the profile.
    NeumannZeroPerturbation,
}

impl fmt::Display for BcMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BcMode::DirichletProfile => write!(f, "dirichlet-profile"),
            BcMode::NeumannZeroPerturbation => write!(f, "neumann-zero-perturbation"),
        }
    }
}

impl FromStr for BcMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet-profile" => Ok(BcMode::DirichletProfile),
            "neumann-zero-perturbation" => Ok(BcMode::NeumannZeroPerturbation),
            other => Err(Error::Config(format!("unknown bc_mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Advective Courant factor, in (0, 1].
    pub cfl_adv: f64,
    /// Diffusive Courant factor, in (0, 0.5].
    pub cfl_visc: f64,
    pub t_final: f64,
    pub bc_mode: BcMode,
    /// Diagnostic cadence in steps.
    pub diag_every: usize,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl_adv > 0.0 && self.cfl_adv <= 1.0) {
            return Err(Error::Config(format!(
                "cfl_adv = {} must be in (0, 1]",
                self.cfl_adv
            )));
        }
        if !(self.cfl_visc > 0.0 && self.cfl_visc <= 0.5) {
            return Err(Error::Config(format!(
                "cfl_visc = {} must be in (0, 0.5]",
                self.cfl_visc
            )));
        }
        if !(self.t_final > 0.0) {
            return Err(Error::Config(format!(
                "t_final = {} must be positive",
                self.t_final
            )));
        }
        if self.diag_every == 0 {
            return Err(Error::Config("diag_every must be at least 1".to_string()));
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            cfl_adv: 0.5,
            cfl_visc: 0.25,
            t_final: 5.0,
            bc_mode: BcMode::DirichletProfile,
            diag_every: 20,
        }
    }
}

/// Instantaneous time derivatives of the primitive variables.
#[derive(Debug, Clone)]
pub struct RhsTerms {
    pub d_rho: Array3<f64>,
    pub d_u1: Array3<f64>,
    pub d_u2: Array3<f64>,
    pub d_u3: Array3<f64>,
    pub d_theta: Array3<f64>,
}

/// Right-hand side of the primitive-form system:
///   rho_t = -(u . grad rho + rho div u)
///   u_t   = -(u . grad u) - R (theta/rho) grad rho - R grad theta
///           + (mu Lap u + (mu+lambda) grad div u) / rho
///   theta_t = -(u . grad theta) - (gamma-1) theta div u
///             + (gamma-1)/(R rho) [kappa Lap theta + Phi]
/// with Phi = (mu/2)|grad u + (grad u)^t|^2 + lambda (div u)^2, assembled from
/// the full 3x3 gradient and checked non-negative.
pub fn rhs(g: &GasConstants, field: &Field, t: f64) -> Result<RhsTerms> {
    field.check_positive(t)?;
    let gr = &field.grid;

    let grad_rho = [ddx(&field.rho, 1, gr), ddx(&field.rho, 2, gr), ddx(&field.rho, 3, gr)];
    let grad_theta = [
        ddx(&field.theta, 1, gr),
        ddx(&field.theta, 2, gr),
        ddx(&field.theta, 3, gr),
    ];
    let vel = [&field.u1, &field.u2, &field.u3];
    let grad_u: Vec<[Array3<f64>; 3]> = vel
        .iter()
        .map(|c| [ddx(c, 1, gr), ddx(c, 2, gr), ddx(c, 3, gr)])
        .collect();
    let div = divergence(&field.u1, &field.u2, &field.u3, gr);
    let lap_u = [
        laplacian(&field.u1, gr),
        laplacian(&field.u2, gr),
        laplacian(&field.u3, gr),
    ];
    let lap_theta = laplacian(&field.theta, gr);
    let grad_div = [ddx(&div, 1, gr), ddx(&div, 2, gr), ddx(&div, 3, gr)];

    let mut d_rho = gr.zeros();
    Zip::indexed(&mut d_rho).for_each(|(i, j, k), out| {
        let adv = field.u1[[i, j, k]] * grad_rho[0][[i, j, k]]
            + field.u2[[i, j, k]] * grad_rho[1][[i, j, k]]
            + field.u3[[i, j, k]] * grad_rho[2][[i, j, k]];
        *out = -(adv + field.rho[[i, j, k]] * div[[i, j, k]]);
    });

    let mut d_vel = [gr.zeros(), gr.zeros(), gr.zeros()];
    for c in 0..3 {
        let lap_c = &lap_u[c];
        let gd_c = &grad_div[c];
        Zip::indexed(&mut d_vel[c]).for_each(|(i, j, k), out| {
            let idx = [i, j, k];
            let adv = field.u1[idx] * grad_u[c][0][idx]
                + field.u2[idx] * grad_u[c][1][idx]
                + field.u3[idx] * grad_u[c][2][idx];
            let rho = field.rho[idx];
            let theta = field.theta[idx];
            *out = -adv - g.r * theta / rho * grad_rho[c][idx] - g.r * grad_theta[c][idx]
                + (g.mu * lap_c[idx] + (g.mu + g.lambda) * gd_c[idx]) / rho;
        });
    }

    let mut d_theta = gr.zeros();
    let mut min_phi = f64::INFINITY;
    let mut min_phi_at = (0usize, 0usize, 0usize);
    Zip::indexed(&mut d_theta).for_each(|(i, j, k), out| {
        let idx = [i, j, k];
        let mut sym2 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let s = grad_u[a][b][idx] + grad_u[b][a][idx];
                sym2 += s * s;
            }
        }
        let d = div[idx];
        let phi = 0.5 * g.mu * sym2 + g.lambda * d * d;
        if phi < min_phi {
            min_phi = phi;
            min_phi_at = (i, j, k);
        }
        let adv = field.u1[idx] * grad_theta[0][idx]
            + field.u2[idx] * grad_theta[1][idx]
            + field.u3[idx] * grad_theta[2][idx];
        let rho = field.rho[idx];
        let theta = field.theta[idx];
        *out = -adv - (g.gamma - 1.0) * theta * d
            + (g.gamma - 1.0) / (g.r * rho) * (g.kappa * lap_theta[idx] + phi);
    });
    if min_phi < -1e-12 {
        return Err(Error::NegativeDissipation {
            min_phi,
            i: min_phi_at.0,
            j: min_phi_at.1,
            k: min_phi_at.2,
        });
    }

    let [d_u1, d_u2, d_u3] = d_vel;
    Ok(RhsTerms {
        d_rho,
        d_u1,
        d_u2,
        d_u3,
        d_theta,
    })
}

/// Largest stable step: min over nodes of the advective Courant bound and the
/// two diffusive bounds (momentum and heat).
pub fn stable_dt(g: &GasConstants, field: &Field, cfg: &SolverConfig) -> f64 {
    let gr = &field.grid;
    let mut dx_min = gr.dx1;
    if gr.n2 > 1 {
        dx_min = dx_min.min(gr.dx2);
    }
    if gr.n3 > 1 {
        dx_min = dx_min.min(gr.dx3);
    }
    let mut dt = f64::INFINITY;
    for ((i, j, k), &rho) in field.rho.indexed_iter() {
        let idx = [i, j, k];
        let speed = (field.u1[idx].powi(2) + field.u2[idx].powi(2) + field.u3[idx].powi(2)).sqrt()
            + (g.gamma * g.r * field.theta[idx]).sqrt();
        dt = dt.min(cfg.cfl_adv * dx_min / speed);
        dt = dt.min(cfg.cfl_visc * dx_min * dx_min * rho / (2.0 * g.mu + g.lambda));
        dt = dt.min(cfg.cfl_visc * dx_min * dx_min * rho * g.r / ((g.gamma - 1.0) * g.kappa));
    }
    dt
}

fn axpy(field: &mut Field, a: f64, rhs: &RhsTerms) {
    Zip::from(&mut field.rho).and(&rhs.d_rho).for_each(|f, &r| *f += a * r);
    Zip::from(&mut field.u1).and(&rhs.d_u1).for_each(|f, &r| *f += a * r);
    Zip::from(&mut field.u2).and(&rhs.d_u2).for_each(|f, &r| *f += a * r);
    Zip::from(&mut field.u3).and(&rhs.d_u3).for_each(|f, &r| *f += a * r);
    Zip::from(&mut field.theta).and(&rhs.d_theta).for_each(|f, &r| *f += a * r);
}

fn blend(acc: &mut Field, wa: f64, other: &Field, wb: f64) {
    for (a, b) in acc.vars_mut().into_iter().zip(other.vars().into_iter()) {
        Zip::from(a).and(b).for_each(|x, &y| *x = wa * *x + wb * y);
    }
}

/// Re-impose boundary values in x1 at time `t` per the configured mode.
pub fn impose_bc(
    g: &GasConstants,
    spec: &WaveSpec,
    field: &mut Field,
    t: f64,
    mode: BcMode,
) -> Result<()> {
    let gr = field.grid;
    for (i_b, i_in) in [(0usize, 1usize), (gr.n1 - 1, gr.n1 - 2)] {
        let s_b = wave::smooth_profile(g, spec, gr.x1(i_b), t)?.state;
        let bvals = match mode {
            BcMode::DirichletProfile => [s_b.rho, s_b.u1, 0.0, 0.0, s_b.theta],
            BcMode::NeumannZeroPerturbation => [s_b.rho, s_b.u1, 0.0, 0.0, s_b.theta],
        };
        match mode {
            BcMode::DirichletProfile => {
                for (var, b) in field.vars_mut().into_iter().zip(bvals) {
                    for j in 0..gr.n2 {
                        for k in 0..gr.n3 {
                            var[[i_b, j, k]] = b;
                        }
                    }
                }
            }
            BcMode::NeumannZeroPerturbation => {
                let s_in = wave::smooth_profile(g, spec, gr.x1(i_in), t)?.state;
                let invals = [s_in.rho, s_in.u1, 0.0, 0.0, s_in.theta];
                for ((var, b), bin) in field.vars_mut().into_iter().zip(bvals).zip(invals) {
                    for j in 0..gr.n2 {
                        for k in 0..gr.n3 {
                            var[[i_b, j, k]] = b + (var[[i_in, j, k]] - bin);
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// One SSP-RK3 step from time `t` with step `dt`; boundary values are
/// re-imposed after each stage at that stage's time.
pub fn step(
    g: &GasConstants,
    spec: &WaveSpec,
    field: &Field,
    cfg: &SolverConfig,
    t: f64,
    dt: f64,
) -> Result<Field> {
    let stable = stable_dt(g, field, cfg);
    if dt > stable * (1.0 + 1e-9) {
        return Err(Error::UnstableDt { dt, stable });
    }

    // stage 1: u1 = u + dt L(u), at time t + dt
    let k0 = rhs(g, field, t)?;
    let mut s1 = field.clone();
    axpy(&mut s1, dt, &k0);
    impose_bc(g, spec, &mut s1, t + dt, cfg.bc_mode)?;

    // stage 2: u2 = 3/4 u + 1/4 (u1 + dt L(u1)), at time t + dt/2
    let k1 = rhs(g, &s1, t + dt)?;
    let mut s2 = s1;
    axpy(&mut s2, dt, &k1);
    blend(&mut s2, 0.25, field, 0.75);
    impose_bc(g, spec, &mut s2, t + 0.5 * dt, cfg.bc_mode)?;

    // stage 3: u_{n+1} = 1/3 u + 2/3 (u2 + dt L(u2)), at time t + dt
    let k2 = rhs(g, &s2, t + 0.5 * dt)?;
    let mut out = s2;
    axpy(&mut out, dt, &k2);
    blend(&mut out, 2.0 / 3.0, field, 1.0 / 3.0);
    impose_bc(g, spec, &mut out, t + dt, cfg.bc_mode)?;
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub steps: usize,
    pub t_end: f64,
    /// Extrema of density and temperature over the whole run.
    pub min_rho: f64,
    pub max_rho: f64,
    pub min_theta: f64,
    pub max_theta: f64,
    pub max_h2: f64,
    pub first: DiagnosticsRecord,
    pub last: DiagnosticsRecord,
}

/// March to `t_final`, emitting a diagnostics record every `diag_every` steps
/// (and at t = 0 and t = t_final). Blow-up aborts with the sink already
/// holding every record emitted before the failure.
pub fn run<S: DiagnosticsSink>(
    g: &GasConstants,
    spec: &WaveSpec,
    cfg: &SolverConfig,
    initial: Field,
    sink: &mut S,
) -> Result<RunSummary> {
    run_observed(g, spec, cfg, initial, sink, &mut |_, _| Ok(()))
}

/// Like [`run`], additionally invoking `observer` with the field at every
/// diagnostic emission (field dumps, plotting hooks).
pub fn run_observed<S: DiagnosticsSink>(
    g: &GasConstants,
    spec: &WaveSpec,
    cfg: &SolverConfig,
    initial: Field,
    sink: &mut S,
    observer: &mut dyn FnMut(&Field, &DiagnosticsRecord) -> Result<()>,
) -> Result<RunSummary> {
    cfg.validate()?;
    initial.check_positive(0.0)?;

    let mut field = initial;
    let mut t = 0.0;
    let mut steps = 0usize;

    let first = diagnostics::record(g, spec, &field, t)?;
    sink.emit(&first)?;
    observer(&field, &first)?;
    let mut last = first;
    let mut max_h2 = first.h2;
    let (mut min_rho, mut max_rho) = (first.min_rho, field.rho.iter().fold(0.0f64, |m, &v| m.max(v)));
    let (mut min_theta, mut max_theta) =
        (first.min_theta, field.theta.iter().fold(0.0f64, |m, &v| m.max(v)));

    while t < cfg.t_final * (1.0 - 1e-12) {
        let dt = stable_dt(g, &field, cfg).min(cfg.t_final - t);
        field = step(g, spec, &field, cfg, t, dt)?;
        t += dt;
        steps += 1;

        min_rho = min_rho.min(field.min_rho());
        min_theta = min_theta.min(field.min_theta());
        max_rho = max_rho.max(field.rho.iter().fold(0.0f64, |m, &v| m.max(v)));
        max_theta = max_theta.max(field.theta.iter().fold(0.0f64, |m, &v| m.max(v)));

        let at_end = t >= cfg.t_final * (1.0 - 1e-12);
        if steps % cfg.diag_every == 0 || at_end {
            field.check_positive(t)?;
            let rec = diagnostics::record(g, spec, &field, t)?;
            sink.emit(&rec)?;
            observer(&field, &rec)?;
            max_h2 = max_h2.max(rec.h2);
            last = rec;
        }
    }

    Ok(RunSummary {
        steps,
        t_end: t,
        min_rho,
        max_rho,
        min_theta,
        max_theta,
        max_h2,
        first,
        last,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{profile_field, NullSink};
    use crate::grid::Grid;
    use crate::thermo::PrimState;

    fn gas() -> GasConstants {
        GasConstants::new(1.0, 1.0, 1.4, 0.01, 0.0, 0.01).unwrap()
    }

    fn spec(g: &GasConstants) -> WaveSpec {
        let right = PrimState::planar(1.0, 0.0, 1.0).unwrap();
        WaveSpec::from_delta_w(g, right, 0.3, 0.1, 2.0).unwrap()
    }

    fn constant_field(grid: Grid, rho: f64, u1: f64, theta: f64) -> Field {
        let mut f = Field::zeros(grid);
        f.rho.fill(rho);
        f.u1.fill(u1);
        f.theta.fill(theta);
        f
    }

    #[test]
    fn constant_state_has_zero_rhs() {
        let g = gas();
        let grid = Grid::new(5.0, 32, 4, 4).unwrap();
        let f = constant_field(grid, 1.3, 0.2, 0.9);
        let r = rhs(&g, &f, 0.0).unwrap();
        for arr in [&r.d_rho, &r.d_u1, &r.d_u2, &r.d_u3, &r.d_theta] {
            assert!(arr.iter().all(|&v| v.abs() < 1e-13));
        }
    }

    #[test]
    fn rhs_rejects_nonpositive_state() {
        let g = gas();
        let grid = Grid::new(5.0, 16, 1, 1).unwrap();
        let mut f = constant_field(grid, 1.0, 0.0, 1.0);
        f.rho[[3, 0, 0]] = -0.1;
        match rhs(&g, &f, 2.5) {
            Err(Error::BlowUp { var, i, .. }) => {
                assert_eq!(var, "rho");
                assert_eq!(i, 3);
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn profile_residual_is_the_viscous_forcing() {
        // The profile solves Euler exactly; rhs(profile) minus the exact
        // profile time derivative must equal the viscous terms
        // (2mu+lambda) u1_x1x1 / rho  and  (gamma-1)/(R rho) (kappa theta_x1x1
        // + (2mu+lambda) u1_x1^2) up to O(h^2).
        let g = gas();
        let sp = spec(&g);
        let grid = Grid::new(30.0, 1201, 1, 1).unwrap();
        let t = 1.0;
        let field = profile_field(&g, &sp, &grid, t).unwrap();
        let r = rhs(&g, &field, t).unwrap();
        let h = 1e-4;
        let fp = profile_field(&g, &sp, &grid, t + h).unwrap();
        let fm = profile_field(&g, &sp, &grid, t - h).unwrap();
        let mut worst_u1 = 0.0f64;
        let mut worst_rho = 0.0f64;
        for i in 2..grid.n1 - 2 {
            let x = grid.x1(i);
            let s = wave::smooth_profile(&g, &sp, x, t).unwrap();
            let dudt = (fp.u1[[i, 0, 0]] - fm.u1[[i, 0, 0]]) / (2.0 * h);
            let visc = (2.0 * g.mu + g.lambda) * s.d2_u1_dx1 / s.state.rho;
            worst_u1 = worst_u1.max((r.d_u1[[i, 0, 0]] - dudt - visc).abs());
            let drdt = (fp.rho[[i, 0, 0]] - fm.rho[[i, 0, 0]]) / (2.0 * h);
            worst_rho = worst_rho.max((r.d_rho[[i, 0, 0]] - drdt).abs());
        }
        // dx1 = 0.05: O(h^2) truncation on profile third derivatives
        assert!(worst_u1 < 5e-5, "worst_u1 = {worst_u1}");
        assert!(worst_rho < 5e-5, "worst_rho = {worst_rho}");
    }

    #[test]
    fn constant_state_unchanged_by_step() {
        // dirichlet boundary values come from the profile, so use a
        // zero-strength-like setup: compare interior nodes only.
        let g = gas();
        let sp = spec(&g);
        let grid = Grid::new(5.0, 32, 2, 2).unwrap();
        let cfg = SolverConfig::default();
        // field = profile is the discrete steady transport; interior change
        // per step is bounded by the residual
        let f0 = profile_field(&g, &sp, &grid, 0.0).unwrap();
        let dt = stable_dt(&g, &f0, &cfg);
        let f1 = step(&g, &sp, &f0, &cfg, 0.0, dt).unwrap();
        let mut worst = 0.0f64;
        for ((idx, &a), &b) in f0.u1.indexed_iter().zip(f1.u1.iter()) {
            let _ = idx;
            worst = worst.max((a - b).abs());
        }
        assert!(worst < 1e-2, "worst = {worst}");

        // genuinely constant state with matching dirichlet data: freeze the
        // boundary by using the constant as both end states is not a valid
        // rarefaction, so instead check rhs-only invariance
        let c = constant_field(grid, 1.0, 0.1, 1.0);
        let r = rhs(&g, &c, 0.0).unwrap();
        assert!(r.d_rho.iter().all(|&v| v.abs() < 1e-13));
    }

    #[test]
    fn huge_dt_rejected() {
        let g = gas();
        let sp = spec(&g);
        let grid = Grid::new(5.0, 32, 1, 1).unwrap();
        let f = profile_field(&g, &sp, &grid, 0.0).unwrap();
        let cfg = SolverConfig::default();
        let stable = stable_dt(&g, &f, &cfg);
        assert!(matches!(
            step(&g, &sp, &f, &cfg, 0.0, 10.0 * stable),
            Err(Error::UnstableDt { .. })
        ));
    }

    #[test]
    fn stable_dt_resolution_scaling() {
        let g = gas();
        let cfg = SolverConfig::default();
        let coarse = constant_field(Grid::new(5.0, 33, 1, 1).unwrap(), 1.0, 0.0, 1.0);
        let fine = constant_field(Grid::new(5.0, 65, 1, 1).unwrap(), 1.0, 0.0, 1.0);
        let dt_c = stable_dt(&g, &coarse, &cfg);
        let dt_f = stable_dt(&g, &fine, &cfg);
        // advective bound binds here: halving dx halves dt
        assert!((dt_c / dt_f - 2.0).abs() < 1e-10, "{dt_c} {dt_f}");
        // zero-velocity uniform state: the bound is the c-based advective one
        let expect = cfg.cfl_adv * coarse.grid.dx1 / (g.gamma * g.r * 1.0f64).sqrt();
        assert!((dt_c - expect).abs() < 1e-12);

        // viscous-dominated regime: quarter on halving
        let g_visc = GasConstants::new(1.0, 1.0, 1.4, 5.0, 0.0, 0.01).unwrap();
        let dt_c = stable_dt(&g_visc, &coarse, &cfg);
        let dt_f = stable_dt(&g_visc, &fine, &cfg);
        assert!((dt_c / dt_f - 4.0).abs() < 1e-10);
    }

    #[test]
    fn temporal_order_three() {
        // Richardson: error vs a fine-dt reference on a smooth run shrinks at
        // O(dt^3) before spatial error dominates.
        let g = gas();
        let sp = spec(&g);
        let grid = Grid::new(20.0, 201, 1, 1).unwrap();
        let mut f0 = profile_field(&g, &sp, &grid, 0.0).unwrap();
        for ((i, _, _), v) in f0.u1.indexed_iter_mut() {
            let x = grid.x1(i);
            *v += 0.05 * (-(x + 5.0) * (x + 5.0)).exp();
        }
        let cfg = SolverConfig::default();
        let t_end = 0.4;
        let advance = |dt: f64| {
            let n = (t_end / dt).round() as usize;
            let mut f = f0.clone();
            let mut t = 0.0;
            for _ in 0..n {
                f = step(&g, &sp, &f, &cfg, t, dt).unwrap();
                t += dt;
            }
            f
        };
        let reference = advance(t_end / 320.0);
        let err = |f: &Field| {
            let mut m = 0.0f64;
            for i in 5..grid.n1 - 5 {
                m = m.max((f.u1[[i, 0, 0]] - reference.u1[[i, 0, 0]]).abs());
            }
            m
        };
        let e1 = err(&advance(t_end / 20.0));
        let e2 = err(&advance(t_end / 40.0));
        let ratio = e1 / e2;
        assert!(ratio > 5.5 && ratio < 10.5, "ratio = {ratio}");
    }

    #[test]
    fn inviscid_advection_matches_characteristics() {
        // mu = lambda = kappa = 0 test build: a transverse-velocity bump on a
        // uniform stream is transported at the stream speed.
        let g = GasConstants {
            r: 1.0,
            a: 1.0,
            gamma: 1.4,
            mu: 0.0,
            lambda: 0.0,
            kappa: 0.0,
        };
        let g_valid = gas();
        let sp = spec(&g_valid);
        let grid = Grid::new(10.0, 401, 1, 1).unwrap();
        let mut f = Field::zeros(grid);
        f.rho.fill(1.0);
        f.theta.fill(1.0);
        let u_stream = 0.5;
        f.u1.fill(u_stream);
        for ((i, _, _), v) in f.u2.indexed_iter_mut() {
            let x = grid.x1(i);
            *v = 0.1 * (-(x + 3.0) * (x + 3.0) * 2.0).exp();
        }
        let cfg = SolverConfig {
            t_final: 2.0,
            ..Default::default()
        };
        let t_end = 2.0f64;
        let dt = 0.005;
        let n = (t_end / dt).round() as usize;
        let mut t = 0.0;
        for _ in 0..n {
            // constant far fields: dirichlet from the (unused elsewhere)
            // profile would perturb rho/u1/theta at the ends; pin u2 = 0 there
            // by hand instead
            let k0 = rhs(&g, &f, t).unwrap();
            let mut s1 = f.clone();
            axpy(&mut s1, dt, &k0);
            let k1 = rhs(&g, &s1, t).unwrap();
            let mut s2 = s1;
            axpy(&mut s2, dt, &k1);
            blend(&mut s2, 0.25, &f, 0.75);
            let k2 = rhs(&g, &s2, t).unwrap();
            let mut out = s2;
            axpy(&mut out, dt, &k2);
            blend(&mut out, 2.0 / 3.0, &f, 1.0 / 3.0);
            f = out;
            t += dt;
        }
        let _ = cfg;
        // method of characteristics: u2(x, t) = u2_0(x - u_stream t)
        let mut worst = 0.0f64;
        for i in 10..grid.n1 - 10 {
            let x = grid.x1(i);
            let exact = 0.1 * (-(x - u_stream * t_end + 3.0).powi(2) * 2.0).exp();
            worst = worst.max((f.u2[[i, 0, 0]] - exact).abs());
        }
        // dx = 0.05, second-order transport
        assert!(worst < 5e-3, "worst = {worst}");
    }

    #[test]
    fn zero_perturbation_run_tracks_profile() {
        let g = gas();
        let sp = spec(&g);
        let grid = Grid::new(20.0, 128, 1, 1).unwrap();
        let cfg = SolverConfig {
            t_final: 2.0,
            diag_every: 10,
            ..Default::default()
        };
        let init = profile_field(&g, &sp, &grid, 0.0).unwrap();
        let mut sink = NullSink;
        let summary = run(&g, &sp, &cfg, init, &mut sink).unwrap();
        let h2 = grid.dx1 * grid.dx1;
        let bound = 10.0 * (sp.eps * sp.eps + h2) * cfg.t_final;
        assert!(
            summary.last.sup_dist < bound,
            "sup_dist {} vs bound {bound}",
            summary.last.sup_dist
        );
        assert!(summary.min_rho > 0.5 * sp.left_state.rho);
        assert!(summary.min_theta > 0.5 * sp.left_state.theta);
    }

    #[test]
    fn planar_symmetry_preserved() {
        // x2/x3-independent data stays x2/x3-independent to round-off
        let g = gas();
        let sp = spec(&g);
        let grid = Grid::new(10.0, 64, 4, 4).unwrap();
        let mut f = profile_field(&g, &sp, &grid, 0.0).unwrap();
        for ((i, _, _), v) in f.theta.indexed_iter_mut() {
            let x = grid.x1(i);
            *v += 0.01 * (-x * x).exp();
        }
        let cfg = SolverConfig::default();
        let mut t = 0.0;
        for _ in 0..5 {
            let dt = stable_dt(&g, &f, &cfg);
            f = step(&g, &sp, &f, &cfg, t, dt).unwrap();
            t += dt;
        }
        for var in f.vars() {
            for ((i, j, k), &v) in var.indexed_iter() {
                assert_eq!(v, var[[i, 0, 0]], "at ({i},{j},{k})");
            }
        }
    }

    #[test]
    fn u2_negation_equivariance() {
        // with x2-independent data, negating u2 negates u2 in the solution
        // and leaves the other variables untouched, to round-off
        let g = gas();
        let sp = spec(&g);
        let grid = Grid::new(10.0, 48, 1, 4).unwrap();
        let mut f = profile_field(&g, &sp, &grid, 0.0).unwrap();
        for ((i, _, k), v) in f.u2.indexed_iter_mut() {
            let x = grid.x1(i);
            *v = 0.02 * (-x * x).exp() * (2.0 * std::f64::consts::PI * grid.x3(k)).cos();
        }
        let mut f_neg = f.clone();
        f_neg.u2.mapv_inplace(|v| -v);
        let cfg = SolverConfig::default();
        let mut t = 0.0;
        let mut a = f;
        let mut b = f_neg;
        for _ in 0..5 {
            let dt = stable_dt(&g, &a, &cfg);
            a = step(&g, &sp, &a, &cfg, t, dt).unwrap();
            b = step(&g, &sp, &b, &cfg, t, dt).unwrap();
            t += dt;
        }
        for (x, y) in a.u2.iter().zip(b.u2.iter()) {
            assert_eq!(*x, -*y);
        }
        for (x, y) in a.rho.iter().zip(b.rho.iter()) {
            assert_eq!(x, y);
        }
        for (x, y) in a.theta.iter().zip(b.theta.iter()) {
            assert_eq!(x, y);
        }
        for (x, y) in a.u1.iter().zip(b.u1.iter()) {
            assert_eq!(x, y);
        }
    }
}
