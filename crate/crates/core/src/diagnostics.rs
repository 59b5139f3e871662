//! Every quantity the stability analysis tracks: perturbation Sobolev norms,
//! relative entropy against the analytic profile, weighted rarefaction norms,
//! sup-distance to the wave, and log-log decay-rate fits.

use crate::error::{Error, Result};
use crate::grid::{ddx, divergence, norm_grad, norm_grad2, norm_l2_multi, Field, Grid};
use crate::thermo::GasConstants;
use crate::wave::{self, WaveSample, WaveSpec};
use ndarray::Array3;
use std::io::Write;
use std::path::Path;

/// One time-sample of all norms, entropies and sup-distances.
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// L2 norm of the perturbation (phi, psi, zeta).
    pub l2: f64,
    pub h1: f64,
    pub h2: f64,
    /// sup over nodes of |(rho - rho_bar, u - u_bar, theta - theta_bar)|.
    pub sup_dist: f64,
    /// Integral of the relative entropy eta.
    pub rel_entropy: f64,
    /// || sqrt(u1_bar_x1) (phi, psi_1, zeta) ||_L2^2.
    pub weighted_rare: f64,
    /// Weighted gradient dissipation integral.
    pub grad_diss: f64,
    pub min_rho: f64,
    pub min_theta: f64,
}

impl DiagnosticsRecord {
    pub const CSV_HEADER: &'static str =
        "t,l2,h1,h2,sup_dist,rel_entropy,weighted_rare,grad_diss,min_rho,min_theta";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.t,
            self.l2,
            self.h1,
            self.h2,
            self.sup_dist,
            self.rel_entropy,
            self.weighted_rare,
            self.grad_diss,
            self.min_rho,
            self.min_theta
        )
    }
}

pub trait DiagnosticsSink {
    fn emit(&mut self, rec: &DiagnosticsRecord) -> Result<()>;
}

/// Collects records in memory.
#[derive(Default)]
pub struct VecSink {
    pub records: Vec<DiagnosticsRecord>,
}

impl DiagnosticsSink for VecSink {
    fn emit(&mut self, rec: &DiagnosticsRecord) -> Result<()> {
        self.records.push(*rec);
        Ok(())
    }
}

pub struct NullSink;

impl DiagnosticsSink for NullSink {
    fn emit(&mut self, _rec: &DiagnosticsRecord) -> Result<()> {
        Ok(())
    }
}

/// Writes one CSV row per record, full double precision.
pub struct CsvSink {
    writer: std::io::BufWriter<std::fs::File>,
}

impl CsvSink {
    pub fn create<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::create(path)?;
        let mut writer = std::io::BufWriter::new(file);
        writeln!(writer, "{}", DiagnosticsRecord::CSV_HEADER)?;
        Ok(CsvSink { writer })
    }
}

impl DiagnosticsSink for CsvSink {
    fn emit(&mut self, rec: &DiagnosticsRecord) -> Result<()> {
        writeln!(self.writer, "{}", rec.to_csv_row())?;
        self.writer.flush()?;
        Ok(())
    }
}

/// Fan out to two sinks.
pub struct TeeSink<'a, A: DiagnosticsSink, B: DiagnosticsSink>(pub &'a mut A, pub &'a mut B);

impl<A: DiagnosticsSink, B: DiagnosticsSink> DiagnosticsSink for TeeSink<'_, A, B> {
    fn emit(&mut self, rec: &DiagnosticsRecord) -> Result<()> {
        self.0.emit(rec)?;
        self.1.emit(rec)
    }
}

/// Profile evaluations per x1 index; the profile is planar, so one
/// characteristic solve per x1 line serves the whole transverse plane.
pub fn profile_samples(
    g: &GasConstants,
    spec: &WaveSpec,
    grid: &Grid,
    t: f64,
) -> Result<Vec<WaveSample>> {
    (0..grid.n1)
        .map(|i| wave::smooth_profile(g, spec, grid.x1(i), t))
        .collect()
}

/// The smooth profile realized as a discrete field.
pub fn profile_field(g: &GasConstants, spec: &WaveSpec, grid: &Grid, t: f64) -> Result<Field> {
    let samples = profile_samples(g, spec, grid, t)?;
    let mut field = Field::zeros(*grid);
    for ((i, _, _), v) in field.rho.indexed_iter_mut() {
        *v = samples[i].state.rho;
    }
    for ((i, _, _), v) in field.u1.indexed_iter_mut() {
        *v = samples[i].state.u1;
    }
    for ((i, _, _), v) in field.theta.indexed_iter_mut() {
        *v = samples[i].state.theta;
    }
    Ok(field)
}

/// Pointwise perturbation (phi, psi, zeta) = field - profile(x1, t).
pub fn perturbation(g: &GasConstants, spec: &WaveSpec, field: &Field, t: f64) -> Result<Field> {
    let samples = profile_samples(g, spec, &field.grid, t)?;
    Ok(perturbation_from_samples(field, &samples))
}

pub fn perturbation_from_samples(field: &Field, samples: &[WaveSample]) -> Field {
    let mut out = field.clone();
    for ((i, _, _), v) in out.rho.indexed_iter_mut() {
        *v -= samples[i].state.rho;
    }
    for ((i, _, _), v) in out.u1.indexed_iter_mut() {
        *v -= samples[i].state.u1;
    }
    for ((i, _, _), v) in out.theta.indexed_iter_mut() {
        *v -= samples[i].state.theta;
    }
    out
}

fn convex_psi(s: f64) -> f64 {
    s - s.ln() - 1.0
}

/// Integral of the relative entropy
/// eta = R rho theta_bar Psi(rho_bar/rho) + R/(gamma-1) rho theta_bar Psi(theta/theta_bar)
///       + 1/2 rho |u - u_bar|^2
/// against the analytic profile samples.
pub fn relative_entropy(
    g: &GasConstants,
    field: &Field,
    samples: &[WaveSample],
) -> Result<f64> {
    let gridref = &field.grid;
    let cell = gridref.dx2 * gridref.dx3;
    let mut acc = 0.0;
    for ((i, j, k), &rho) in field.rho.indexed_iter() {
        let theta = field.theta[[i, j, k]];
        if !(rho > 0.0) {
            return Err(Error::Domain {
                what: "rho",
                value: rho,
            });
        }
        if !(theta > 0.0) {
            return Err(Error::Domain {
                what: "theta",
                value: theta,
            });
        }
        let bar = samples[i].state;
        let du1 = field.u1[[i, j, k]] - bar.u1;
        let du2 = field.u2[[i, j, k]];
        let du3 = field.u3[[i, j, k]];
        let eta = g.r * rho * bar.theta * convex_psi(bar.rho / rho)
            + g.r / (g.gamma - 1.0) * rho * bar.theta * convex_psi(theta / bar.theta)
            + 0.5 * rho * (du1 * du1 + du2 * du2 + du3 * du3);
        let w1 = if i == 0 || i == gridref.n1 - 1 {
            0.5 * gridref.dx1
        } else {
            gridref.dx1
        };
        acc += eta * w1 * cell;
    }
    Ok(acc)
}

/// Integral of u1_bar_x1 (phi^2 + psi_1^2 + zeta^2) with the analytic
/// profile derivative as weight.
pub fn weighted_rarefaction_norm(
    field: &Field,
    samples: &[WaveSample],
) -> f64 {
    let gridref = &field.grid;
    let cell = gridref.dx2 * gridref.dx3;
    let mut acc = 0.0;
    for ((i, j, k), &rho) in field.rho.indexed_iter() {
        let bar = samples[i].state;
        let phi = rho - bar.rho;
        let psi1 = field.u1[[i, j, k]] - bar.u1;
        let zeta = field.theta[[i, j, k]] - bar.theta;
        let w1 = if i == 0 || i == gridref.n1 - 1 {
            0.5 * gridref.dx1
        } else {
            gridref.dx1
        };
        acc += samples[i].d_u1_dx1 * (phi * phi + psi1 * psi1 + zeta * zeta) * w1 * cell;
    }
    acc
}

/// Weighted gradient dissipation
/// int (theta_bar/theta) Phi(grad psi) + kappa theta_bar |grad zeta|^2 / theta^2 dx
/// with Phi the viscous dissipation quadratic form.
fn grad_dissipation(
    g: &GasConstants,
    field: &Field,
    pert: &Field,
    samples: &[WaveSample],
) -> f64 {
    let gr = &field.grid;
    let grad: Vec<[Array3<f64>; 3]> = [&pert.u1, &pert.u2, &pert.u3]
        .iter()
        .map(|c| [ddx(c, 1, gr), ddx(c, 2, gr), ddx(c, 3, gr)])
        .collect();
    let div = divergence(&pert.u1, &pert.u2, &pert.u3, gr);
    let gz = [ddx(&pert.theta, 1, gr), ddx(&pert.theta, 2, gr), ddx(&pert.theta, 3, gr)];
    let cell = gr.dx2 * gr.dx3;
    let mut acc = 0.0;
    for ((i, j, k), &theta) in field.theta.indexed_iter() {
        let mut sym2 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let s = grad[a][b][[i, j, k]] + grad[b][a][[i, j, k]];
                sym2 += s * s;
            }
        }
        let d = div[[i, j, k]];
        let phi_diss = 0.5 * g.mu * sym2 + g.lambda * d * d;
        let gz2 = gz[0][[i, j, k]].powi(2) + gz[1][[i, j, k]].powi(2) + gz[2][[i, j, k]].powi(2);
        let tb = samples[i].state.theta;
        let w1 = if i == 0 || i == gr.n1 - 1 {
            0.5 * gr.dx1
        } else {
            gr.dx1
        };
        acc += (tb / theta * phi_diss + g.kappa * tb * gz2 / (theta * theta)) * w1 * cell;
    }
    acc
}

/// Assemble one full diagnostics record for a field snapshot at time `t`.
pub fn record(
    g: &GasConstants,
    spec: &WaveSpec,
    field: &Field,
    t: f64,
) -> Result<DiagnosticsRecord> {
    let gr = &field.grid;
    let samples = profile_samples(g, spec, gr, t)?;
    let pert = perturbation_from_samples(field, &samples);
    let comps = [&pert.rho, &pert.u1, &pert.u2, &pert.u3, &pert.theta];
    let l2 = norm_l2_multi(&comps, gr);
    let gnorm = norm_grad(&comps, gr);
    let g2norm = norm_grad2(&comps, gr);
    let mut sup: f64 = 0.0;
    for ((i, j, k), &phi) in pert.rho.indexed_iter() {
        let v = phi * phi
            + pert.u1[[i, j, k]].powi(2)
            + pert.u2[[i, j, k]].powi(2)
            + pert.u3[[i, j, k]].powi(2)
            + pert.theta[[i, j, k]].powi(2);
        sup = sup.max(v);
    }
    Ok(DiagnosticsRecord {
        t,
        l2,
        h1: l2 + gnorm,
        h2: l2 + gnorm + g2norm,
        sup_dist: sup.sqrt(),
        rel_entropy: relative_entropy(g, field, &samples)?,
        weighted_rare: weighted_rarefaction_norm(field, &samples),
        grad_diss: grad_dissipation(g, field, &pert, &samples),
        min_rho: field.min_rho(),
        min_theta: field.min_theta(),
    })
}

/// Fitted log-log slope of a positive time series.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
}

/// Least-squares line on (ln t, ln value) for samples inside the window.
pub fn fit_decay(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let (t_lo, t_hi) = window;
    if !(t_lo < t_hi) {
        return Err(Error::Fit(format!("empty window [{t_lo}, {t_hi}]")));
    }
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, _)| *t >= t_lo && *t <= t_hi)
        .copied()
        .collect();
    if pts.len() < 8 {
        return Err(Error::Fit(format!(
            "need at least 8 samples in window, got {}",
            pts.len()
        )));
    }
    if let Some(&(t, v)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(Error::Fit(format!("non-positive value {v} at t = {t}")));
    }
    let n = pts.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(t, v) in &pts {
        let x = t.ln();
        let y = v.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return Err(Error::Fit("degenerate abscissa".to_string()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let ss_tot = syy - sy * sy / n;
    let ss_res: f64 = pts
        .iter()
        .map(|&(t, v)| {
            let r = v.ln() - (slope * t.ln() + intercept);
            r * r
        })
        .sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(DecayFit {
        exponent: slope,
        prefactor: intercept.exp(),
        r_squared,
        window,
    })
}
