//! Experiment configuration: flat sectioned key=value text, parsed and
//! serialized losslessly so configs can be diffed and round-tripped.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::solver::{BcMode, SolverConfig};
use crate::thermo::{GasConstants, PrimState};
use crate::wave::WaveSpec;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

/// How the left end state is specified: as a wave strength (left state derived
/// by sliding down the rarefaction curve) or explicitly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaveStrength {
    DeltaW(f64),
    LeftState { rho: f64, u1: f64, theta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveConfig {
    pub right: PrimState,
    pub strength: WaveStrength,
    pub eps: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub l: f64,
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
}

/// Gaussian bumps, one per variable, modulated transversally by
/// cos(2 pi k x2) cos(2 pi m x3); bump centers are jittered from `seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationConfig {
    pub amp_rho: f64,
    pub amp_u1: f64,
    pub amp_u2: f64,
    pub amp_u3: f64,
    pub amp_theta: f64,
    pub width: f64,
    pub k: u32,
    pub m: u32,
    pub seed: u64,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        PerturbationConfig {
            amp_rho: 0.0,
            amp_u1: 0.0,
            amp_u2: 0.0,
            amp_u3: 0.0,
            amp_theta: 0.0,
            width: 1.0,
            k: 0,
            m: 0,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Field-dump cadence in diagnostic emissions; 0 disables dumps.
    pub dump_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            dump_every: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub gas: GasConstants,
    pub wave: WaveConfig,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub threads: usize,
    pub perturbation: PerturbationConfig,
    pub outputs: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            gas: GasConstants::new(1.0, 1.0, 1.4, 0.01, 0.0, 0.01).unwrap(),
            wave: WaveConfig {
                right: PrimState::planar(1.0, 0.0, 1.0).unwrap(),
                strength: WaveStrength::DeltaW(0.3),
                eps: 0.1,
                q: 2.0,
            },
            grid: GridConfig {
                l: 30.0,
                n1: 256,
                n2: 1,
                n3: 1,
            },
            solver: SolverConfig::default(),
            threads: 1,
            perturbation: PerturbationConfig::default(),
            outputs: OutputConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Build the validated wave description from the config.
    pub fn wave_spec(&self) -> Result<WaveSpec> {
        match self.wave.strength {
            WaveStrength::DeltaW(dw) => {
                WaveSpec::from_delta_w(&self.gas, self.wave.right, dw, self.wave.eps, self.wave.q)
            }
            WaveStrength::LeftState { rho, u1, theta } => {
                let left = PrimState::planar(rho, u1, theta)?;
                WaveSpec::from_states(
                    &self.gas,
                    left,
                    self.wave.right,
                    self.wave.eps,
                    self.wave.q,
                )
            }
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.l, self.grid.n1, self.grid.n2, self.grid.n3)
    }

    /// Same as `wave_spec` but without the curve-membership gate; wave-check
    /// reports membership as a named check instead of refusing to start.
    pub fn wave_spec_unchecked(&self) -> Result<WaveSpec> {
        match self.wave.strength {
            WaveStrength::DeltaW(dw) => {
                WaveSpec::from_delta_w(&self.gas, self.wave.right, dw, self.wave.eps, self.wave.q)
            }
            WaveStrength::LeftState { rho, u1, theta } => {
                let left = PrimState::planar(rho, u1, theta)?;
                WaveSpec::from_states_unchecked(
                    &self.gas,
                    left,
                    self.wave.right,
                    self.wave.eps,
                    self.wave.q,
                )
            }
        }
    }

    /// Validate everything; returns human-readable warnings for conditions
    /// that are suspicious but well-posed (the boundary data stays defined
    /// even when the wave cone leaves the slab). Rarefaction-curve membership
    /// of an explicit left state is deliberately left to the commands, which
    /// report it as a named check.
    pub fn validate(&self) -> Result<Vec<String>> {
        self.gas.validate()?;
        let spec = self.wave_spec_unchecked()?;
        self.grid()?;
        self.solver.validate()?;
        if self.threads == 0 {
            return Err(Error::Config("threads must be at least 1".to_string()));
        }
        if !(self.perturbation.width > 0.0) {
            return Err(Error::Config(format!(
                "perturbation width = {} must be positive",
                self.perturbation.width
            )));
        }
        for (name, amp) in [
            ("amp_rho", self.perturbation.amp_rho),
            ("amp_u1", self.perturbation.amp_u1),
            ("amp_u2", self.perturbation.amp_u2),
            ("amp_u3", self.perturbation.amp_u3),
            ("amp_theta", self.perturbation.amp_theta),
        ] {
            if !amp.is_finite() {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        // Perturbed density/temperature must stay positive at t = 0. Bump
        // amplitude bounds the deviation from the profile.
        let floor_rho = spec.left_state.rho.min(spec.right_state.rho);
        let floor_theta = spec.left_state.theta.min(spec.right_state.theta);
        if self.perturbation.amp_rho.abs() >= floor_rho {
            return Err(Error::Config(format!(
                "amp_rho = {} can drive density nonpositive (profile min {floor_rho})",
                self.perturbation.amp_rho
            )));
        }
        if self.perturbation.amp_theta.abs() >= floor_theta {
            return Err(Error::Config(format!(
                "amp_theta = {} can drive temperature nonpositive (profile min {floor_theta})",
                self.perturbation.amp_theta
            )));
        }

        let mut warnings = Vec::new();
        let cone = 2.0 * (spec.w_minus.abs() + spec.w_plus.abs()) * self.solver.t_final;
        if self.grid.l < cone {
            warnings.push(format!(
                "wave cone leaves the slab: L = {} < 2(|w-|+|w+|) t_final = {cone:.3}; \
                 boundary data follows the profile but reflections are possible",
                self.grid.l
            ));
        }
        Ok(warnings)
    }

    /// Parse the sectioned key=value format. Unknown keys and sections are
    /// errors; omitted keys take defaults.
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                current = name.trim().to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected 'key = value', got '{raw}'",
                    lineno + 1
                )));
            };
            if current.is_empty() {
                return Err(Error::Config(format!(
                    "line {}: key '{}' outside any section",
                    lineno + 1,
                    key.trim()
                )));
            }
            sections
                .get_mut(&current)
                .unwrap()
                .insert(key.trim().to_string(), value.trim().to_string());
        }

        let known = ["gas", "wave", "grid", "solver", "perturbation", "outputs"];
        for name in sections.keys() {
            if !known.contains(&name.as_str()) {
                return Err(Error::Config(format!("unknown section [{name}]")));
            }
        }

        let mut cfg = ExperimentConfig::default();
        let empty = BTreeMap::new();
        let sect = |name: &str| sections.get(name).unwrap_or(&empty);

        {
            let s = sect("gas");
            check_keys(s, "gas", &["r", "a", "gamma", "mu", "lambda", "kappa"])?;
            let mut g = cfg.gas;
            get_f64(s, "r", &mut g.r)?;
            get_f64(s, "a", &mut g.a)?;
            get_f64(s, "gamma", &mut g.gamma)?;
            get_f64(s, "mu", &mut g.mu)?;
            get_f64(s, "lambda", &mut g.lambda)?;
            get_f64(s, "kappa", &mut g.kappa)?;
            cfg.gas = g;
        }
        {
            let s = sect("wave");
            check_keys(
                s,
                "wave",
                &[
                    "rho_right",
                    "u1_right",
                    "theta_right",
                    "delta_w",
                    "rho_left",
                    "u1_left",
                    "theta_left",
                    "eps",
                    "q",
                ],
            )?;
            let mut rho = cfg.wave.right.rho;
            let mut u1 = cfg.wave.right.u1;
            let mut theta = cfg.wave.right.theta;
            get_f64(s, "rho_right", &mut rho)?;
            get_f64(s, "u1_right", &mut u1)?;
            get_f64(s, "theta_right", &mut theta)?;
            cfg.wave.right = PrimState::planar(rho, u1, theta)?;
            get_f64(s, "eps", &mut cfg.wave.eps)?;
            get_f64(s, "q", &mut cfg.wave.q)?;
            let has_left = ["rho_left", "u1_left", "theta_left"]
                .iter()
                .filter(|k| s.contains_key(**k))
                .count();
            if has_left > 0 && s.contains_key("delta_w") {
                return Err(Error::Config(
                    "give either delta_w or the explicit left state, not both".to_string(),
                ));
            }
            if has_left > 0 {
                if has_left < 3 {
                    return Err(Error::Config(
                        "explicit left state needs all of rho_left, u1_left, theta_left"
                            .to_string(),
                    ));
                }
                let mut lr = 0.0;
                let mut lu = 0.0;
                let mut lt = 0.0;
                get_f64(s, "rho_left", &mut lr)?;
                get_f64(s, "u1_left", &mut lu)?;
                get_f64(s, "theta_left", &mut lt)?;
                cfg.wave.strength = WaveStrength::LeftState {
                    rho: lr,
                    u1: lu,
                    theta: lt,
                };
            } else if let WaveStrength::DeltaW(ref mut dw) = cfg.wave.strength {
                get_f64(s, "delta_w", dw)?;
            }
        }
        {
            let s = sect("grid");
            check_keys(s, "grid", &["l", "n1", "n2", "n3"])?;
            get_f64(s, "l", &mut cfg.grid.l)?;
            get_usize(s, "n1", &mut cfg.grid.n1)?;
            get_usize(s, "n2", &mut cfg.grid.n2)?;
            get_usize(s, "n3", &mut cfg.grid.n3)?;
        }
        {
            let s = sect("solver");
            check_keys(
                s,
                "solver",
                &[
                    "cfl_adv",
                    "cfl_visc",
                    "t_final",
                    "bc_mode",
                    "diag_every",
                    "threads",
                ],
            )?;
            get_f64(s, "cfl_adv", &mut cfg.solver.cfl_adv)?;
            get_f64(s, "cfl_visc", &mut cfg.solver.cfl_visc)?;
            get_f64(s, "t_final", &mut cfg.solver.t_final)?;
            if let Some(v) = s.get("bc_mode") {
                cfg.solver.bc_mode = v.parse::<BcMode>()?;
            }
            get_usize(s, "diag_every", &mut cfg.solver.diag_every)?;
            get_usize(s, "threads", &mut cfg.threads)?;
        }
        {
            let s = sect("perturbation");
            check_keys(
                s,
                "perturbation",
                &[
                    "amp_rho", "amp_u1", "amp_u2", "amp_u3", "amp_theta", "width", "k", "m",
                    "seed",
                ],
            )?;
            let p = &mut cfg.perturbation;
            get_f64(s, "amp_rho", &mut p.amp_rho)?;
            get_f64(s, "amp_u1", &mut p.amp_u1)?;
            get_f64(s, "amp_u2", &mut p.amp_u2)?;
            get_f64(s, "amp_u3", &mut p.amp_u3)?;
            get_f64(s, "amp_theta", &mut p.amp_theta)?;
            get_f64(s, "width", &mut p.width)?;
            get_u32(s, "k", &mut p.k)?;
            get_u32(s, "m", &mut p.m)?;
            get_u64(s, "seed", &mut p.seed)?;
        }
        {
            let s = sect("outputs");
            check_keys(s, "outputs", &["dir", "dump_every"])?;
            if let Some(v) = s.get("dir") {
                cfg.outputs.dir = PathBuf::from(v);
            }
            get_usize(s, "dump_every", &mut cfg.outputs.dump_every)?;
        }

        Ok(cfg)
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let g = &self.gas;
        writeln_kv(&mut s, "[gas]");
        kvf(&mut s, "r", g.r);
        kvf(&mut s, "a", g.a);
        kvf(&mut s, "gamma", g.gamma);
        kvf(&mut s, "mu", g.mu);
        kvf(&mut s, "lambda", g.lambda);
        kvf(&mut s, "kappa", g.kappa);
        writeln_kv(&mut s, "\n[wave]");
        kvf(&mut s, "rho_right", self.wave.right.rho);
        kvf(&mut s, "u1_right", self.wave.right.u1);
        kvf(&mut s, "theta_right", self.wave.right.theta);
        match self.wave.strength {
            WaveStrength::DeltaW(dw) => kvf(&mut s, "delta_w", dw),
            WaveStrength::LeftState { rho, u1, theta } => {
                kvf(&mut s, "rho_left", rho);
                kvf(&mut s, "u1_left", u1);
                kvf(&mut s, "theta_left", theta);
            }
        }
        kvf(&mut s, "eps", self.wave.eps);
        kvf(&mut s, "q", self.wave.q);
        writeln_kv(&mut s, "\n[grid]");
        kvf(&mut s, "l", self.grid.l);
        let _ = writeln!(s, "n1 = {}", self.grid.n1);
        let _ = writeln!(s, "n2 = {}", self.grid.n2);
        let _ = writeln!(s, "n3 = {}", self.grid.n3);
        writeln_kv(&mut s, "\n[solver]");
        kvf(&mut s, "cfl_adv", self.solver.cfl_adv);
        kvf(&mut s, "cfl_visc", self.solver.cfl_visc);
        kvf(&mut s, "t_final", self.solver.t_final);
        let _ = writeln!(s, "bc_mode = {}", self.solver.bc_mode);
        let _ = writeln!(s, "diag_every = {}", self.solver.diag_every);
        let _ = writeln!(s, "threads = {}", self.threads);
        writeln_kv(&mut s, "\n[perturbation]");
        let p = &self.perturbation;
        kvf(&mut s, "amp_rho", p.amp_rho);
        kvf(&mut s, "amp_u1", p.amp_u1);
        kvf(&mut s, "amp_u2", p.amp_u2);
        kvf(&mut s, "amp_u3", p.amp_u3);
        kvf(&mut s, "amp_theta", p.amp_theta);
        kvf(&mut s, "width", p.width);
        let _ = writeln!(s, "k = {}", p.k);
        let _ = writeln!(s, "m = {}", p.m);
        let _ = writeln!(s, "seed = {}", p.seed);
        writeln_kv(&mut s, "\n[outputs]");
        let _ = writeln!(s, "dir = {}", self.outputs.dir.display());
        let _ = writeln!(s, "dump_every = {}", self.outputs.dump_every);
        s
    }
}

fn writeln_kv(s: &mut String, line: &str) {
    let _ = writeln!(s, "{line}");
}

fn kvf(s: &mut String, key: &str, v: f64) {
    // shortest round-trippable decimal
    let _ = writeln!(s, "{key} = {v}");
}

fn check_keys(s: &BTreeMap<String, String>, section: &str, allowed: &[&str]) -> Result<()> {
    for k in s.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(Error::Config(format!("unknown key '{k}' in [{section}]")));
        }
    }
    Ok(())
}

fn get_f64(s: &BTreeMap<String, String>, key: &str, out: &mut f64) -> Result<()> {
    if let Some(v) = s.get(key) {
        *out = v
            .parse()
            .map_err(|_| Error::Config(format!("{key} = '{v}' is not a number")))?;
    }
    Ok(())
}

fn get_usize(s: &BTreeMap<String, String>, key: &str, out: &mut usize) -> Result<()> {
    if let Some(v) = s.get(key) {
        *out = v
            .parse()
            .map_err(|_| Error::Config(format!("{key} = '{v}' is not a nonnegative integer")))?;
    }
    Ok(())
}

fn get_u32(s: &BTreeMap<String, String>, key: &str, out: &mut u32) -> Result<()> {
    if let Some(v) = s.get(key) {
        *out = v
            .parse()
            .map_err(|_| Error::Config(format!("{key} = '{v}' is not a nonnegative integer")))?;
    }
    Ok(())
}

fn get_u64(s: &BTreeMap<String, String>, key: &str, out: &mut u64) -> Result<()> {
    if let Some(v) = s.get(key) {
        *out = v
            .parse()
            .map_err(|_| Error::Config(format!("{key} = '{v}' is not a nonnegative integer")))?;
    }
    Ok(())
}
