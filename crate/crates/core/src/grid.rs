//! Structured discretization of [-L, L] x T^2, second-order stencils and
//! discrete integral norms.
//!
//! x1 is vertex-centered with one-sided second-order boundary stencils; x2 and
//! x3 are cell-centered and periodic on the unit torus. n2 = n3 = 1 is legal
//! and collapses all transverse derivatives to zero (exact 1D reduction).

use crate::error::{Error, Result};
use ndarray::Array3;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    /// Half-length of the x1 domain.
    pub l: f64,
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub dx1: f64,
    pub dx2: f64,
    pub dx3: f64,
}

impl Grid {
    pub fn new(l: f64, n1: usize, n2: usize, n3: usize) -> Result<Self> {
        if !(l > 0.0) {
            return Err(Error::Config(format!("L = {l} must be positive")));
        }
        if n1 < 16 {
            return Err(Error::Config(format!("n1 = {n1} must be at least 16")));
        }
        if n2 < 1 || n3 < 1 {
            return Err(Error::Config("n2 and n3 must be at least 1".to_string()));
        }
        Ok(Grid {
            l,
            n1,
            n2,
            n3,
            dx1: 2.0 * l / (n1 - 1) as f64,
            dx2: 1.0 / n2 as f64,
            dx3: 1.0 / n3 as f64,
        })
    }

    pub fn x1(&self, i: usize) -> f64 {
        -self.l + i as f64 * self.dx1
    }

    pub fn x2(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dx2
    }

    pub fn x3(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.dx3
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n1, self.n2, self.n3)
    }

    pub fn zeros(&self) -> Array3<f64> {
        Array3::zeros(self.shape())
    }
}

/// Discrete primitive-variable fields; the solver's evolving state.
#[derive(Debug, Clone)]
pub struct Field {
    pub grid: Grid,
    pub rho: Array3<f64>,
    pub u1: Array3<f64>,
    pub u2: Array3<f64>,
    pub u3: Array3<f64>,
    pub theta: Array3<f64>,
}

pub const FIELD_VARS: [&str; 5] = ["rho", "u1", "u2", "u3", "theta"];

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Field {
            grid,
            rho: grid.zeros(),
            u1: grid.zeros(),
            u2: grid.zeros(),
            u3: grid.zeros(),
            theta: grid.zeros(),
        }
    }

    pub fn vars(&self) -> [&Array3<f64>; 5] {
        [&self.rho, &self.u1, &self.u2, &self.u3, &self.theta]
    }

    pub fn vars_mut(&mut self) -> [&mut Array3<f64>; 5] {
        [
            &mut self.rho,
            &mut self.u1,
            &mut self.u2,
            &mut self.u3,
            &mut self.theta,
        ]
    }

    /// Positivity of rho and theta at every node; violation is blow-up.
    pub fn check_positive(&self, t: f64) -> Result<()> {
        for (name, arr) in [("rho", &self.rho), ("theta", &self.theta)] {
            for ((i, j, k), &v) in arr.indexed_iter() {
                if !(v > 0.0) {
                    return Err(Error::BlowUp {
                        t,
                        var: name,
                        value: v,
                        i,
                        j,
                        k,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn min_rho(&self) -> f64 {
        self.rho.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn min_theta(&self) -> f64 {
        self.theta.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }
}

/// Second-order first derivative along `axis` in {1, 2, 3}: centered in the
/// interior, periodic wrap on axes 2 and 3, one-sided second-order at the x1
/// boundaries.
pub fn ddx(f: &Array3<f64>, axis: usize, grid: &Grid) -> Array3<f64> {
    let (n1, n2, n3) = grid.shape();
    let mut out = grid.zeros();
    match axis {
        1 => {
            let inv2h = 1.0 / (2.0 * grid.dx1);
            for j in 0..n2 {
                for k in 0..n3 {
                    for i in 1..n1 - 1 {
                        out[[i, j, k]] = (f[[i + 1, j, k]] - f[[i - 1, j, k]]) * inv2h;
                    }
                    out[[0, j, k]] = (-3.0 * f[[0, j, k]] + 4.0 * f[[1, j, k]] - f[[2, j, k]])
                        * inv2h;
                    out[[n1 - 1, j, k]] = (3.0 * f[[n1 - 1, j, k]] - 4.0 * f[[n1 - 2, j, k]]
                        + f[[n1 - 3, j, k]])
                        * inv2h;
                }
            }
        }
        2 => {
            if n2 == 1 {
                return out;
            }
            let inv2h = 1.0 / (2.0 * grid.dx2);
            for i in 0..n1 {
                for k in 0..n3 {
                    for j in 0..n2 {
                        let jp = (j + 1) % n2;
                        let jm = (j + n2 - 1) % n2;
                        out[[i, j, k]] = (f[[i, jp, k]] - f[[i, jm, k]]) * inv2h;
                    }
                }
            }
        }
        3 => {
            if n3 == 1 {
                return out;
            }
            let inv2h = 1.0 / (2.0 * grid.dx3);
            for i in 0..n1 {
                for j in 0..n2 {
                    for k in 0..n3 {
                        let kp = (k + 1) % n3;
                        let km = (k + n3 - 1) % n3;
                        out[[i, j, k]] = (f[[i, j, kp]] - f[[i, j, km]]) * inv2h;
                    }
                }
            }
        }
        _ => panic!("axis must be 1, 2 or 3"),
    }
    out
}

/// Compact second derivative along one axis; same boundary treatment as `ddx`.
pub fn d2dx2(f: &Array3<f64>, axis: usize, grid: &Grid) -> Array3<f64> {
    let (n1, n2, n3) = grid.shape();
    let mut out = grid.zeros();
    match axis {
        1 => {
            let invh2 = 1.0 / (grid.dx1 * grid.dx1);
            for j in 0..n2 {
                for k in 0..n3 {
                    for i in 1..n1 - 1 {
                        out[[i, j, k]] =
                            (f[[i + 1, j, k]] - 2.0 * f[[i, j, k]] + f[[i - 1, j, k]]) * invh2;
                    }
                    out[[0, j, k]] = (2.0 * f[[0, j, k]] - 5.0 * f[[1, j, k]]
                        + 4.0 * f[[2, j, k]]
                        - f[[3, j, k]])
                        * invh2;
                    out[[n1 - 1, j, k]] = (2.0 * f[[n1 - 1, j, k]] - 5.0 * f[[n1 - 2, j, k]]
                        + 4.0 * f[[n1 - 3, j, k]]
                        - f[[n1 - 4, j, k]])
                        * invh2;
                }
            }
        }
        2 => {
            if n2 == 1 {
                return out;
            }
            let invh2 = 1.0 / (grid.dx2 * grid.dx2);
            for i in 0..n1 {
                for k in 0..n3 {
                    for j in 0..n2 {
                        let jp = (j + 1) % n2;
                        let jm = (j + n2 - 1) % n2;
                        out[[i, j, k]] =
                            (f[[i, jp, k]] - 2.0 * f[[i, j, k]] + f[[i, jm, k]]) * invh2;
                    }
                }
            }
        }
        3 => {
            if n3 == 1 {
                return out;
            }
            let invh2 = 1.0 / (grid.dx3 * grid.dx3);
            for i in 0..n1 {
                for j in 0..n2 {
                    for k in 0..n3 {
                        let kp = (k + 1) % n3;
                        let km = (k + n3 - 1) % n3;
                        out[[i, j, k]] =
                            (f[[i, j, kp]] - 2.0 * f[[i, j, k]] + f[[i, j, km]]) * invh2;
                    }
                }
            }
        }
        _ => panic!("axis must be 1, 2 or 3"),
    }
    out
}

/// Laplacian as the sum of compact second differences.
pub fn laplacian(f: &Array3<f64>, grid: &Grid) -> Array3<f64> {
    let mut out = d2dx2(f, 1, grid);
    out += &d2dx2(f, 2, grid);
    out += &d2dx2(f, 3, grid);
    out
}

/// Divergence of a vector field.
pub fn divergence(u1: &Array3<f64>, u2: &Array3<f64>, u3: &Array3<f64>, grid: &Grid) -> Array3<f64> {
    let mut out = ddx(u1, 1, grid);
    out += &ddx(u2, 2, grid);
    out += &ddx(u3, 3, grid);
    out
}

/// grad(div u), composed from first-difference stencils.
pub fn grad_div(
    u1: &Array3<f64>,
    u2: &Array3<f64>,
    u3: &Array3<f64>,
    grid: &Grid,
) -> (Array3<f64>, Array3<f64>, Array3<f64>) {
    let div = divergence(u1, u2, u3, grid);
    (ddx(&div, 1, grid), ddx(&div, 2, grid), ddx(&div, 3, grid))
}

/// Quadrature weight of node i in x1 (trapezoid), times the torus cell area.
fn weight1(i: usize, grid: &Grid) -> f64 {
    if i == 0 || i == grid.n1 - 1 {
        0.5 * grid.dx1
    } else {
        grid.dx1
    }
}

/// Integral of `f` over the truncated domain: trapezoid in x1, rectangle on
/// the torus.
pub fn integral(f: &Array3<f64>, grid: &Grid) -> f64 {
    let cell = grid.dx2 * grid.dx3;
    let mut acc = 0.0;
    for ((i, _, _), &v) in f.indexed_iter() {
        acc += v * weight1(i, grid) * cell;
    }
    acc
}

pub fn norm_l2(f: &Array3<f64>, grid: &Grid) -> f64 {
    let cell = grid.dx2 * grid.dx3;
    let mut acc = 0.0;
    for ((i, _, _), &v) in f.indexed_iter() {
        acc += v * v * weight1(i, grid) * cell;
    }
    acc.sqrt()
}

pub fn norm_lp(f: &Array3<f64>, p: f64, grid: &Grid) -> f64 {
    assert!(p >= 1.0);
    if p.is_infinite() {
        return f.iter().fold(0.0, |m, &v| m.max(v.abs()));
    }
    let cell = grid.dx2 * grid.dx3;
    let mut acc = 0.0;
    for ((i, _, _), &v) in f.indexed_iter() {
        acc += v.abs().powf(p) * weight1(i, grid) * cell;
    }
    acc.powf(1.0 / p)
}

/// Combined L2 norm of a set of components.
pub fn norm_l2_multi(fs: &[&Array3<f64>], grid: &Grid) -> f64 {
    fs.iter()
        .map(|f| {
            let n = norm_l2(f, grid);
            n * n
        })
        .sum::<f64>()
        .sqrt()
}

/// ||grad f|| over all components: L2 of every first difference.
pub fn norm_grad(fs: &[&Array3<f64>], grid: &Grid) -> f64 {
    let mut acc = 0.0;
    for f in fs {
        for axis in 1..=3 {
            let d = ddx(f, axis, grid);
            let n = norm_l2(&d, grid);
            acc += n * n;
        }
    }
    acc.sqrt()
}

/// ||grad^2 f||: diagonal entries from compact second differences, mixed
/// entries from composed first differences (both off-diagonal orders counted,
/// matching the full Hessian).
pub fn norm_grad2(fs: &[&Array3<f64>], grid: &Grid) -> f64 {
    let mut acc = 0.0;
    for f in fs {
        for a in 1..=3 {
            for b in 1..=3 {
                let d = if a == b {
                    d2dx2(f, a, grid)
                } else {
                    ddx(&ddx(f, a, grid), b, grid)
                };
                let n = norm_l2(&d, grid);
                acc += n * n;
            }
        }
    }
    acc.sqrt()
}

/// H^1 norm: sum of the L2 norms of the derivative levels through order 1.
pub fn norm_h1(fs: &[&Array3<f64>], grid: &Grid) -> f64 {
    norm_l2_multi(fs, grid) + norm_grad(fs, grid)
}

/// H^2 norm: derivative levels through order 2.
pub fn norm_h2(fs: &[&Array3<f64>], grid: &Grid) -> f64 {
    norm_l2_multi(fs, grid) + norm_grad(fs, grid) + norm_grad2(fs, grid)
}

/// Binary field dump: text header (grid dims, L, time, variable order)
/// followed by row-major little-endian f64 per variable.
pub fn write_field_dump<P: AsRef<Path>>(path: P, field: &Field, time: f64) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    let g = &field.grid;
    writeln!(w, "fielddump v1")?;
    writeln!(w, "dims {} {} {}", g.n1, g.n2, g.n3)?;
    writeln!(w, "L {:.17e}", g.l)?;
    writeln!(w, "time {:.17e}", time)?;
    writeln!(w, "vars {}", FIELD_VARS.join(" "))?;
    writeln!(w, "end")?;
    for var in field.vars() {
        debug_assert!(var.is_standard_layout());
        for &v in var.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read a dump written by `write_field_dump`; returns the field and its time.
pub fn read_field_dump<P: AsRef<Path>>(path: P) -> Result<(Field, f64)> {
    let file = std::fs::File::open(path)?;
    let mut r = BufReader::new(file);
    let mut header = Vec::new();
    loop {
        let mut line = String::new();
        if r.read_line(&mut line)? == 0 {
            return Err(Error::Config("truncated field dump header".to_string()));
        }
        let line = line.trim_end().to_string();
        if line == "end" {
            break;
        }
        header.push(line);
    }
    let mut dims = None;
    let mut l = None;
    let mut time = None;
    for line in &header {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("dims") => {
                let v: Vec<usize> = parts.map(|s| s.parse().unwrap_or(0)).collect();
                if v.len() == 3 {
                    dims = Some((v[0], v[1], v[2]));
                }
            }
            Some("L") => l = parts.next().and_then(|s| s.parse().ok()),
            Some("time") => time = parts.next().and_then(|s| s.parse().ok()),
            _ => {}
        }
    }
    let (n1, n2, n3) =
        dims.ok_or_else(|| Error::Config("field dump missing dims".to_string()))?;
    let l = l.ok_or_else(|| Error::Config("field dump missing L".to_string()))?;
    let time = time.ok_or_else(|| Error::Config("field dump missing time".to_string()))?;
    let grid = Grid::new(l, n1, n2, n3)?;
    let mut field = Field::zeros(grid);
    for var in field.vars_mut() {
        let mut buf = vec![0u8; n1 * n2 * n3 * 8];
        r.read_exact(&mut buf)?;
        for (slot, chunk) in var.iter_mut().zip(buf.chunks_exact(8)) {
            *slot = f64::from_le_bytes(chunk.try_into().unwrap());
        }
    }
    Ok((field, time))
}
