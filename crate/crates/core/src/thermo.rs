//! Ideal-gas thermodynamics, characteristic speeds, entropy and Riemann
//! invariants of the 1D full Euler system.
//!
//! All functions are total over `rho > 0`, `theta > 0` and signal domain
//! errors otherwise; nothing is clamped.

use crate::error::{Error, Result};

/// Fluid parameters: state equation constants and transport coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasConstants {
    /// Gas constant in p = R rho theta.
    pub r: f64,
    /// Entropy-reference constant in p = A rho^gamma exp((gamma-1) S / R).
    pub a: f64,
    /// Adiabatic exponent, > 1.
    pub gamma: f64,
    /// Shear viscosity.
    pub mu: f64,
    /// Bulk viscosity.
    pub lambda: f64,
    /// Heat conductivity.
    pub kappa: f64,
}

impl GasConstants {
    pub fn new(r: f64, a: f64, gamma: f64, mu: f64, lambda: f64, kappa: f64) -> Result<Self> {
        let g = GasConstants {
            r,
            a,
            gamma,
            mu,
            lambda,
            kappa,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0) {
            return Err(Error::Domain {
                what: "R",
                value: self.r,
            });
        }
        if !(self.a > 0.0) {
            return Err(Error::Domain {
                what: "A",
                value: self.a,
            });
        }
        if !(self.gamma > 1.0) {
            return Err(Error::Domain {
                what: "gamma",
                value: self.gamma,
            });
        }
        if !(self.mu > 0.0) {
            return Err(Error::Domain {
                what: "mu",
                value: self.mu,
            });
        }
        if !(2.0 * self.mu + 3.0 * self.lambda >= 0.0) {
            return Err(Error::Domain {
                what: "2*mu + 3*lambda",
                value: 2.0 * self.mu + 3.0 * self.lambda,
            });
        }
        if !(self.kappa > 0.0) {
            return Err(Error::Domain {
                what: "kappa",
                value: self.kappa,
            });
        }
        Ok(())
    }
}

/// Pointwise primitive state (rho, u1, u2, u3, theta).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimState {
    pub rho: f64,
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub theta: f64,
}

impl PrimState {
    pub fn new(rho: f64, u1: f64, u2: f64, u3: f64, theta: f64) -> Result<Self> {
        check_positive(rho, theta)?;
        Ok(PrimState {
            rho,
            u1,
            u2,
            u3,
            theta,
        })
    }

    /// State at rest in the transverse directions.
    pub fn planar(rho: f64, u1: f64, theta: f64) -> Result<Self> {
        PrimState::new(rho, u1, 0.0, 0.0, theta)
    }
}

fn check_positive(rho: f64, theta: f64) -> Result<()> {
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
    Ok(())
}

/// p = R rho theta.
pub fn pressure(g: &GasConstants, rho: f64, theta: f64) -> Result<f64> {
    check_positive(rho, theta)?;
    Ok(g.r * rho * theta)
}

/// S = -R ln rho + R/(gamma-1) ln theta + R/(gamma-1) ln(R/A).
pub fn entropy(g: &GasConstants, rho: f64, theta: f64) -> Result<f64> {
    check_positive(rho, theta)?;
    let gm1 = g.gamma - 1.0;
    Ok(-g.r * rho.ln() + g.r / gm1 * theta.ln() + g.r / gm1 * (g.r / g.a).ln())
}

/// Inverse of `entropy` at fixed rho.
pub fn theta_from_entropy(g: &GasConstants, rho: f64, s: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Domain {
            what: "rho",
            value: rho,
        });
    }
    let gm1 = g.gamma - 1.0;
    Ok((g.a / g.r) * (gm1 * (s / g.r + rho.ln())).exp())
}

/// Density with the given entropy at fixed theta; inverse of `entropy` at fixed theta.
pub fn rho_from_entropy(g: &GasConstants, theta: f64, s: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::Domain {
            what: "theta",
            value: theta,
        });
    }
    let gm1 = g.gamma - 1.0;
    // ln rho = ln(theta R / A) / (gamma - 1) - S / R
    Ok(((theta * g.r / g.a).ln() / gm1 - s / g.r).exp())
}

/// c = sqrt(gamma R theta); the isentropic sound speed.
pub fn sound_speed(g: &GasConstants, rho: f64, theta: f64) -> Result<f64> {
    check_positive(rho, theta)?;
    Ok((g.gamma * g.r * theta).sqrt())
}

/// Third characteristic speed u1 + c.
pub fn lambda3(g: &GasConstants, state: &PrimState) -> Result<f64> {
    Ok(state.u1 + sound_speed(g, state.rho, state.theta)?)
}

/// First 3-Riemann invariant u1 - 2 c / (gamma - 1).
///
/// The indefinite integral of sqrt(p_z(z, S))/z has the closed antiderivative
/// 2 c / (gamma - 1); the quadrature route survives only as a test oracle.
pub fn riemann_invariant_1(g: &GasConstants, state: &PrimState) -> Result<f64> {
    let c = sound_speed(g, state.rho, state.theta)?;
    Ok(state.u1 - 2.0 * c / (g.gamma - 1.0))
}

/// Second 3-Riemann invariant: the entropy S.
pub fn riemann_invariant_2(g: &GasConstants, state: &PrimState) -> Result<f64> {
    entropy(g, state.rho, state.theta)
}
