use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {what} = {value} is outside the admissible range")]
    Domain { what: &'static str, value: f64 },

    #[error("not a rarefaction: target speed {target} >= lambda3(right) = {lambda3_right}")]
    NotARarefaction { target: f64, lambda3_right: f64 },

    #[error("lambda3 inversion out of domain: w = {w} must exceed sigma1 = {sigma1} by at least {guard}")]
    InversionDomain { w: f64, sigma1: f64, guard: f64 },

    #[error("characteristic root-find failed at (x1, t) = ({x1}, {t}) after {iters} iterations, residual {residual}")]
    RootFind {
        x1: f64,
        t: f64,
        iters: usize,
        residual: f64,
    },

    #[error(
        "blow-up at t = {t}: {var} = {value} at node ({i}, {j}, {k}) violates positivity"
    )]
    BlowUp {
        t: f64,
        var: &'static str,
        value: f64,
        i: usize,
        j: usize,
        k: usize,
    },

    #[error("viscous dissipation negative: min Phi = {min_phi} at node ({i}, {j}, {k})")]
    NegativeDissipation {
        min_phi: f64,
        i: usize,
        j: usize,
        k: usize,
    },

    #[error("time step {dt} exceeds the stable limit {stable}")]
    UnstableDt { dt: f64, stable: f64 },

    #[error("decay fit failed: {0}")]
    Fit(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invariant check failed: {0}")]
    Check(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
