use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParams { name: &'static str, reason: String },

    #[error("symbol is singular at r = {r}; requires r > 0")]
    Domain { r: f64 },

    #[error("degenerate spectrum at r = {r}: minimum eigenvalue gap {gap:e}")]
    Degenerate { r: f64, gap: f64 },

    #[error("root check failed: |p(λ)| = {residual:e} exceeds {bound:e}")]
    RootCheck { residual: f64, bound: f64 },

    #[error("expansion fit for {branch}: remainder exponent {exponent:.3} below {min}")]
    FitQuality {
        branch: &'static str,
        exponent: f64,
        min: f64,
    },

    #[error("quadrature not converged at t = {t}: relative change {change:e} on {component}")]
    Quadrature {
        t: f64,
        change: f64,
        component: String,
    },

    #[error("neutrality violated: mean of Z·ϱ₁ − ϱ₂ is {residual:e}")]
    Neutrality { residual: f64 },

    #[error("vacuum proximity: {species} density reached {density} (floor {floor})")]
    Vacuum {
        species: &'static str,
        density: f64,
        floor: f64,
    },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("stability failure at t = {t}: norm grew by {growth:.3e} in one step")]
    Unstable { t: f64, growth: f64 },

    #[error("insufficient points in fit window: {got} < {need}")]
    InsufficientPoints { got: usize, need: usize },

    #[error("non-positive value {value} at t = {t}")]
    NonPositive { t: f64, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams { .. } => "invalid_params",
            Error::Domain { .. } => "domain",
            Error::Degenerate { .. } => "degenerate_spectrum",
            Error::RootCheck { .. } => "root_check",
            Error::FitQuality { .. } => "fit_quality",
            Error::Quadrature { .. } => "quadrature",
            Error::Neutrality { .. } => "neutrality",
            Error::Vacuum { .. } => "vacuum",
            Error::NonFinite(_) => "non_finite",
            Error::Unstable { .. } => "unstable",
            Error::InsufficientPoints { .. } => "insufficient_points",
            Error::NonPositive { .. } => "non_positive",
            Error::Config(_) => "config",
            Error::Snapshot(_) => "snapshot",
            Error::Io(_) => "io",
        }
    }
}
