use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("derivative order {order} exceeds the maximum {max}")]
    OrderTooHigh { order: usize, max: usize },
    #[error("the hyperplane misses the body")]
    EmptySection,
    #[error("could not bracket a section endpoint: {0}")]
    RootBracketFailure(String),
    #[error("convergence failure: {0}")]
    ConvergenceFailure(String),
    #[error("boundary samples are not strictly monotone")]
    NonMonotone,
    #[error("tilde transform requested at the right endpoint")]
    EndpointSingular,
    #[error("no contraction: measured factor {khat:.3e}")]
    NoContraction { khat: f64 },
    #[error("iterate left the domain box at sweep {sweep}, s = {s}")]
    DomainEscape { sweep: usize, s: f64 },
    #[error("kernel evaluated outside its domain at s={s}, sigma={sigma}, xi={xi}")]
    KernelDomainViolation { s: f64, sigma: f64, xi: f64 },
    #[error("extension mismatch {0:.3e} on the matching band")]
    ExtensionMismatch(f64),
    #[error("ill-conditioned inversion: residual {0:.3e}")]
    IllConditioned(f64),
    #[error("Newton iteration diverged at alpha = {0}")]
    NewtonDivergence(f64),
    #[error("right side of the radial difference equation is singular at 0 (|Θ(0)| = {0:.3e})")]
    SingularRhs(f64),
    #[error("zero search exhausted its budget; best residual {best:.3e}")]
    SearchExhausted { best: f64 },
    #[error("cap mismatch {0:.3e} exceeds tolerance")]
    CapMismatch(f64),
    #[error("profile is not strictly concave (worst second derivative {0:.3e})")]
    ConvexityFailure(f64),
    #[error("moment chain check failed at j = {j}: residual {residual:.3e}")]
    ChainCheckFailure { j: usize, residual: f64 },
    #[error("return-to-circle check failed: deviation {0:.3e}")]
    MomentCheckFailure(f64),
    #[error("directions are degenerate for the least-squares centre fit")]
    DegenerateDirections,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config: {0}")]
    Config(String),
}
