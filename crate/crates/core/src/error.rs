use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("model validation failed: {condition} violated at r = {r:e} (lhs = {lhs:e}, rhs = {rhs:e})")]
    Validation {
        condition: &'static str,
        r: f64,
        lhs: f64,
        rhs: f64,
    },

    #[error("invalid profile table: {0}")]
    TableFormat(String),

    #[error("{what} is undefined at r = {r:e}")]
    Domain { what: &'static str, r: f64 },

    #[error("quadrature did not converge on [{a:e}, {b:e}] within {max_depth} subdivisions")]
    Quadrature { a: f64, b: f64, max_depth: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("barrier construction failed: {0}")]
    Geometry(String),

    #[error("profile angle left [0, pi] at arclength {arclength:e} (phi = {phi})")]
    StepSize { arclength: f64, phi: f64 },

    #[error("explicit step dt = {dt:e} exceeds the stability bound {bound:e}")]
    Cfl { dt: f64, bound: f64 },

    #[error("linear solve did not converge: {iterations} iterations, relative residual {residual:e}")]
    LinearSolver { iterations: usize, residual: f64 },

    #[error("solution diverged at t = {t:e}: sup|u| = {sup:e} exceeds guard {guard:e}")]
    Divergence { t: f64, sup: f64, guard: f64 },

    #[error("need at least {needed} snapshots, got {got}")]
    InsufficientSnapshots { needed: usize, got: usize },

    #[error("root bracket for R(t) exceeded {limit:e}")]
    BracketExpansion { limit: f64 },

    #[error("no integer radius below {limit} satisfies the zeta-quarter condition for r = {r}")]
    SearchOverflow { r: f64, limit: u64 },

    #[error("rung {index} (R = {radius}): {source}")]
    Rung {
        index: usize,
        radius: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("syntax error at offset {offset}: expected {}", expected.join(" or "))]
    Syntax { offset: usize, expected: Vec<String> },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("{func} is undefined for argument {arg}")]
    EvalDomain { func: &'static str, arg: f64 },

    #[error("config error: `{key}` {constraint}")]
    Schema { key: String, constraint: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
