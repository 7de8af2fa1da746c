use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("group of order {order} exceeds the configured cap {cap}")]
    GroupTooLarge { order: usize, cap: usize },

    #[error("element {0} is not in the generated subgroup")]
    NotGenerated(usize),

    #[error("operands live over different groups")]
    GroupMismatch,

    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),

    #[error("matrix for element {element} is not an isometry for p = {p}")]
    NotIsometric { element: usize, p: String },

    #[error("algebra element is not in the required set: {0}")]
    NotInSet(String),

    #[error("singular operator: {0}")]
    Singular(String),

    #[error("operator norm {bound} is not below 1")]
    NormNotContracting { bound: f64 },

    #[error("{what} = {requested} exceeds the cap {cap}")]
    CapExceeded {
        what: String,
        requested: usize,
        cap: usize,
    },

    #[error("strict convexity needed: p = {0} (pass force to run anyway)")]
    StrictConvexityRequired(String),

    #[error("nontrivial invariant vectors: dim = {0}")]
    InvariantVectors(usize),

    #[error("not a cocycle: {0}")]
    NotCocycle(String),

    #[error("budget exhausted after {steps} steps, best bound {best_bound:e}")]
    BudgetExhausted { steps: usize, best_bound: f64 },

    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
