use crate::circuit::GateId;
use crate::cnf::VarId;
use crate::lineage::FactId;

/// Errors reported by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate fact id {0}")]
    DuplicateFact(FactId),

    #[error("unknown fact id {0}")]
    UnknownFact(FactId),

    #[error("fact {0} is not endogenous")]
    NotEndogenous(FactId),

    #[error("lineage contains an empty monomial, which the text format cannot represent")]
    UnrepresentableLineage,

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("gate {0} is not supported here: {1}")]
    UnsupportedGate(GateId, String),

    #[error("{n} facts exceed the brute-force limit of {max}")]
    TooManyFactsForBruteForce { n: usize, max: usize },

    #[error("{n} variables exceed the exhaustive-check limit of {max}")]
    TooManyVarsForExhaustiveCheck { n: usize, max: usize },

    #[error("{n} variables exceed the equisatisfiability-check limit of {max}")]
    TooManyVarsForEquisatCheck { n: usize, max: usize },

    #[error("circuit mentions exogenous fact {0}; fix exogenous facts before encoding")]
    ExogenousInEncoding(FactId),

    #[error("and-gate {0} is not decomposable")]
    NotDecomposable(GateId),

    #[error("or-gate {0} is not deterministic")]
    NotDeterministic(GateId),

    #[error("circuit is not verified deterministic and decomposable")]
    UnverifiedCircuit,

    #[error("compilation budget exhausted after {nodes} nodes")]
    BudgetExhausted { nodes: u64 },

    #[error("deadline exceeded")]
    DeadlineExceeded,

    #[error("clause {clause} repeats variable {var}")]
    RepeatedVariable { clause: usize, var: VarId },

    #[error("stratified count for size {k} is not a valid subset count: {value}")]
    NonIntegerSliceCount { k: usize, value: String },

    #[error("probability for {0} is outside [0, 1]")]
    InvalidProbability(FactId),

    #[error("no probability given for fact {0}")]
    MissingProbability(FactId),

    #[error("metric requires a nonempty fact set")]
    EmptyFactSet,

    #[error("k = {k} is out of range 1..={n}")]
    PrecisionKOutOfRange { k: usize, n: usize },

    #[error("truth and estimate cover different fact sets")]
    MismatchedFactSets,

    #[error("kernel regression requires at least 2 facts, got {0}")]
    TooFewFactsForKernelShap(usize),

    #[error("sample budget must be positive")]
    EmptySampleBudget,
}
