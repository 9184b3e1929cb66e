use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("node ids must be contiguous from 1: expected {expected}, found {found}")]
    NonContiguousIds { expected: u32, found: u32 },
    #[error("node {id}: coordinates out of range (lat {lat}, lon {lon})")]
    InvalidCoordinates { id: u32, lat: f64, lon: f64 },
    #[error("edge {u}-{v} references unknown node")]
    UnknownNode { u: u32, v: u32 },
    #[error("edge {0}-{0} is a self loop")]
    SelfLoop(u32),
    #[error("duplicate edge {u}-{v}")]
    DuplicateEdge { u: u32, v: u32 },
    #[error("edge {u}-{v} has non-positive length {length}")]
    InvalidLength { u: u32, v: u32, length: f64 },
    #[error("demand matrix must be {expected}x{expected}, got {found} cells")]
    DemandShape { expected: usize, found: usize },
    #[error("demand {origin}->{dest} is invalid: {value}")]
    InvalidDemand { origin: u32, dest: u32, value: f64 },
    #[error("occupant and trip share lists differ in length ({occupants} vs {shares})")]
    PcuLengthMismatch { occupants: usize, shares: usize },
    #[error("occupants per vehicle must be positive, got {0}")]
    PcuOccupants(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssignmentError {
    /// Positive demand between two nodes with no connecting path.
    #[error("no path carries demand from node {origin} to node {dest}")]
    DisconnectedDemand { origin: u32, dest: u32 },
    #[error("demand matrix covers {demand} nodes but the network has {network}")]
    SizeMismatch { demand: usize, network: usize },
    #[error("invalid assignment configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("candidate index {index} out of range ({len} candidates)")]
    InvalidIndex { index: usize, len: usize },
    #[error("design costs {cost_km:.3} km, budget is {budget_km:.3} km")]
    Infeasible { cost_km: f64, budget_km: f64 },
    #[error("evaluation budget of {cap} exhausted")]
    EvalBudgetExhausted { cap: usize },
    #[error("invalid design configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("stability needs at least two runs")]
    SingleRun,
    #[error("n-fold ratio undefined for non-positive denominator {0}")]
    DivisionByZero(f64),
    #[error("sample is empty")]
    EmptySample,
    #[error("samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("correlation undefined for a constant series")]
    ZeroVariance,
}
