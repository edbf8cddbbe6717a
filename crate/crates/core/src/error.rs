use thiserror::Error;

use crate::graph::Vertex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph has no vertices")]
    Empty,
    #[error("line {line}: cannot parse edge {text:?}")]
    Parse { line: usize, text: String },
    #[error("line {line}: loop at vertex {vertex}")]
    Loop { line: usize, vertex: Vertex },
    #[error("line {line}: duplicate edge {u}-{v}")]
    DuplicateEdge { line: usize, u: Vertex, v: Vertex },
    #[error("line {line}: vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { line: usize, vertex: Vertex, n: usize },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("unknown graph spec {0:?}")]
    UnknownSpec(String),
    #[error("infeasible request: {reason}")]
    Infeasible { reason: String },
    #[error(
        "no {degree}-regular graph on {vertices} vertices with girth >= {min_girth} \
         found within {restarts} restarts"
    )]
    RetryBudget { restarts: u32, degree: u32, vertices: u32, min_girth: u32 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WindowError {
    #[error("window radius must be at least 1")]
    ZeroRadius,
    #[error("base vertex {0} not in graph")]
    BadBase(Vertex),
    #[error("window would hold about {estimate} vertices, above the budget of {budget}")]
    TooLarge { estimate: u128, budget: usize },
    #[error("window radius {radius} is below the required radius {required}")]
    TooSmall { radius: u32, required: u32 },
    #[error("{0}")]
    NotAPath(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RipsError {
    #[error("scale {scale} violates the hypothesis 2 * scale < girth = {girth}")]
    ScaleTooLarge { scale: u32, girth: u32 },
    #[error("invalid Rips point: {0}")]
    InvalidPoint(String),
    #[error("geometry error: {0}")]
    Geometry(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("control constant must exceed 1, got {0}")]
    BadConstant(f64),
    #[error("empty sample")]
    EmptySample,
    #[error("cover fails the slab hypothesis at vertex {vertex} with boundary point {point}")]
    HypothesisFails { vertex: String, point: String },
    #[error("no control constant up to {tried} certifies the ball property; witness {witness}")]
    NoConstant { tried: f64, witness: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverError {
    #[error("{check} failed at {witness}")]
    Property { check: String, witness: String },
    #[error("no flow time in 1..={max_tau} gives slab containment; enlarge the window radius")]
    NoFlowTime { max_tau: u32 },
    #[error("boundary depth would exceed the ray depth {depth}; use a deeper boundary sample")]
    DepthExhausted { depth: u32 },
    #[error("geometry error: {0}")]
    Geometry(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("composition does not factor: first differing block {source_index} -> {target}")]
    NotAFactorization { source_index: usize, target: usize },
    #[error("separation hypothesis fails: d(A\\B, B\\A) = {separation} is not above R = {radius}")]
    Separation { separation: u64, radius: u64 },
    #[error("propagation {propagation} is not below R = {radius}")]
    Propagation { propagation: u64, radius: u64 },
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
