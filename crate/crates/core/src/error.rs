use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("empty set has no distance")]
    EmptySet,
    #[error("vertices {0} and {1} lie in different components")]
    Disconnected(usize, usize),
    #[error("vertex {0} is not in the graph")]
    UnknownVertex(usize),
    #[error("graph parse error at line {line}: {msg}")]
    GraphParse { line: usize, msg: String },

    #[error("unknown generator symbol `{0}`")]
    UnknownGenerator(String),
    #[error("cannot parse group model `{0}`")]
    ModelParse(String),
    #[error("cannot parse element `{0}`")]
    ElementParse(String),
    #[error("translate escapes the truncation: {0}")]
    TranslateEscapes(String),
    #[error("wall thicker than truncation (l = {l}, radius = {radius})")]
    WallTooThick { l: usize, radius: usize },
    #[error("subgroup `{0}` is not supported by this model")]
    UnsupportedSubgroup(String),

    #[error("bound violation at turn {turn}: |W| = {size} > {cap}")]
    BoundViolation { turn: usize, size: usize, cap: u64 },
    #[error("invalid game configuration: {0}")]
    InvalidConfig(String),
    #[error("internal consistency: sanitized replay diverged at turn {0}")]
    ReplayDivergence(usize),

    #[error("truncation too small for K1")]
    TruncationTooSmallForK1,
    #[error("growth of the wall exceeds degree {0}")]
    DegreeTooSmall(u32),
    #[error("truncation too small for wall placement")]
    NoWallPlacement,
    #[error("wall breached at turn {0}")]
    WallBreached(usize),
    #[error("subgroup is not finite inside the truncation")]
    SubgroupNotFinite,

    #[error("map undefined on interior vertex {0}")]
    MapUndefined(usize),
    #[error("transport boundary error: {0}")]
    TransportBoundary(String),
    #[error("transport precondition: {0}")]
    TransportPrecondition(String),
    #[error("mismatched horizons: source covers {source_turns} turns, target has {target_turns}")]
    MismatchedHorizons {
        source_turns: usize,
        target_turns: usize,
    },

    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("coarse separation check: ball around K touches the truncation shell")]
    BallTouchesShell,
    #[error("too few samples for a degree fit ({0} < 5)")]
    TooFewSamples(usize),
    #[error("ascii snapshots need a planar grid layout")]
    NotAGrid,
}
