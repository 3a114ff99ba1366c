//! Fire-retaining games on truncated Cayley graphs.

pub mod analysis;
pub mod error;
pub mod game;
pub mod graph;
pub mod groups;
pub mod qi;
pub mod strategies;

pub use analysis::{
    containment_verdict, coarse_separation_check, degree_fit, ends_estimate, growth_dominates, growth_function,
    restricted_growth, retained_set, retaining_verdict, GrowthFunction, Verdict, VerdictKind,
};
pub use error::{Error, Result};
pub use game::{
    bound_check, compress_for_reach, faithful_horizon, replay_schedule, run_game, sanitize, spread_step, Bound,
    GameConfig, GameTranscript, Status, Strategy,
};
pub use graph::{Graph, VertexId, VertexSet};
pub use groups::{parse_model, parse_word, CayleyBall, Element, GroupModel, SubgroupSpec};
pub use qi::{certify_transport, run_transport, transported_bound, verify_qi, QIPair, QIReport, TransportReport};
pub use strategies::{
    choose_wall_translate, estimate_k1, plan_wall, EmptyStrategy, OneShotWall, PerimeterGreedy, ScheduledStrategy,
    TransportedStrategy, WallPlan, WallStrategy,
};
