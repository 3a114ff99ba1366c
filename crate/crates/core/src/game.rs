//! Fire spread, game runs, sanitized replays and reach compression.

use std::collections::VecDeque;
use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};

/// A per-turn cap sequence `f_1, f_2, ...`. Values saturate at `u64::MAX`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bound {
    Constant(u64),
    /// `coef * n^degree`.
    Polynomial { coef: u64, degree: u32 },
    /// `f_n = values[n - 1]`, zero past the end.
    Explicit(Vec<u64>),
    /// Block sums `f_{(n-1)r+1} + ... + f_{nr}`.
    Compressed { base: Box<Bound>, r: usize },
    /// `(f_{2c(k-1)+1} + ... + f_{2ck}) * delta^(c^2+2c+1)`.
    Transported { base: Box<Bound>, c: u64, delta: u64 },
}

fn saturate(x: u128) -> u64 {
    u64::try_from(x).unwrap_or(u64::MAX)
}

impl Bound {
    /// `f_n` for `n >= 1`.
    pub fn at(&self, n: usize) -> u64 {
        assert!(n >= 1, "bounds are indexed from 1");
        match self {
            Bound::Constant(f) => *f,
            Bound::Polynomial { coef, degree } => {
                let p = (n as u128).checked_pow(*degree).unwrap_or(u128::MAX);
                saturate(p.saturating_mul(*coef as u128))
            }
            Bound::Explicit(values) => values.get(n - 1).copied().unwrap_or(0),
            Bound::Compressed { base, r } => saturate(block_sum(base, (n - 1) * r + 1, n * r)),
            Bound::Transported { base, c, delta } => {
                let width = 2 * *c as usize;
                let sum = block_sum(base, width * (n - 1) + 1, width * n);
                let exp = (c * c + 2 * c + 1) as u32;
                let factor = (*delta as u128).checked_pow(exp).unwrap_or(u128::MAX);
                saturate(sum.saturating_mul(factor))
            }
        }
    }

    /// True when `f_m = 0` for every `m > n`.
    pub fn exhausted_after(&self, n: usize) -> bool {
        match self {
            Bound::Constant(f) => *f == 0,
            Bound::Polynomial { coef, .. } => *coef == 0,
            Bound::Explicit(values) => values.iter().skip(n).all(|&v| v == 0),
            Bound::Compressed { base, r } => base.exhausted_after(n * r),
            Bound::Transported { base, c, .. } => base.exhausted_after(n * 2 * *c as usize),
        }
    }

    /// Parses `const:<f>`, `poly:<K>:<d>` or `list:<f1>,<f2>,...`.
    pub fn parse(text: &str) -> Result<Bound> {
        let bad = || Error::InvalidConfig(format!("malformed bound `{text}`"));
        let num = |s: &str| s.trim().parse::<u64>().map_err(|_| bad());
        let parts: Vec<&str> = text.trim().split(':').collect();
        match parts.as_slice() {
            ["const", f] => Ok(Bound::Constant(num(f)?)),
            ["poly", k, d] => Ok(Bound::Polynomial {
                coef: num(k)?,
                degree: u32::try_from(num(d)?).map_err(|_| bad())?,
            }),
            ["list", values] => Ok(Bound::Explicit(
                values.split(',').map(num).collect::<Result<_>>()?,
            )),
            _ => Err(bad()),
        }
    }
}

fn block_sum(base: &Bound, from: usize, to: usize) -> u128 {
    (from..=to).map(|j| base.at(j) as u128).sum()
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Constant(c) => write!(f, "const:{c}"),
            Bound::Polynomial { coef, degree } => write!(f, "poly:{coef}:{degree}"),
            Bound::Explicit(v) => {
                let s: Vec<String> = v.iter().map(u64::to_string).collect();
                write!(f, "list:{}", s.join(","))
            }
            Bound::Compressed { base, r } => write!(f, "blocks({base};{r})"),
            Bound::Transported { base, c, delta } => write!(f, "transported({base};c={c};delta={delta})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameConfig {
    pub reach: usize,
    pub bound: Bound,
    pub horizon: usize,
}

impl GameConfig {
    pub fn new(reach: usize, bound: Bound, horizon: usize) -> Result<Self> {
        if reach == 0 {
            return Err(Error::InvalidConfig("reach must be ≥ 1".into()));
        }
        if horizon == 0 {
            return Err(Error::InvalidConfig("horizon must be ≥ 1".into()));
        }
        Ok(Self { reach, bound, horizon })
    }

    /// Uses the strategy's declared bound.
    pub fn for_strategy(reach: usize, horizon: usize, strategy: &dyn Strategy) -> Result<Self> {
        Self::new(reach, strategy.bound(), horizon)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Running,
    Stabilized,
    BoundaryEscape,
    HorizonReached,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Running => "running",
            Status::Stabilized => "stabilized",
            Status::BoundaryEscape => "boundary-escape",
            Status::HorizonReached => "horizon-reached",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `burned[n] = X_n` for `0 <= n <= turns`, `chosen[n - 1] = W_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameTranscript {
    pub reach: usize,
    pub bound: Bound,
    pub burned: Vec<VertexSet>,
    pub chosen: Vec<VertexSet>,
    pub status: Status,
}

impl GameTranscript {
    pub fn new(x0: VertexSet, reach: usize, bound: Bound) -> Self {
        Self {
            reach,
            bound,
            burned: vec![x0],
            chosen: Vec::new(),
            status: Status::Running,
        }
    }

    pub fn initial_fire(&self) -> &VertexSet {
        &self.burned[0]
    }

    pub fn turns(&self) -> usize {
        self.chosen.len()
    }

    /// `X_n`.
    pub fn burned_at(&self, n: usize) -> &VertexSet {
        &self.burned[n]
    }

    /// `W_n` for `n >= 1`.
    pub fn chosen_at(&self, n: usize) -> &VertexSet {
        &self.chosen[n - 1]
    }

    pub fn final_burned(&self) -> &VertexSet {
        self.burned.last().expect("X_0 always present")
    }

    /// `W_1 ∪ ... ∪ W_n`.
    pub fn protected_through(&self, n: usize) -> VertexSet {
        let mut acc = VertexSet::empty(self.burned[0].universe());
        for w in &self.chosen[..n] {
            acc.union_with(w);
        }
        acc
    }

    pub fn all_protected(&self) -> VertexSet {
        self.protected_through(self.turns())
    }

    /// Complement of the final burned set.
    pub fn unburned(&self) -> VertexSet {
        self.final_burned().complement()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::InvalidConfig(format!("csv export failed: {e}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "turn",
            "burned_count",
            "protected_count",
            "new_burned_ids",
            "chosen_ids",
            "status",
        ])
        .map_err(io)?;
        let ids = |s: &VertexSet| s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        let mut protected = VertexSet::empty(self.burned[0].universe());
        for n in 0..=self.turns() {
            let (new_burned, chosen) = if n == 0 {
                (self.burned[0].clone(), VertexSet::empty(protected.universe()))
            } else {
                protected.union_with(self.chosen_at(n));
                (self.burned[n].difference(&self.burned[n - 1]), self.chosen_at(n).clone())
            };
            let status = if n == self.turns() {
                self.status
            } else {
                Status::Running
            };
            w.write_record([
                n.to_string(),
                self.burned[n].len().to_string(),
                protected.difference(&self.burned[n]).len().to_string(),
                ids(&new_burned),
                ids(&chosen),
                status.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidConfig(format!("csv export failed: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

/// A firefighter. `choose` must be deterministic given the transcript.
pub trait Strategy: Send + Sync {
    fn bound(&self) -> Bound;

    /// `W_turn`, given the transcript through `X_{turn-1}`.
    fn choose(&self, turn: usize, transcript: &GameTranscript, graph: &Graph) -> Result<VertexSet>;

    /// True when every choice after `turn` will be empty.
    fn is_done(&self, turn: usize, transcript: &GameTranscript, graph: &Graph) -> bool {
        let _ = (transcript, graph);
        self.bound().exhausted_after(turn)
    }
}

/// One turn of fire: everything within `reach` steps of `burned` along paths
/// avoiding `protected`. The caller removes `burned` from `protected`.
pub fn spread_step(g: &Graph, burned: &VertexSet, protected: &VertexSet, reach: usize) -> VertexSet {
    let mut out = burned.clone();
    let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
    // Interior vertices only reach new ground through the front.
    for v in burned.iter() {
        if g.neighbors(v).iter().any(|&w| !burned.contains(w)) {
            queue.push_back((v, 0));
        }
    }
    while let Some((u, d)) = queue.pop_front() {
        if d == reach {
            continue;
        }
        for &w in g.neighbors(u) {
            if !out.contains(w) && !protected.contains(w) {
                out.insert(w);
                queue.push_back((w, d + 1));
            }
        }
    }
    out
}

/// Vertices within `reach` of the truncation boundary; fire there is no
/// longer faithful to the infinite graph.
pub fn reach_shell(g: &Graph, reach: usize) -> VertexSet {
    g.ball(g.boundary(), reach)
}

/// Largest `n` such that fire starting at `x0` cannot touch the reach shell
/// within `n` turns. Unbounded when the graph has no boundary.
pub fn faithful_horizon(g: &Graph, x0: &VertexSet, reach: usize) -> usize {
    let Ok(Some(d)) = g.set_distance(x0, g.boundary()) else {
        return usize::MAX;
    };
    // Need reach * (n + 1) < d.
    (d.saturating_sub(1) / reach).saturating_sub(1)
}

pub fn run_game(g: &Graph, x0: &VertexSet, strategy: &dyn Strategy, cfg: &GameConfig) -> Result<GameTranscript> {
    if x0.is_empty() {
        return Err(Error::InvalidConfig("initial fire is empty".into()));
    }
    if x0.universe() != g.len() {
        return Err(Error::InvalidConfig("initial fire from another graph".into()));
    }
    let shell = reach_shell(g, cfg.reach);
    let mut t = GameTranscript::new(x0.clone(), cfg.reach, cfg.bound.clone());
    if !x0.is_disjoint(&shell) {
        t.status = Status::BoundaryEscape;
        return Ok(t);
    }
    let mut protected = g.empty_set();
    for n in 1..=cfg.horizon {
        let w = strategy.choose(n, &t, g)?;
        let cap = cfg.bound.at(n);
        if w.len() as u64 > cap {
            return Err(Error::BoundViolation {
                turn: n,
                size: w.len(),
                cap,
            });
        }
        protected.union_with(&w);
        let prev = t.final_burned();
        let next = spread_step(g, prev, &protected.difference(prev), cfg.reach);
        let unchanged = next == *prev;
        let escaped = !next.is_disjoint(&shell);
        t.chosen.push(w);
        t.burned.push(next);
        if escaped {
            t.status = Status::BoundaryEscape;
            return Ok(t);
        }
        if unchanged && strategy.is_done(n, &t, g) {
            t.status = Status::Stabilized;
            return Ok(t);
        }
    }
    t.status = Status::HorizonReached;
    Ok(t)
}

/// Plays a fixed list of protections with no stopping rule; returns
/// `X_0, ..., X_len`.
pub fn replay_schedule(g: &Graph, x0: &VertexSet, schedule: &[VertexSet], reach: usize) -> Vec<VertexSet> {
    let mut burned = vec![x0.clone()];
    let mut protected = g.empty_set();
    for w in schedule {
        protected.union_with(w);
        let prev = burned.last().expect("nonempty");
        let next = spread_step(g, prev, &protected.difference(prev), reach);
        burned.push(next);
    }
    burned
}

/// Replaces `W_{n+1}` with `W_{n+1} \ X_n` and checks that the burned
/// sequence is unchanged.
pub fn sanitize(g: &Graph, t: &GameTranscript) -> Result<GameTranscript> {
    let chosen: Vec<VertexSet> = t
        .chosen
        .iter()
        .enumerate()
        .map(|(i, w)| w.difference(&t.burned[i]))
        .collect();
    let burned = replay_schedule(g, t.initial_fire(), &chosen, t.reach);
    if let Some(n) = (0..burned.len()).find(|&n| burned[n] != t.burned[n]) {
        return Err(Error::ReplayDivergence(n));
    }
    Ok(GameTranscript {
        reach: t.reach,
        bound: t.bound.clone(),
        burned,
        chosen,
        status: t.status,
    })
}

/// `V_n = W_{(n-1)r+1} ∪ ... ∪ W_{nr}` with the block-sum bound. A trailing
/// partial block is kept.
pub fn compress_for_reach(ws: &[VertexSet], fs: &Bound, r: usize) -> (Vec<VertexSet>, Bound) {
    assert!(r >= 1, "compression needs r ≥ 1");
    let blocks = ws
        .chunks(r)
        .map(|chunk| {
            let mut v = chunk[0].clone();
            for w in &chunk[1..] {
                v.union_with(w);
            }
            v
        })
        .collect();
    let bound = if r == 1 {
        fs.clone()
    } else {
        Bound::Compressed {
            base: Box::new(fs.clone()),
            r,
        }
    };
    (blocks, bound)
}

/// `|W_n| <= f_n` for every recorded turn.
pub fn bound_check(t: &GameTranscript, fs: &Bound) -> bool {
    t.chosen
        .iter()
        .enumerate()
        .all(|(i, w)| w.len() as u64 <= fs.at(i + 1))
}
