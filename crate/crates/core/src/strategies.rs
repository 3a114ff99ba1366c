//! Built-in firefighters: fixed schedules, baselines, walls built from
//! subgroup neighborhoods, and strategies transported across a
//! quasi-isometry.

use crate::error::{Error, Result};
use crate::game::{faithful_horizon, Bound, GameTranscript, Strategy};
use crate::graph::{Graph, VertexId, VertexSet};
use crate::groups::{power, CayleyBall, Element, SubgroupSpec};
use crate::qi::QIPair;

/// Plays `schedule[n - 1]` at turn `n`, then nothing.
#[derive(Clone, Debug)]
pub struct ScheduledStrategy {
    bound: Bound,
    schedule: Vec<VertexSet>,
}

impl ScheduledStrategy {
    pub fn new(bound: Bound, schedule: Vec<VertexSet>) -> Self {
        Self { bound, schedule }
    }

    pub fn schedule(&self) -> &[VertexSet] {
        &self.schedule
    }
}

impl Strategy for ScheduledStrategy {
    fn bound(&self) -> Bound {
        self.bound.clone()
    }

    fn choose(&self, turn: usize, _: &GameTranscript, g: &Graph) -> Result<VertexSet> {
        Ok(self.schedule.get(turn - 1).cloned().unwrap_or_else(|| g.empty_set()))
    }

    fn is_done(&self, turn: usize, _: &GameTranscript, _: &Graph) -> bool {
        self.schedule.iter().skip(turn).all(VertexSet::is_empty)
    }
}

/// Never protects anything.
#[derive(Clone, Copy, Debug, Default)]
pub struct EmptyStrategy;

impl Strategy for EmptyStrategy {
    fn bound(&self) -> Bound {
        Bound::Constant(0)
    }

    fn choose(&self, _: usize, _: &GameTranscript, g: &Graph) -> Result<VertexSet> {
        Ok(g.empty_set())
    }
}

/// Protects up to `f` unprotected, unburned neighbors of the fire each turn,
/// smallest ids first.
#[derive(Clone, Copy, Debug)]
pub struct PerimeterGreedy {
    pub f: u64,
}

impl PerimeterGreedy {
    fn candidates(&self, t: &GameTranscript, g: &Graph) -> Vec<VertexId> {
        let burned = t.final_burned();
        let protected = t.all_protected();
        let mut front = g.empty_set();
        for v in burned.iter() {
            for &w in g.neighbors(v) {
                if !burned.contains(w) && !protected.contains(w) {
                    front.insert(w);
                }
            }
        }
        front.to_vec()
    }
}

impl Strategy for PerimeterGreedy {
    fn bound(&self) -> Bound {
        Bound::Constant(self.f)
    }

    fn choose(&self, _: usize, t: &GameTranscript, g: &Graph) -> Result<VertexSet> {
        let picks = self.candidates(t, g).into_iter().take(self.f as usize);
        Ok(g.set_of(picks))
    }

    fn is_done(&self, _: usize, t: &GameTranscript, g: &Graph) -> bool {
        self.f == 0 || self.candidates(t, g).is_empty()
    }
}

/// First generator outside the subgroup; walls are searched along its
/// powers.
fn escaping_generator(ball: &CayleyBall, sub: &SubgroupSpec) -> Result<Element> {
    for g in ball.model().generators() {
        if !sub.contains(ball.model(), &g.element)? {
            return Ok(g.element.clone());
        }
    }
    Err(Error::UnsupportedSubgroup(sub.to_string()))
}

/// Exponents 1, -1, 2, -2, ... up to the ball radius.
fn translate_candidates(ball: &CayleyBall, sub: &SubgroupSpec) -> Result<Vec<Element>> {
    let s = escaping_generator(ball, sub)?;
    let r = ball.radius() as i64;
    Ok((1..=r)
        .flat_map(|k| [k, -k])
        .map(|k| power(ball.model(), &s, k))
        .collect())
}

/// Protects a whole translate `gL` of a finite subgroup's neighborhood at
/// turn 1 and nothing afterwards.
#[derive(Clone, Debug)]
pub struct OneShotWall {
    pub translate: Element,
    pub wall: VertexSet,
}

impl OneShotWall {
    /// Searches for `g` with `dist(gL, X0) >= diam X0`, `gL` fully inside
    /// the truncation and off its boundary.
    pub fn plan(ball: &CayleyBall, sub: &SubgroupSpec, l: usize, x0: &VertexSet) -> Result<Self> {
        let members = ball.subgroup_members(sub)?;
        if !members.is_disjoint(ball.graph().boundary()) {
            return Err(Error::SubgroupNotFinite);
        }
        let g = ball.graph();
        let diam = g.set_diameter(x0)?;
        for t in translate_candidates(ball, sub)? {
            let Ok(plan) = Self::at_translate(ball, sub, l, &t) else {
                continue;
            };
            if let Some(d) = g.set_distance(&plan.wall, x0)? {
                if d >= diam {
                    return Ok(plan);
                }
            }
        }
        Err(Error::NoWallPlacement)
    }

    /// Wall at an explicit translate; no distance condition is checked.
    pub fn at_translate(ball: &CayleyBall, sub: &SubgroupSpec, l: usize, t: &Element) -> Result<Self> {
        let members = ball.subgroup_members(sub)?;
        if !members.is_disjoint(ball.graph().boundary()) {
            return Err(Error::SubgroupNotFinite);
        }
        let coset = ball.coset_members(t, sub)?;
        let wall = ball.coset_neighborhood(t, sub, l)?;
        if coset.len() != members.len() || !wall.is_disjoint(ball.graph().boundary()) {
            return Err(Error::NoWallPlacement);
        }
        Ok(Self {
            translate: t.clone(),
            wall,
        })
    }
}

impl Strategy for OneShotWall {
    fn bound(&self) -> Bound {
        Bound::Constant(self.wall.len() as u64)
    }

    fn choose(&self, turn: usize, _: &GameTranscript, g: &Graph) -> Result<VertexSet> {
        Ok(if turn == 1 {
            self.wall.clone()
        } else {
            g.empty_set()
        })
    }

    fn is_done(&self, turn: usize, _: &GameTranscript, _: &Graph) -> bool {
        turn >= 1
    }
}

/// `β_{L,y0}(n) = |{ x in L : dist(y0, x) <= n }|` for `n = 0..=n_max`.
fn restricted_growth(g: &Graph, wall: &VertexSet, y0: VertexId, n_max: usize) -> Vec<usize> {
    let dist = g.distances_from(&g.set_of([y0]));
    let mut counts = vec![0; n_max + 1];
    for x in wall.iter() {
        if let Some(d) = dist[x] {
            if (d as usize) <= n_max {
                counts[d as usize] += 1;
            }
        }
    }
    for n in 1..=n_max {
        counts[n] += counts[n - 1];
    }
    counts
}

/// Smallest integer `K1` with `β_{L,y0}(n) <= K1 n^d` over basepoints
/// `y0` in `L` and radii where the measurement is complete.
pub fn estimate_k1(ball: &CayleyBall, sub: &SubgroupSpec, l: usize, d: u32) -> Result<u64> {
    let wall = ball.subgroup_neighborhood(sub, l)?;
    let g = ball.graph();
    let radius = ball.radius();
    let mut best: Option<f64> = None;
    for y0 in wall.iter() {
        // Balls of radius n + l around y0 must stay off the shell.
        let Some(n_max) = radius.checked_sub(1 + l + ball.word_length(y0)) else {
            continue;
        };
        if n_max == 0 {
            continue;
        }
        let beta = restricted_growth(g, &wall, y0, n_max);
        for n in 1..=n_max {
            let ratio = beta[n] as f64 / (n as f64).powi(d as i32);
            best = Some(best.map_or(ratio, |b: f64| b.max(ratio)));
        }
    }
    let best = best.ok_or(Error::TruncationTooSmallForK1)?;

    // The ratio must settle; steady growth means d is too small.
    let y0 = ball.identity_vertex();
    let n_max = radius - 1 - l;
    if n_max >= 4 {
        let beta = restricted_growth(g, &wall, y0, n_max);
        let ratio = |n: usize| beta[n] as f64 / (n as f64).powi(d as i32);
        if ratio(n_max) > 1.5 * ratio(n_max / 2) {
            return Err(Error::DegreeTooSmall(d));
        }
    }
    Ok((best - 1e-9).ceil() as u64)
}

/// A polynomial-schedule wall: the translate, its vertices in emission
/// order, and the constants of the schedule.
#[derive(Clone, Debug)]
pub struct WallPlan {
    pub subgroup: SubgroupSpec,
    pub l: usize,
    pub d: u32,
    pub translate: Element,
    pub wall: VertexSet,
    /// Wall vertices sorted by distance to `X0`, ties by id.
    pub enumeration: Vec<VertexId>,
    /// `dist(w_i, X0)` along the enumeration.
    pub distances: Vec<usize>,
    pub k1: u64,
    pub k: u64,
    pub f: u64,
    pub horizon: usize,
}

/// `p_n = Σ_{k=1..n} d F k^(d-1)`.
pub fn schedule_total(d: u32, f: u64, n: usize) -> u64 {
    (1..=n as u64).map(|k| d as u64 * f * k.pow(d - 1)).sum()
}

impl WallPlan {
    pub fn p(&self, n: usize) -> u64 {
        schedule_total(self.d, self.f, n)
    }

    /// `|M_n| = |{ x in gL : dist(x, X0) <= n }|`.
    pub fn m_count(&self, n: usize) -> usize {
        self.distances.partition_point(|&d| d <= n)
    }

    pub fn bound(&self) -> Bound {
        Bound::Polynomial {
            coef: self.d as u64 * self.f,
            degree: self.d - 1,
        }
    }
}

/// Finds `g` along the escaping generator with `diam X0 < dist(gL, X0)` and
/// `|M_n| < p_n` for every `n` up to the faithful horizon.
pub fn choose_wall_translate(
    ball: &CayleyBall,
    sub: &SubgroupSpec,
    l: usize,
    x0: &VertexSet,
    d: u32,
    k1: u64,
) -> Result<WallPlan> {
    if d == 0 {
        return Err(Error::InvalidConfig("d = 0 walls are one-shot walls".into()));
    }
    let g = ball.graph();
    let diam = g.set_diameter(x0)?;
    let k = (1u64 << d) * k1;
    let f = k + 1;
    let horizon = faithful_horizon(g, x0, 1);
    let dist = g.distances_from(x0);
    for t in translate_candidates(ball, sub)? {
        let wall = ball.coset_neighborhood(&t, sub, l)?;
        let mut order: Vec<(usize, VertexId)> = wall
            .iter()
            .filter_map(|v| dist[v].map(|d| (d as usize, v)))
            .collect();
        order.sort_unstable();
        let Some(&(nearest, _)) = order.first() else {
            continue;
        };
        if nearest <= diam {
            continue;
        }
        let plan = WallPlan {
            subgroup: sub.clone(),
            l,
            d,
            translate: t,
            wall,
            enumeration: order.iter().map(|&(_, v)| v).collect(),
            distances: order.iter().map(|&(d, _)| d).collect(),
            k1,
            k,
            f,
            horizon,
        };
        if (1..=horizon).all(|n| (plan.m_count(n) as u64) < plan.p(n)) {
            return Ok(plan);
        }
    }
    Err(Error::NoWallPlacement)
}

/// Estimates `K1` and places the wall.
pub fn plan_wall(ball: &CayleyBall, sub: &SubgroupSpec, l: usize, d: u32, x0: &VertexSet) -> Result<WallPlan> {
    let k1 = estimate_k1(ball, sub, l, d)?;
    choose_wall_translate(ball, sub, l, x0, d, k1)
}

/// Emits `w_i` for `p_{n-1} < i <= p_n` at turn `n`.
#[derive(Clone, Debug)]
pub struct WallStrategy {
    pub plan: WallPlan,
}

impl WallStrategy {
    pub fn new(plan: WallPlan) -> Self {
        Self { plan }
    }

    fn window(&self, turn: usize) -> (usize, usize) {
        let len = self.plan.enumeration.len() as u64;
        let lo = self.plan.p(turn - 1).min(len) as usize;
        let hi = self.plan.p(turn).min(len) as usize;
        (lo, hi)
    }
}

impl Strategy for WallStrategy {
    fn bound(&self) -> Bound {
        self.plan.bound()
    }

    fn choose(&self, turn: usize, t: &GameTranscript, g: &Graph) -> Result<VertexSet> {
        let (lo, hi) = self.window(turn);
        let w = g.set_of(self.plan.enumeration[lo..hi].iter().copied());
        if !w.is_disjoint(t.final_burned()) {
            return Err(Error::WallBreached(turn));
        }
        Ok(w)
    }

    fn is_done(&self, turn: usize, _: &GameTranscript, _: &Graph) -> bool {
        self.plan.p(turn) >= self.plan.enumeration.len() as u64
    }
}

/// Plays `Q_k = ∪_{g in W_k} B_H(φg, r) \ Y_{k-1}` with `r = c^2 + 2c`,
/// where `W_k` is the protection of a reach-2c game on the source graph.
pub struct TransportedStrategy<'a> {
    pair: &'a QIPair,
    source_chosen: Vec<VertexSet>,
    base: Bound,
}

impl<'a> TransportedStrategy<'a> {
    /// `base` is the reach-1 bound the source schedule was compressed from.
    pub fn new(pair: &'a QIPair, source_chosen: Vec<VertexSet>, base: Bound) -> Self {
        Self {
            pair,
            source_chosen,
            base,
        }
    }

    pub fn radius(&self) -> usize {
        let c = self.pair.c as usize;
        c * c + 2 * c
    }

    /// `Q_k` given `Y_{k-1}`.
    pub fn q_set(&self, k: usize, y_prev: &VertexSet) -> Result<VertexSet> {
        transported_set(self.pair, self.source_chosen.get(k - 1), y_prev, self.radius())
    }
}

/// `∪_{g in W} B_H(φg, r) \ Y`.
pub fn transported_set(pair: &QIPair, w: Option<&VertexSet>, y_prev: &VertexSet, r: usize) -> Result<VertexSet> {
    let h = &pair.h;
    let mut images = h.empty_set();
    for g in w.into_iter().flat_map(VertexSet::iter) {
        images.insert(pair.phi[g].ok_or(Error::MapUndefined(g))?);
    }
    let q = h.ball(&images, r);
    if !q.is_disjoint(h.boundary()) {
        return Err(Error::TransportBoundary(format!(
            "a radius-{r} ball around the image of the source protection reaches the target boundary"
        )));
    }
    Ok(q.difference(y_prev))
}

impl Strategy for TransportedStrategy<'_> {
    fn bound(&self) -> Bound {
        Bound::Transported {
            base: Box::new(self.base.clone()),
            c: self.pair.c,
            delta: self.pair.delta,
        }
    }

    fn choose(&self, turn: usize, t: &GameTranscript, _: &Graph) -> Result<VertexSet> {
        self.q_set(turn, t.final_burned())
    }

    fn is_done(&self, turn: usize, _: &GameTranscript, _: &Graph) -> bool {
        self.source_chosen.iter().skip(turn).all(VertexSet::is_empty)
    }
}
