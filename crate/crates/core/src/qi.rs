//! Quasi-isometry pairs, the transported bound, and certification of
//! transported games.

use crate::error::{Error, Result};
use crate::game::{compress_for_reach, run_game, sanitize, Bound, GameConfig, GameTranscript, Status, Strategy};
use crate::graph::{Graph, VertexId, VertexSet};
use crate::groups::CayleyBall;
use crate::strategies::{transported_set, ScheduledStrategy, TransportedStrategy};

/// Two graphs with partial vertex maps `φ: G -> H`, `ψ: H -> G`, a constant
/// `c` and the common degree bound `δ`.
#[derive(Clone, Debug)]
pub struct QIPair {
    pub g: Graph,
    pub h: Graph,
    pub phi: Vec<Option<VertexId>>,
    pub psi: Vec<Option<VertexId>>,
    pub c: u64,
    pub delta: u64,
}

impl QIPair {
    pub fn new(g: Graph, h: Graph, phi: Vec<Option<VertexId>>, psi: Vec<Option<VertexId>>, c: u64) -> Self {
        assert_eq!(phi.len(), g.len());
        assert_eq!(psi.len(), h.len());
        let delta = g.degree_bound().max(h.degree_bound()) as u64;
        Self { g, h, phi, psi, c, delta }
    }

    pub fn identity(g: Graph) -> Self {
        let ids: Vec<Option<VertexId>> = (0..g.len()).map(Some).collect();
        Self::new(g.clone(), g, ids.clone(), ids, 1)
    }

    /// Maps each element to the same element of the other ball, where it
    /// exists.
    pub fn from_shared_elements(g: &CayleyBall, h: &CayleyBall, c: u64) -> Self {
        let phi = (0..g.graph().len()).map(|v| h.vertex_of(g.element(v))).collect();
        let psi = (0..h.graph().len()).map(|v| g.vertex_of(h.element(v))).collect();
        Self::new(g.graph().clone(), h.graph().clone(), phi, psi, c)
    }
}

/// Parses `<from-id> <to-id>` lines (`#` comments allowed).
pub fn parse_vertex_map(text: &str, from_len: usize, to_len: usize) -> Result<Vec<Option<VertexId>>> {
    let mut map = vec![None; from_len];
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| Error::GraphParse {
            line: i + 1,
            msg: msg.to_string(),
        };
        let ids: Vec<usize> = line
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| err("expected two vertex ids")))
            .collect::<Result<_>>()?;
        let [a, b] = ids[..] else {
            return Err(err("expected two vertex ids"));
        };
        if a >= from_len || b >= to_len {
            return Err(err("vertex id out of range"));
        }
        map[a] = Some(b);
    }
    Ok(map)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QICheck {
    /// `d_H(φx, φy) <= c d_G(x, y) + c` (or the same for ψ).
    Upper,
    /// `d_G(x, y) / c - c <= d_H(φx, φy)`.
    Lower,
    /// Every interior target vertex lies within `c` of the image.
    Density,
    /// `d_G(u, ψφu) <= c`.
    RoundTrip,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QIViolation {
    pub check: QICheck,
    /// `"phi"` or `"psi"`.
    pub map: &'static str,
    pub vertices: (VertexId, VertexId),
    /// Distance in the domain and in the codomain (or the offending
    /// distance for density and round-trip checks).
    pub distances: (u64, u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QIReport {
    pub c: u64,
    /// Smallest constant for which every checked inequality holds.
    pub minimal_c: u64,
    pub pairs_checked: usize,
    pub first_violation: Option<QIViolation>,
}

impl QIReport {
    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }
}

const INFINITE: u64 = u64::MAX;

/// Smallest `c >= 1` with `b <= c a + c` and `a <= c b + c^2`.
fn needed_c(a: u64, b: u64) -> u64 {
    if a == INFINITE || b == INFINITE {
        return INFINITE;
    }
    let upper = b.div_ceil(a + 1).max(1);
    let mut lower = 1;
    while lower * b + lower * lower < a {
        lower += 1;
    }
    upper.max(lower)
}

struct Tracker {
    c: u64,
    minimal_c: u64,
    first_violation: Option<QIViolation>,
}

impl Tracker {
    fn record(&mut self, need: u64, violation: impl FnOnce() -> QIViolation) {
        self.minimal_c = self.minimal_c.max(need);
        if need > self.c && self.first_violation.is_none() {
            self.first_violation = Some(violation());
        }
    }
}

fn distances(g: &Graph, v: VertexId) -> Vec<u64> {
    g.distances_from(&g.set_of([v]))
        .into_iter()
        .map(|d| d.map_or(INFINITE, u64::from))
        .collect()
}

fn check_map(
    name: &'static str,
    from: &Graph,
    to: &Graph,
    map: &[Option<VertexId>],
    interior: &VertexSet,
    tracker: &mut Tracker,
) -> Result<usize> {
    let verts = interior.to_vec();
    let images: Vec<VertexId> = verts
        .iter()
        .map(|&v| map[v].ok_or(Error::MapUndefined(v)))
        .collect::<Result<_>>()?;
    let mut pairs = 0;
    for (i, &x) in verts.iter().enumerate() {
        let dx = distances(from, x);
        let dy = distances(to, images[i]);
        for (j, &y) in verts.iter().enumerate().skip(i + 1) {
            let (a, b) = (dx[y], dy[images[j]]);
            pairs += 1;
            let need = needed_c(a, b);
            let check = if b > tracker.c.saturating_mul(a).saturating_add(tracker.c) {
                QICheck::Upper
            } else {
                QICheck::Lower
            };
            tracker.record(need, || QIViolation {
                check,
                map: name,
                vertices: (x, y),
                distances: (a, b),
            });
        }
    }
    Ok(pairs)
}

/// Exhaustive check of the quasi-isometry inequalities over interior pairs,
/// the density of `φ`'s image, and `d(u, ψφu) <= c`.
pub fn verify_qi(pair: &QIPair, interior_g: &VertexSet, interior_h: &VertexSet) -> Result<QIReport> {
    let mut tracker = Tracker {
        c: pair.c,
        minimal_c: 1,
        first_violation: None,
    };
    let mut pairs = check_map("phi", &pair.g, &pair.h, &pair.phi, interior_g, &mut tracker)?;
    pairs += check_map("psi", &pair.h, &pair.g, &pair.psi, interior_h, &mut tracker)?;

    let image = pair.h.set_of(pair.phi.iter().flatten().copied());
    let to_image = if image.is_empty() {
        vec![None; pair.h.len()]
    } else {
        pair.h.distances_from(&image)
    };
    for h in interior_h.iter() {
        let d = to_image[h].map_or(INFINITE, u64::from);
        tracker.record(d.max(1), || QIViolation {
            check: QICheck::Density,
            map: "phi",
            vertices: (h, h),
            distances: (d, d),
        });
    }

    for u in interior_g.iter() {
        let fu = pair.phi[u].ok_or(Error::MapUndefined(u))?;
        let back = pair.psi[fu].ok_or(Error::MapUndefined(fu))?;
        let d = distances(&pair.g, u)[back];
        tracker.record(d.max(1), || QIViolation {
            check: QICheck::RoundTrip,
            map: "psi",
            vertices: (u, back),
            distances: (d, d),
        });
    }

    Ok(QIReport {
        c: pair.c,
        minimal_c: tracker.minimal_c,
        pairs_checked: pairs,
        first_violation: tracker.first_violation,
    })
}

/// `b_k = (f_{2c(k-1)+1} + ... + f_{2ck}) δ^(c^2+2c+1)`.
pub fn transported_bound(fs: &Bound, c: u64, delta: u64) -> Bound {
    Bound::Transported {
        base: Box::new(fs.clone()),
        c,
        delta,
    }
}

/// `b_k` in exact arithmetic (no saturation below `u128::MAX`).
pub fn transported_bound_exact(fs: &Bound, c: u64, delta: u64, k: usize) -> u128 {
    let width = 2 * c as usize;
    let sum: u128 = (width * (k - 1) + 1..=width * k).map(|j| fs.at(j) as u128).sum();
    sum * (delta as u128).pow((c * c + 2 * c + 1) as u32)
}

/// `f_k <= b_k <= 2c δ^(c^2+2c+1) f_{2ck}`, valid for non-decreasing `f`.
pub fn sandwich_holds(fs: &Bound, c: u64, delta: u64, k: usize) -> bool {
    let b = transported_bound_exact(fs, c, delta, k);
    let top = 2 * c as u128 * (delta as u128).pow((c * c + 2 * c + 1) as u32) * fs.at(2 * c as usize * k) as u128;
    fs.at(k) as u128 <= b && b <= top
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransportTurn {
    pub k: usize,
    pub source_size: usize,
    pub q_size: usize,
    /// `δ^r |W_k|`.
    pub cap: u128,
    /// Whether `X_{k-1}` and `Y_k` are both faithful.
    pub faithful: bool,
    /// The target played exactly the recomputed `Q_k`.
    pub fidelity: bool,
    /// `|Q_k| <= δ^r |W_k|` and `Q_k ∩ Y_{k-1} = ∅`.
    pub item1: bool,
    /// Every `h in Y_k` has `ψh in X_{k-1}`.
    pub item2: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransportReport {
    pub turns: Vec<TransportTurn>,
    /// No vertex of the last faithful `Y_k` maps into the unburned set
    /// `G \ X_{k-1}`.
    pub preimage_inclusion: bool,
}

impl TransportReport {
    /// First faithful turn failing a check, with the check's name.
    pub fn first_violation(&self) -> Option<(usize, &'static str)> {
        self.turns.iter().filter(|t| t.faithful).find_map(|t| {
            if !t.fidelity {
                Some((t.k, "fidelity"))
            } else if !t.item1 {
                Some((t.k, "item 1"))
            } else if !t.item2 {
                Some((t.k, "item 2"))
            } else {
                None
            }
        })
    }

    pub fn passed(&self) -> bool {
        self.first_violation().is_none() && self.preimage_inclusion
    }

    pub fn faithful_turns(&self) -> usize {
        self.turns.iter().filter(|t| t.faithful).count()
    }
}

/// Index of the last burned set that is faithful to the infinite graph.
fn last_faithful(t: &GameTranscript) -> usize {
    if t.status == Status::BoundaryEscape {
        t.turns().saturating_sub(1)
    } else {
        t.turns()
    }
}

/// Checks the transported game turn by turn against the source game.
pub fn certify_transport(
    source: &GameTranscript,
    target: &GameTranscript,
    pair: &QIPair,
    h0: VertexId,
    q: usize,
) -> Result<TransportReport> {
    let c = pair.c as usize;
    if source.reach != 2 * c {
        return Err(Error::TransportPrecondition(format!(
            "source reach is {}, expected {}",
            source.reach,
            2 * c
        )));
    }
    if target.reach != 1 {
        return Err(Error::TransportPrecondition("target reach must be 1".into()));
    }
    let g0 = pair.psi[h0].ok_or(Error::MapUndefined(h0))?;
    if *source.initial_fire() != pair.g.ball(&pair.g.set_of([g0]), 2 * c * (q + 2)) {
        return Err(Error::TransportPrecondition(
            "source initial fire is not the ball of radius 2c(q+2) around ψh0".into(),
        ));
    }
    if *target.initial_fire() != pair.h.ball(&pair.h.set_of([h0]), q) {
        return Err(Error::TransportPrecondition(
            "target initial fire is not the ball of radius q around h0".into(),
        ));
    }
    if target.turns() > source.turns() + 1 && source.status != Status::Stabilized {
        return Err(Error::MismatchedHorizons {
            source_turns: source.turns(),
            target_turns: target.turns(),
        });
    }

    let r = c * c + 2 * c;
    let delta_r = (pair.delta as u128).pow(r as u32);
    let source_ok = last_faithful(source);
    let target_ok = last_faithful(target);
    let x_at = |k: usize| source.burned_at(k.min(source.turns()));
    let mut turns = Vec::with_capacity(target.turns());
    let mut last_checked = None;
    for k in 1..=target.turns() {
        let w = (k <= source.turns()).then(|| source.chosen_at(k));
        let y_prev = target.burned_at(k - 1);
        let q_k = target.chosen_at(k);
        let expected = transported_set(pair, w, y_prev, r)?;
        let w_size = w.map_or(0, VertexSet::len);
        let cap = delta_r * w_size as u128;
        let x_prev = x_at(k - 1);
        let item2 = target
            .burned_at(k)
            .iter()
            .all(|h| pair.psi[h].is_some_and(|g| x_prev.contains(g)));
        let faithful = k - 1 <= source_ok && k <= target_ok;
        if faithful {
            last_checked = Some(k);
        }
        turns.push(TransportTurn {
            k,
            source_size: w_size,
            q_size: q_k.len(),
            cap,
            faithful,
            fidelity: *q_k == expected,
            item1: (q_k.len() as u128) <= cap && q_k.is_disjoint(y_prev),
            item2,
        });
    }

    let preimage_inclusion = match last_checked {
        None => true,
        Some(k) => {
            let unburned = x_at(k - 1).complement();
            target
                .burned_at(k)
                .iter()
                .all(|h| pair.psi[h].is_some_and(|g| !unburned.contains(g)))
        }
    };
    Ok(TransportReport {
        turns,
        preimage_inclusion,
    })
}

/// All games of one transport experiment.
#[derive(Clone, Debug)]
pub struct TransportRun {
    /// Reach-1 game on `G` from `B_G(ψh0, 2c(q+2))`.
    pub reach1: GameTranscript,
    /// Reach-2c replay of the sanitized, compressed schedule.
    pub source: GameTranscript,
    /// Reach-1 game on `H` from `B_H(h0, q)` under the transported strategy.
    pub target: GameTranscript,
    pub report: TransportReport,
}

/// Plays `strategy` on `G` at reach 1 for `2c * source_turns` turns,
/// converts it to a reach-2c game, transports it to `H` and certifies the
/// result.
pub fn run_transport(
    pair: &QIPair,
    h0: VertexId,
    q: usize,
    strategy: &dyn Strategy,
    source_turns: usize,
) -> Result<TransportRun> {
    let c = pair.c as usize;
    let g0 = pair.psi[h0].ok_or(Error::MapUndefined(h0))?;
    let x0 = pair.g.ball(&pair.g.set_of([g0]), 2 * c * (q + 2));
    let base = strategy.bound();

    let cfg = GameConfig::new(1, base.clone(), 2 * c * source_turns)?;
    let reach1 = sanitize(&pair.g, &run_game(&pair.g, &x0, strategy, &cfg)?)?;
    let (blocks, block_bound) = compress_for_reach(&reach1.chosen, &base, 2 * c);
    let scheduled = ScheduledStrategy::new(block_bound.clone(), blocks);
    let cfg = GameConfig::new(2 * c, block_bound, source_turns)?;
    let source = run_game(&pair.g, &x0, &scheduled, &cfg)?;

    let y0 = pair.h.ball(&pair.h.set_of([h0]), q);
    let transported = TransportedStrategy::new(pair, source.chosen.clone(), base);
    let cfg = GameConfig::for_strategy(1, source.turns() + 1, &transported)?;
    let target = run_game(&pair.h, &y0, &transported, &cfg)?;
    let report = certify_transport(&source, &target, pair, h0, q)?;
    Ok(TransportRun {
        reach1,
        source,
        target,
        report,
    })
}
