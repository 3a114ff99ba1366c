//! Growth functions, finite-scale domination, verdicts on finished games,
//! and ends / coarse separation diagnostics.

use std::fmt;

use crate::error::{Error, Result};
use crate::game::{reach_shell, GameTranscript, Status};
use crate::graph::{Graph, VertexId, VertexSet};

/// `β(n) = |B(A, n)|` for `n = 0..=faithful_max`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthFunction {
    pub samples: Vec<usize>,
    pub faithful_max: usize,
}

impl GrowthFunction {
    /// Wraps known values `β(0), ..., β(len - 1)`.
    pub fn from_samples(samples: Vec<usize>) -> Self {
        assert!(!samples.is_empty(), "growth function needs β(0)");
        let faithful_max = samples.len() - 1;
        Self { samples, faithful_max }
    }

    pub fn at(&self, n: usize) -> Option<usize> {
        self.samples.get(n).copied()
    }
}

/// Distance from `a` to the truncation boundary; balls up to this radius
/// are complete.
fn complete_radius(g: &Graph, a: &VertexSet) -> Result<usize> {
    if g.boundary().is_empty() {
        return Ok(usize::MAX);
    }
    Ok(g.set_distance(a, g.boundary())?.unwrap_or(usize::MAX))
}

/// Counts `|B(A, n) ∩ within|` layer by layer.
fn layered_counts(g: &Graph, a: &VertexSet, within: Option<&VertexSet>, n_max: usize) -> Vec<usize> {
    let dist = g.distances_from(a);
    let mut counts = vec![0; n_max + 1];
    for (v, d) in dist.iter().enumerate() {
        if let Some(d) = *d {
            if (d as usize) <= n_max && within.is_none_or(|u| u.contains(v)) {
                counts[d as usize] += 1;
            }
        }
    }
    for n in 1..=n_max {
        counts[n] += counts[n - 1];
    }
    counts
}

/// `β_{G,A}(n)` up to `min(n_max, dist(A, boundary))`.
pub fn growth_function(g: &Graph, a: &VertexSet, n_max: usize) -> Result<GrowthFunction> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let faithful_max = n_max.min(complete_radius(g, a)?);
    Ok(GrowthFunction {
        samples: layered_counts(g, a, None, faithful_max),
        faithful_max,
    })
}

/// `n -> |B_G(v0, n) ∩ U|`, distances measured in `G`.
pub fn restricted_growth(g: &Graph, u: &VertexSet, v0: VertexId, n_max: usize) -> Result<GrowthFunction> {
    let a = g.set_of([v0]);
    let faithful_max = n_max.min(complete_radius(g, &a)?);
    Ok(GrowthFunction {
        samples: layered_counts(g, &a, Some(u), faithful_max),
        faithful_max,
    })
}

/// A successful domination certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Domination {
    pub c: u64,
    /// The inequality was checked for `0 <= n <= max_n`.
    pub max_n: usize,
}

/// Smallest `C <= c_max` with `f(n) <= C g(Cn + C) + C` wherever
/// `Cn + C <= g.faithful_max`. `None` is evidence, not proof.
pub fn growth_dominates(f: &GrowthFunction, g: &GrowthFunction, c_max: u64) -> Result<Option<Domination>> {
    let mut any_range = false;
    for c in 1..=c_max {
        let cu = c as usize;
        if g.faithful_max < cu {
            continue;
        }
        let max_n = ((g.faithful_max - cu) / cu).min(f.faithful_max);
        any_range = true;
        let ok = (0..=max_n).all(|n| f.samples[n] as u128 <= c as u128 * g.samples[cu * n + cu] as u128 + c as u128);
        if ok {
            return Ok(Some(Domination { c, max_n }));
        }
    }
    if any_range {
        Ok(None)
    } else {
        Err(Error::Inconclusive("no sampled radius admits a domination check".into()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DegreeFit {
    pub slope: f64,
    pub max_residual: f64,
    /// Residuals too large for a power law.
    pub exponential: bool,
}

/// Least-squares slope of `log β(n)` against `log(n + 1/2)` over `n >= 2`.
/// The half shift makes `β = 2n + 1` an exact line.
pub fn degree_fit(f: &GrowthFunction) -> Result<DegreeFit> {
    let points: Vec<(f64, f64)> = (2..=f.faithful_max)
        .map(|n| (((n as f64) + 0.5).ln(), (f.samples[n] as f64).ln()))
        .collect();
    if points.len() < 5 {
        return Err(Error::TooFewSamples(points.len()));
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let max_residual = points
        .iter()
        .map(|(x, y)| (y - (my + slope * (x - mx))).abs())
        .fold(0.0, f64::max);
    Ok(DegreeFit {
        slope,
        max_residual,
        exponential: max_residual > 0.1,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerdictKind {
    Contained,
    Retained,
    Escaped,
    Inconclusive,
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictKind::Contained => "contained",
            VerdictKind::Retained => "retained",
            VerdictKind::Escaped => "escaped",
            VerdictKind::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub domination: Option<Domination>,
    /// Unburned deep component (as a vertex set) backing a retained verdict.
    pub witness: Option<VertexSet>,
    pub basepoint: Option<VertexId>,
    pub reason: String,
}

impl Verdict {
    fn plain(kind: VerdictKind, reason: impl Into<String>) -> Self {
        Self {
            kind,
            domination: None,
            witness: None,
            basepoint: None,
            reason: reason.into(),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if let Some(d) = self.domination {
            write!(f, ", C={}", d.c)?;
        }
        if !self.reason.is_empty() {
            write!(f, " ({})", self.reason)?;
        }
        Ok(())
    }
}

/// Contained when the game stabilized away from the shell.
pub fn containment_verdict(g: &Graph, t: &GameTranscript) -> Verdict {
    match t.status {
        Status::Stabilized if t.final_burned().is_disjoint(&reach_shell(g, t.reach)) => {
            Verdict::plain(VerdictKind::Contained, format!("{} vertices burned", t.final_burned().len()))
        }
        Status::BoundaryEscape | Status::Stabilized => {
            Verdict::plain(VerdictKind::Escaped, "fire reached the truncation shell")
        }
        Status::Running | Status::HorizonReached => {
            Verdict::plain(VerdictKind::Inconclusive, "horizon reached while the fire was still spreading")
        }
    }
}

/// Deep components of `G \ ∪W` that the fire can never enter: disjoint
/// from the burned set and not adjacent to it.
pub fn sealed_components(g: &Graph, t: &GameTranscript) -> Vec<VertexSet> {
    let burned = t.final_burned();
    let near_fire = g.ball(burned, 1);
    g.deep_components(&t.all_protected())
        .into_iter()
        .filter(|c| c.is_disjoint(&near_fire))
        .collect()
}

/// The set `U` a verdict is about: everything unburned after a stabilized
/// game, otherwise the protected vertices plus the sealed components.
pub fn retained_set(g: &Graph, t: &GameTranscript) -> VertexSet {
    let burned = t.final_burned();
    match t.status {
        Status::Stabilized => burned.complement(),
        _ => {
            let mut u = t.all_protected().difference(burned);
            for c in sealed_components(g, t) {
                u.union_with(&c);
            }
            u
        }
    }
}

/// Compares the growth of the unburned set with that of the whole graph
/// around `root`.
pub fn retaining_verdict(g: &Graph, t: &GameTranscript, root: VertexId, c_max: u64) -> Result<Verdict> {
    let witnesses = sealed_components(g, t);
    let u = retained_set(g, t);
    if u.is_empty() {
        return Ok(Verdict::plain(VerdictKind::Escaped, "nothing left unburned"));
    }
    let Some(witness) = witnesses.into_iter().max_by_key(|c| (c.len(), std::cmp::Reverse(c.first()))) else {
        return Ok(match t.status {
            Status::BoundaryEscape => Verdict::plain(VerdictKind::Escaped, "no sealed deep component survives"),
            _ => Verdict::plain(VerdictKind::Inconclusive, "no unburned deep component"),
        });
    };

    let dist = g.distances_from(&g.set_of([root]));
    let v0 = u
        .iter()
        .filter_map(|v| dist[v].map(|d| (d, v)))
        .min()
        .map(|(_, v)| v)
        .ok_or_else(|| Error::Inconclusive("unburned set unreachable from the root".into()))?;
    let beta_g = growth_function(g, &g.set_of([root]), g.len())?;
    let beta_u = restricted_growth(g, &u, v0, g.len())?;
    let domination = growth_dominates(&beta_g, &beta_u, c_max)?;
    Ok(match domination {
        Some(d) => Verdict {
            kind: VerdictKind::Retained,
            domination: Some(d),
            witness: Some(witness),
            basepoint: Some(v0),
            reason: format!("certificate over 0 <= n <= {}", d.max_n),
        },
        None => Verdict {
            kind: VerdictKind::Inconclusive,
            domination: None,
            witness: Some(witness),
            basepoint: Some(v0),
            reason: format!("no C <= {c_max} certifies domination on the sampled range"),
        },
    })
}

/// Number of deep components left after removing `w`.
pub fn ends_estimate(g: &Graph, w: &VertexSet) -> usize {
    g.deep_components(w).len()
}

/// True when removing `B(K, R)` leaves at least two deep components.
pub fn coarse_separation_check(g: &Graph, k: &VertexSet, r: usize) -> Result<bool> {
    let thick = g.ball(k, r);
    if k.is_disjoint(g.boundary()) && !thick.is_disjoint(g.boundary()) {
        return Err(Error::BallTouchesShell);
    }
    Ok(g.deep_components(&thick).len() >= 2)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessRow {
    pub n: usize,
    /// A vertex of `U` whose full `n`-ball lies in `U`.
    pub v_n: VertexId,
    /// `|B(e, n)|`.
    pub ball_size: usize,
    /// `|B(v0, 2n + K + 1) ∩ U|`.
    pub u_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranslationWitness {
    pub k: usize,
    pub rows: Vec<WitnessRow>,
}

impl TranslationWitness {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.ball_size <= r.u_count)
    }
}

/// For each `n`, picks `v_n` in `U` (nearest `v0`) with `B(v_n, n) ⊆ U`
/// and complete, measures `K = max dist(v0, u_n)` where `u_n` in the wall
/// realizes `dist(wall, v_n)`, then evaluates both sides of
/// `|B(e, n)| <= |B(v0, 2n + K + 1) ∩ U|`.
pub fn translation_witness(
    g: &Graph,
    u: &VertexSet,
    wall: &VertexSet,
    identity: VertexId,
    v0: VertexId,
) -> Result<TranslationWitness> {
    let from_v0 = g.distances_from(&g.set_of([v0]));
    let from_wall = g.distances_from(wall);
    let to_shell = if g.boundary().is_empty() {
        vec![None; g.len()]
    } else {
        g.distances_from(g.boundary())
    };
    let to_outside = g.distances_from(&u.complement());
    let identity_room = complete_radius(g, &g.set_of([identity]))?;

    let mut picks = Vec::new();
    for n in 1..=identity_room {
        // B(v, n) ⊆ U and inside the truncation.
        let v_n = u
            .iter()
            .filter(|&v| to_outside[v].is_none_or(|d| d as usize > n))
            .filter(|&v| to_shell[v].is_none_or(|d| d as usize >= n))
            .filter_map(|v| from_v0[v].map(|d| (d, v)))
            .min()
            .map(|(_, v)| v);
        let Some(v_n) = v_n else { break };
        picks.push((n, v_n));
    }

    let mut k = 0;
    for &(_, v_n) in &picks {
        let d = from_wall[v_n].ok_or(Error::Disconnected(v_n, v0))?;
        // u_n: nearest wall vertex to v_n, ties by id.
        let from_vn = g.distances_from(&g.set_of([v_n]));
        let u_n = wall
            .iter()
            .find(|&w| from_vn[w] == Some(d))
            .expect("wall distance is realized");
        k = k.max(from_v0[u_n].ok_or(Error::Disconnected(u_n, v0))? as usize);
    }

    let beta_e = layered_counts(g, &g.set_of([identity]), None, identity_room.min(g.len()));
    let rows = picks
        .into_iter()
        .map(|(n, v_n)| {
            let radius = 2 * n + k + 1;
            let u_count = u
                .iter()
                .filter(|&x| from_v0[x].is_some_and(|d| d as usize <= radius))
                .count();
            WitnessRow {
                n,
                v_n,
                ball_size: beta_e[n],
                u_count,
            }
        })
        .collect();
    Ok(TranslationWitness { k, rows })
}
