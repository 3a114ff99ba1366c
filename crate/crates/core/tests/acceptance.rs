//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use retain_core::analysis::{
    containment_verdict, degree_fit, ends_estimate, growth_dominates, growth_function, retaining_verdict,
    coarse_separation_check, VerdictKind,
};
use retain_core::game::{
    compress_for_reach, faithful_horizon, replay_schedule, run_game, sanitize, Bound, GameConfig, GameTranscript,
    Status,
};
use retain_core::groups::{parse_model, parse_word, CayleyBall, SubgroupSpec};
use retain_core::qi::{
    certify_transport, run_transport, sandwich_holds, transported_bound, transported_bound_exact, verify_qi, QIPair,
    TransportRun,
};
use retain_core::strategies::{plan_wall, OneShotWall, ScheduledStrategy, WallStrategy};
use retain_core::{Graph, VertexSet};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

// Independent reference simulator over plain adjacency lists.

struct Naive {
    adj: Vec<Vec<usize>>,
}

impl Naive {
    fn new(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        Self { adj }
    }

    /// Burned sets X_0..X_len for a fixed schedule at the given reach.
    fn play(&self, x0: &[bool], schedule: &[Vec<usize>], reach: usize) -> Vec<Vec<bool>> {
        let n = self.adj.len();
        let mut history = vec![x0.to_vec()];
        let mut ever = vec![false; n];
        for w in schedule {
            for &v in w {
                ever[v] = true;
            }
            let prev = history.last().unwrap().clone();
            let mut cur = prev.clone();
            for _ in 0..reach {
                let snapshot = cur.clone();
                for v in 0..n {
                    let blocked = ever[v] && !prev[v];
                    if !snapshot[v] && !blocked && self.adj[v].iter().any(|&u| snapshot[u]) {
                        cur[v] = true;
                    }
                }
            }
            history.push(cur);
        }
        history
    }
}

fn as_bits(s: &VertexSet) -> Vec<bool> {
    (0..s.universe()).map(|v| s.contains(v)).collect()
}

fn random_instance(rng: &mut ChaCha8Rng) -> (usize, Vec<(usize, usize)>) {
    let n = rng.gen_range(2..=200);
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    let extra = rng.gen_range(0..=n);
    for _ in 0..extra {
        edges.push((rng.gen_range(0..n), rng.gen_range(0..n)));
    }
    // Occasionally cut the graph into pieces.
    if rng.gen_bool(0.1) {
        edges.retain(|_| rng.gen_bool(0.8));
    }
    (n, edges)
}

fn random_schedule(rng: &mut ChaCha8Rng, n: usize, turns: usize, f: usize) -> Vec<Vec<usize>> {
    (0..turns)
        .map(|_| {
            let k = rng.gen_range(0..=f);
            let mut w: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
            w.sort_unstable();
            w.dedup();
            w
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5a17);
    let mut checked_turns = 0;
    for i in 0..200 {
        let (n, edges) = random_instance(&mut rng);
        let g = Graph::from_edges(n, edges.iter().copied()).unwrap();
        let naive = Naive::new(n, &edges);
        let f = rng.gen_range(1..=4);
        let turns = rng.gen_range(1..=30);
        let schedule = random_schedule(&mut rng, n, turns, f);
        let x0 = g.set_of((0..rng.gen_range(1..=3)).map(|_| rng.gen_range(0..n)));
        let sets: Vec<VertexSet> = schedule.iter().map(|w| g.set_of(w.iter().copied())).collect();
        let strategy = ScheduledStrategy::new(Bound::Constant(f as u64), sets);
        let cfg = GameConfig::new(1, Bound::Constant(f as u64), turns).unwrap();
        let t = run_game(&g, &x0, &strategy, &cfg).unwrap();
        let clean = match sanitize(&g, &t) {
            Ok(c) => c,
            Err(e) => return outcome(false, format!("instance {i}: {e}")),
        };
        let original = naive.play(&as_bits(&x0), &schedule[..t.turns()], 1);
        let cleaned: Vec<Vec<usize>> = clean.chosen.iter().map(VertexSet::to_vec).collect();
        let replayed = naive.play(&as_bits(&x0), &cleaned, 1);
        for k in 0..=t.turns() {
            let engine = as_bits(t.burned_at(k));
            if engine != original[k] || engine != replayed[k] || clean.burned_at(k) != t.burned_at(k) {
                return outcome(false, format!("instance {i}: burned sets differ at turn {k}"));
            }
            if k >= 1 && !clean.chosen_at(k).is_disjoint(clean.burned_at(k - 1)) {
                return outcome(false, format!("instance {i}: sanitized W_{k} meets X_{}", k - 1));
            }
        }
        checked_turns += t.turns();
    }
    outcome(true, format!("200 instances, {checked_turns} turns, exact match with reference simulator"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x2eac);
    let mut compared = 0;
    for i in 0..100 {
        let (n, edges) = random_instance(&mut rng);
        let g = Graph::from_edges(n, edges.iter().copied()).unwrap();
        let naive = Naive::new(n, &edges);
        let f = rng.gen_range(1..=4);
        let turns = rng.gen_range(1..=30);
        let schedule = random_schedule(&mut rng, n, turns, f);
        let x0 = g.set_of([rng.gen_range(0..n)]);
        let sets: Vec<VertexSet> = schedule.iter().map(|w| g.set_of(w.iter().copied())).collect();
        let strategy = ScheduledStrategy::new(Bound::Constant(f as u64), sets);
        let cfg = GameConfig::new(1, Bound::Constant(f as u64), turns).unwrap();
        let t = sanitize(&g, &run_game(&g, &x0, &strategy, &cfg).unwrap()).unwrap();
        for r in [2, 3] {
            let mut ws = t.chosen.clone();
            while ws.len() % r != 0 {
                ws.push(g.empty_set());
            }
            let x = replay_schedule(&g, &x0, &ws, 1);
            let (blocks, bound) = compress_for_reach(&ws, &t.bound, r);
            let y = replay_schedule(&g, &x0, &blocks, r);
            let block_lists: Vec<Vec<usize>> = blocks.iter().map(VertexSet::to_vec).collect();
            let reference = naive.play(&as_bits(&x0), &block_lists, r);
            for (k, v) in blocks.iter().enumerate() {
                if v.len() as u64 > bound.at(k + 1) {
                    return outcome(false, format!("instance {i}, r={r}: |V_{}| exceeds a_{}", k + 1, k + 1));
                }
            }
            for n in 0..y.len() {
                if y[n] != x[r * n] || as_bits(&y[n]) != reference[n] {
                    return outcome(false, format!("instance {i}, r={r}: Y_{n} != X_{}", r * n));
                }
                compared += 1;
            }
        }
    }
    outcome(true, format!("100 runs x r in {{2,3}}, {compared} block comparisons, Y_n = X_rn exactly"))
}

fn criterion_3() -> Outcome {
    let b = transported_bound(&Bound::Constant(1), 2, 6);
    let values: Vec<u64> = (1..=5).map(|k| b.at(k)).collect();
    if values.iter().any(|&v| v != 40_310_784) {
        return outcome(false, format!("f=1, c=2, delta=6 gives {values:?}"));
    }
    let linear = Bound::Polynomial { coef: 1, degree: 1 };
    for c in [1u64, 2] {
        for delta in [2u64, 4, 6] {
            for k in 1..=100 {
                // Direct evaluation of the block sum of f_k = k.
                let w = 2 * c as u128;
                let block: u128 = (w * (k as u128 - 1) + 1..=w * k as u128).sum();
                let expected = block * (delta as u128).pow((c * c + 2 * c + 1) as u32);
                if transported_bound_exact(&linear, c, delta, k) != expected {
                    return outcome(false, format!("b_{k} wrong for c={c}, delta={delta}"));
                }
                if !sandwich_holds(&linear, c, delta, k) {
                    return outcome(false, format!("sandwich fails at k={k}, c={c}, delta={delta}"));
                }
            }
        }
    }
    outcome(true, "b_k = 40310784 for f=1,c=2,delta=6; sandwich holds for f_k=k, c in {1,2}, delta in {2,4,6}, k<=100")
}

fn interior(ball: &CayleyBall, depth: usize) -> VertexSet {
    let g = ball.graph();
    g.set_of((0..g.len()).filter(|&v| ball.word_length(v) + depth <= ball.radius()))
}

struct TransportSetup {
    pair: QIPair,
    h0: usize,
    q: usize,
    run: TransportRun,
}

/// Z^2 with standard generators as source, alternate generators as target.
fn transport_setup() -> TransportSetup {
    let g = CayleyBall::build(parse_model("Z^d:2").unwrap(), 72);
    let h = CayleyBall::build(parse_model("Z2alt").unwrap(), 64);
    let pair = QIPair::from_shared_elements(&g, &h, 2);
    let (h0, q) = (h.identity_vertex(), 2);
    let x0 = g.graph().ball(&g.graph().set_of([0]), 2 * 2 * (q + 2));
    let wall = OneShotWall::plan(&g, &SubgroupSpec::trivial(), 1, &x0).unwrap();
    let source_turns = faithful_horizon(g.graph(), &x0, 4);
    let run = run_transport(&pair, h0, q, &wall, source_turns).unwrap();
    TransportSetup { pair, h0, q, run }
}

fn transport_csv(run: &TransportRun) -> String {
    [&run.reach1, &run.source, &run.target]
        .iter()
        .map(|t| t.to_csv_string())
        .collect::<Vec<_>>()
        .join("\n")
}

/// Replays the target with one turn's protection replaced.
fn mutate_target(setup: &TransportSetup, k: usize, w: VertexSet) -> GameTranscript {
    let t = &setup.run.target;
    let mut chosen = t.chosen.clone();
    chosen[k - 1] = w;
    let burned = replay_schedule(&setup.pair.h, t.initial_fire(), &chosen, 1);
    GameTranscript {
        reach: 1,
        bound: t.bound.clone(),
        burned,
        chosen,
        status: t.status,
    }
}

fn criterion_4() -> (Outcome, String) {
    let small_g = CayleyBall::build(parse_model("Z^d:2").unwrap(), 16);
    let small_h = CayleyBall::build(parse_model("Z2alt").unwrap(), 16);
    let small = QIPair::from_shared_elements(&small_g, &small_h, 2);
    let qi = verify_qi(&small, &interior(&small_g, 8), &interior(&small_h, 8)).unwrap();
    if !qi.passed() || qi.minimal_c != 2 {
        return (outcome(false, format!("QI check on radius 16: {qi:?}")), String::new());
    }

    let setup = transport_setup();
    let csv = transport_csv(&setup.run);
    let report = &setup.run.report;
    if !report.passed() || report.faithful_turns() == 0 {
        return (
            outcome(false, format!("certification failed: {:?}", report.first_violation())),
            csv,
        );
    }
    let Some(k) = setup.run.target.chosen.iter().position(|q| !q.is_empty()).map(|i| i + 1) else {
        return (outcome(false, "transported strategy never protected anything"), csv);
    };

    // Drop one vertex of Q_k.
    let mut dropped = setup.run.target.chosen_at(k).clone();
    let victim = dropped.first().unwrap();
    dropped.remove(victim);
    let mutant = mutate_target(&setup, k, dropped);
    let single = certify_transport(&setup.run.source, &mutant, &setup.pair, setup.h0, setup.q).unwrap();
    let single_caught = single.first_violation();

    // Drop all of Q_k: the target fire may now outrun the source fire.
    let stripped = mutate_target(&setup, k, setup.pair.h.empty_set());
    let whole = certify_transport(&setup.run.source, &stripped, &setup.pair, setup.h0, setup.q).unwrap();

    let pass = single_caught.is_some();
    let detail = format!(
        "QI minimal c=2 on radius 16; transport certified over {} faithful turns (|Q_{k}|={}, cap {}); \
         one-vertex drop detected by {:?}; whole-Q drop: item 2 {}",
        report.faithful_turns(),
        setup.run.target.chosen_at(k).len(),
        report.turns[k - 1].cap,
        single_caught.map(|(t, check)| format!("{check} at turn {t}")),
        if whole.turns.iter().any(|t| t.faithful && !t.item2) {
            "violated"
        } else {
            "not violated"
        },
    );
    (outcome(pass, detail), csv)
}

fn f2_one_shot() -> (CayleyBall, OneShotWall, GameTranscript) {
    let f2 = CayleyBall::build(parse_model("F:2").unwrap(), 8);
    let a2 = parse_word(f2.model(), "aa").unwrap();
    let wall = OneShotWall::at_translate(&f2, &SubgroupSpec::trivial(), 0, &a2).unwrap();
    let x0 = f2.graph().set_of([f2.identity_vertex()]);
    let cfg = GameConfig::for_strategy(1, 30, &wall).unwrap();
    let t = run_game(f2.graph(), &x0, &wall, &cfg).unwrap();
    (f2, wall, t)
}

fn criterion_5() -> (Outcome, String) {
    let (f2, wall, t) = f2_one_shot();
    let g = f2.graph();
    let csv = t.to_csv_string();
    let protected = t.all_protected();
    if protected != g.set_of([f2.vertex_of_word("aa").unwrap()]) || wall.wall.len() != 1 {
        return (outcome(false, "wall is not the single vertex a^2"), csv);
    }
    let deep = g.deep_components(&protected);
    let unburned_deep = deep.iter().filter(|c| c.is_disjoint(t.final_burned())).count();
    let verdict = retaining_verdict(g, &t, f2.identity_vertex(), 3).unwrap();
    let c = verdict.domination.map(|d| d.c);
    let pass = unburned_deep >= 1 && verdict.kind == VerdictKind::Retained && c.is_some_and(|c| c <= 2);
    (
        outcome(
            pass,
            format!("{unburned_deep} unburned deep components behind a^2; verdict {verdict}; tolerance C <= 2"),
        ),
        csv,
    )
}

fn criterion_6() -> (Outcome, String) {
    let fz = CayleyBall::build(parse_model("F2xZ").unwrap(), 8);
    let g = fz.graph();
    let sub = SubgroupSpec::parse("t");
    let axis = fz.subgroup_members(&sub).unwrap();
    let Some(l) = (1..fz.radius()).find(|&l| coarse_separation_check(g, &axis, l).unwrap_or(false)) else {
        return (outcome(false, "no l separates"), String::new());
    };
    let x0 = g.set_of([fz.identity_vertex()]);
    let plan = match plan_wall(&fz, &sub, l, 1, &x0) {
        Ok(p) => p,
        Err(e) => return (outcome(false, format!("wall planning failed: {e}")), String::new()),
    };
    let strategy = WallStrategy::new(plan.clone());
    let cfg = GameConfig::for_strategy(1, 4 * fz.radius(), &strategy).unwrap();
    let t = match run_game(g, &x0, &strategy, &cfg) {
        Ok(t) => t,
        Err(e) => return (outcome(false, format!("wall run failed: {e}")), String::new()),
    };
    let csv = t.to_csv_string();
    let sizes_ok = (1..=t.turns()).all(|n| t.chosen_at(n).len() as u64 <= plan.f);
    let disjoint = (1..=t.turns()).all(|n| t.chosen_at(n).is_disjoint(t.burned_at(n - 1)));
    let m_ok = (1..=plan.horizon).all(|n| plan.m_count(n) as u64 <= plan.p(n));
    let verdict = retaining_verdict(g, &t, fz.identity_vertex(), 3).unwrap();
    let c = verdict.domination.map(|d| d.c);
    let pass = sizes_ok && disjoint && m_ok && verdict.kind == VerdictKind::Retained && c.is_some_and(|c| c <= 3);
    (
        outcome(
            pass,
            format!(
                "l={l}, K1={}, K={}, F={}, g={}; |W_n|<=F: {sizes_ok}; X_n disjoint W_(n+1): {disjoint}; \
                 |M_n|<=p_n for n<={}: {m_ok}; verdict {verdict}; tolerance C <= 3",
                plan.k1,
                plan.k,
                plan.f,
                fz.model().format(&plan.translate),
                plan.horizon,
            ),
        ),
        csv,
    )
}

fn criterion_7() -> Outcome {
    let (_, _, t) = f2_one_shot();
    let f2 = CayleyBall::build(parse_model("F:2").unwrap(), 8);
    let f2_ends = ends_estimate(f2.graph(), &t.all_protected());

    let z2 = CayleyBall::build(parse_model("Z^d:2").unwrap(), 10);
    let g = z2.graph();
    let x0 = g.set_of([0]);
    let ring = g.ball(&x0, 1).difference(&x0);
    let s = ScheduledStrategy::new(Bound::Constant(4), vec![ring]);
    let tz = run_game(g, &x0, &s, &GameConfig::new(1, Bound::Constant(4), 20).unwrap()).unwrap();
    let contained = containment_verdict(g, &tz).kind == VerdictKind::Contained;
    let protected = tz.all_protected();
    let z2_ends = ends_estimate(g, &protected);
    let pass = f2_ends >= 2 && contained && protected.is_disjoint(tz.final_burned()) && z2_ends == 1;
    outcome(pass, format!("F2 run: {f2_ends} ends after removing the wall; contained Z^2 run: {z2_ends} end"))
}

fn criterion_8() -> Outcome {
    let origin = |model: &str, r: usize| {
        let b = CayleyBall::build(parse_model(model).unwrap(), r);
        growth_function(b.graph(), &b.graph().set_of([0]), r).unwrap()
    };
    let z2 = origin("Z^d:2", 12);
    if (0..=12).any(|n| z2.samples[n] != 2 * n * n + 2 * n + 1) {
        return outcome(false, "Z^2 growth differs from 2n^2+2n+1");
    }
    let f2 = origin("F:2", 7);
    if (0..=7).any(|n| f2.samples[n] != 2 * 3usize.pow(n as u32) - 1) {
        return outcome(false, "F2 growth differs from 2*3^n-1");
    }
    let fit = degree_fit(&origin("Z^d:2", 10)).unwrap();
    if !(1.9..=2.1).contains(&fit.slope) {
        return outcome(false, format!("degree fit {:.3} outside [1.9, 2.1]", fit.slope));
    }
    // n_max = 30 with C up to 3 needs the line sampled to 3*30+3.
    let z = origin("Z^d:1", 93);
    let z2_30 = origin("Z^d:2", 30);
    let up = growth_dominates(&z, &z2_30, 3).unwrap().map(|d| d.c);
    let down = growth_dominates(&z2_30, &z, 3).unwrap();
    let pass = up == Some(1) && down.is_none();
    outcome(
        pass,
        format!(
            "closed forms exact; degree fit {:.3} in [1.9, 2.1]; Z <= Z^2 with C={up:?}; Z^2 <= Z: {down:?}",
            fit.slope
        ),
    )
}

fn criterion_9() -> Outcome {
    // Path on [-3, 3]; vertex i + 3 is the integer i.
    let edges: Vec<(usize, usize)> = (1..7).map(|v| (v - 1, v)).collect();
    let naive = Naive::new(7, &edges);
    let g = Graph::from_edges(7, edges.iter().copied()).unwrap();
    let ends = [0usize, 6];
    let x0 = g.set_of([3]);
    let options: Vec<Vec<usize>> = std::iter::once(vec![]).chain((0..7).map(|v| vec![v])).collect();
    let horizon = 10;
    let mut oracle_min: Option<usize> = None;
    let mut engine_min: Option<usize> = None;
    let mut replays = 0;
    for code in 0..options.len().pow(3) {
        let schedule: Vec<Vec<usize>> = (0..3).map(|i| options[(code / 8usize.pow(i)) % 8].clone()).collect();
        let used = schedule.iter().rposition(|w| !w.is_empty()).map_or(0, |i| i + 1);
        let mut padded = schedule.clone();
        padded.resize(horizon, vec![]);
        let reference = naive.play(&as_bits(&x0), &padded, 1);
        let final_ref = reference.last().unwrap();
        let oracle_contained = ends.iter().all(|&e| !final_ref[e]) && reference[horizon - 1] == *final_ref;
        if oracle_contained {
            oracle_min = Some(oracle_min.map_or(used, |m| m.min(used)));
        }

        let sets: Vec<VertexSet> = schedule.iter().map(|w| g.set_of(w.iter().copied())).collect();
        let s = ScheduledStrategy::new(Bound::Constant(1), sets);
        let t = run_game(&g, &x0, &s, &GameConfig::new(1, Bound::Constant(1), horizon).unwrap()).unwrap();
        for (k, expected) in reference.iter().enumerate() {
            if as_bits(t.burned_at(k.min(t.turns()))) != *expected {
                return outcome(false, format!("schedule {schedule:?}: engine differs at turn {k}"));
            }
        }
        let engine_contained = t.status == Status::Stabilized && ends.iter().all(|&e| !t.final_burned().contains(e));
        if engine_contained {
            engine_min = Some(engine_min.map_or(used, |m| m.min(used)));
        }
        replays += 1;
    }
    let pass = oracle_min == Some(2) && engine_min == Some(2);
    outcome(
        pass,
        format!("{replays} strategies replayed, burned sets identical; minimal containing turns: oracle {oracle_min:?}, engine {engine_min:?}"),
    )
}

fn criterion_10() -> Outcome {
    let bundle = || {
        let (_, c4) = criterion_4();
        let (_, c5) = criterion_5();
        let (_, c6) = criterion_6();
        [c4, c5, c6].join("\n--\n")
    };
    let (a, b) = (bundle(), bundle());
    let pass = a == b && !a.is_empty();
    outcome(pass, format!("two runs of criteria 4-6 produced {} identical CSV bytes", a.len()))
}

fn main() {
    type Check = Box<dyn Fn() -> Outcome>;
    let checks: Vec<(u32, &str, Option<Duration>, Check)> = vec![
        (1, "sanitizer equivalence", Some(Duration::from_secs(10)), Box::new(criterion_1)),
        (2, "reach compression", Some(Duration::from_secs(10)), Box::new(criterion_2)),
        (3, "transported bound formula", None, Box::new(criterion_3)),
        (4, "transport certification", Some(Duration::from_secs(30)), Box::new(|| criterion_4().0)),
        (5, "one-shot wall in F2", Some(Duration::from_secs(5)), Box::new(|| criterion_5().0)),
        (6, "polynomial wall in F2xZ", Some(Duration::from_secs(60)), Box::new(|| criterion_6().0)),
        (7, "ends analysis", None, Box::new(criterion_7)),
        (8, "growth machinery", Some(Duration::from_secs(5)), Box::new(criterion_8)),
        (9, "brute-force oracle", None, Box::new(criterion_9)),
        (10, "determinism", None, Box::new(criterion_10)),
    ];
    let mut failures = 0;
    for (id, name, limit, check) in checks {
        let start = Instant::now();
        let out = check();
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|l| elapsed <= l);
        let pass = out.pass && in_time;
        if !pass {
            failures += 1;
        }
        let budget = limit.map_or(String::new(), |l| format!(" < {} s", l.as_secs()));
        println!(
            "criterion {id:>2} [{}] {name}: {} ({:.2} s{budget})",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
        );
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
