//! Builds graphs and strategies from a config, plays the game, runs the
//! analyses and collects the output files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use retain_core::{
    containment_verdict, ends_estimate, faithful_horizon, growth_function, parse_model, parse_word,
    restricted_growth, retained_set, retaining_verdict, run_game, run_transport, CayleyBall, EmptyStrategy, Error,
    GameConfig, GameTranscript, Graph, OneShotWall, PerimeterGreedy, QIPair, Strategy, VertexId, VertexSet, Verdict,
    VerdictKind, WallStrategy,
};

use crate::config::{parse_config, Analysis, ExperimentConfig, FireSpec, GraphSource, StrategySpec};
use crate::render::{grid_coordinates, render_ascii, render_svg};
use crate::{CliError, Context};

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seedless: bool,
    /// Turns to snapshot; `None` means the first and last turn.
    pub snapshot_turns: Option<Vec<usize>>,
}

/// Reads a config file; relative paths inside it resolve against its
/// directory.
pub fn load_config(path: &Path, seedless: bool) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut cfg = parse_config(&text, seedless)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(cfg)
}

fn resolve(cfg: &ExperimentConfig, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        cfg.base_dir.join(p)
    }
}

/// The graph a game is played on, with its group structure when it came
/// from a model.
pub struct Setup {
    pub graph: Graph,
    pub ball: Option<CayleyBall>,
}

pub fn build_graph(cfg: &ExperimentConfig) -> Result<Setup, CliError> {
    match &cfg.graph {
        GraphSource::Model { spec, radius } => {
            let ball = CayleyBall::build(parse_model(spec).context("groups")?, *radius);
            Ok(Setup {
                graph: ball.graph().clone(),
                ball: Some(ball),
            })
        }
        GraphSource::File(p) => {
            let path = resolve(cfg, p);
            let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            Ok(Setup {
                graph: Graph::parse_adjacency(&text).context("graph")?,
                ball: None,
            })
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config { line: 0, msg: msg.into() }
}

/// `X0` and the root the growth comparison is centred at.
pub fn initial_fire(cfg: &ExperimentConfig, setup: &Setup) -> Result<(VertexSet, VertexId), CliError> {
    let g = &setup.graph;
    match &cfg.fire {
        FireSpec::Ball { center, radius } => {
            let c = match &setup.ball {
                Some(ball) => ball.vertex_of_word(center).context("groups")?,
                None => (0..g.len())
                    .find(|&v| g.label(v) == center)
                    .ok_or_else(|| invalid(format!("no vertex labelled `{center}`")))?,
            };
            Ok((g.ball(&g.set_of([c]), *radius), c))
        }
        FireSpec::Ids(ids) => {
            if let Some(bad) = ids.iter().find(|&&v| v >= g.len()) {
                return Err(invalid(format!("fire vertex {bad} does not exist ({} vertices)", g.len())));
            }
            Ok((g.set_of(ids.iter().copied()), *ids.iter().min().expect("nonempty")))
        }
    }
}

fn need_ball<'a>(setup: &'a Setup, what: &str) -> Result<&'a CayleyBall, CliError> {
    setup
        .ball
        .as_ref()
        .ok_or_else(|| invalid(format!("{what} strategies need a group model")))
}

/// A strategy and `key: value` notes describing its plan.
pub type Planned = (Box<dyn Strategy>, Vec<(String, String)>);

pub fn build_strategy(spec: &StrategySpec, setup: &Setup, x0: &VertexSet) -> Result<Planned, CliError> {
    match spec {
        StrategySpec::Empty => Ok((Box::new(EmptyStrategy), vec![])),
        StrategySpec::Greedy(f) => Ok((Box::new(PerimeterGreedy { f: *f }), vec![])),
        StrategySpec::Wall { subgroup, l, d } => {
            let ball = need_ball(setup, "wall")?;
            let plan = retain_core::plan_wall(ball, subgroup, *l, *d, x0).context("strategies")?;
            let notes = vec![
                ("translate".into(), ball.model().format(&plan.translate)),
                ("wall_size".into(), plan.wall.len().to_string()),
                ("k1".into(), plan.k1.to_string()),
                ("k".into(), plan.k.to_string()),
                ("f".into(), plan.f.to_string()),
                ("wall_horizon".into(), plan.horizon.to_string()),
            ];
            Ok((Box::new(WallStrategy::new(plan)), notes))
        }
        StrategySpec::OneShot { subgroup, l, translate } => {
            let ball = need_ball(setup, "oneshot")?;
            let wall = match translate {
                Some(word) => {
                    let t = parse_word(ball.model(), word).context("groups")?;
                    OneShotWall::at_translate(ball, subgroup, *l, &t)
                }
                None => OneShotWall::plan(ball, subgroup, *l, x0),
            }
            .context("strategies")?;
            let notes = vec![
                ("translate".into(), ball.model().format(&wall.translate)),
                ("wall_size".into(), wall.wall.len().to_string()),
            ];
            Ok((Box::new(wall), notes))
        }
        StrategySpec::Transport { .. } => Err(invalid("transport strategies cannot be nested")),
    }
}

/// Output files keyed by name, plus the verdict that sets the exit code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bundle {
    pub files: BTreeMap<String, Vec<u8>>,
    pub verdict: Option<VerdictKind>,
    pub certification_failure: Option<String>,
}

impl Bundle {
    fn new() -> Self {
        Self {
            files: BTreeMap::new(),
            verdict: None,
            certification_failure: None,
        }
    }

    fn add(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.insert(name.into(), bytes.into());
    }

    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.get(name).and_then(|b| std::str::from_utf8(b).ok())
    }

    /// 0 contained or retained, 2 escaped, 3 inconclusive, 1 when a
    /// transport certification failed.
    pub fn exit_code(&self) -> i32 {
        if self.certification_failure.is_some() {
            return 1;
        }
        match self.verdict {
            None | Some(VerdictKind::Contained) | Some(VerdictKind::Retained) => 0,
            Some(VerdictKind::Escaped) => 2,
            Some(VerdictKind::Inconclusive) => 3,
        }
    }
}

/// Writes every file through a temporary name and a rename.
pub fn write_bundle(bundle: &Bundle, dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for (name, bytes) in &bundle.files {
        let target = dir.join(name);
        let tmp = dir.join(format!(".{name}.tmp"));
        fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
        fs::rename(&tmp, &target).map_err(|e| CliError::io(&target, e))?;
    }
    Ok(())
}

fn horizon(cfg: &ExperimentConfig, g: &Graph) -> usize {
    cfg.horizon.unwrap_or(g.len()).max(1)
}

/// Plays the configured game. Transport configs play the transported game
/// on the target graph and add the source transcripts.
struct Played {
    setup: Setup,
    root: VertexId,
    transcript: GameTranscript,
    notes: Vec<(String, String)>,
    extra: Bundle,
}

fn play(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Played, CliError> {
    let setup = build_graph(cfg)?;
    let (x0, root) = initial_fire(cfg, &setup)?;
    if let StrategySpec::Transport { source, c, q } = &cfg.strategy {
        return play_transport(cfg, opts, setup, root, source, *c, *q);
    }
    let (strategy, notes) = build_strategy(&cfg.strategy, &setup, &x0)?;
    let bound = cfg.bound.clone().unwrap_or_else(|| strategy.bound());
    let game = GameConfig::new(cfg.reach, bound, horizon(cfg, &setup.graph)).context("game")?;
    let transcript = run_game(&setup.graph, &x0, strategy.as_ref(), &game).context("game")?;
    Ok(Played {
        setup,
        root,
        transcript,
        notes,
        extra: Bundle::new(),
    })
}

fn play_transport(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    target: Setup,
    h0: VertexId,
    source: &Path,
    c: u64,
    q: usize,
) -> Result<Played, CliError> {
    let h_ball = need_ball(&target, "transport")?;
    let src_cfg = load_config(&resolve(cfg, source), opts.seedless)?;
    let src = build_graph(&src_cfg)?;
    let g_ball = need_ball(&src, "transport source")?;
    let pair = QIPair::from_shared_elements(g_ball, h_ball, c);
    let g0 = pair.psi[h0].ok_or(Error::MapUndefined(h0)).context("qi")?;
    // The source game starts from B_G(ψh0, 2c(q+2)) whatever its own fire key says.
    let reach = 2 * c as usize;
    let x0 = src.graph.ball(&src.graph.set_of([g0]), reach * (q + 2));
    let (strategy, mut notes) = build_strategy(&src_cfg.strategy, &src, &x0)?;
    let source_turns = faithful_horizon(&src.graph, &x0, reach).min(src.graph.len()).max(1);
    let run = run_transport(&pair, h0, q, strategy.as_ref(), source_turns).context("qi")?;

    let report = &run.report;
    let mut cert = String::new();
    let _ = writeln!(cert, "k,source_size,q_size,cap,faithful,fidelity,item1,item2");
    for t in &report.turns {
        let _ = writeln!(
            cert,
            "{},{},{},{},{},{},{},{}",
            t.k, t.source_size, t.q_size, t.cap, t.faithful, t.fidelity, t.item1, t.item2
        );
    }
    let mut extra = Bundle::new();
    extra.add("reach1.csv", run.reach1.to_csv_string());
    extra.add("source.csv", run.source.to_csv_string());
    extra.add("certification.csv", cert);
    let status = if report.passed() {
        format!("pass ({} faithful turns)", report.faithful_turns())
    } else {
        let why = match report.first_violation() {
            Some((k, check)) => format!("{check} violated at turn {k}"),
            None => "preimage inclusion violated".to_string(),
        };
        extra.certification_failure = Some(why.clone());
        format!("fail ({why})")
    };
    notes.insert(0, ("source_model".into(), g_ball.model().name()));
    notes.push(("source_turns".into(), run.source.turns().to_string()));
    notes.push(("transport_certification".into(), status));
    Ok(Played {
        setup: target,
        root: h0,
        transcript: run.target,
        notes,
        extra,
    })
}

fn snapshot_files(bundle: &mut Bundle, g: &Graph, t: &GameTranscript, opts: &RunOptions) {
    let mut turns: Vec<usize> = match &opts.snapshot_turns {
        Some(list) => list.iter().map(|&n| n.min(t.turns())).collect(),
        None => vec![0, t.turns()],
    };
    turns.sort_unstable();
    turns.dedup();
    let grid = grid_coordinates(g).is_some();
    for n in turns {
        if grid {
            let art = render_ascii(g, t, n).expect("grid checked");
            bundle.add(format!("snapshot-{n:03}.txt"), art);
        }
        bundle.add(format!("snapshot-{n:03}.svg"), render_svg(g, t, n));
    }
}

fn growth_csv(g: &Graph, root: VertexId, u: &VertexSet, v0: Option<VertexId>) -> Result<String, CliError> {
    let beta_g = growth_function(g, &g.set_of([root]), g.len()).context("analysis")?;
    let beta_u = match v0 {
        Some(v) => Some(restricted_growth(g, u, v, g.len()).context("analysis")?),
        None => None,
    };
    let rows = beta_g.faithful_max.max(beta_u.as_ref().map_or(0, |b| b.faithful_max));
    let mut out = String::from("n,ball_growth,retained_growth\n");
    let show = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
    for n in 0..=rows {
        let _ = writeln!(
            out,
            "{n},{},{}",
            show(beta_g.at(n)),
            show(beta_u.as_ref().and_then(|b| b.at(n)))
        );
    }
    Ok(out)
}

/// Generates the graph only.
pub fn generate(cfg: &ExperimentConfig) -> Result<Bundle, CliError> {
    let setup = build_graph(cfg)?;
    let g = &setup.graph;
    let mut bundle = Bundle::new();
    bundle.add("graph.txt", g.to_adjacency_text());
    let mut info = format!(
        "vertices: {}\nedges: {}\nboundary: {}\nmax_degree: {}\n",
        g.len(),
        g.edge_count(),
        g.boundary().len(),
        g.max_degree()
    );
    if let Some(ball) = &setup.ball {
        let layers: Vec<String> = ball.layer_sizes().iter().map(usize::to_string).collect();
        let _ = writeln!(info, "model: {}\nradius: {}\nlayers: {}", ball.model().name(), ball.radius(), layers.join(","));
    }
    bundle.add("report.txt", info);
    Ok(bundle)
}

/// Plays the game and writes its transcript and snapshots.
pub fn simulate(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Bundle, CliError> {
    let played = play(cfg, opts)?;
    let mut bundle = played.extra;
    let t = &played.transcript;
    bundle.add("transcript.csv", t.to_csv_string());
    snapshot_files(&mut bundle, &played.setup.graph, t, opts);
    let mut report = String::new();
    report_game(&mut report, cfg, t, &played.notes);
    bundle.add("report.txt", report);
    Ok(bundle)
}

fn report_game(out: &mut String, cfg: &ExperimentConfig, t: &GameTranscript, notes: &[(String, String)]) {
    let _ = writeln!(out, "status: {}", t.status.as_str());
    let _ = writeln!(out, "turns: {}", t.turns());
    let _ = writeln!(out, "burned: {}", t.final_burned().len());
    let _ = writeln!(out, "protected: {}", t.all_protected().len());
    let _ = writeln!(out, "reach: {}", cfg.reach);
    let _ = writeln!(out, "bound: {}", t.bound);
    for (k, v) in notes {
        let _ = writeln!(out, "{k}: {v}");
    }
}

/// Plays the game, runs the configured analyses and assembles the bundle.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Bundle, CliError> {
    let played = play(cfg, opts)?;
    let g = &played.setup.graph;
    let t = &played.transcript;
    let mut bundle = played.extra;
    bundle.add("transcript.csv", t.to_csv_string());
    snapshot_files(&mut bundle, g, t, opts);

    let mut body = String::new();
    report_game(&mut body, cfg, t, &played.notes);

    let containment = containment_verdict(g, t);
    if cfg.analyses.contains(&Analysis::Containment) {
        let _ = writeln!(body, "containment: {containment}");
    }
    let mut retaining: Option<Verdict> = None;
    if cfg.analyses.contains(&Analysis::Retaining) {
        let v = match retaining_verdict(g, t, played.root, cfg.c_max) {
            Ok(v) => v,
            Err(Error::Inconclusive(why)) => Verdict {
                kind: VerdictKind::Inconclusive,
                domination: None,
                witness: None,
                basepoint: None,
                reason: why,
            },
            Err(e) => return Err(e).context("analysis"),
        };
        let _ = writeln!(body, "retaining: {v}");
        if let Some(w) = &v.witness {
            let _ = writeln!(body, "witness_size: {}", w.len());
        }
        if let Some(b) = v.basepoint {
            let _ = writeln!(body, "basepoint: {}", g.label(b));
        }
        bundle.add("growth.csv", growth_csv(g, played.root, &retained_set(g, t), v.basepoint)?);
        retaining = Some(v);
    }
    if cfg.analyses.contains(&Analysis::Ends) {
        // Deep components left once the protected vertices are removed.
        let _ = writeln!(body, "ends: {}", ends_estimate(g, &t.all_protected()));
    }

    let verdict = match retaining {
        Some(_) if cfg.analyses.contains(&Analysis::Containment) && containment.kind == VerdictKind::Contained => {
            containment
        }
        Some(v) => v,
        None => containment,
    };
    bundle.verdict = Some(verdict.kind);
    let report = format!("verdict: {verdict}\n{body}");
    bundle.add("report.txt", report);
    Ok(bundle)
}
