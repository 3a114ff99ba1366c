//! Flat `key=value` experiment configs.

use std::path::PathBuf;

use retain_core::{Bound, SubgroupSpec};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphSource {
    /// A Cayley-graph ball of a built-in model.
    Model { spec: String, radius: usize },
    /// An adjacency-list file.
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FireSpec {
    /// `ball:<center>:<radius>`; the center is a word for models and a
    /// vertex label for files.
    Ball { center: String, radius: usize },
    Ids(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StrategySpec {
    Empty,
    Greedy(u64),
    Wall { subgroup: SubgroupSpec, l: usize, d: u32 },
    OneShot { subgroup: SubgroupSpec, l: usize, translate: Option<String> },
    Transport { source: PathBuf, c: u64, q: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Analysis {
    Retaining,
    Containment,
    Ends,
    Transport,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    pub fire: FireSpec,
    pub reach: usize,
    pub strategy: StrategySpec,
    /// Overrides the strategy's declared bound.
    pub bound: Option<Bound>,
    /// Defaults to twice the truncation radius for models and to the
    /// vertex count for graph files.
    pub horizon: Option<usize>,
    pub c_max: u64,
    pub analyses: Vec<Analysis>,
    pub out: Option<PathBuf>,
    /// Set when the config carried a `seed` key; runs are deterministic
    /// and ignore it.
    pub seed: Option<String>,
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
}

const KEYS: &[&str] = &[
    "model", "graph", "radius", "fire", "reach", "strategy", "bound", "horizon", "c_max", "analysis", "out", "seed",
];

/// `(line number, key, value)` triples; several pairs may share a line.
pub fn tokenize(text: &str) -> Result<Vec<(usize, String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        for token in line.split_whitespace() {
            let (k, v) = token.split_once('=').ok_or_else(|| CliError::Config {
                line: i + 1,
                msg: format!("expected key=value, found `{token}`"),
            })?;
            out.push((i + 1, k.trim().to_string(), v.trim().to_string()));
        }
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::Config {
        line,
        msg: format!("malformed value for {key}: `{v}`"),
    })
}

fn parse_fire(line: usize, v: &str) -> Result<FireSpec, CliError> {
    let bad = || CliError::Config {
        line,
        msg: format!("malformed fire `{v}` (use ball:<center>:<radius> or ids:<id>,<id>,...)"),
    };
    if let Some(rest) = v.strip_prefix("ball:") {
        let (center, radius) = rest.rsplit_once(':').ok_or_else(bad)?;
        return Ok(FireSpec::Ball {
            center: center.to_string(),
            radius: radius.parse().map_err(|_| bad())?,
        });
    }
    if let Some(rest) = v.strip_prefix("ids:") {
        let ids = rest
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<Result<Vec<usize>, _>>()?;
        if ids.is_empty() {
            return Err(bad());
        }
        return Ok(FireSpec::Ids(ids));
    }
    Err(bad())
}

fn parse_strategy(line: usize, v: &str) -> Result<StrategySpec, CliError> {
    let bad = |why: &str| CliError::Config {
        line,
        msg: format!("malformed strategy `{v}`: {why}"),
    };
    let num = |s: &str| s.parse::<u64>().map_err(|_| bad("expected a number"));
    let parts: Vec<&str> = v.split(':').collect();
    match parts.as_slice() {
        ["empty"] => Ok(StrategySpec::Empty),
        ["greedy", f] => Ok(StrategySpec::Greedy(num(f)?)),
        ["wall", sub, l, d] => {
            let d = num(d)? as u32;
            if d == 0 {
                return Err(bad("d = 0 walls are one-shot walls; use oneshot"));
            }
            Ok(StrategySpec::Wall {
                subgroup: SubgroupSpec::parse(sub),
                l: num(l)? as usize,
                d,
            })
        }
        ["oneshot", sub, l] | ["oneshot", sub, l, _] => Ok(StrategySpec::OneShot {
            subgroup: SubgroupSpec::parse(sub),
            l: num(l)? as usize,
            translate: parts.get(3).map(|s| s.to_string()),
        }),
        ["transport", source, c, q] => {
            let c = num(c)?;
            if c == 0 {
                return Err(bad("c must be ≥ 1"));
            }
            Ok(StrategySpec::Transport {
                source: PathBuf::from(source),
                c,
                q: num(q)? as usize,
            })
        }
        _ => Err(bad("unknown strategy")),
    }
}

fn parse_analyses(line: usize, v: &str) -> Result<Vec<Analysis>, CliError> {
    v.split(',')
        .map(|a| match a.trim() {
            "retaining" => Ok(Analysis::Retaining),
            "containment" => Ok(Analysis::Containment),
            "ends" => Ok(Analysis::Ends),
            "transport" => Ok(Analysis::Transport),
            other => Err(CliError::Config {
                line,
                msg: format!("unknown analysis `{other}`"),
            }),
        })
        .collect()
}

/// Parses and validates a config. With `seedless`, a `seed` key is an
/// error.
pub fn parse_config(text: &str, seedless: bool) -> Result<ExperimentConfig, CliError> {
    let mut model = None;
    let mut graph = None;
    let mut radius: Option<(usize, usize)> = None;
    let mut fire = None;
    let mut reach = (0, 1);
    let mut strategy = None;
    let mut bound = None;
    let mut horizon = None;
    let mut c_max = 3;
    let mut analyses = vec![Analysis::Retaining, Analysis::Containment, Analysis::Ends];
    let mut out = None;
    let mut seed = None;
    let mut seen: Vec<String> = Vec::new();

    for (line, key, value) in tokenize(text)? {
        let err = |msg: String| CliError::Config { line, msg };
        if !KEYS.contains(&key.as_str()) {
            return Err(err(format!("unknown key `{key}`")));
        }
        if seen.contains(&key) {
            return Err(err(format!("duplicate key `{key}`")));
        }
        seen.push(key.clone());
        match key.as_str() {
            "model" => model = Some(value),
            "graph" => graph = Some(PathBuf::from(value)),
            "radius" => radius = Some((line, parse_num(line, &key, &value)?)),
            "fire" => fire = Some((line, parse_fire(line, &value)?)),
            "reach" => {
                let r: usize = parse_num(line, &key, &value)?;
                if r == 0 {
                    return Err(err("reach must be ≥ 1".into()));
                }
                reach = (line, r);
            }
            "strategy" => strategy = Some(parse_strategy(line, &value)?),
            "bound" => bound = Some(Bound::parse(&value).map_err(|e| err(e.to_string()))?),
            "horizon" => {
                let h: usize = parse_num(line, &key, &value)?;
                if h == 0 {
                    return Err(err("horizon must be ≥ 1".into()));
                }
                horizon = Some(h);
            }
            "c_max" => {
                c_max = parse_num(line, &key, &value)?;
                if c_max == 0 {
                    return Err(err("c_max must be ≥ 1".into()));
                }
            }
            "analysis" => analyses = parse_analyses(line, &value)?,
            "out" => out = Some(PathBuf::from(value)),
            "seed" => {
                if seedless {
                    return Err(err("seed given but --seedless asserts that no randomness is used".into()));
                }
                seed = Some(value);
            }
            _ => unreachable!("key list checked above"),
        }
    }

    let missing = |what: &str| CliError::Config {
        line: 0,
        msg: format!("missing required key `{what}`"),
    };
    let graph = match (model, graph, radius) {
        (Some(spec), None, Some((_, radius))) => GraphSource::Model { spec, radius },
        (Some(_), None, None) => return Err(missing("radius")),
        (None, Some(path), None) => GraphSource::File(path),
        (None, Some(_), Some((line, _))) => {
            return Err(CliError::Config {
                line,
                msg: "radius applies only to model truncations".into(),
            })
        }
        (Some(_), Some(_), _) => {
            return Err(CliError::Config {
                line: 0,
                msg: "give either model or graph, not both".into(),
            })
        }
        (None, None, _) => return Err(missing("model")),
    };
    let (fire_line, fire) = fire.ok_or_else(|| missing("fire"))?;
    let strategy = strategy.ok_or_else(|| missing("strategy"))?;

    if let (GraphSource::Model { radius, .. }, FireSpec::Ball { radius: fr, .. }) = (&graph, &fire) {
        if *radius <= fr + reach.1 {
            return Err(CliError::Config {
                line: fire_line,
                msg: format!("truncation radius {radius} must exceed fire radius {fr} plus reach {}", reach.1),
            });
        }
    }
    if let StrategySpec::Transport { q, .. } = &strategy {
        if reach.1 != 1 {
            return Err(CliError::Config {
                line: reach.0,
                msg: "transported games run at reach 1".into(),
            });
        }
        match &fire {
            FireSpec::Ball { radius, .. } if radius == q => {}
            _ => {
                return Err(CliError::Config {
                    line: fire_line,
                    msg: format!("transport needs fire=ball:<h0>:{q}"),
                })
            }
        }
        if !analyses.contains(&Analysis::Transport) {
            analyses.push(Analysis::Transport);
        }
    }
    let horizon = match &graph {
        GraphSource::Model { radius, .. } => Some(horizon.unwrap_or(2 * radius)),
        GraphSource::File(_) => horizon,
    };

    Ok(ExperimentConfig {
        graph,
        fire,
        reach: reach.1,
        strategy,
        bound,
        horizon,
        c_max,
        analyses,
        out,
        seed,
        base_dir: PathBuf::from("."),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_line_config() {
        let cfg = parse_config("model=F:2 radius=7 fire=ball:e:0 strategy=oneshot:trivial:0", false).unwrap();
        assert_eq!(
            cfg.graph,
            GraphSource::Model {
                spec: "F:2".into(),
                radius: 7
            }
        );
        assert_eq!(cfg.reach, 1);
        assert_eq!(cfg.c_max, 3);
        assert_eq!(cfg.horizon, Some(14));
        assert_eq!(
            cfg.strategy,
            StrategySpec::OneShot {
                subgroup: SubgroupSpec::trivial(),
                l: 0,
                translate: None
            }
        );
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "model=Z^d:2\nradius=6\n# comment\nreach=0\n";
        assert_eq!(
            parse_config(text, false).unwrap_err(),
            CliError::Config {
                line: 4,
                msg: "reach must be ≥ 1".into()
            }
        );
        let err = parse_config("model=Z^d:2\ncolour=red\n", false).unwrap_err();
        assert!(matches!(err, CliError::Config { line: 2, .. }));
        let err = parse_config("model=Z^d:2 radius=3\nfire=ball:e:2 strategy=empty", false).unwrap_err();
        assert!(matches!(err, CliError::Config { line: 2, .. }), "{err}");
        let err = parse_config("model=Z^d:2 radius=9 fire=ball:e:0 strategy=wall:x:1:0", false).unwrap_err();
        assert!(err.to_string().contains("one-shot"));
    }

    #[test]
    fn seedless_rejects_seed() {
        let text = "model=Z^d:1 radius=9 fire=ball:e:0 strategy=empty seed=7";
        assert_eq!(parse_config(text, false).unwrap().seed.as_deref(), Some("7"));
        assert!(matches!(parse_config(text, true), Err(CliError::Config { line: 1, .. })));
    }

    #[test]
    fn transport_requires_matching_ball() {
        let ok = "model=Z2alt radius=64 fire=ball:e:2 strategy=transport:src.cfg:2:2";
        let cfg = parse_config(ok, false).unwrap();
        assert!(cfg.analyses.contains(&Analysis::Transport));
        let bad = "model=Z2alt radius=64 fire=ball:e:3 strategy=transport:src.cfg:2:2";
        assert!(parse_config(bad, false).is_err());
    }

    #[test]
    fn strategies_and_bounds_parse() {
        let cfg = parse_config(
            "model=F2xZ radius=8 fire=ids:0 strategy=wall:t:1:1 bound=const:21 analysis=retaining horizon=5",
            false,
        )
        .unwrap();
        assert_eq!(cfg.bound, Some(Bound::Constant(21)));
        assert_eq!(cfg.analyses, vec![Analysis::Retaining]);
        assert_eq!(cfg.horizon, Some(5));
        assert_eq!(
            parse_strategy(1, "oneshot:trivial:0:aa").unwrap(),
            StrategySpec::OneShot {
                subgroup: SubgroupSpec::trivial(),
                l: 0,
                translate: Some("aa".into())
            }
        );
        assert!(parse_strategy(1, "greedy").is_err());
        assert!(parse_config("model=F:2 radius=4 fire=ids:0 strategy=empty analysis=vibes", false).is_err());
    }
}
