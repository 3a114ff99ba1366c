//! ASCII and SVG snapshots of a game at a given turn.

use std::fmt::Write;

use retain_core::{Error, GameTranscript, Graph, VertexSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Ascii,
    Svg,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Ascii => "txt",
            Format::Svg => "svg",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Cell {
    Burned,
    Protected,
    Unburned,
}

fn cells(t: &GameTranscript, turn: usize) -> impl Fn(usize) -> Cell + '_ {
    let turn = turn.min(t.turns());
    let burned = t.burned_at(turn);
    let protected: VertexSet = t.protected_through(turn);
    move |v| {
        if burned.contains(v) {
            Cell::Burned
        } else if protected.contains(v) {
            Cell::Protected
        } else {
            Cell::Unburned
        }
    }
}

fn parse_point(label: &str) -> Option<(i64, i64)> {
    let inner = label.strip_prefix('(')?.strip_suffix(')')?;
    let (x, y) = inner.split_once(',')?;
    Some((x.trim().parse().ok()?, y.trim().parse().ok()?))
}

/// Planar coordinates read from `(x,y)` vertex labels.
fn label_coordinates(g: &Graph) -> Option<Vec<(i64, i64)>> {
    (0..g.len()).map(|v| parse_point(g.label(v))).collect()
}

/// Coordinates of a graph whose labels are distinct lattice points and
/// whose edges are all unit steps.
pub fn grid_coordinates(g: &Graph) -> Option<Vec<(i64, i64)>> {
    let coords = label_coordinates(g)?;
    let mut seen = std::collections::HashSet::new();
    if !coords.iter().all(|p| seen.insert(*p)) {
        return None;
    }
    let unit = (0..g.len()).all(|u| {
        g.neighbors(u).iter().all(|&w| {
            let (a, b) = (coords[u], coords[w]);
            (a.0 - b.0).abs() + (a.1 - b.1).abs() == 1
        })
    });
    unit.then_some(coords)
}

/// One character per lattice point, top row is the largest `y`.
/// `#` burned, `/` protected, `.` unburned, blank off the graph.
pub fn render_ascii(g: &Graph, t: &GameTranscript, turn: usize) -> Result<String, Error> {
    let coords = grid_coordinates(g).ok_or(Error::NotAGrid)?;
    if coords.is_empty() {
        return Ok(String::new());
    }
    let cell = cells(t, turn);
    let (x_lo, x_hi) = (coords.iter().map(|p| p.0).min().unwrap(), coords.iter().map(|p| p.0).max().unwrap());
    let (y_lo, y_hi) = (coords.iter().map(|p| p.1).min().unwrap(), coords.iter().map(|p| p.1).max().unwrap());
    let width = (x_hi - x_lo + 1) as usize;
    let mut rows = vec![vec![b' '; width]; (y_hi - y_lo + 1) as usize];
    for (v, &(x, y)) in coords.iter().enumerate() {
        rows[(y_hi - y) as usize][(x - x_lo) as usize] = match cell(v) {
            Cell::Burned => b'#',
            Cell::Protected => b'/',
            Cell::Unburned => b'.',
        };
    }
    let mut out = String::new();
    for row in rows {
        out.push_str(String::from_utf8(row).expect("ascii").trim_end());
        out.push('\n');
    }
    Ok(out)
}

/// Concentric rings of BFS layers around vertex 0, ordered by id.
fn ring_layout(g: &Graph) -> Vec<(f64, f64)> {
    let mut pos = vec![(0.0, 0.0); g.len()];
    if g.is_empty() {
        return pos;
    }
    let dist = g.distances_from(&g.set_of([0]));
    let depth = dist.iter().flatten().copied().max().unwrap_or(0) as usize;
    // Unreachable vertices go on an extra outer ring.
    let mut layers = vec![Vec::new(); depth + 2];
    for (v, d) in dist.iter().enumerate() {
        layers[d.map_or(depth + 1, |d| d as usize)].push(v);
    }
    for (d, layer) in layers.iter().enumerate() {
        for (i, &v) in layer.iter().enumerate() {
            let angle = std::f64::consts::TAU * i as f64 / layer.len() as f64;
            pos[v] = (d as f64 * angle.cos(), d as f64 * angle.sin());
        }
    }
    pos
}

const UNIT: f64 = 12.0;

/// SVG with lattice positions when labels are points, rings otherwise.
/// Burned vertices are filled, protected ones hatched, unburned empty.
pub fn render_svg(g: &Graph, t: &GameTranscript, turn: usize) -> String {
    let pos: Vec<(f64, f64)> = match label_coordinates(g) {
        Some(c) => c.into_iter().map(|(x, y)| (x as f64, -(y as f64))).collect(),
        None => ring_layout(g),
    };
    let cell = cells(t, turn);
    let (mut x_lo, mut y_lo, mut x_hi, mut y_hi) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &(x, y) in &pos {
        x_lo = x_lo.min(x);
        y_lo = y_lo.min(y);
        x_hi = x_hi.max(x);
        y_hi = y_hi.max(y);
    }
    let px = |x: f64, lo: f64| (x - lo + 1.0) * UNIT;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}">"#,
        (x_hi - x_lo + 2.0) * UNIT,
        (y_hi - y_lo + 2.0) * UNIT
    );
    out.push_str(
        r##"<defs><pattern id="hatch" width="4" height="4" patternUnits="userSpaceOnUse" patternTransform="rotate(45)"><line x1="0" y1="0" x2="0" y2="4" stroke="#1f5fbf" stroke-width="2"/></pattern></defs>
"##,
    );
    let _ = writeln!(out, r#"<text x="2" y="10" font-size="9">turn {}</text>"#, turn.min(t.turns()));
    out.push_str("<g stroke=\"#bbbbbb\" stroke-width=\"0.5\">\n");
    for u in 0..g.len() {
        for &w in g.neighbors(u) {
            if u < w {
                let _ = writeln!(
                    out,
                    r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
                    px(pos[u].0, x_lo),
                    px(pos[u].1, y_lo),
                    px(pos[w].0, x_lo),
                    px(pos[w].1, y_lo)
                );
            }
        }
    }
    out.push_str("</g>\n<g stroke=\"#333333\" stroke-width=\"0.5\">\n");
    for (v, &(x, y)) in pos.iter().enumerate() {
        let fill = match cell(v) {
            Cell::Burned => "#c0392b",
            Cell::Protected => "url(#hatch)",
            Cell::Unburned => "#ffffff",
        };
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{:.1}" fill="{fill}"/>"#,
            px(x, x_lo),
            px(y, y_lo),
            UNIT * 0.4
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

pub fn render_snapshot(g: &Graph, t: &GameTranscript, turn: usize, format: Format) -> Result<String, Error> {
    match format {
        Format::Ascii => render_ascii(g, t, turn),
        Format::Svg => Ok(render_svg(g, t, turn)),
    }
}
