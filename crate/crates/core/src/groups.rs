//! Built-in finitely generated groups and their truncated Cayley graphs.
//!
//! Every model keeps elements in a canonical form, so equality of
//! [`Element`] values is equality of group elements. Generator lists are
//! closed under inverses; an involution appears once.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId, VertexSet};

/// Canonical form of a group element. The variant in use depends on the
/// model.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Element {
    /// Integer coordinates (free abelian groups).
    Vector(Vec<i64>),
    /// Residue mod n (finite cyclic groups).
    Residue(u64),
    /// Freely reduced word; letter `i + 1` is generator `i`, `-(i + 1)` its
    /// inverse.
    Word(Vec<i32>),
    /// Direct product.
    Pair(Box<Element>, Box<Element>),
    /// Free product normal form: alternating factor tags, nontrivial
    /// syllables.
    Syllables(Vec<(u8, Element)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub symbol: String,
    pub element: Element,
}

pub trait GroupModel: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    fn generators(&self) -> &[Generator];
    fn identity(&self) -> Element;
    fn multiply(&self, x: &Element, y: &Element) -> Element;
    fn inverse(&self, x: &Element) -> Element;
    fn format(&self, x: &Element) -> String;
    /// Membership in the subgroup generated by the named generators.
    fn in_generated_subgroup(&self, symbols: &[String], x: &Element) -> Result<bool>;

    fn generator_index(&self, symbol: &str) -> Option<usize> {
        self.generators().iter().position(|g| g.symbol == symbol)
    }
}

/// `x · s` for a generator symbol `s`.
pub fn canonical_mul(model: &dyn GroupModel, x: &Element, symbol: &str) -> Result<Element> {
    let s = model
        .generator_index(symbol)
        .ok_or_else(|| Error::UnknownGenerator(symbol.to_string()))?;
    Ok(model.multiply(x, &model.generators()[s].element))
}

/// Parses a word in generator symbols (longest symbol match first); `e`
/// and the empty string denote the identity.
pub fn parse_word(model: &dyn GroupModel, text: &str) -> Result<Element> {
    let text: String = text.chars().filter(|c| !c.is_whitespace() && *c != '.').collect();
    let mut x = model.identity();
    if text.is_empty() || text == "e" {
        return Ok(x);
    }
    let mut symbols: Vec<&Generator> = model.generators().iter().collect();
    symbols.sort_by_key(|g| std::cmp::Reverse(g.symbol.len()));
    let mut rest = text.as_str();
    while !rest.is_empty() {
        let g = symbols
            .iter()
            .find(|g| rest.starts_with(g.symbol.as_str()))
            .ok_or_else(|| Error::ElementParse(text.clone()))?;
        x = model.multiply(&x, &g.element);
        rest = &rest[g.symbol.len()..];
    }
    Ok(x)
}

/// `g^k` for integer `k`.
pub fn power(model: &dyn GroupModel, g: &Element, k: i64) -> Element {
    let base = if k < 0 { model.inverse(g) } else { g.clone() };
    let mut x = model.identity();
    for _ in 0..k.unsigned_abs() {
        x = model.multiply(&x, &base);
    }
    x
}

fn letter_symbols(index: usize) -> (String, String) {
    const LETTERS: &[u8] = b"abcdfghjklmnopqrsuvw";
    if index < LETTERS.len() {
        let c = LETTERS[index] as char;
        (c.to_string(), c.to_ascii_uppercase().to_string())
    } else {
        (format!("g{index}"), format!("G{index}"))
    }
}

/// Z^d with the standard basis.
#[derive(Debug, Clone)]
pub struct FreeAbelian {
    dim: usize,
    gens: Vec<Generator>,
    name: String,
}

impl FreeAbelian {
    pub fn new(dim: usize) -> Self {
        const AXES: &[&str] = &["x", "y", "z", "w"];
        let symbols: Vec<(String, String)> = (0..dim)
            .map(|i| match AXES.get(i) {
                Some(s) => (s.to_string(), s.to_uppercase()),
                None => (format!("e{i}"), format!("E{i}")),
            })
            .collect();
        Self::with_symbols(dim, &symbols, format!("Z^{dim}"))
    }

    pub fn with_symbols(dim: usize, symbols: &[(String, String)], name: String) -> Self {
        assert_eq!(symbols.len(), dim);
        let mut gens = Vec::with_capacity(2 * dim);
        for (i, (pos, neg)) in symbols.iter().enumerate() {
            let mut v = vec![0; dim];
            v[i] = 1;
            gens.push(Generator {
                symbol: pos.clone(),
                element: Element::Vector(v.clone()),
            });
            v[i] = -1;
            gens.push(Generator {
                symbol: neg.clone(),
                element: Element::Vector(v),
            });
        }
        Self { dim, gens, name }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

fn vector(x: &Element) -> &[i64] {
    match x {
        Element::Vector(v) => v,
        other => panic!("expected a vector element, got {other:?}"),
    }
}

fn format_vector(v: &[i64]) -> String {
    let parts: Vec<String> = v.iter().map(i64::to_string).collect();
    format!("({})", parts.join(","))
}

/// Integer row reduction; returns echelon rows.
fn echelon(rows: &[Vec<i64>], dim: usize) -> Vec<Vec<i64>> {
    let mut rows: Vec<Vec<i64>> = rows.iter().filter(|r| r.iter().any(|&c| c != 0)).cloned().collect();
    let mut pivot_row = 0;
    for col in 0..dim {
        loop {
            let candidates: Vec<usize> = (pivot_row..rows.len()).filter(|&r| rows[r][col] != 0).collect();
            if candidates.len() <= 1 {
                if let Some(&r) = candidates.first() {
                    rows.swap(pivot_row, r);
                    pivot_row += 1;
                }
                break;
            }
            let &best = candidates
                .iter()
                .min_by_key(|&&r| rows[r][col].abs())
                .expect("nonempty");
            for &r in &candidates {
                if r == best {
                    continue;
                }
                let q = rows[r][col] / rows[best][col];
                let pivot = rows[best].clone();
                for (a, b) in rows[r].iter_mut().zip(&pivot) {
                    *a -= q * b;
                }
            }
        }
        if pivot_row == rows.len() {
            break;
        }
    }
    rows.retain(|r| r.iter().any(|&c| c != 0));
    rows
}

fn lattice_contains(gens: &[Vec<i64>], x: &[i64]) -> bool {
    let mut x = x.to_vec();
    for row in echelon(gens, x.len()) {
        let col = row.iter().position(|&c| c != 0).expect("nonzero row");
        if x[col] % row[col] != 0 {
            return false;
        }
        let q = x[col] / row[col];
        for (a, b) in x.iter_mut().zip(&row) {
            *a -= q * b;
        }
    }
    x.iter().all(|&c| c == 0)
}

fn generated_vectors(model: &dyn GroupModel, symbols: &[String]) -> Result<Vec<Vec<i64>>> {
    symbols
        .iter()
        .map(|s| {
            let i = model
                .generator_index(s)
                .ok_or_else(|| Error::UnknownGenerator(s.clone()))?;
            Ok(vector(&model.generators()[i].element).to_vec())
        })
        .collect()
}

impl GroupModel for FreeAbelian {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn generators(&self) -> &[Generator] {
        &self.gens
    }
    fn identity(&self) -> Element {
        Element::Vector(vec![0; self.dim])
    }
    fn multiply(&self, x: &Element, y: &Element) -> Element {
        Element::Vector(vector(x).iter().zip(vector(y)).map(|(a, b)| a + b).collect())
    }
    fn inverse(&self, x: &Element) -> Element {
        Element::Vector(vector(x).iter().map(|a| -a).collect())
    }
    fn format(&self, x: &Element) -> String {
        format_vector(vector(x))
    }
    fn in_generated_subgroup(&self, symbols: &[String], x: &Element) -> Result<bool> {
        Ok(lattice_contains(&generated_vectors(self, symbols)?, vector(x)))
    }
}

/// Z^2 generated by x, y and their sum xy (and inverses).
#[derive(Debug, Clone)]
pub struct AltPlane {
    gens: Vec<Generator>,
}

impl Default for AltPlane {
    fn default() -> Self {
        Self::new()
    }
}

impl AltPlane {
    pub fn new() -> Self {
        let g = |s: &str, v: [i64; 2]| Generator {
            symbol: s.to_string(),
            element: Element::Vector(v.to_vec()),
        };
        Self {
            gens: vec![
                g("x", [1, 0]),
                g("X", [-1, 0]),
                g("y", [0, 1]),
                g("Y", [0, -1]),
                g("xy", [1, 1]),
                g("XY", [-1, -1]),
            ],
        }
    }
}

impl GroupModel for AltPlane {
    fn name(&self) -> String {
        "Z2alt".into()
    }
    fn generators(&self) -> &[Generator] {
        &self.gens
    }
    fn identity(&self) -> Element {
        Element::Vector(vec![0, 0])
    }
    fn multiply(&self, x: &Element, y: &Element) -> Element {
        Element::Vector(vector(x).iter().zip(vector(y)).map(|(a, b)| a + b).collect())
    }
    fn inverse(&self, x: &Element) -> Element {
        Element::Vector(vector(x).iter().map(|a| -a).collect())
    }
    fn format(&self, x: &Element) -> String {
        format_vector(vector(x))
    }
    fn in_generated_subgroup(&self, symbols: &[String], x: &Element) -> Result<bool> {
        Ok(lattice_contains(&generated_vectors(self, symbols)?, vector(x)))
    }
}

/// Free group on `rank` letters a, b, c, ... (inverses upper case).
#[derive(Debug, Clone)]
pub struct FreeGroup {
    rank: usize,
    gens: Vec<Generator>,
    letters: Vec<(String, String)>,
}

impl FreeGroup {
    pub fn new(rank: usize) -> Self {
        let letters: Vec<(String, String)> = (0..rank).map(letter_symbols).collect();
        let mut gens = Vec::with_capacity(2 * rank);
        for (i, (lo, up)) in letters.iter().enumerate() {
            let l = i as i32 + 1;
            gens.push(Generator {
                symbol: lo.clone(),
                element: Element::Word(vec![l]),
            });
            gens.push(Generator {
                symbol: up.clone(),
                element: Element::Word(vec![-l]),
            });
        }
        Self { rank, gens, letters }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }
}

fn word(x: &Element) -> &[i32] {
    match x {
        Element::Word(w) => w,
        other => panic!("expected a word element, got {other:?}"),
    }
}

impl GroupModel for FreeGroup {
    fn name(&self) -> String {
        format!("F{}", self.rank)
    }
    fn generators(&self) -> &[Generator] {
        &self.gens
    }
    fn identity(&self) -> Element {
        Element::Word(Vec::new())
    }
    fn multiply(&self, x: &Element, y: &Element) -> Element {
        let mut out = word(x).to_vec();
        for &l in word(y) {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Element::Word(out)
    }
    fn inverse(&self, x: &Element) -> Element {
        Element::Word(word(x).iter().rev().map(|l| -l).collect())
    }
    fn format(&self, x: &Element) -> String {
        let w = word(x);
        if w.is_empty() {
            return "e".into();
        }
        w.iter()
            .map(|&l| {
                let (lo, up) = &self.letters[(l.unsigned_abs() - 1) as usize];
                if l > 0 {
                    lo.as_str()
                } else {
                    up.as_str()
                }
            })
            .collect()
    }
    fn in_generated_subgroup(&self, symbols: &[String], x: &Element) -> Result<bool> {
        let mut allowed = vec![false; self.rank];
        for s in symbols {
            let i = self
                .generator_index(s)
                .ok_or_else(|| Error::UnknownGenerator(s.clone()))?;
            allowed[i / 2] = true;
        }
        Ok(word(x).iter().all(|&l| allowed[(l.unsigned_abs() - 1) as usize]))
    }
}

/// Z/n with generator `c` (an involution when n = 2).
#[derive(Debug, Clone)]
pub struct Cyclic {
    order: u64,
    gens: Vec<Generator>,
}

impl Cyclic {
    pub fn new(order: u64) -> Self {
        assert!(order >= 2, "cyclic group of order {order}");
        let mut gens = vec![Generator {
            symbol: "c".into(),
            element: Element::Residue(1),
        }];
        if order > 2 {
            gens.push(Generator {
                symbol: "C".into(),
                element: Element::Residue(order - 1),
            });
        }
        Self { order, gens }
    }
}

fn residue(x: &Element) -> u64 {
    match x {
        Element::Residue(r) => *r,
        other => panic!("expected a residue element, got {other:?}"),
    }
}

impl GroupModel for Cyclic {
    fn name(&self) -> String {
        format!("Z/{}", self.order)
    }
    fn generators(&self) -> &[Generator] {
        &self.gens
    }
    fn identity(&self) -> Element {
        Element::Residue(0)
    }
    fn multiply(&self, x: &Element, y: &Element) -> Element {
        Element::Residue((residue(x) + residue(y)) % self.order)
    }
    fn inverse(&self, x: &Element) -> Element {
        Element::Residue((self.order - residue(x)) % self.order)
    }
    fn format(&self, x: &Element) -> String {
        match residue(x) {
            0 => "e".into(),
            1 => "c".into(),
            k => format!("c^{k}"),
        }
    }
    fn in_generated_subgroup(&self, symbols: &[String], x: &Element) -> Result<bool> {
        for s in symbols {
            self.generator_index(s)
                .ok_or_else(|| Error::UnknownGenerator(s.clone()))?;
        }
        Ok(!symbols.is_empty() || residue(x) == 0)
    }
}

/// Renames `symbol` with primes until it avoids `taken`.
fn fresh_symbol(symbol: &str, taken: &[String]) -> String {
    let mut s = symbol.to_string();
    while taken.contains(&s) {
        s.push('\'');
    }
    s
}

/// Generator tables shared by the product combinators: symbol -> (factor,
/// symbol inside the factor).
fn combined_generators(
    left: &dyn GroupModel,
    right: &dyn GroupModel,
    embed: impl Fn(u8, &Element) -> Element,
) -> (Vec<Generator>, Vec<(u8, String)>) {
    let mut gens = Vec::new();
    let mut origin = Vec::new();
    let mut taken: Vec<String> = Vec::new();
    for (side, model) in [(0u8, left), (1u8, right)] {
        for g in model.generators() {
            let symbol = fresh_symbol(&g.symbol, &taken);
            taken.push(symbol.clone());
            gens.push(Generator {
                symbol,
                element: embed(side, &g.element),
            });
            origin.push((side, g.symbol.clone()));
        }
    }
    (gens, origin)
}

fn split_symbols(
    gens: &[Generator],
    origin: &[(u8, String)],
    symbols: &[String],
) -> Result<[Vec<String>; 2]> {
    let mut parts: [Vec<String>; 2] = [Vec::new(), Vec::new()];
    for s in symbols {
        let i = gens
            .iter()
            .position(|g| &g.symbol == s)
            .ok_or_else(|| Error::UnknownGenerator(s.clone()))?;
        let (side, inner) = &origin[i];
        parts[*side as usize].push(inner.clone());
    }
    Ok(parts)
}

/// Direct product A × B; elements are pairs.
#[derive(Debug, Clone)]
pub struct Product {
    left: Arc<dyn GroupModel>,
    right: Arc<dyn GroupModel>,
    gens: Vec<Generator>,
    origin: Vec<(u8, String)>,
    name: String,
}

impl Product {
    pub fn new(left: Arc<dyn GroupModel>, right: Arc<dyn GroupModel>) -> Self {
        let name = format!("prod({},{})", left.name(), right.name());
        Self::named(left, right, name)
    }

    fn named(left: Arc<dyn GroupModel>, right: Arc<dyn GroupModel>, name: String) -> Self {
        let (le, re) = (left.identity(), right.identity());
        let (gens, origin) = combined_generators(left.as_ref(), right.as_ref(), |side, x| {
            if side == 0 {
                Element::Pair(Box::new(x.clone()), Box::new(re.clone()))
            } else {
                Element::Pair(Box::new(le.clone()), Box::new(x.clone()))
            }
        });
        Self {
            left,
            right,
            gens,
            origin,
            name,
        }
    }

    /// F2 × Z with free letters a, b and central generator t. This is the
    /// amalgam (Z × Z) *_Z (Z × Z) over the central Z.
    pub fn f2_times_z() -> Self {
        let z = FreeAbelian::with_symbols(1, &[("t".into(), "T".into())], "Z".into());
        Self::named(Arc::new(FreeGroup::new(2)), Arc::new(z), "F2xZ".into())
    }
}

fn pair(x: &Element) -> (&Element, &Element) {
    match x {
        Element::Pair(a, b) => (a, b),
        other => panic!("expected a pair element, got {other:?}"),
    }
}

impl GroupModel for Product {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn generators(&self) -> &[Generator] {
        &self.gens
    }
    fn identity(&self) -> Element {
        Element::Pair(Box::new(self.left.identity()), Box::new(self.right.identity()))
    }
    fn multiply(&self, x: &Element, y: &Element) -> Element {
        let ((xa, xb), (ya, yb)) = (pair(x), pair(y));
        Element::Pair(
            Box::new(self.left.multiply(xa, ya)),
            Box::new(self.right.multiply(xb, yb)),
        )
    }
    fn inverse(&self, x: &Element) -> Element {
        let (a, b) = pair(x);
        Element::Pair(Box::new(self.left.inverse(a)), Box::new(self.right.inverse(b)))
    }
    fn format(&self, x: &Element) -> String {
        let (a, b) = pair(x);
        format!("({};{})", self.left.format(a), self.right.format(b))
    }
    fn in_generated_subgroup(&self, symbols: &[String], x: &Element) -> Result<bool> {
        let [ls, rs] = split_symbols(&self.gens, &self.origin, symbols)?;
        let (a, b) = pair(x);
        Ok(self.left.in_generated_subgroup(&ls, a)? && self.right.in_generated_subgroup(&rs, b)?)
    }
}

/// Free product A * B in alternating normal form.
#[derive(Debug, Clone)]
pub struct FreeProduct {
    factors: [Arc<dyn GroupModel>; 2],
    gens: Vec<Generator>,
    origin: Vec<(u8, String)>,
}

impl FreeProduct {
    pub fn new(left: Arc<dyn GroupModel>, right: Arc<dyn GroupModel>) -> Self {
        let (gens, origin) = combined_generators(left.as_ref(), right.as_ref(), |side, x| {
            Element::Syllables(vec![(side, x.clone())])
        });
        Self {
            factors: [left, right],
            gens,
            origin,
        }
    }
}

fn syllables(x: &Element) -> &[(u8, Element)] {
    match x {
        Element::Syllables(s) => s,
        other => panic!("expected a free product element, got {other:?}"),
    }
}

impl GroupModel for FreeProduct {
    fn name(&self) -> String {
        format!("free({},{})", self.factors[0].name(), self.factors[1].name())
    }
    fn generators(&self) -> &[Generator] {
        &self.gens
    }
    fn identity(&self) -> Element {
        Element::Syllables(Vec::new())
    }
    fn multiply(&self, x: &Element, y: &Element) -> Element {
        let mut out = syllables(x).to_vec();
        let mut rest = syllables(y).iter();
        for (side, s) in rest.by_ref() {
            match out.last_mut() {
                Some((last_side, last)) if last_side == side => {
                    let factor = &self.factors[*side as usize];
                    let merged = factor.multiply(last, s);
                    if merged == factor.identity() {
                        out.pop();
                        continue;
                    }
                    *last = merged;
                }
                _ => out.push((*side, s.clone())),
            }
            break;
        }
        out.extend(rest.cloned());
        Element::Syllables(out)
    }
    fn inverse(&self, x: &Element) -> Element {
        Element::Syllables(
            syllables(x)
                .iter()
                .rev()
                .map(|(side, s)| (*side, self.factors[*side as usize].inverse(s)))
                .collect(),
        )
    }
    fn format(&self, x: &Element) -> String {
        let s = syllables(x);
        if s.is_empty() {
            return "e".into();
        }
        s.iter()
            .map(|(side, e)| self.factors[*side as usize].format(e))
            .collect::<Vec<_>>()
            .join("*")
    }
    fn in_generated_subgroup(&self, symbols: &[String], x: &Element) -> Result<bool> {
        let parts = split_symbols(&self.gens, &self.origin, symbols)?;
        for (side, s) in syllables(x) {
            let i = *side as usize;
            if !self.factors[i].in_generated_subgroup(&parts[i], s)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Splits `a,b` at top-level commas.
fn split_top_level(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => return Some((&s[..i], &s[i + 1..])),
            _ => {}
        }
    }
    None
}

/// Parses a model selection string: `Z^d:<d>`, `F:<k>`, `Z2alt`, `F2xZ`,
/// `Z/<n>`, `prod(<m>,<m>)`, `free(<m>,<m>)`.
pub fn parse_model(spec: &str) -> Result<Arc<dyn GroupModel>> {
    let s = spec.trim();
    let bad = || Error::ModelParse(spec.to_string());
    let number = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
    if let Some(d) = s.strip_prefix("Z^d:") {
        let d = number(d)?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Arc::new(FreeAbelian::new(d as usize)));
    }
    if let Some(k) = s.strip_prefix("F:") {
        let k = number(k)?;
        if k == 0 {
            return Err(bad());
        }
        return Ok(Arc::new(FreeGroup::new(k as usize)));
    }
    if let Some(n) = s.strip_prefix("Z/") {
        let n = number(n)?;
        if n < 2 {
            return Err(bad());
        }
        return Ok(Arc::new(Cyclic::new(n)));
    }
    match s {
        "Z2alt" => return Ok(Arc::new(AltPlane::new())),
        "F2xZ" => return Ok(Arc::new(Product::f2_times_z())),
        _ => {}
    }
    for (prefix, is_product) in [("prod(", true), ("free(", false)] {
        if let Some(inner) = s.strip_prefix(prefix).and_then(|r| r.strip_suffix(')')) {
            let (a, b) = split_top_level(inner).ok_or_else(bad)?;
            let (a, b) = (parse_model(a)?, parse_model(b)?);
            return Ok(if is_product {
                Arc::new(Product::new(a, b))
            } else {
                Arc::new(FreeProduct::new(a, b))
            });
        }
    }
    Err(bad())
}

/// A subgroup generated by some of the ambient generators. The trivial
/// subgroup has no generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgroupSpec {
    symbols: Vec<String>,
}

impl SubgroupSpec {
    pub fn trivial() -> Self {
        Self { symbols: Vec::new() }
    }

    pub fn generated_by<S: AsRef<str>>(symbols: &[S]) -> Self {
        Self {
            symbols: symbols.iter().map(|s| s.as_ref().to_string()).collect(),
        }
    }

    /// `trivial`, or generator symbols joined by `+` (e.g. `t`, `x+y`).
    pub fn parse(text: &str) -> Self {
        match text.trim() {
            "" | "trivial" => Self::trivial(),
            t => Self {
                symbols: t.split('+').map(|s| s.trim().to_string()).collect(),
            },
        }
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn is_trivial(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn contains(&self, model: &dyn GroupModel, x: &Element) -> Result<bool> {
        model.in_generated_subgroup(&self.symbols, x)
    }
}

impl fmt::Display for SubgroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.symbols.is_empty() {
            f.write_str("trivial")
        } else {
            f.write_str(&self.symbols.join("+"))
        }
    }
}

/// The ball of radius `radius` around the identity in a Cayley graph.
/// Vertex ids follow BFS discovery order; the identity is vertex 0.
#[derive(Debug, Clone)]
pub struct CayleyBall {
    model: Arc<dyn GroupModel>,
    radius: usize,
    graph: Graph,
    elements: Vec<Element>,
    index: HashMap<Element, VertexId>,
    word_length: Vec<usize>,
    layer_sizes: Vec<usize>,
}

impl CayleyBall {
    pub fn build(model: Arc<dyn GroupModel>, radius: usize) -> Self {
        let gens: Vec<Element> = model.generators().iter().map(|g| g.element.clone()).collect();
        let mut elements = vec![model.identity()];
        let mut index = HashMap::from([(model.identity(), 0)]);
        let mut word_length = vec![0];
        let mut layer_sizes = vec![1];
        let mut edges = Vec::new();
        let mut layer_start = 0;
        for len in 1..=radius {
            let layer_end = elements.len();
            for u in layer_start..layer_end {
                for s in &gens {
                    let x = model.multiply(&elements[u], s);
                    let v = match index.get(&x) {
                        Some(&v) => v,
                        None => {
                            let v = elements.len();
                            index.insert(x.clone(), v);
                            elements.push(x);
                            word_length.push(len);
                            v
                        }
                    };
                    edges.push((u, v));
                }
            }
            layer_sizes.push(elements.len() - layer_end);
            layer_start = layer_end;
        }
        // Edges inside the outermost layer.
        for u in layer_start..elements.len() {
            for s in &gens {
                if let Some(&v) = index.get(&model.multiply(&elements[u], s)) {
                    edges.push((u, v));
                }
            }
        }
        let n = elements.len();
        let boundary = VertexSet::from_ids(n, (0..n).filter(|&v| word_length[v] == radius));
        let labels = elements.iter().map(|x| model.format(x)).collect();
        let graph = Graph::from_edges(n, edges)
            .expect("edges between discovered elements")
            .with_degree_bound(gens.len())
            .with_boundary(boundary)
            .with_labels(labels);
        Self {
            model,
            radius,
            graph,
            elements,
            index,
            word_length,
            layer_sizes,
        }
    }

    pub fn model(&self) -> &dyn GroupModel {
        self.model.as_ref()
    }

    pub fn model_arc(&self) -> Arc<dyn GroupModel> {
        Arc::clone(&self.model)
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn identity_vertex(&self) -> VertexId {
        0
    }

    pub fn element(&self, v: VertexId) -> &Element {
        &self.elements[v]
    }

    pub fn vertex_of(&self, x: &Element) -> Option<VertexId> {
        self.index.get(x).copied()
    }

    pub fn word_length(&self, v: VertexId) -> usize {
        self.word_length[v]
    }

    /// Number of elements of each word length, as counted during BFS.
    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    /// Parses a word and looks it up in the ball.
    pub fn vertex_of_word(&self, text: &str) -> Result<VertexId> {
        let x = parse_word(self.model(), text)?;
        self.vertex_of(&x)
            .ok_or_else(|| Error::TranslateEscapes(self.model.format(&x)))
    }

    /// Elements of the left coset `g·C` inside the ball.
    pub fn coset_members(&self, g: &Element, sub: &SubgroupSpec) -> Result<VertexSet> {
        let g_inv = self.model.inverse(g);
        let mut set = self.graph.empty_set();
        for (v, x) in self.elements.iter().enumerate() {
            if sub.contains(self.model(), &self.model.multiply(&g_inv, x))? {
                set.insert(v);
            }
        }
        Ok(set)
    }

    pub fn subgroup_members(&self, sub: &SubgroupSpec) -> Result<VertexSet> {
        self.coset_members(&self.model.identity(), sub)
    }

    /// `L = { x : dist(x, C) <= l }` inside the ball, distances measured in
    /// the ball graph.
    pub fn subgroup_neighborhood(&self, sub: &SubgroupSpec, l: usize) -> Result<VertexSet> {
        if l >= self.radius {
            return Err(Error::WallTooThick {
                l,
                radius: self.radius,
            });
        }
        Ok(self.graph.ball(&self.subgroup_members(sub)?, l))
    }

    /// `g·L = { x : dist(x, gC) <= l }` inside the ball.
    pub fn coset_neighborhood(&self, g: &Element, sub: &SubgroupSpec, l: usize) -> Result<VertexSet> {
        if l >= self.radius {
            return Err(Error::WallTooThick {
                l,
                radius: self.radius,
            });
        }
        Ok(self.graph.ball(&self.coset_members(g, sub)?, l))
    }

    /// Left translate `{ g·s : s in S }`; fails when a product leaves the
    /// ball.
    pub fn translate_set(&self, g: &Element, set: &VertexSet) -> Result<VertexSet> {
        let mut out = self.graph.empty_set();
        let mut escaping = Vec::new();
        for v in set.iter() {
            let x = self.model.multiply(g, &self.elements[v]);
            match self.vertex_of(&x) {
                Some(w) => {
                    out.insert(w);
                }
                None => escaping.push(self.model.format(&x)),
            }
        }
        if escaping.is_empty() {
            Ok(out)
        } else {
            Err(Error::TranslateEscapes(escaping.join(", ")))
        }
    }

    /// Planar coordinates when elements are points of Z^2.
    pub fn grid_coordinates(&self) -> Option<Vec<(i64, i64)>> {
        self.elements
            .iter()
            .map(|x| match x {
                Element::Vector(v) if v.len() == 2 => Some((v[0], v[1])),
                _ => None,
            })
            .collect()
    }
}
