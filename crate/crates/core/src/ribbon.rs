//! Ribbon graphs, bifurcation arcs and the tree proposition.
//!
//! Cyclic orders are stored counterclockwise. "Clockwise of position `i`"
//! is index `i − 1`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::FoliationAnalysis;
use crate::convexity::{giroux_graph, GraphNode};
use crate::error::{Error, Result};

/// A half-edge or an arc attachment in a cyclic order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "type", content = "id", rename_all = "snake_case")]
pub enum Dart {
    Edge(usize),
    /// Origin slot of arc `k`.
    ArcOut(u8),
    /// Destination slot of arc `k`.
    ArcIn(u8),
}

impl Dart {
    pub fn is_edge(self) -> bool {
        matches!(self, Dart::Edge(_))
    }
}

/// Which way "to the right" is read: the convention of the proposition, or
/// its mirror (the reversed arc).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Chirality {
    Clockwise,
    Counterclockwise,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BifurcationArc {
    pub label: u8,
    pub origin: usize,
    pub origin_slot: usize,
    pub destination: usize,
    pub destination_slot: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RibbonGraph {
    rotation: Vec<Vec<Dart>>,
}

impl RibbonGraph {
    pub fn new(rotation: Vec<Vec<Dart>>) -> Result<Self> {
        let g = Self { rotation };
        g.validate()?;
        Ok(g)
    }

    /// Builds a graph from counterclockwise neighbour lists. Each unordered
    /// pair of adjacent vertices is one edge.
    pub fn from_neighbors(adj: &[Vec<usize>]) -> Result<Self> {
        let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut rotation = Vec::with_capacity(adj.len());
        for (v, list) in adj.iter().enumerate() {
            let mut darts = Vec::with_capacity(list.len());
            for &w in list {
                let key = (v.min(w), v.max(w));
                let n = ids.len();
                darts.push(Dart::Edge(*ids.entry(key).or_insert(n)));
            }
            rotation.push(darts);
        }
        Self::new(rotation)
    }

    pub fn single_vertex() -> Self {
        Self {
            rotation: vec![Vec::new()],
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.rotation.len()
    }

    pub fn rotation(&self, v: usize) -> &[Dart] {
        &self.rotation[v]
    }

    /// Edge id → endpoints (equal for a loop).
    pub fn edges(&self) -> BTreeMap<usize, (usize, usize)> {
        let mut ends: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (v, ds) in self.rotation.iter().enumerate() {
            for d in ds {
                if let Dart::Edge(e) = d {
                    ends.entry(*e).or_default().push(v);
                }
            }
        }
        ends.into_iter().map(|(e, vs)| (e, (vs[0], vs[1]))).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.rotation.iter().flatten().filter(|d| d.is_edge()).count() / 2
    }

    fn validate(&self) -> Result<()> {
        let mut count: BTreeMap<Dart, usize> = BTreeMap::new();
        for d in self.rotation.iter().flatten() {
            *count.entry(*d).or_default() += 1;
        }
        for (d, n) in &count {
            match d {
                Dart::Edge(e) if *n != 2 => {
                    return Err(Error::Precondition(format!("edge {e} has {n} half-edges")))
                }
                Dart::ArcOut(k) | Dart::ArcIn(k) if *n != 1 => {
                    return Err(Error::Precondition(format!(
                        "arc {k} attached {n} times at one end"
                    )))
                }
                Dart::ArcOut(k) if !count.contains_key(&Dart::ArcIn(*k)) => {
                    return Err(Error::Precondition(format!("arc {k} has no destination")))
                }
                Dart::ArcIn(k) if !count.contains_key(&Dart::ArcOut(*k)) => {
                    return Err(Error::Precondition(format!("arc {k} has no origin")))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn find(&self, dart: Dart) -> Option<(usize, usize)> {
        self.rotation
            .iter()
            .enumerate()
            .find_map(|(v, ds)| ds.iter().position(|d| *d == dart).map(|i| (v, i)))
    }

    pub fn arc(&self, label: u8) -> Option<BifurcationArc> {
        let (origin, origin_slot) = self.find(Dart::ArcOut(label))?;
        let (destination, destination_slot) = self.find(Dart::ArcIn(label))?;
        Some(BifurcationArc {
            label,
            origin,
            origin_slot,
            destination,
            destination_slot,
        })
    }

    pub fn arcs(&self) -> Vec<BifurcationArc> {
        let labels: BTreeSet<u8> = self
            .rotation
            .iter()
            .flatten()
            .filter_map(|d| match d {
                Dart::ArcOut(k) => Some(*k),
                _ => None,
            })
            .collect();
        labels.into_iter().filter_map(|k| self.arc(k)).collect()
    }

    /// Inserts `dart` at position `pos` of the cyclic order at `v`.
    pub fn with_dart(&self, v: usize, pos: usize, dart: Dart) -> Result<Self> {
        if v >= self.vertex_count() || pos > self.rotation[v].len() {
            return Err(Error::Precondition(format!("no slot {pos} at vertex {v}")));
        }
        let mut rotation = self.rotation.clone();
        rotation[v].insert(pos, dart);
        Ok(Self { rotation })
    }

    /// Adds arc `label` with its origin and destination slots.
    pub fn with_arc(&self, label: u8, origin: (usize, usize), destination: (usize, usize)) -> Result<Self> {
        if self.find(Dart::ArcOut(label)).is_some() {
            return Err(Error::Precondition(format!("arc {label} already present")));
        }
        self.with_dart(origin.0, origin.1, Dart::ArcOut(label))?
            .with_dart(destination.0, destination.1, Dart::ArcIn(label))
    }

    pub fn without_arcs(&self) -> Self {
        Self {
            rotation: self
                .rotation
                .iter()
                .map(|ds| ds.iter().copied().filter(|d| d.is_edge()).collect())
                .collect(),
        }
    }

    fn union_find(&self) -> (Vec<usize>, bool) {
        fn root(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut parent: Vec<usize> = (0..self.vertex_count()).collect();
        let mut acyclic = true;
        for (a, b) in self.edges().into_values() {
            let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
            if ra == rb {
                acyclic = false;
            } else {
                parent[ra] = rb;
            }
        }
        let roots = (0..parent.len()).map(|v| root(&mut parent, v)).collect();
        (roots, acyclic)
    }

    pub fn component_count(&self) -> usize {
        self.union_find().0.into_iter().collect::<BTreeSet<_>>().len()
    }

    pub fn is_tree(&self) -> bool {
        let (roots, acyclic) = self.union_find();
        acyclic && self.edge_count() + 1 == self.vertex_count() && roots.iter().all(|r| *r == roots[0])
    }

    /// Position of the other half of the edge at `(v, i)`.
    fn partner(&self, v: usize, i: usize) -> (usize, usize) {
        let d = self.rotation[v][i];
        for (w, ds) in self.rotation.iter().enumerate() {
            for (j, e) in ds.iter().enumerate() {
                if *e == d && (w, j) != (v, i) {
                    return (w, j);
                }
            }
        }
        unreachable!("validated half-edge pairing")
    }

    /// Next edge dart counterclockwise after position `i` at `v`, with the
    /// arc darts passed over.
    fn next_edge_ccw(&self, v: usize, i: usize) -> (usize, Vec<Dart>) {
        let ds = &self.rotation[v];
        let n = ds.len();
        let mut skipped = Vec::new();
        let mut j = (i + 1) % n;
        while !ds[j].is_edge() {
            skipped.push(ds[j]);
            j = (j + 1) % n;
        }
        (j, skipped)
    }

    /// Boundary walks of the faces; each entry lists the visited
    /// `(vertex, position)` corners and the arc darts met in them.
    fn faces(&self) -> Vec<(Vec<(usize, usize)>, Vec<Dart>)> {
        let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut out = Vec::new();
        for (v, ds) in self.rotation.iter().enumerate() {
            for (i, d) in ds.iter().enumerate() {
                if !d.is_edge() || seen.contains(&(v, i)) {
                    continue;
                }
                let mut walk = Vec::new();
                let mut arcs = Vec::new();
                let (mut cv, mut ci) = (v, i);
                loop {
                    seen.insert((cv, ci));
                    walk.push((cv, ci));
                    let (w, k) = self.partner(cv, ci);
                    let (j, skipped) = self.next_edge_ccw(w, k);
                    arcs.extend(skipped);
                    (cv, ci) = (w, j);
                    if (cv, ci) == (v, i) {
                        break;
                    }
                }
                out.push((walk, arcs));
            }
        }
        out
    }

    /// Each component with an edge satisfies `V − E + F = 2`.
    pub fn is_planar(&self) -> bool {
        let (roots, _) = self.union_find();
        let mut v: BTreeMap<usize, i64> = BTreeMap::new();
        let mut e: BTreeMap<usize, i64> = BTreeMap::new();
        let mut f: BTreeMap<usize, i64> = BTreeMap::new();
        for r in &roots {
            *v.entry(*r).or_default() += 1;
        }
        for (a, _) in self.edges().into_values() {
            *e.entry(roots[a]).or_default() += 1;
        }
        for (walk, _) in self.faces() {
            *f.entry(roots[walk[0].0]).or_default() += 1;
        }
        e.iter()
            .all(|(r, ne)| v[r] - ne + f.get(r).copied().unwrap_or(0) == 2)
    }

    /// Arc labels in the order they are met around the boundary of a tree.
    fn boundary_arc_labels(&self) -> Vec<u8> {
        let label = |d: &Dart| match d {
            Dart::ArcOut(k) | Dart::ArcIn(k) => *k,
            Dart::Edge(_) => unreachable!(),
        };
        if self.edge_count() == 0 {
            return self.rotation.iter().flatten().map(label).collect();
        }
        let faces = self.faces();
        faces[0].1.iter().map(label).collect()
    }

    /// Two arcs whose ends alternate around the boundary of a tree cannot be
    /// drawn disjointly in the complement.
    pub fn arcs_cross(&self) -> bool {
        let mut red: Vec<u8> = Vec::new();
        for x in self.boundary_arc_labels() {
            if red.last() != Some(&x) {
                red.push(x);
            }
        }
        if red.len() > 1 && red.first() == red.last() {
            red.pop();
        }
        red.len() >= 4
    }

    /// The edge `E` moved by arc `label`: the first dart next to its origin
    /// slot, clockwise for the proposition's convention. It must be an edge.
    pub fn moved_edge(&self, label: u8, chirality: Chirality) -> Result<usize> {
        let (o, i) = self
            .find(Dart::ArcOut(label))
            .ok_or_else(|| Error::Precondition(format!("no arc {label}")))?;
        let n = self.rotation[o].len();
        let j = match chirality {
            Chirality::Clockwise => (i + n - 1) % n,
            Chirality::Counterclockwise => (i + 1) % n,
        };
        match self.rotation[o][j] {
            Dart::Edge(e) if n > 1 => Ok(e),
            _ => Err(Error::Precondition(format!(
                "arc {label}: no edge immediately {} of its origin slot at vertex {o}",
                match chirality {
                    Chirality::Clockwise => "clockwise",
                    Chirality::Counterclockwise => "counterclockwise",
                }
            ))),
        }
    }

    /// Replaces the edge `E` at `o(A)` by `A(E)`: `E`'s far end keeps its
    /// position, and the new half-edge goes next to the destination slot.
    pub fn apply_arc(&self, label: u8, chirality: Chirality) -> Result<Self> {
        let e = self.moved_edge(label, chirality)?;
        let (o, i) = self.find(Dart::ArcOut(label)).expect("checked by moved_edge");
        let n = self.rotation[o].len();
        let epos = match chirality {
            Chirality::Clockwise => (i + n - 1) % n,
            Chirality::Counterclockwise => (i + 1) % n,
        };
        let (w, k) = self.partner(o, epos);
        let fresh = self.edges().keys().next_back().map_or(0, |m| m + 1);
        let mut rotation = self.rotation.clone();
        rotation[w][k] = Dart::Edge(fresh);
        let (d, q) = {
            let g = Self {
                rotation: rotation.clone(),
            };
            g.find(Dart::ArcIn(label)).expect("validated arc")
        };
        let at = match chirality {
            Chirality::Clockwise => q,
            Chirality::Counterclockwise => q + 1,
        };
        rotation[d].insert(at, Dart::Edge(fresh));
        if let Some(p) = rotation[o].iter().position(|x| *x == Dart::Edge(e)) {
            rotation[o].remove(p);
        }
        Ok(Self { rotation })
    }

    /// Vertices and edges of the tree path from `a` to `b`.
    pub fn tree_path(&self, a: usize, b: usize) -> Option<(Vec<usize>, Vec<usize>)> {
        let mut nb: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.vertex_count()];
        for (e, (x, y)) in self.edges() {
            nb[x].push((y, e));
            nb[y].push((x, e));
        }
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.vertex_count()];
        let mut seen = vec![false; self.vertex_count()];
        seen[a] = true;
        let mut stack = vec![a];
        while let Some(x) = stack.pop() {
            for &(y, e) in &nb[x] {
                if !seen[y] {
                    seen[y] = true;
                    prev[y] = Some((x, e));
                    stack.push(y);
                }
            }
        }
        if !seen[b] {
            return None;
        }
        let (mut vs, mut es) = (vec![b], Vec::new());
        while let Some((x, e)) = prev[*vs.last().unwrap()] {
            vs.push(x);
            es.push(e);
        }
        vs.reverse();
        es.reverse();
        Some((vs, es))
    }
}

impl fmt::Display for RibbonGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (v, ds) in self.rotation.iter().enumerate() {
            write!(f, "{v}:")?;
            for d in ds {
                match d {
                    Dart::Edge(e) => write!(f, " e{e}")?,
                    Dart::ArcOut(k) => write!(f, " >{k}")?,
                    Dart::ArcIn(k) => write!(f, " <{k}")?,
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for RibbonGraph {
    type Err = Error;

    /// One line per vertex, `v: d d …` counterclockwise, with `eN` a half-edge
    /// of edge `N`, `>K` the origin and `<K` the destination of arc `K`.
    /// Blank lines and `#` comments are ignored.
    fn from_str(s: &str) -> Result<Self> {
        let mut rotation = Vec::new();
        for (n, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: n + 1, msg };
            let (head, rest) = line.split_once(':').ok_or_else(|| perr("expected `v:`".into()))?;
            let v: usize = head
                .trim()
                .parse()
                .map_err(|_| perr(format!("bad vertex `{head}`")))?;
            if v != rotation.len() {
                return Err(perr(format!(
                    "vertex {v} out of order, expected {}",
                    rotation.len()
                )));
            }
            let mut darts = Vec::new();
            for tok in rest.split_whitespace() {
                let (kind, num) = tok.split_at(1);
                let bad = || perr(format!("bad dart `{tok}`"));
                darts.push(match kind {
                    "e" => Dart::Edge(num.parse().map_err(|_| bad())?),
                    ">" => Dart::ArcOut(num.parse().map_err(|_| bad())?),
                    "<" => Dart::ArcIn(num.parse().map_err(|_| bad())?),
                    _ => return Err(bad()),
                });
            }
            rotation.push(darts);
        }
        Self::new(rotation)
    }
}

/// How "the segment `S` is immediately to the right" of an arc is read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentReading {
    /// Both moved edges lie on the segment between `o(A₁)` and `o(A₂)`.
    #[default]
    InnerSegment,
    /// Both moved edges lie somewhere on the path from `d(A₂)` to `d(A₁)`.
    Local,
}

impl FromStr for SegmentReading {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inner_segment" | "inner" => Ok(Self::InnerSegment),
            "local" => Ok(Self::Local),
            _ => Err(Error::UnknownId {
                kind: "segment reading",
                id: s.into(),
                known: "inner_segment, local".into(),
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Conditions {
    pub cond1: bool,
    pub cond2: bool,
}

/// `A₁(Γ)` is not a tree but `A₂(A₁(Γ))` is. Undefined rewrites count as
/// false.
pub fn cond1(g: &RibbonGraph, first: Chirality) -> bool {
    let Ok(g1) = g.apply_arc(1, first) else {
        return false;
    };
    if g1.is_tree() {
        return false;
    }
    g1.apply_arc(2, Chirality::Clockwise).is_ok_and(|g2| g2.is_tree())
}

/// The ordering `d(A₂) ≤ o(A₁) < o(A₂) ≤ d(A₁)` along the tree path, with
/// the moved edges read as prescribed.
pub fn cond2(g: &RibbonGraph, reading: SegmentReading) -> bool {
    let (Some(a1), Some(a2)) = (g.arc(1), g.arc(2)) else {
        return false;
    };
    let (Ok(e1), Ok(e2)) = (
        g.moved_edge(1, Chirality::Clockwise),
        g.moved_edge(2, Chirality::Clockwise),
    ) else {
        return false;
    };
    let Some((path, edges)) = g.tree_path(a2.destination, a1.destination) else {
        return false;
    };
    let (Some(i1), Some(i2)) = (
        path.iter().position(|v| *v == a1.origin),
        path.iter().position(|v| *v == a2.origin),
    ) else {
        return false;
    };
    if i1 >= i2 {
        return false;
    }
    match reading {
        SegmentReading::InnerSegment => edges[i1] == e1 && edges[i2 - 1] == e2,
        SegmentReading::Local => edges.contains(&e1) && edges.contains(&e2),
    }
}

pub fn prop_trees_conditions(g: &RibbonGraph, reading: SegmentReading) -> Result<Conditions> {
    if !g.without_arcs().is_tree() {
        return Err(Error::Precondition("reference graph is not a tree".into()));
    }
    for k in [1, 2] {
        if g.arc(k).is_none() {
            return Err(Error::Precondition(format!("arc {k} missing")));
        }
    }
    Ok(Conditions {
        cond1: cond1(g, Chirality::Clockwise),
        cond2: cond2(g, reading),
    })
}

/// Plane-tree generation route.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeStrategy {
    /// Balanced words glued into half-edge sequences.
    DyckGluing,
    /// Grow by a leaf in every corner.
    AddLeaf,
}

type Adjacency = Vec<Vec<usize>>;

/// Degree sequence along the contour walk that starts at half-edge `(v, i)`.
fn contour_code(adj: &Adjacency, v: usize, i: usize) -> Vec<usize> {
    let mut code = Vec::new();
    let (mut cur, mut idx) = (v, i);
    loop {
        let w = adj[cur][idx];
        code.push(adj[w].len());
        let j = adj[w]
            .iter()
            .position(|x| *x == cur)
            .expect("symmetric adjacency");
        idx = (j + 1) % adj[w].len();
        cur = w;
        if (cur, idx) == (v, i) {
            return code;
        }
    }
}

fn rooted_codes(adj: &Adjacency) -> BTreeSet<Vec<usize>> {
    (0..adj.len())
        .flat_map(|v| (0..adj[v].len()).map(move |i| (v, i)))
        .map(|(v, i)| contour_code(adj, v, i))
        .collect()
}

fn canonical(adj: &Adjacency) -> Vec<usize> {
    rooted_codes(adj).into_iter().next().unwrap_or_default()
}

fn dyck_words(n: usize) -> Vec<Vec<bool>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for k in 0..n {
        for a in dyck_words(k) {
            for b in dyck_words(n - 1 - k) {
                let mut w = vec![true];
                w.extend(&a);
                w.push(false);
                w.extend(&b);
                out.push(w);
            }
        }
    }
    out
}

fn tree_from_dyck(word: &[bool]) -> Adjacency {
    let mut adj: Adjacency = vec![Vec::new()];
    let mut stack = vec![0];
    for &up in word {
        if up {
            let v = adj.len();
            let p = *stack.last().unwrap();
            adj[p].push(v);
            adj.push(vec![p]);
            stack.push(v);
        } else {
            stack.pop();
        }
    }
    adj
}

fn plane_tree_adjacencies(n: usize, strategy: TreeStrategy) -> Vec<Adjacency> {
    if n == 0 {
        return Vec::new();
    }
    let mut seen: BTreeMap<Vec<usize>, Adjacency> = BTreeMap::new();
    match strategy {
        TreeStrategy::DyckGluing => {
            for w in dyck_words(n - 1) {
                let adj = tree_from_dyck(&w);
                seen.entry(canonical(&adj)).or_insert(adj);
            }
        }
        TreeStrategy::AddLeaf => {
            if n == 1 {
                return vec![vec![Vec::new()]];
            }
            for adj in plane_tree_adjacencies(n - 1, strategy) {
                for v in 0..adj.len() {
                    for g in 0..adj[v].len().max(1) {
                        let mut next = adj.clone();
                        let leaf = next.len();
                        next[v].insert(g, leaf);
                        next.push(vec![v]);
                        seen.entry(canonical(&next)).or_insert(next);
                    }
                }
            }
        }
    }
    seen.into_values().collect()
}

/// All plane trees with `n` vertices up to orientation-preserving isomorphism.
pub fn plane_trees(n: usize, strategy: TreeStrategy) -> Vec<RibbonGraph> {
    plane_tree_adjacencies(n, strategy)
        .iter()
        .map(|a| RibbonGraph::from_neighbors(a).expect("tree adjacency"))
        .collect()
}

/// Distinct rootings (a marked corner) of the plane trees with `n` vertices.
pub fn rooted_plane_tree_count(n: usize, strategy: TreeStrategy) -> usize {
    if n == 1 {
        return 1;
    }
    plane_tree_adjacencies(n, strategy)
        .iter()
        .map(|a| rooted_codes(a).len())
        .sum()
}

/// Every placement of the four ends of two arcs into the corners of `tree`,
/// with every order inside a shared corner, excluding crossing pairs.
pub fn arc_placements(tree: &RibbonGraph) -> Vec<RibbonGraph> {
    let corners: Vec<(usize, usize)> = (0..tree.vertex_count())
        .flat_map(|v| (0..tree.rotation(v).len().max(1)).map(move |g| (v, g)))
        .collect();
    let ends = [Dart::ArcOut(1), Dart::ArcIn(1), Dart::ArcOut(2), Dart::ArcIn(2)];
    let m = corners.len();
    let mut out = Vec::new();
    for code in 0..m.pow(4) {
        let pick: Vec<usize> = (0..4).map(|k| code / m.pow(k) % m).collect();
        let mut groups: BTreeMap<(usize, usize), Vec<Dart>> = BTreeMap::new();
        for (k, &c) in pick.iter().enumerate() {
            groups.entry(corners[c]).or_default().push(ends[k]);
        }
        let keys: Vec<(usize, usize)> = groups.keys().copied().collect();
        let orders: Vec<Vec<Vec<Dart>>> = groups.values().map(|g| permutations(g)).collect();
        let mut idx = vec![0usize; keys.len()];
        loop {
            let mut rotation = tree.rotation.clone();
            // later corners first so earlier positions stay valid
            for (n, &(v, g)) in keys.iter().enumerate().rev() {
                let seq = &orders[n][idx[n]];
                rotation[v].splice(g..g, seq.iter().copied());
            }
            let g = RibbonGraph { rotation };
            if !g.arcs_cross() {
                out.push(g);
            }
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] < orders[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }
    out
}

fn permutations(items: &[Dart]) -> Vec<Vec<Dart>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// `(tree, A₁, A₂)` instances over all plane trees with at most
/// `max_vertices` vertices.
pub fn enumerate_instances(max_vertices: usize) -> impl Iterator<Item = RibbonGraph> {
    (1..=max_vertices)
        .flat_map(|n| plane_trees(n, TreeStrategy::DyckGluing))
        .flat_map(|t| arc_placements(&t))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CounterexampleKind {
    /// cond1 and cond2 disagree.
    Equivalence,
    /// cond1 holds but `A₂(Γ)` is a tree.
    Corollary,
    /// Reversed `A₁`: cond1 holds but `A₂(Γ)` is a tree.
    ReversedCorollary,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Counterexample {
    pub kind: CounterexampleKind,
    pub graph: String,
    pub cond1: bool,
    pub cond2: bool,
}

/// Counterexamples kept per kind; the counts are always complete.
pub const COUNTEREXAMPLE_CAP: usize = 20;

#[derive(Clone, Debug, Default, Serialize)]
pub struct TreeVerification {
    pub max_vertices: usize,
    pub reading: SegmentReading,
    pub trees: usize,
    pub instances: usize,
    pub crossing_excluded: usize,
    /// Instances where both arcs have an edge immediately clockwise.
    pub valid_pairs: usize,
    pub cond1: usize,
    pub cond2: usize,
    pub mismatches: usize,
    pub corollary_failures: usize,
    pub reversed_cond1: usize,
    pub reversed_corollary_failures: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl TreeVerification {
    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.corollary_failures == 0
    }

    fn merge(mut self, o: Self) -> Self {
        self.trees += o.trees;
        self.instances += o.instances;
        self.crossing_excluded += o.crossing_excluded;
        self.valid_pairs += o.valid_pairs;
        self.cond1 += o.cond1;
        self.cond2 += o.cond2;
        self.mismatches += o.mismatches;
        self.corollary_failures += o.corollary_failures;
        self.reversed_cond1 += o.reversed_cond1;
        self.reversed_corollary_failures += o.reversed_corollary_failures;
        self.counterexamples.extend(o.counterexamples);
        self.counterexamples.sort();
        let mut per: BTreeMap<CounterexampleKind, usize> = BTreeMap::new();
        self.counterexamples.retain(|c| {
            let n = per.entry(c.kind).or_default();
            *n += 1;
            *n <= COUNTEREXAMPLE_CAP
        });
        self
    }
}

fn total_placements(tree: &RibbonGraph) -> usize {
    let m: usize = (0..tree.vertex_count())
        .map(|v| tree.rotation(v).len().max(1))
        .sum();
    // ordered placements: a corner receiving j ends contributes j! orders,
    // counted as the rising product m(m+1)(m+2)(m+3)
    m * (m + 1) * (m + 2) * (m + 3)
}

fn verify_tree(tree: &RibbonGraph, reading: SegmentReading) -> TreeVerification {
    let mut r = TreeVerification {
        reading,
        trees: 1,
        ..Default::default()
    };
    let placements = arc_placements(tree);
    r.crossing_excluded = total_placements(tree) - placements.len();
    for g in placements {
        r.instances += 1;
        let c1 = cond1(&g, Chirality::Clockwise);
        let c2 = cond2(&g, reading);
        let a2 = g.apply_arc(2, Chirality::Clockwise);
        if a2.is_ok() && g.moved_edge(1, Chirality::Clockwise).is_ok() {
            r.valid_pairs += 1;
        }
        let a2_tree = a2.as_ref().is_ok_and(|x| x.is_tree());
        let mut note = |kind: CounterexampleKind| {
            r.counterexamples.push(Counterexample {
                kind,
                graph: g.to_string(),
                cond1: c1,
                cond2: c2,
            })
        };
        if c1 != c2 {
            note(CounterexampleKind::Equivalence);
        }
        if c1 && a2_tree {
            note(CounterexampleKind::Corollary);
        }
        let rc1 = cond1(&g, Chirality::Counterclockwise);
        if rc1 && a2_tree {
            note(CounterexampleKind::ReversedCorollary);
        }
        r.cond1 += c1 as usize;
        r.cond2 += c2 as usize;
        r.mismatches += (c1 != c2) as usize;
        r.corollary_failures += (c1 && a2_tree) as usize;
        r.reversed_cond1 += rc1 as usize;
        r.reversed_corollary_failures += (rc1 && a2_tree) as usize;
    }
    r.merge(TreeVerification::default())
}

/// Exhaustive check of the equivalence cond1 ⇔ cond2 and of the corollary
/// over all instances with at most `max_vertices` vertices, together with
/// the reversed-arc variant.
pub fn verify_tree_proposition(max_vertices: usize, reading: SegmentReading) -> TreeVerification {
    let trees: Vec<RibbonGraph> = (1..=max_vertices)
        .flat_map(|n| plane_trees(n, TreeStrategy::DyckGluing))
        .collect();
    let mut r = trees
        .par_iter()
        .map(|t| verify_tree(t, reading))
        .reduce(TreeVerification::default, TreeVerification::merge);
    r.max_vertices = max_vertices;
    r.reading = reading;
    r
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaPlus {
    pub graph: RibbonGraph,
    /// Singularity id of each vertex.
    pub nodes: Vec<usize>,
    /// Repelling closed leaves inside `S₊`. When present the tree test no
    /// longer tells whether the dividing set is connected.
    pub closed_leaves: Vec<usize>,
}

/// `Γ₊` as a ribbon graph: positive nodes as vertices, one edge per positive
/// saddle joining the limits of its stable separatrices, cyclic orders from
/// the arrival directions.
pub fn gamma_plus_of(analysis: &FoliationAnalysis) -> Result<GammaPlus> {
    let g = giroux_graph(analysis)?;
    let side = &g.g_plus;
    let is_saddle = |id: usize| analysis.singularities.iter().any(|s| s.id == id && s.is_saddle());
    let nodes: Vec<usize> = side.vertices.iter().copied().filter(|v| !is_saddle(*v)).collect();
    let index: HashMap<usize, usize> = nodes.iter().enumerate().map(|(k, v)| (*v, k)).collect();

    let mut by_saddle: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, e) in side.edges.iter().enumerate() {
        by_saddle.entry(e.saddle).or_default().push(k);
    }
    let mut arrivals: Vec<Vec<(f64, Dart)>> = vec![Vec::new(); nodes.len()];
    for (edge_id, (saddle, ks)) in by_saddle.iter().enumerate() {
        if ks.len() != 2 {
            return Err(Error::Structure(format!(
                "positive saddle {saddle} has {} stable separatrices in Γ₊",
                ks.len()
            )));
        }
        for &k in ks {
            let e = &side.edges[k];
            let GraphNode::Singularity(end) = e.end else {
                return Err(Error::Structure(format!(
                    "saddle {saddle} separatrix ends on a closed leaf"
                )));
            };
            let v = *index.get(&end).ok_or_else(|| {
                Error::Structure(format!(
                    "stable separatrix of saddle {saddle} does not end at a positive node"
                ))
            })?;
            arrivals[v].push((e.end_angle.rem_euclid(std::f64::consts::TAU), Dart::Edge(edge_id)));
        }
    }
    let rotation = arrivals
        .into_iter()
        .map(|mut list| {
            list.sort_by(|a, b| a.0.total_cmp(&b.0));
            list.into_iter().map(|(_, d)| d).collect()
        })
        .collect();
    Ok(GammaPlus {
        graph: RibbonGraph::new(rotation)?,
        nodes,
        closed_leaves: side.cycles.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2_arc() -> RibbonGraph {
        // a = 0, b = 1; the edge is immediately clockwise of A's origin at a
        "0: e0 >1\n1: <1 e0".parse().unwrap()
    }

    #[test]
    fn trivial_trees() {
        assert!(RibbonGraph::single_vertex().is_tree());
        let path = RibbonGraph::from_neighbors(&[vec![1], vec![0, 2], vec![1]]).unwrap();
        assert!(path.is_tree() && path.is_planar());
        let doubled: RibbonGraph = "0: e0 e2\n1: e2 e0 e1\n2: e1".parse().unwrap();
        assert!(!doubled.is_tree());
    }

    #[test]
    fn k2_becomes_a_loop() {
        let g = k2_arc().apply_arc(1, Chirality::Clockwise).unwrap();
        assert!(g.without_arcs().rotation(0).is_empty());
        assert_eq!(g.edges().values().copied().collect::<Vec<_>>(), vec![(1, 1)]);
        assert!(!g.is_tree());
    }

    #[test]
    fn path_splits_off_a_cycle() {
        // a = 0, b = 1, c = 2, arc from a to c with ab clockwise of it at a
        let g: RibbonGraph = "0: e0 >1\n1: e0 e1\n2: e1 <1".parse().unwrap();
        let h = g.apply_arc(1, Chirality::Clockwise).unwrap();
        assert!(h.without_arcs().rotation(0).is_empty());
        let ends: Vec<_> = h
            .edges()
            .into_values()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        assert_eq!(ends, vec![(1, 2), (1, 2)]);
        assert_eq!(h.component_count(), 2);
        assert_eq!(h.vertex_count(), g.vertex_count());
        assert_eq!(h.edge_count(), g.edge_count());
    }

    #[test]
    fn missing_edge_is_a_precondition_error() {
        let g: RibbonGraph = "0: >1 <1".parse().unwrap();
        assert!(matches!(
            g.apply_arc(1, Chirality::Clockwise),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn text_round_trip() {
        let g: RibbonGraph = "# path\n0: e0 >1 <2\n1: e0 e1\n2: e1 <1 >2\n".parse().unwrap();
        assert_eq!(g.to_string().parse::<RibbonGraph>().unwrap(), g);
        assert!("0: e0\n".parse::<RibbonGraph>().is_err());
        assert!("1: \n".parse::<RibbonGraph>().is_err());
        assert!("0: x1\n".parse::<RibbonGraph>().is_err());
    }

    #[test]
    fn crossing_detection() {
        let crossing: RibbonGraph = "0: >1 >2 <1 <2".parse().unwrap();
        let nested: RibbonGraph = "0: >1 >2 <2 <1".parse().unwrap();
        assert!(crossing.arcs_cross());
        assert!(!nested.arcs_cross());
    }

    #[test]
    fn small_tree_counts() {
        let counts: Vec<usize> = (1..=7)
            .map(|n| plane_trees(n, TreeStrategy::DyckGluing).len())
            .collect();
        assert_eq!(counts, vec![1, 1, 1, 2, 3, 6, 14]);
    }
}
