//! Metric graphs with Neumann–Kirchhoff vertices.
//!
//! A graph is a set of named vertices joined by finite segments, loops
//! (segments whose endpoints coincide) and half-lines.  Segments carry the
//! coordinate `[0, ℓ]` running from `from` to `to`; loops use `[-ℓ/2, ℓ/2]`
//! with the midpoint at 0; half-lines use `[0, ∞)` starting at their vertex.
//!
//! Graphs are canonical: vertices, edges and boundary vertices are stored
//! sorted by id, so indices are deterministic and
//! `parse(g.to_spec()) == g`.
//!
//! The text format is line oriented:
//!
//! ```text
//! # dumbbell with one connecting edge
//! vertex a
//! vertex b
//! loop   la a 6.283185307179586
//! loop   lb b 6.283185307179586
//! edge   e  a b 3.141592653589793
//! halfline h a
//! boundary a
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EdgeShape {
    Segment { from: usize, to: usize, length: f64 },
    Loop { vertex: usize, length: f64 },
    HalfLine { vertex: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Edge {
    pub id: String,
    pub shape: EdgeShape,
}

impl Edge {
    pub fn length(&self) -> Option<f64> {
        match self.shape {
            EdgeShape::Segment { length, .. } | EdgeShape::Loop { length, .. } => Some(length),
            EdgeShape::HalfLine { .. } => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.length().is_some()
    }

    /// Vertex at the start (`s = 0` of the `[0, ℓ]` parametrization) and at the end.
    /// Half-lines have no end vertex.
    pub fn endpoints(&self) -> (usize, Option<usize>) {
        match self.shape {
            EdgeShape::Segment { from, to, .. } => (from, Some(to)),
            EdgeShape::Loop { vertex, .. } => (vertex, Some(vertex)),
            EdgeShape::HalfLine { vertex } => (vertex, None),
        }
    }

    /// Coordinate interval used for this edge (`[-ℓ/2, ℓ/2]` on loops).
    pub fn coordinate_range(&self) -> (f64, f64) {
        match self.shape {
            EdgeShape::Segment { length, .. } => (0.0, length),
            EdgeShape::Loop { length, .. } => (-0.5 * length, 0.5 * length),
            EdgeShape::HalfLine { .. } => (0.0, f64::INFINITY),
        }
    }
}

/// Which end of an edge touches a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeEnd {
    Start,
    End,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EdgeKind {
    /// `n` edges of the remainder meet the attachment vertex.
    Pendant {
        length: f64,
        n: usize,
    },
    Loop {
        length: f64,
        n: usize,
    },
    /// `n_minus` at the start vertex, `n_plus` at the end vertex.
    Internal {
        length: f64,
        n_minus: usize,
        n_plus: usize,
    },
    HalfLine,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    boundary: Vec<usize>,
}

/// Collects vertices and edges by name; `build` sorts and validates.
#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    vertices: Vec<String>,
    edges: Vec<(String, RawShape)>,
    boundary: Vec<String>,
}

#[derive(Clone, Debug)]
enum RawShape {
    Segment(String, String, f64),
    Loop(String, f64),
    HalfLine(String),
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(mut self, id: impl Into<String>) -> Self {
        self.vertices.push(id.into());
        self
    }

    pub fn edge(
        mut self,
        id: impl Into<String>,
        from: impl Into<String>,
        to: impl Into<String>,
        length: f64,
    ) -> Self {
        let (from, to) = (from.into(), to.into());
        let shape = if from == to {
            RawShape::Loop(from, length)
        } else {
            RawShape::Segment(from, to, length)
        };
        self.edges.push((id.into(), shape));
        self
    }

    pub fn looped(mut self, id: impl Into<String>, vertex: impl Into<String>, length: f64) -> Self {
        self.edges
            .push((id.into(), RawShape::Loop(vertex.into(), length)));
        self
    }

    pub fn halfline(mut self, id: impl Into<String>, vertex: impl Into<String>) -> Self {
        self.edges
            .push((id.into(), RawShape::HalfLine(vertex.into())));
        self
    }

    pub fn boundary(mut self, id: impl Into<String>) -> Self {
        self.boundary.push(id.into());
        self
    }

    /// Builds and checks that the graph is connected.
    pub fn build(self) -> Result<MetricGraph> {
        let g = self.build_unchecked_connectivity()?;
        if !g.is_connected() {
            return Err(Error::InvalidGraph("graph is disconnected".into()));
        }
        Ok(g)
    }

    /// Builds without the connectivity check (used for remainder graphs).
    pub fn build_unchecked_connectivity(self) -> Result<MetricGraph> {
        let names: BTreeSet<String> = self.vertices.iter().cloned().collect();
        if names.len() != self.vertices.len() {
            return Err(Error::InvalidGraph("duplicate vertex id".into()));
        }
        if names.is_empty() {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        let vertices: Vec<String> = names.into_iter().collect();
        let index: BTreeMap<&str, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        let lookup = |edge: &str, v: &str| {
            index.get(v).copied().ok_or_else(|| {
                Error::InvalidGraph(format!("edge '{edge}' references unknown vertex '{v}'"))
            })
        };
        let check_len = |edge: &str, l: f64| {
            if l.is_finite() && l > 0.0 {
                Ok(l)
            } else {
                Err(Error::InvalidGraph(format!(
                    "edge '{edge}' has non-positive length {l}"
                )))
            }
        };

        let mut seen = BTreeSet::new();
        let mut edges = Vec::with_capacity(self.edges.len());
        for (id, raw) in &self.edges {
            if !seen.insert(id.clone()) {
                return Err(Error::InvalidGraph(format!("duplicate edge id '{id}'")));
            }
            let shape = match raw {
                RawShape::Segment(a, b, l) => EdgeShape::Segment {
                    from: lookup(id, a)?,
                    to: lookup(id, b)?,
                    length: check_len(id, *l)?,
                },
                RawShape::Loop(v, l) => EdgeShape::Loop {
                    vertex: lookup(id, v)?,
                    length: check_len(id, *l)?,
                },
                RawShape::HalfLine(v) => EdgeShape::HalfLine {
                    vertex: lookup(id, v)?,
                },
            };
            edges.push(Edge {
                id: id.clone(),
                shape,
            });
        }
        edges.sort_by(|a, b| a.id.cmp(&b.id));

        let mut boundary = BTreeSet::new();
        for b in &self.boundary {
            let i = index.get(b.as_str()).copied().ok_or_else(|| {
                Error::InvalidGraph(format!("boundary references unknown vertex '{b}'"))
            })?;
            boundary.insert(i);
        }
        Ok(MetricGraph {
            vertices,
            edges,
            boundary: boundary.into_iter().collect(),
        })
    }
}

impl MetricGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::new()
    }

    /// Parses the graph-spec text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut b = GraphBuilder::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let tok: Vec<&str> = content.split_whitespace().collect();
            let err = |message: String| Error::Parse { line, message };
            let want = |n: usize| {
                if tok.len() == n {
                    Ok(())
                } else {
                    Err(err(format!(
                        "'{}' expects {} arguments, found {}",
                        tok[0],
                        n - 1,
                        tok.len() - 1
                    )))
                }
            };
            let length = |s: &str| -> Result<f64> {
                let l: f64 = s
                    .parse()
                    .map_err(|_| err(format!("invalid length '{s}'")))?;
                if !(l.is_finite() && l > 0.0) {
                    return Err(Error::InvalidGraph(format!(
                        "line {line}: length must be positive, found {s}"
                    )));
                }
                Ok(l)
            };
            match tok[0] {
                "vertex" => {
                    want(2)?;
                    b = b.vertex(tok[1]);
                }
                "edge" => {
                    want(5)?;
                    b = b.edge(tok[1], tok[2], tok[3], length(tok[4])?);
                }
                "loop" => {
                    want(4)?;
                    b = b.looped(tok[1], tok[2], length(tok[3])?);
                }
                "halfline" => {
                    want(3)?;
                    b = b.halfline(tok[1], tok[2]);
                }
                "boundary" => {
                    if tok.len() < 2 {
                        return Err(err("'boundary' expects at least one vertex".into()));
                    }
                    for v in &tok[1..] {
                        b = b.boundary(*v);
                    }
                }
                other => return Err(err(format!("unknown directive '{other}'"))),
            }
        }
        b.build()
    }

    /// Canonical text form, accepted by [`MetricGraph::parse`].
    pub fn to_spec(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let _ = writeln!(out, "vertex {v}");
        }
        for e in &self.edges {
            let _ = match e.shape {
                EdgeShape::Segment { from, to, length } => {
                    writeln!(
                        out,
                        "edge {} {} {} {:?}",
                        e.id, self.vertices[from], self.vertices[to], length
                    )
                }
                EdgeShape::Loop { vertex, length } => {
                    writeln!(out, "loop {} {} {:?}", e.id, self.vertices[vertex], length)
                }
                EdgeShape::HalfLine { vertex } => {
                    writeln!(out, "halfline {} {}", e.id, self.vertices[vertex])
                }
            };
        }
        if !self.boundary.is_empty() {
            let names: Vec<&str> = self
                .boundary
                .iter()
                .map(|&i| self.vertices[i].as_str())
                .collect();
            let _ = writeln!(out, "boundary {}", names.join(" "));
        }
        out
    }

    fn builder_from(&self) -> GraphBuilder {
        let mut b = GraphBuilder::new();
        for v in &self.vertices {
            b = b.vertex(v.clone());
        }
        for e in &self.edges {
            b = match e.shape {
                EdgeShape::Segment { from, to, length } => b.edge(
                    e.id.clone(),
                    self.vertices[from].clone(),
                    self.vertices[to].clone(),
                    length,
                ),
                EdgeShape::Loop { vertex, length } => {
                    b.looped(e.id.clone(), self.vertices[vertex].clone(), length)
                }
                EdgeShape::HalfLine { vertex } => {
                    b.halfline(e.id.clone(), self.vertices[vertex].clone())
                }
            };
        }
        b
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_ids(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.binary_search_by(|v| v.as_str().cmp(id)).ok()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.binary_search_by(|e| e.id.as_str().cmp(id)).ok()
    }

    pub fn edge_by_id(&self, id: &str) -> Result<usize> {
        self.edge_index(id)
            .ok_or_else(|| Error::domain(format!("no edge '{id}'")))
    }

    /// Boundary vertex indices, sorted.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn with_boundary(&self, boundary: &[usize]) -> Self {
        let mut g = self.clone();
        let set: BTreeSet<usize> = boundary.iter().copied().collect();
        g.boundary = set.into_iter().collect();
        g
    }

    /// Edge ends meeting vertex `v`; a loop appears twice.
    pub fn incidences(&self, v: usize) -> Vec<(usize, EdgeEnd)> {
        let mut out = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            let (a, b) = e.endpoints();
            if a == v {
                out.push((i, EdgeEnd::Start));
            }
            if b == Some(v) {
                out.push((i, EdgeEnd::End));
            }
        }
        out
    }

    /// Loops count twice, half-lines once.
    pub fn degree(&self, v: usize) -> usize {
        self.incidences(v).len()
    }

    pub fn has_halflines(&self) -> bool {
        self.edges.iter().any(|e| !e.is_finite())
    }

    pub fn is_compact(&self) -> bool {
        !self.has_halflines()
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().filter_map(Edge::length).sum()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in &self.edges {
            if let (a, Some(b)) = e.endpoints() {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
        let root = find(&mut parent, 0);
        (0..n).all(|v| find(&mut parent, v) == root)
    }

    /// Classifies a finite edge as pendant, loop or internal.
    pub fn classify_edge(&self, e: usize) -> EdgeKind {
        let edge = &self.edges[e];
        match edge.shape {
            EdgeShape::HalfLine { .. } => EdgeKind::HalfLine,
            EdgeShape::Loop { vertex, length } => EdgeKind::Loop {
                length,
                n: self.degree(vertex) - 2,
            },
            EdgeShape::Segment { from, to, length } => {
                let (df, dt) = (self.degree(from), self.degree(to));
                if df == 1 || dt == 1 {
                    EdgeKind::Pendant {
                        length,
                        n: df.max(dt) - 1,
                    }
                } else {
                    EdgeKind::Internal {
                        length,
                        n_minus: df - 1,
                        n_plus: dt - 1,
                    }
                }
            }
        }
    }

    /// Vertex where a pendant edge attaches to the rest of the graph.
    pub fn pendant_attachment(&self, e: usize) -> Option<usize> {
        match self.edges[e].shape {
            EdgeShape::Segment { from, to, .. } => {
                let (df, dt) = (self.degree(from), self.degree(to));
                match (df, dt) {
                    (1, 1) => Some(from),
                    (1, _) => Some(to),
                    (_, 1) => Some(from),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    /// Multiplies every finite length by `mu`; half-lines are unchanged.
    pub fn scale(&self, mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::domain(format!(
                "scaling factor must be positive, got {mu}"
            )));
        }
        let mut g = self.clone();
        for e in &mut g.edges {
            match &mut e.shape {
                EdgeShape::Segment { length, .. } | EdgeShape::Loop { length, .. } => *length *= mu,
                EdgeShape::HalfLine { .. } => {}
            }
        }
        Ok(g)
    }

    pub fn min_edge_length(&self) -> Result<f64> {
        self.edges
            .iter()
            .filter_map(Edge::length)
            .min_by(f64::total_cmp)
            .ok_or_else(|| Error::domain("graph has no finite edges"))
    }

    /// Merges the two edges through every non-boundary vertex of degree 2.
    /// Such vertices do not change any solution under NK conditions.
    pub fn absorb_degree2(&self) -> Result<Self> {
        let mut g = self.clone();
        loop {
            let candidate = (0..g.vertex_count()).find(|&v| {
                if g.boundary.contains(&v) {
                    return false;
                }
                let inc = g.incidences(v);
                inc.len() == 2
                    && inc[0].0 != inc[1].0
                    && !(matches!(g.edges[inc[0].0].shape, EdgeShape::HalfLine { .. })
                        && matches!(g.edges[inc[1].0].shape, EdgeShape::HalfLine { .. }))
            });
            let Some(v) = candidate else { break };
            g = g.merge_at(v)?;
        }
        Ok(g)
    }

    fn merge_at(&self, v: usize) -> Result<Self> {
        let inc = self.incidences(v);
        let (e1, e2) = (&self.edges[inc[0].0], &self.edges[inc[1].0]);
        let far = |e: &Edge| -> Option<usize> {
            match e.shape {
                EdgeShape::Segment { from, to, .. } => Some(if from == v { to } else { from }),
                _ => None,
            }
        };
        // Keep a half-line, if any, as the second piece.
        let (a, b) = if e1.is_finite() { (e1, e2) } else { (e2, e1) };
        let id = format!("{}+{}", a.id, b.id);
        let start = far(a).ok_or_else(|| Error::numerical("degree-2 merge on a non-segment"))?;
        let mut bld = GraphBuilder::new();
        for (i, name) in self.vertices.iter().enumerate() {
            if i != v {
                bld = bld.vertex(name.clone());
            }
        }
        for e in &self.edges {
            if e.id == a.id || e.id == b.id {
                continue;
            }
            bld = match e.shape {
                EdgeShape::Segment { from, to, length } => bld.edge(
                    e.id.clone(),
                    self.vertices[from].clone(),
                    self.vertices[to].clone(),
                    length,
                ),
                EdgeShape::Loop { vertex, length } => {
                    bld.looped(e.id.clone(), self.vertices[vertex].clone(), length)
                }
                EdgeShape::HalfLine { vertex } => {
                    bld.halfline(e.id.clone(), self.vertices[vertex].clone())
                }
            };
        }
        let la = a.length().unwrap_or(0.0);
        bld = match b.shape {
            EdgeShape::HalfLine { .. } => bld.halfline(id, self.vertices[start].clone()),
            _ => {
                let end =
                    far(b).ok_or_else(|| Error::numerical("degree-2 merge on a non-segment"))?;
                let lb = b.length().unwrap_or(0.0);
                bld.edge(
                    id,
                    self.vertices[start].clone(),
                    self.vertices[end].clone(),
                    la + lb,
                )
            }
        };
        for &bv in &self.boundary {
            bld = bld.boundary(self.vertices[bv].clone());
        }
        bld.build()
    }

    /// The graph with edge `e` removed.  Vertices left without edges are
    /// dropped unless they touched `e`; the endpoints of `e` that remain
    /// become the boundary.  The result may be disconnected.
    pub fn remainder(&self, e: usize) -> Result<Self> {
        let edge = &self.edges[e];
        let (a, b) = edge.endpoints();
        let mut touch: Vec<usize> = vec![a];
        if let Some(b) = b {
            touch.push(b);
        }
        let mut keep = vec![false; self.vertex_count()];
        for (i, other) in self.edges.iter().enumerate() {
            if i == e {
                continue;
            }
            let (x, y) = other.endpoints();
            keep[x] = true;
            if let Some(y) = y {
                keep[y] = true;
            }
        }
        let mut bld = self.builder_from();
        bld.edges.retain(|(id, _)| *id != edge.id);
        bld.vertices = self
            .vertices
            .iter()
            .enumerate()
            .filter(|(i, _)| keep[*i])
            .map(|(_, n)| n.clone())
            .collect();
        for &t in &touch {
            if keep[t] {
                bld = bld.boundary(self.vertices[t].clone());
            }
        }
        if bld.vertices.is_empty() {
            return Err(Error::domain(format!(
                "removing edge '{}' leaves an empty graph",
                edge.id
            )));
        }
        bld.build_unchecked_connectivity()
    }

    /// Shortest path distance (along finite edges) from each vertex to `src`.
    pub fn vertex_distances(&self, src: usize) -> Vec<f64> {
        let n = self.vertex_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        dist[src] = 0.0;
        for _ in 0..n {
            let Some(u) = (0..n)
                .filter(|&i| !done[i])
                .min_by(|&i, &j| dist[i].total_cmp(&dist[j]))
            else {
                break;
            };
            if !dist[u].is_finite() {
                break;
            }
            done[u] = true;
            for e in &self.edges {
                if let EdgeShape::Segment { from, to, length } = e.shape {
                    for (x, y) in [(from, to), (to, from)] {
                        if x == u && dist[u] + length < dist[y] {
                            dist[y] = dist[u] + length;
                        }
                    }
                }
            }
        }
        dist
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dumbbell() -> MetricGraph {
        MetricGraph::builder()
            .vertex("a")
            .vertex("b")
            .looped("la", "a", 2.0 * PI)
            .looped("lb", "b", 2.0 * PI)
            .edge("e", "a", "b", PI)
            .build()
            .unwrap()
    }

    #[test]
    fn parses_dumbbell() {
        let g = MetricGraph::parse(
            "# dumbbell\nvertex a\nvertex b\nloop la a 6.283185307179586\nloop lb b 6.283185307179586\nedge e a b 3.141592653589793\n",
        )
        .unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edges().len(), 3);
        assert_eq!(g, dumbbell());
        assert_eq!(g.min_edge_length().unwrap(), PI);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match MetricGraph::parse("vertex a\nedge e a\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match MetricGraph::parse("vertex a\nwobble\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            MetricGraph::parse("vertex a\nvertex b\nedge e a b -1\n"),
            Err(Error::InvalidGraph(_))
        ));
        assert!(matches!(
            MetricGraph::parse("vertex a\nedge e a c 1\n"),
            Err(Error::InvalidGraph(_))
        ));
        assert!(matches!(
            MetricGraph::parse("vertex a\nvertex b\nloop l a 1\n"),
            Err(Error::InvalidGraph(_))
        ));
    }

    #[test]
    fn single_edge_with_boundary() {
        let g = MetricGraph::parse("vertex o\nvertex v\nedge e o v 2\nboundary v\n").unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.boundary(), &[1]);
        assert_eq!(g.classify_edge(0), EdgeKind::Pendant { length: 2.0, n: 0 });
    }

    #[test]
    fn tadpole_degree() {
        let g = MetricGraph::builder()
            .vertex("v")
            .looped("l", "v", 2.0 * PI)
            .halfline("h1", "v")
            .halfline("h2", "v")
            .halfline("h3", "v")
            .build()
            .unwrap();
        assert_eq!(g.degree(0), 5);
        assert_eq!(
            g.classify_edge(g.edge_by_id("l").unwrap()),
            EdgeKind::Loop {
                length: 2.0 * PI,
                n: 3
            }
        );
        assert_eq!(
            g.classify_edge(g.edge_by_id("h1").unwrap()),
            EdgeKind::HalfLine
        );
        let s = g.scale(5.0).unwrap();
        assert_eq!(s.edge(g.edge_by_id("l").unwrap()).length(), Some(10.0 * PI));
        assert!(s.has_halflines());
    }

    #[test]
    fn figure_one_counts() {
        // pendant incident to three edges, loop incident to one, internal 2/3
        let g = MetricGraph::builder()
            .vertex("leaf")
            .vertex("v")
            .vertex("w")
            .vertex("x")
            .vertex("y")
            .edge("p", "leaf", "v", 1.0)
            .edge("a", "v", "w", 1.0)
            .edge("b", "v", "x", 1.0)
            .edge("c", "v", "y", 1.0)
            .build()
            .unwrap();
        assert_eq!(
            g.classify_edge(g.edge_by_id("p").unwrap()),
            EdgeKind::Pendant { length: 1.0, n: 3 }
        );

        let g = MetricGraph::builder()
            .vertex("v")
            .vertex("w")
            .looped("l", "v", 1.0)
            .edge("a", "v", "w", 1.0)
            .build()
            .unwrap();
        assert_eq!(
            g.classify_edge(g.edge_by_id("l").unwrap()),
            EdgeKind::Loop { length: 1.0, n: 1 }
        );

        let g = MetricGraph::builder()
            .vertex("m")
            .vertex("p")
            .vertex("m1")
            .vertex("m2")
            .vertex("p1")
            .vertex("p2")
            .vertex("p3")
            .edge("e", "m", "p", 1.0)
            .edge("a", "m", "m1", 1.0)
            .edge("b", "m", "m2", 1.0)
            .edge("c", "p", "p1", 1.0)
            .edge("d", "p", "p2", 1.0)
            .edge("f", "p", "p3", 1.0)
            .build()
            .unwrap();
        assert_eq!(
            g.classify_edge(g.edge_by_id("e").unwrap()),
            EdgeKind::Internal {
                length: 1.0,
                n_minus: 2,
                n_plus: 3
            }
        );
    }

    #[test]
    fn scale_identity_and_errors() {
        let g = dumbbell();
        assert_eq!(g.scale(1.0).unwrap(), g);
        assert!(g.scale(0.0).is_err());
        assert!(g.scale(-2.0).is_err());
        let s = MetricGraph::builder()
            .vertex("a")
            .vertex("b")
            .edge("e", "a", "b", 2.0)
            .build()
            .unwrap();
        assert_eq!(s.scale(3.0).unwrap().edge(0).length(), Some(6.0));
    }

    #[test]
    fn absorb_merges_chains() {
        let g = MetricGraph::builder()
            .vertex("a")
            .vertex("m")
            .vertex("b")
            .edge("e1", "a", "m", 1.0)
            .edge("e2", "m", "b", 2.0)
            .halfline("h", "b")
            .halfline("h0", "a")
            .build()
            .unwrap();
        let a = g.absorb_degree2().unwrap();
        // all finite vertices had degree 2 -> one vertex with two half-lines remains
        assert_eq!(a.edges().iter().filter(|e| e.is_finite()).count(), 0);
        assert_eq!(a.edges().len(), 2);
        assert_eq!(a.vertex_count(), 1);
        // default parse keeps the vertex
        assert_eq!(g.vertex_count(), 3);
    }

    #[test]
    fn remainder_of_pendant_and_loop() {
        let g = MetricGraph::builder()
            .vertex("leaf")
            .vertex("v")
            .vertex("w")
            .edge("p", "leaf", "v", 1.5)
            .edge("a", "v", "w", 1.0)
            .halfline("h", "v")
            .build()
            .unwrap();
        let r = g.remainder(g.edge_by_id("p").unwrap()).unwrap();
        assert_eq!(r.vertex_count(), 2);
        assert_eq!(r.boundary().len(), 1);
        assert_eq!(r.vertex_id(r.boundary()[0]), "v");
        assert_eq!(r.degree(r.boundary()[0]), 2);
    }

    #[test]
    fn spec_round_trip() {
        let g = dumbbell().with_boundary(&[0, 1]);
        let again = MetricGraph::parse(&g.to_spec()).unwrap();
        assert_eq!(again, g);
    }
}
