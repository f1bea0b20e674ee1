//! Acyclic directed mixed graphs and the discrete graph algorithms used
//! throughout the crate.
//!
//! A graph over `d` vertices is stored as two dense boolean adjacency
//! matrices: `D[i][j]` marks `i -> j` and the symmetric `B[i][j]` marks
//! `i <-> j`. An optional fixed mask turns the graph into a conditional ADMG
//! (CADMG), in which fixed vertices have no arrowheads pointing into them.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of draws `random_admg` attempts before giving up.
pub const DEFAULT_REJECTION_BUDGET: usize = 10_000;

/// Hypothesis classes of ADMGs, ordered `Ancestral ⊂ Arid ⊂ BowFree`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphClass {
    Ancestral,
    Arid,
    #[serde(rename = "bowfree")]
    BowFree,
}

impl GraphClass {
    pub const ALL: [GraphClass; 3] = [GraphClass::Ancestral, GraphClass::Arid, GraphClass::BowFree];

    pub fn as_str(self) -> &'static str {
        match self {
            GraphClass::Ancestral => "ancestral",
            GraphClass::Arid => "arid",
            GraphClass::BowFree => "bowfree",
        }
    }
}

impl fmt::Display for GraphClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GraphClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "ancestral" => Ok(GraphClass::Ancestral),
            "arid" => Ok(GraphClass::Arid),
            "bowfree" => Ok(GraphClass::BowFree),
            other => Err(Error::InvalidArgument(format!("unknown graph class '{other}'"))),
        }
    }
}

/// Result of [`check_properties`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Properties {
    pub acyclic: bool,
    pub ancestral: bool,
    pub arid: bool,
    pub bow_free: bool,
}

impl Properties {
    pub fn satisfies(&self, class: GraphClass) -> bool {
        match class {
            GraphClass::Ancestral => self.ancestral,
            GraphClass::Arid => self.arid,
            GraphClass::BowFree => self.bow_free,
        }
    }
}

/// An acyclic directed mixed graph, optionally with fixed vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Admg {
    names: Vec<String>,
    directed: Vec<bool>,
    bidirected: Vec<bool>,
    fixed: Vec<bool>,
}

impl Admg {
    /// Graph with the given vertex labels and no edges.
    pub fn empty<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        check_names(&names)?;
        let d = names.len();
        Ok(Self { names, directed: vec![false; d * d], bidirected: vec![false; d * d], fixed: vec![false; d] })
    }

    /// Graph with vertices labelled `V1..Vd` and no edges.
    pub fn with_vertices(d: usize) -> Self {
        let names: Vec<String> = (1..=d).map(|i| format!("V{i}")).collect();
        Self::empty(&names).expect("generated names are unique")
    }

    /// Builds a graph from index pairs. Bidirected pairs are unordered.
    pub fn from_edges<S: AsRef<str>>(
        names: &[S],
        directed: &[(usize, usize)],
        bidirected: &[(usize, usize)],
    ) -> Result<Self> {
        let mut g = Self::empty(names)?;
        for &(i, j) in directed {
            g.insert_directed(i, j)?;
        }
        for &(i, j) in bidirected {
            g.insert_bidirected(i, j)?;
        }
        Ok(g)
    }

    /// Builds a graph from edges given by vertex name.
    pub fn from_named_edges<S: AsRef<str>>(
        names: &[S],
        directed: &[(&str, &str)],
        bidirected: &[(&str, &str)],
    ) -> Result<Self> {
        let mut g = Self::empty(names)?;
        for &(a, b) in directed {
            let (i, j) = (g.index_of(a)?, g.index_of(b)?);
            g.insert_directed(i, j)?;
        }
        for &(a, b) in bidirected {
            let (i, j) = (g.index_of(a)?, g.index_of(b)?);
            g.insert_bidirected(i, j)?;
        }
        Ok(g)
    }

    /// Builds a graph from binary adjacency matrices (any nonzero entry is an edge).
    pub fn from_matrices<S: AsRef<str>>(names: &[S], d_mat: &DMatrix<f64>, b_mat: &DMatrix<f64>) -> Result<Self> {
        let mut g = Self::empty(names)?;
        let d = g.d();
        if d_mat.shape() != (d, d) || b_mat.shape() != (d, d) {
            return Err(Error::InvalidGraph(format!("adjacency matrices must be {d}x{d}")));
        }
        for i in 0..d {
            for j in 0..d {
                if (b_mat[(i, j)] != 0.0) != (b_mat[(j, i)] != 0.0) {
                    return Err(Error::InvalidGraph(format!("bidirected matrix is not symmetric at ({i}, {j})")));
                }
                if d_mat[(i, j)] != 0.0 {
                    g.insert_directed(i, j)?;
                }
                if i < j && b_mat[(i, j)] != 0.0 {
                    g.insert_bidirected(i, j)?;
                }
                if i == j && b_mat[(i, i)] != 0.0 {
                    return Err(Error::InvalidGraph("bidirected matrix has a nonzero diagonal".into()));
                }
            }
        }
        Ok(g)
    }

    fn insert_directed(&mut self, i: usize, j: usize) -> Result<()> {
        self.check_vertex(i)?;
        self.check_vertex(j)?;
        if i == j {
            return Err(Error::InvalidGraph(format!("self-loop at {}", self.names[i])));
        }
        if self.fixed[j] {
            return Err(Error::InvalidGraph(format!("directed edge into fixed vertex {}", self.names[j])));
        }
        let d = self.d();
        self.directed[i * d + j] = true;
        Ok(())
    }

    fn insert_bidirected(&mut self, i: usize, j: usize) -> Result<()> {
        self.check_vertex(i)?;
        self.check_vertex(j)?;
        if i == j {
            return Err(Error::InvalidGraph(format!("bidirected self-loop at {}", self.names[i])));
        }
        if self.fixed[i] || self.fixed[j] {
            return Err(Error::InvalidGraph("bidirected edge at a fixed vertex".into()));
        }
        let d = self.d();
        self.bidirected[i * d + j] = true;
        self.bidirected[j * d + i] = true;
        Ok(())
    }

    /// Returns a copy with the edge `i -> j` added.
    pub fn with_directed(&self, i: usize, j: usize) -> Result<Self> {
        let mut g = self.clone();
        g.insert_directed(i, j)?;
        Ok(g)
    }

    /// Returns a copy with the edge `i <-> j` added.
    pub fn with_bidirected(&self, i: usize, j: usize) -> Result<Self> {
        let mut g = self.clone();
        g.insert_bidirected(i, j)?;
        Ok(g)
    }

    /// Returns a copy whose fixed mask is set from `fixed`. Fails if a fixed
    /// vertex has an incoming arrowhead.
    pub fn with_fixed(&self, fixed: &[bool]) -> Result<Self> {
        if fixed.len() != self.d() {
            return Err(Error::InvalidArgument("fixed mask has the wrong length".into()));
        }
        let d = self.d();
        for v in (0..d).filter(|&v| fixed[v]) {
            if (0..d).any(|u| self.directed[u * d + v] || self.bidirected[u * d + v]) {
                return Err(Error::InvalidGraph(format!("fixed vertex {} has an incoming arrowhead", self.names[v])));
            }
        }
        let mut g = self.clone();
        g.fixed = fixed.to_vec();
        Ok(g)
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.d() {
            return Err(Error::InvalidArgument(format!("vertex index {v} out of range (d = {})", self.d())));
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown vertex '{name}'")))
    }

    pub fn has_directed(&self, i: usize, j: usize) -> bool {
        self.directed[i * self.d() + j]
    }

    pub fn has_bidirected(&self, i: usize, j: usize) -> bool {
        self.bidirected[i * self.d() + j]
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.has_directed(i, j) || self.has_directed(j, i) || self.has_bidirected(i, j)
    }

    pub fn is_fixed(&self, v: usize) -> bool {
        self.fixed[v]
    }

    pub fn fixed_mask(&self) -> &[bool] {
        &self.fixed
    }

    pub fn has_fixed(&self) -> bool {
        self.fixed.iter().any(|&f| f)
    }

    pub fn children(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.d()).filter(move |&w| self.has_directed(v, w))
    }

    pub fn parents(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.d()).filter(move |&w| self.has_directed(w, v))
    }

    pub fn siblings(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.d()).filter(move |&w| self.has_bidirected(v, w))
    }

    /// Directed edges as `(from, to)` in row-major order.
    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        let d = self.d();
        (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).filter(|&(i, j)| self.has_directed(i, j)).collect()
    }

    /// Bidirected edges as `(i, j)` with `i < j`.
    pub fn bidirected_edges(&self) -> Vec<(usize, usize)> {
        let d = self.d();
        (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).filter(|&(i, j)| self.has_bidirected(i, j)).collect()
    }

    pub fn num_edges(&self) -> usize {
        self.directed_edges().len() + self.bidirected_edges().len()
    }

    /// Binary directed adjacency matrix.
    pub fn directed_matrix(&self) -> DMatrix<f64> {
        let d = self.d();
        DMatrix::from_fn(d, d, |i, j| if self.has_directed(i, j) { 1.0 } else { 0.0 })
    }

    /// Binary bidirected adjacency matrix.
    pub fn bidirected_matrix(&self) -> DMatrix<f64> {
        let d = self.d();
        DMatrix::from_fn(d, d, |i, j| if self.has_bidirected(i, j) { 1.0 } else { 0.0 })
    }

    /// A topological order of the directed part, or `None` if it has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let d = self.d();
        let mut indegree: Vec<usize> = (0..d).map(|v| self.parents(v).count()).collect();
        let mut queue: VecDeque<usize> = (0..d).filter(|&v| indegree[v] == 0).collect();
        let mut order = Vec::with_capacity(d);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for w in self.children(v) {
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    queue.push_back(w);
                }
            }
        }
        (order.len() == d).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// `m[i][j]` is true iff there is a directed path of length >= 1 from `i` to `j`.
    pub fn proper_ancestor_matrix(&self) -> Vec<Vec<bool>> {
        let d = self.d();
        let mut reach = vec![vec![false; d]; d];
        for (start, row) in reach.iter_mut().enumerate() {
            let mut stack: Vec<usize> = self.children(start).collect();
            while let Some(v) = stack.pop() {
                if !row[v] {
                    row[v] = true;
                    stack.extend(self.children(v));
                }
            }
        }
        reach
    }

    /// Vertices connected to `v` by a bidirected path that avoids fixed vertices
    /// (including `v` itself).
    pub fn district(&self, v: usize) -> Vec<bool> {
        let d = self.d();
        let mut seen = vec![false; d];
        seen[v] = true;
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            for w in self.siblings(u) {
                if !seen[w] && !self.fixed[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Serializable edge-list form used by the JSON format.
    pub fn to_json_graph(&self) -> JsonGraph {
        let fixed: Vec<String> = (0..self.d()).filter(|&v| self.fixed[v]).map(|v| self.names[v].clone()).collect();
        JsonGraph {
            vertices: self.names.clone(),
            directed: self.directed_edges().into_iter().map(|(i, j)| [self.names[i].clone(), self.names[j].clone()]).collect(),
            bidirected: self
                .bidirected_edges()
                .into_iter()
                .map(|(i, j)| [self.names[i].clone(), self.names[j].clone()])
                .collect(),
            fixed: (!fixed.is_empty()).then_some(fixed),
        }
    }

    pub fn from_json_graph(g: &JsonGraph) -> Result<Self> {
        let mut out = Self::empty(&g.vertices)?;
        for [a, b] in &g.directed {
            let (i, j) = (out.index_of(a)?, out.index_of(b)?);
            out.insert_directed(i, j)?;
        }
        for [a, b] in &g.bidirected {
            let (i, j) = (out.index_of(a)?, out.index_of(b)?);
            out.insert_bidirected(i, j)?;
        }
        if let Some(fixed) = &g.fixed {
            let mut mask = vec![false; out.d()];
            for name in fixed {
                mask[out.index_of(name)?] = true;
            }
            out = out.with_fixed(&mask)?;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_graph()).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: JsonGraph = serde_json::from_str(text)?;
        Self::from_json_graph(&g)
    }

    /// Plain-text edge list. Every vertex is declared on its own line first so
    /// that vertex order and isolated vertices survive a round trip.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for name in &self.names {
            out.push_str(name);
            out.push('\n');
        }
        for (i, j) in self.directed_edges() {
            out.push_str(&format!("{} -> {}\n", self.names[i], self.names[j]));
        }
        for (i, j) in self.bidirected_edges() {
            out.push_str(&format!("{} <-> {}\n", self.names[i], self.names[j]));
        }
        out
    }

    /// Parses `A -> B` and `A <-> B` lines. Bare names declare vertices; vertices
    /// first seen in an edge are appended in order of appearance. `#` starts a comment.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut names: Vec<String> = Vec::new();
        let mut directed = Vec::new();
        let mut bidirected = Vec::new();
        let intern = |name: &str, names: &mut Vec<String>| -> Result<String> {
            let name = name.trim();
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(Error::Parse(format!("invalid vertex name '{name}'")));
            }
            if !names.iter().any(|n| n == name) {
                names.push(name.to_string());
            }
            Ok(name.to_string())
        };
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some((a, b)) = line.split_once("<->") {
                let a = intern(a, &mut names)?;
                let b = intern(b, &mut names)?;
                bidirected.push((a, b));
            } else if let Some((a, b)) = line.split_once("->") {
                let a = intern(a, &mut names)?;
                let b = intern(b, &mut names)?;
                directed.push((a, b));
            } else {
                intern(line, &mut names).map_err(|_| Error::Parse(format!("line {}: cannot parse '{raw}'", lineno + 1)))?;
            }
        }
        let dir: Vec<(&str, &str)> = directed.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let bi: Vec<(&str, &str)> = bidirected.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        Self::from_named_edges(&names, &dir, &bi)
    }

    /// Same graph with vertices reordered so that new vertex `k` is old vertex `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let d = self.d();
        if perm.len() != d {
            return Err(Error::InvalidArgument("permutation has the wrong length".into()));
        }
        let mut inv = vec![usize::MAX; d];
        for (k, &p) in perm.iter().enumerate() {
            if p >= d || inv[p] != usize::MAX {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
            inv[p] = k;
        }
        let names: Vec<String> = perm.iter().map(|&p| self.names[p].clone()).collect();
        let dir: Vec<(usize, usize)> = self.directed_edges().into_iter().map(|(i, j)| (inv[i], inv[j])).collect();
        let bi: Vec<(usize, usize)> = self.bidirected_edges().into_iter().map(|(i, j)| (inv[i], inv[j])).collect();
        let g = Self::from_edges(&names, &dir, &bi)?;
        let fixed: Vec<bool> = perm.iter().map(|&p| self.fixed[p]).collect();
        g.with_fixed(&fixed)
    }
}

fn check_names(names: &[String]) -> Result<()> {
    let mut seen = HashMap::new();
    for (k, n) in names.iter().enumerate() {
        if n.is_empty() {
            return Err(Error::InvalidGraph("empty vertex name".into()));
        }
        if let Some(prev) = seen.insert(n.as_str(), k) {
            return Err(Error::InvalidGraph(format!("duplicate vertex name '{n}' at positions {prev} and {k}")));
        }
    }
    Ok(())
}

impl fmt::Display for Admg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .directed_edges()
            .into_iter()
            .map(|(i, j)| format!("{}->{}", self.names[i], self.names[j]))
            .collect();
        parts.extend(self.bidirected_edges().into_iter().map(|(i, j)| format!("{}<->{}", self.names[i], self.names[j])));
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// On-disk JSON representation of a graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonGraph {
    pub vertices: Vec<String>,
    #[serde(default)]
    pub directed: Vec<[String; 2]>,
    #[serde(default)]
    pub bidirected: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed: Option<Vec<String>>,
}

/// Classifies a plain ADMG into the acyclic, ancestral, arid and bow-free classes.
pub fn check_properties(g: &Admg) -> Result<Properties> {
    if g.has_fixed() {
        return Err(Error::InvalidGraph("check_properties expects a graph without fixed vertices".into()));
    }
    let acyclic = g.is_acyclic();
    if !acyclic {
        return Ok(Properties { acyclic, ancestral: false, arid: false, bow_free: false });
    }
    let d = g.d();
    let anc = g.proper_ancestor_matrix();
    let mut ancestral = true;
    let mut bow_free = true;
    for i in 0..d {
        for j in 0..d {
            if g.has_bidirected(i, j) {
                ancestral &= !anc[i][j];
                bow_free &= !g.has_directed(i, j);
            }
        }
    }
    let arid = (0..d).all(|v| reachable(g, v).map(|r| r.reachable).unwrap_or(false));
    Ok(Properties { acyclic, ancestral, arid, bow_free })
}

/// True iff `v` has no bidirected path (through unfixed vertices) to any of its children.
pub fn primal_fixable(g: &Admg, v: usize) -> Result<bool> {
    g.check_vertex(v)?;
    if g.is_fixed(v) {
        return Err(Error::InvalidArgument(format!("vertex {} is already fixed", g.name(v))));
    }
    let district = g.district(v);
    Ok(!g.children(v).any(|w| district[w]))
}

/// Fixes `v`: marks it fixed and deletes every edge with an arrowhead at `v`.
pub fn primal_fix(g: &Admg, v: usize) -> Result<Admg> {
    if !primal_fixable(g, v)? {
        return Err(Error::NotFixable { vertex: g.name(v).to_string() });
    }
    let d = g.d();
    let mut out = g.clone();
    for u in 0..d {
        out.directed[u * d + v] = false;
        out.bidirected[u * d + v] = false;
        out.bidirected[v * d + u] = false;
    }
    out.fixed[v] = true;
    Ok(out)
}

/// Outcome of the reachability check for one root vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reachability {
    pub reachable: bool,
    /// When `v` is not reachable: `v` together with the vertices that could not
    /// be fixed, which form a `v`-rooted c-tree.
    pub c_tree: Option<Vec<usize>>,
}

/// Repeatedly primal-fixes vertices other than `v` until no progress is made.
pub fn reachable(g: &Admg, v: usize) -> Result<Reachability> {
    g.check_vertex(v)?;
    if g.has_fixed() {
        return Err(Error::InvalidArgument("reachable expects a graph without fixed vertices".into()));
    }
    let d = g.d();
    let mut cur = g.clone();
    loop {
        let mut progress = false;
        for u in (0..d).filter(|&u| u != v) {
            if !cur.is_fixed(u) && primal_fixable(&cur, u)? {
                cur = primal_fix(&cur, u)?;
                progress = true;
            }
        }
        if !progress {
            break;
        }
    }
    let remaining: Vec<usize> = (0..d).filter(|&u| u != v && !cur.is_fixed(u)).collect();
    if remaining.is_empty() {
        Ok(Reachability { reachable: true, c_tree: None })
    } else {
        let mut tree: Vec<usize> = remaining;
        tree.push(v);
        tree.sort_unstable();
        Ok(Reachability { reachable: false, c_tree: Some(tree) })
    }
}

/// True iff an inducing path connects `i` and `j`: a path on which every
/// non-endpoint is a collider with a directed path to `i` or `j`. Adjacent
/// vertices are joined by a trivial inducing path.
pub fn inducing_path_exists(g: &Admg, i: usize, j: usize) -> Result<bool> {
    g.check_vertex(i)?;
    g.check_vertex(j)?;
    if i == j {
        return Err(Error::InvalidArgument("inducing path endpoints must differ".into()));
    }
    if g.is_fixed(i) || g.is_fixed(j) {
        return Err(Error::InvalidArgument("inducing path endpoints must be unfixed".into()));
    }
    if g.adjacent(i, j) {
        return Ok(true);
    }
    // Every interior vertex is a collider, so interior edges are bidirected and
    // the end edges point into the path: i *-> v1 <-> ... <-> vk <-* j.
    let d = g.d();
    let anc = g.proper_ancestor_matrix();
    let allowed: Vec<bool> = (0..d).map(|v| v != i && v != j && (anc[v][i] || anc[v][j])).collect();
    let into_from = |end: usize, v: usize| g.has_directed(end, v) || g.has_bidirected(end, v);
    let mut seen = vec![false; d];
    let mut stack: Vec<usize> = (0..d).filter(|&v| allowed[v] && into_from(i, v)).collect();
    for &v in &stack {
        seen[v] = true;
    }
    while let Some(v) = stack.pop() {
        if into_from(j, v) {
            return Ok(true);
        }
        for w in g.siblings(v) {
            if allowed[w] && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    Ok(false)
}

/// Maximal ancestral graph implied by `g`: vertices joined by an inducing path
/// become adjacent, oriented by ancestry (bidirected when neither is an ancestor).
pub fn mag_projection(g: &Admg) -> Result<Admg> {
    if g.has_fixed() {
        return Err(Error::InvalidGraph("mag_projection expects a graph without fixed vertices".into()));
    }
    if !g.is_acyclic() {
        return Err(Error::InvalidGraph("mag_projection requires an acyclic graph".into()));
    }
    let d = g.d();
    let anc = g.proper_ancestor_matrix();
    let mut out = Admg::empty(g.names())?;
    for i in 0..d {
        for j in i + 1..d {
            if !inducing_path_exists(g, i, j)? {
                continue;
            }
            if anc[i][j] {
                out.insert_directed(i, j)?;
            } else if anc[j][i] {
                out.insert_directed(j, i)?;
            } else {
                out.insert_bidirected(i, j)?;
            }
        }
    }
    Ok(out)
}

/// Samples a random ADMG of the requested class.
///
/// A random topological order is drawn, every forward directed edge is kept
/// with probability `p_dir` and every bidirected edge with probability `p_bi`;
/// bidirected edges that would form a bow are dropped. For the arid and
/// ancestral classes the draw is repeated until the class check passes.
pub fn random_admg<R: Rng + ?Sized>(d: usize, p_dir: f64, p_bi: f64, class: GraphClass, rng: &mut R) -> Result<Admg> {
    random_admg_with_budget(d, p_dir, p_bi, class, DEFAULT_REJECTION_BUDGET, rng)
}

pub fn random_admg_with_budget<R: Rng + ?Sized>(
    d: usize,
    p_dir: f64,
    p_bi: f64,
    class: GraphClass,
    budget: usize,
    rng: &mut R,
) -> Result<Admg> {
    for p in [p_dir, p_bi] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("edge probability {p} outside [0, 1]")));
        }
    }
    for _ in 0..budget.max(1) {
        let g = draw_bow_free(d, p_dir, p_bi, rng);
        if class == GraphClass::BowFree || check_properties(&g)?.satisfies(class) {
            return Ok(g);
        }
    }
    Err(Error::GenerationFailure { attempts: budget })
}

fn draw_bow_free<R: Rng + ?Sized>(d: usize, p_dir: f64, p_bi: f64, rng: &mut R) -> Admg {
    let mut order: Vec<usize> = (0..d).collect();
    order.shuffle(rng);
    let mut g = Admg::with_vertices(d);
    for a in 0..d {
        for b in a + 1..d {
            if rng.random_bool(p_dir) {
                g.directed[order[a] * d + order[b]] = true;
            }
        }
    }
    for i in 0..d {
        for j in i + 1..d {
            if rng.random_bool(p_bi) && !g.has_directed(i, j) && !g.has_directed(j, i) {
                g.bidirected[i * d + j] = true;
                g.bidirected[j * d + i] = true;
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn confounded_pair() -> Admg {
        Admg::from_named_edges(&["A", "B", "C", "D"], &[("A", "C"), ("B", "D")], &[("C", "D")]).unwrap()
    }

    fn verma_graph() -> Admg {
        Admg::from_named_edges(&["A", "B", "C", "D"], &[("A", "C"), ("C", "D"), ("D", "B")], &[("A", "B"), ("A", "D")])
            .unwrap()
    }

    fn verma_graph_with_bc() -> Admg {
        verma_graph().with_bidirected(2, 1).unwrap()
    }

    // The Verma graph relabelled: A=V1, C=V2, D=V3, B=V4.
    fn ga() -> Admg {
        Admg::from_edges(&["V1", "V2", "V3", "V4"], &[(0, 1), (1, 2), (2, 3)], &[(0, 2), (0, 3)]).unwrap()
    }

    fn gb() -> Admg {
        ga().with_bidirected(1, 3).unwrap()
    }

    #[test]
    fn motivating_graphs_are_classified() {
        let p = check_properties(&confounded_pair()).unwrap();
        assert_eq!(p, Properties { acyclic: true, ancestral: true, arid: true, bow_free: true });
        let p = check_properties(&verma_graph()).unwrap();
        assert_eq!(p, Properties { acyclic: true, ancestral: false, arid: true, bow_free: true });
        let p = check_properties(&verma_graph_with_bc()).unwrap();
        assert_eq!(p, Properties { acyclic: true, ancestral: false, arid: false, bow_free: true });
    }

    #[test]
    fn bow_is_detected() {
        let g = Admg::from_edges(&["A", "B"], &[(0, 1)], &[(0, 1)]).unwrap();
        assert!(!check_properties(&g).unwrap().bow_free);
    }

    #[test]
    fn cyclic_graph_fails_every_class() {
        let g = Admg::from_edges(&["A", "B"], &[(0, 1), (1, 0)], &[]).unwrap();
        let p = check_properties(&g).unwrap();
        assert!(!p.acyclic && !p.ancestral && !p.arid && !p.bow_free);
    }

    #[test]
    fn malformed_matrices_are_rejected() {
        let names = ["A", "B"];
        let d = DMatrix::zeros(2, 2);
        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(Admg::from_matrices(&names, &d, &asym), Err(Error::InvalidGraph(_))));
        let diag = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(Admg::from_matrices(&names, &d, &diag), Err(Error::InvalidGraph(_))));
        assert!(matches!(Admg::from_matrices(&names, &diag, &d), Err(Error::InvalidGraph(_))));
        assert!(Admg::empty(&["A", "A"]).is_err());
    }

    #[test]
    fn primal_fixing_follows_the_worked_example() {
        assert!(primal_fixable(&ga(), 0).unwrap());
        for v in 0..3 {
            assert!(!primal_fixable(&gb(), v).unwrap(), "V{} should not be fixable in G^b", v + 1);
        }
        let fixed = primal_fix(&ga(), 0).unwrap();
        assert_eq!(fixed.directed_edges(), vec![(0, 1), (1, 2), (2, 3)]);
        assert!(fixed.bidirected_edges().is_empty());
        assert_eq!(fixed.fixed_mask(), &[true, false, false, false]);
        // input is untouched
        assert_eq!(ga().bidirected_edges().len(), 2);
    }

    #[test]
    fn fixing_order_does_not_matter() {
        let g = ga();
        let a = primal_fix(&primal_fix(&g, 0).unwrap(), 1).unwrap();
        let g1 = primal_fix(&g, 0).unwrap();
        assert!(primal_fixable(&g1, 1).unwrap());
        let b = primal_fix(&primal_fix(&g, 3).unwrap(), 0).unwrap();
        let c = primal_fix(&primal_fix(&g, 0).unwrap(), 3).unwrap();
        assert_eq!(b, c);
        assert_eq!(a.fixed_mask(), &[true, true, false, false]);
    }

    #[test]
    fn childless_vertex_is_fixable_and_isolated_fix_only_sets_mask() {
        let g = Admg::from_edges(&["A", "B", "C"], &[(0, 1)], &[(0, 1)]).unwrap();
        assert!(primal_fixable(&g, 1).unwrap());
        let f = primal_fix(&g, 2).unwrap();
        assert_eq!(f.directed_edges(), g.directed_edges());
        assert_eq!(f.bidirected_edges(), g.bidirected_edges());
        assert_eq!(f.fixed_mask(), &[false, false, true]);
    }

    #[test]
    fn primal_fixable_argument_errors() {
        let g = ga();
        assert!(matches!(primal_fixable(&g, 9), Err(Error::InvalidArgument(_))));
        let f = primal_fix(&g, 0).unwrap();
        assert!(matches!(primal_fixable(&f, 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(primal_fix(&gb(), 0), Err(Error::NotFixable { .. })));
    }

    #[test]
    fn reachability_and_c_tree_witness() {
        assert!(reachable(&ga(), 3).unwrap().reachable);
        let r = reachable(&gb(), 3).unwrap();
        assert!(!r.reachable);
        assert_eq!(r.c_tree, Some(vec![0, 1, 2, 3]));
        let single = Admg::with_vertices(1);
        assert_eq!(reachable(&single, 0).unwrap(), Reachability { reachable: true, c_tree: None });
    }

    #[test]
    fn inducing_paths() {
        let names = ["Akt", "Erk", "Jnk", "PKC", "PKA"];
        let g = Admg::from_named_edges(
            &names,
            &[("Akt", "Erk"), ("Erk", "Jnk"), ("Jnk", "PKC"), ("PKA", "Jnk")],
            &[("Erk", "PKA"), ("PKA", "PKC")],
        )
        .unwrap();
        assert!(inducing_path_exists(&g, 0, 3).unwrap());
        assert!(!inducing_path_exists(&confounded_pair(), 0, 3).unwrap());
        assert!(inducing_path_exists(&confounded_pair(), 0, 2).unwrap());
        assert!(inducing_path_exists(&confounded_pair(), 0, 0).is_err());
    }

    #[test]
    fn mag_projection_examples() {
        let m = mag_projection(&verma_graph()).unwrap();
        let expected = Admg::from_named_edges(
            &["A", "B", "C", "D"],
            &[("A", "C"), ("C", "D"), ("D", "B"), ("A", "B"), ("A", "D"), ("C", "B")],
            &[],
        )
        .unwrap();
        assert_eq!(m, expected);
        assert_eq!(mag_projection(&confounded_pair()).unwrap(), confounded_pair());
        let dag = Admg::from_edges(&["A", "B", "C"], &[(0, 1), (1, 2)], &[]).unwrap();
        assert_eq!(mag_projection(&dag).unwrap(), dag);
        let cyc = Admg::from_edges(&["A", "B"], &[(0, 1), (1, 0)], &[]).unwrap();
        assert!(mag_projection(&cyc).is_err());
    }

    #[test]
    fn random_graphs_respect_their_class() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_admg(1, 0.5, 0.5, GraphClass::Arid, &mut rng).unwrap();
        assert_eq!(g.num_edges(), 0);
        let g = random_admg(10, 0.4, 0.3, GraphClass::BowFree, &mut rng).unwrap();
        assert!(check_properties(&g).unwrap().bow_free);
        for class in GraphClass::ALL {
            let g = random_admg(3, 1.0, 0.0, class, &mut rng).unwrap();
            assert_eq!(g.directed_edges().len(), 3);
            assert!(g.is_acyclic());
        }
        for class in GraphClass::ALL {
            for _ in 0..20 {
                let g = random_admg(5, 0.4, 0.3, class, &mut rng).unwrap();
                assert!(check_properties(&g).unwrap().satisfies(class));
            }
        }
        assert!(random_admg(2, 1.5, 0.0, GraphClass::BowFree, &mut rng).is_err());
    }

    #[test]
    fn rejection_budget_exhaustion_is_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // dense graphs on 12 vertices are essentially never ancestral
        let err = random_admg_with_budget(12, 0.9, 0.9, GraphClass::Ancestral, 5, &mut rng).unwrap_err();
        assert!(matches!(err, Error::GenerationFailure { attempts: 5 }));
    }

    #[test]
    fn text_formats_round_trip() {
        let g = verma_graph().with_bidirected(2, 1).unwrap();
        assert_eq!(Admg::from_json(&g.to_json()).unwrap(), g);
        assert_eq!(Admg::from_edge_list(&g.to_edge_list()).unwrap(), g);
        let iso = Admg::with_vertices(3);
        assert_eq!(Admg::from_edge_list(&iso.to_edge_list()).unwrap(), iso);
        let fixed = primal_fix(&ga(), 0).unwrap();
        assert_eq!(Admg::from_json(&fixed.to_json()).unwrap(), fixed);
        let parsed = Admg::from_edge_list("# comment\nA -> C\nB -> D\nC <-> D\n").unwrap();
        assert_eq!(parsed.names(), &["A", "C", "B", "D"]);
        assert_eq!(parsed.num_edges(), 3);
    }
}
