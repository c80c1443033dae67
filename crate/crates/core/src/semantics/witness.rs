use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::eval::formula_set;
use super::kripke::{bits, KripkeStructure, World, WorldSet};
use super::SemanticsError;
use crate::syntax::{Formula, Program};

pub const DEFAULT_CAP: usize = 256;

/// A transition `source --program--> target` asked about in `structure`.
#[derive(Clone, Copy, Debug)]
pub struct TransitionQuery<'a> {
    pub structure: &'a KripkeStructure,
    pub source: World,
    pub program: &'a Program,
    pub target: World,
}

impl<'a> TransitionQuery<'a> {
    pub fn new(
        structure: &'a KripkeStructure,
        source: World,
        program: &'a Program,
        target: World,
    ) -> Result<Self, SemanticsError> {
        for w in [source, target] {
            if w >= structure.size() {
                return Err(SemanticsError::UnknownWorld(format!("#{w}")));
            }
        }
        Ok(TransitionQuery {
            structure,
            source,
            program,
            target,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: World,
    pub label: String,
    pub to: World,
}

/// Sub-structure certifying one transition.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WitnessGraph {
    pub nodes: BTreeSet<World>,
    pub edges: BTreeSet<Edge>,
    pub source: World,
    pub target: World,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessSet {
    pub graphs: Vec<WitnessGraph>,
    /// Set when some alternatives were dropped because of the cap.
    pub truncated: bool,
}

type EdgeMask = SmallVec<[u64; 2]>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Compact {
    edges: EdgeMask,
    nodes: WorldSet,
}

/// Numbering of the host's labelled edges as bits.
struct EdgeIndex {
    labels: Vec<String>,
    n: usize,
    words: usize,
}

impl EdgeIndex {
    fn new(k: &KripkeStructure) -> Self {
        let labels: Vec<String> = k.programs().map(|(a, _)| a.to_string()).collect();
        let n = k.size();
        let total = labels.len() * n * n;
        EdgeIndex {
            labels,
            n,
            words: total.div_ceil(64).max(1),
        }
    }

    fn bit(&self, label: usize, u: World, v: World) -> usize {
        (label * self.n + u) * self.n + v
    }

    fn label(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == name)
    }

    fn empty(&self) -> EdgeMask {
        SmallVec::from_elem(0, self.words)
    }

    fn single(&self, bit: usize) -> EdgeMask {
        let mut m = self.empty();
        m[bit / 64] |= 1 << (bit % 64);
        m
    }

    fn has(mask: &EdgeMask, bit: usize) -> bool {
        mask[bit / 64] >> (bit % 64) & 1 == 1
    }

    fn from_edges(&self, edges: &BTreeSet<Edge>) -> Option<EdgeMask> {
        let mut m = self.empty();
        for e in edges {
            let l = self.label(&e.label)?;
            if e.from >= self.n || e.to >= self.n {
                return None;
            }
            let b = self.bit(l, e.from, e.to);
            m[b / 64] |= 1 << (b % 64);
        }
        Some(m)
    }

    fn to_edges(&self, mask: &EdgeMask) -> BTreeSet<Edge> {
        let mut out = BTreeSet::new();
        for (wi, &word) in mask.iter().enumerate() {
            for i in bits(word) {
                let b = wi * 64 + i;
                let v = b % self.n;
                let u = (b / self.n) % self.n;
                let l = b / (self.n * self.n);
                out.insert(Edge {
                    from: u,
                    label: self.labels[l].clone(),
                    to: v,
                });
            }
        }
        out
    }
}

struct Enumerator<'a> {
    k: &'a KripkeStructure,
    index: EdgeIndex,
    allowed_edges: Option<EdgeMask>,
    allowed_nodes: WorldSet,
    cap: usize,
    truncated: bool,
    tests: HashMap<*const Formula, WorldSet>,
}

impl<'a> Enumerator<'a> {
    fn new(k: &'a KripkeStructure, cap: usize) -> Self {
        Enumerator {
            k,
            index: EdgeIndex::new(k),
            allowed_edges: None,
            allowed_nodes: k.all_worlds(),
            cap: cap.max(1),
            truncated: false,
            tests: HashMap::new(),
        }
    }

    fn test_set(&mut self, f: &Formula) -> Result<WorldSet, SemanticsError> {
        let key = f as *const Formula;
        if let Some(&s) = self.tests.get(&key) {
            return Ok(s);
        }
        let s = formula_set(self.k, f)?;
        self.tests.insert(key, s);
        Ok(s)
    }

    fn node_ok(&self, w: World) -> bool {
        self.allowed_nodes >> w & 1 == 1
    }

    fn finish(&mut self, mut gs: Vec<Compact>) -> Vec<Compact> {
        gs.sort();
        gs.dedup();
        if gs.len() > self.cap {
            gs.truncate(self.cap);
            self.truncated = true;
        }
        gs
    }

    fn combine(&mut self, left: &[Compact], right: &[Compact]) -> Vec<Compact> {
        let mut out = Vec::with_capacity(left.len() * right.len());
        for l in left {
            for r in right {
                let edges = l.edges.iter().zip(&r.edges).map(|(a, b)| a | b).collect();
                out.push(Compact {
                    edges,
                    nodes: l.nodes | r.nodes,
                });
            }
        }
        out
    }

    fn run(&mut self, p: &Program, u: World, v: World) -> Result<Vec<Compact>, SemanticsError> {
        if !self.node_ok(u) || !self.node_ok(v) {
            return Ok(Vec::new());
        }
        let gs = match p {
            Program::Atomic(a) => {
                if !self.k.edges(a)?.contains(u, v) {
                    return Ok(Vec::new());
                }
                let l = self.index.label(a).expect("host program is indexed");
                let bit = self.index.bit(l, u, v);
                if let Some(allowed) = &self.allowed_edges {
                    if !EdgeIndex::has(allowed, bit) {
                        return Ok(Vec::new());
                    }
                }
                vec![Compact {
                    edges: self.index.single(bit),
                    nodes: 1 << u | 1 << v,
                }]
            }
            Program::Test(f) => {
                if u != v || self.test_set(f)? >> u & 1 == 0 {
                    return Ok(Vec::new());
                }
                vec![Compact {
                    edges: self.index.empty(),
                    nodes: 1 << u,
                }]
            }
            Program::Seq(a, b) => {
                let mut out = Vec::new();
                for w in bits(self.allowed_nodes & self.k.all_worlds()) {
                    let left = self.run(a, u, w)?;
                    if left.is_empty() {
                        continue;
                    }
                    let right = self.run(b, w, v)?;
                    out.extend(self.combine(&left, &right));
                    if out.len() > self.cap.saturating_mul(4) {
                        out = self.finish(out);
                    }
                }
                out
            }
            Program::Union(a, b) => {
                let mut out = self.run(a, u, v)?;
                out.extend(self.run(b, u, v)?);
                out
            }
            Program::Inter(a, b) => {
                let left = self.run(a, u, v)?;
                if left.is_empty() {
                    return Ok(Vec::new());
                }
                let right = self.run(b, u, v)?;
                self.combine(&left, &right)
            }
        };
        Ok(self.finish(gs))
    }

    fn expand(&self, c: &Compact, q: &TransitionQuery) -> WitnessGraph {
        WitnessGraph {
            nodes: bits(c.nodes).collect(),
            edges: self.index.to_edges(&c.edges),
            source: q.source,
            target: q.target,
        }
    }

    fn compact(&self, g: &WitnessGraph) -> Option<Compact> {
        let mut nodes = 0u64;
        for &w in &g.nodes {
            if w >= self.index.n {
                return None;
            }
            nodes |= 1 << w;
        }
        Some(Compact {
            edges: self.index.from_edges(&g.edges)?,
            nodes,
        })
    }
}

/// All witness graphs for the query, deduplicated, at most `cap` of them.
pub fn witness_graphs(q: &TransitionQuery, cap: usize) -> Result<WitnessSet, SemanticsError> {
    let mut en = Enumerator::new(q.structure, cap);
    let gs = en.run(q.program, q.source, q.target)?;
    Ok(WitnessSet {
        graphs: gs.iter().map(|c| en.expand(c, q)).collect(),
        truncated: en.truncated,
    })
}

/// Witness graphs for `q` built only from the nodes and edges of `g`.
fn witnesses_inside(g: &WitnessGraph, q: &TransitionQuery) -> Result<Option<(Compact, Vec<Compact>)>, SemanticsError> {
    let mut en = Enumerator::new(q.structure, usize::MAX);
    let Some(c) = en.compact(g) else {
        return Ok(None);
    };
    en.allowed_edges = Some(c.edges.clone());
    en.allowed_nodes = c.nodes;
    let inside = en.run(q.program, q.source, q.target)?;
    Ok(Some((c, inside)))
}

/// Whether `g` is exactly one of the graphs produced by the inductive
/// witness clauses for `q`.
pub fn is_witness(g: &WitnessGraph, q: &TransitionQuery) -> Result<bool, SemanticsError> {
    if g.source != q.source || g.target != q.target {
        return Ok(false);
    }
    Ok(match witnesses_inside(g, q)? {
        Some((c, inside)) => inside.contains(&c),
        None => false,
    })
}

/// True iff `g` is a witness graph for `q` and no proper sub-structure of
/// `g` is one.
pub fn is_minimal_witness(g: &WitnessGraph, q: &TransitionQuery) -> Result<bool, SemanticsError> {
    if g.source != q.source || g.target != q.target {
        return Ok(false);
    }
    Ok(match witnesses_inside(g, q)? {
        Some((c, inside)) => inside.len() == 1 && inside[0] == c,
        None => false,
    })
}

impl WitnessGraph {
    fn successors(&self, w: World) -> impl Iterator<Item = World> + '_ {
        self.edges.iter().filter(move |e| e.from == w).map(|e| e.to)
    }

    /// Is there a path of positive length from `from` to `to` whose
    /// intermediate and final nodes avoid `avoid`?
    pub fn reaches_avoiding(&self, from: World, to: World, avoid: Option<World>) -> bool {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<World> = self.successors(from).collect();
        while let Some(w) = stack.pop() {
            if Some(w) == avoid || !seen.insert(w) {
                continue;
            }
            if w == to {
                return true;
            }
            stack.extend(self.successors(w));
        }
        false
    }

    pub fn to_dot(&self, k: &KripkeStructure) -> String {
        let mut s = String::from("digraph witness {\n");
        for &w in &self.nodes {
            let shape = if w == self.source || w == self.target {
                "doublecircle"
            } else {
                "circle"
            };
            s.push_str(&format!("  \"{}\" [shape={shape}];\n", k.world_name(w)));
        }
        for e in &self.edges {
            s.push_str(&format!(
                "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
                k.world_name(e.from),
                k.world_name(e.to),
                e.label
            ));
        }
        s.push_str("}\n");
        s
    }
}

/// Nodes other than `u` and `w` lying on every positive-length path from
/// `u` to `w` inside `g`.
pub fn articulation_nodes(
    g: &WitnessGraph,
    u: World,
    w: World,
) -> Result<BTreeSet<World>, SemanticsError> {
    if !g.reaches_avoiding(u, w, None) {
        return Err(SemanticsError::Precondition(format!(
            "graph has no path of positive length from #{u} to #{w}"
        )));
    }
    Ok(g.nodes
        .iter()
        .copied()
        .filter(|&v| v != u && v != w && !g.reaches_avoiding(u, w, Some(v)))
        .collect())
}
