use std::collections::{BTreeMap, BTreeSet};

use super::eval::relation_with;
use super::kripke::{KripkeStructure, Relation, World};
use super::witness::{articulation_nodes, is_minimal_witness, is_witness, Edge, TransitionQuery, WitnessGraph};
use super::SemanticsError;
use crate::syntax::{Formula, Program};

/// Per-call bound on the number of split candidates kept.
const SPLIT_LIMIT: usize = 512;

/// The host structure with atomic programs cut down to a set of edges.
/// Tests are still evaluated in the full host.
struct Restricted<'a> {
    k: &'a KripkeStructure,
    atoms: BTreeMap<String, Relation>,
    nodes: Vec<World>,
}

impl<'a> Restricted<'a> {
    fn new(k: &'a KripkeStructure, g: &WitnessGraph, drop: &BTreeSet<Edge>) -> Self {
        let mut atoms: BTreeMap<String, Relation> = k
            .programs()
            .map(|(a, _)| (a.to_string(), Relation::empty(k.size())))
            .collect();
        for e in g.edges.difference(drop) {
            if let Some(r) = atoms.get_mut(&e.label) {
                r.rows[e.from] |= 1 << e.to;
            }
        }
        Restricted {
            k,
            atoms,
            nodes: g.nodes.iter().copied().collect(),
        }
    }

    fn related(&self, p: &Program, s: World, t: World) -> Result<bool, SemanticsError> {
        let rel = relation_with(self.k, p, &|a| {
            self.atoms
                .get(a)
                .cloned()
                .ok_or_else(|| SemanticsError::UnknownProgram(a.to_string()))
        })?;
        Ok(rel.contains(s, t))
    }

    /// Pairs `(x, y)` with `s -x-> v`, `v -y-> t` and `x;y ⇒ p`, following
    /// the structure of `p`.
    fn splits(
        &self,
        p: &Program,
        s: World,
        t: World,
        v: World,
    ) -> Result<Vec<(Program, Program)>, SemanticsError> {
        let mut out = Vec::new();
        if !self.related(p, s, t)? {
            return Ok(out);
        }
        match p {
            Program::Seq(a1, a2) => {
                for &m in &self.nodes {
                    if out.len() >= SPLIT_LIMIT {
                        break;
                    }
                    if !self.related(a1, s, m)? || !self.related(a2, m, t)? {
                        continue;
                    }
                    if m == v {
                        out.push(((**a1).clone(), (**a2).clone()));
                    }
                    for (x, y) in self.splits(a1, s, m, v)? {
                        out.push((x, Program::seq(y, (**a2).clone())));
                    }
                    for (x, y) in self.splits(a2, m, t, v)? {
                        out.push((Program::seq((**a1).clone(), x), y));
                    }
                }
            }
            Program::Inter(a1, a2) => {
                let left = self.splits(a1, s, t, v)?;
                if !left.is_empty() {
                    let right = self.splits(a2, s, t, v)?;
                    'outer: for (x1, y1) in &left {
                        for (x2, y2) in &right {
                            if out.len() >= SPLIT_LIMIT {
                                break 'outer;
                            }
                            out.push((
                                Program::inter(x1.clone(), x2.clone()),
                                Program::inter(y1.clone(), y2.clone()),
                            ));
                        }
                    }
                }
            }
            Program::Union(a1, a2) => {
                out.extend(self.splits(a1, s, t, v)?);
                out.extend(self.splits(a2, s, t, v)?);
            }
            Program::Atomic(_) | Program::Test(_) => {}
        }
        if s == v {
            out.push((Program::skip(), p.clone()));
        }
        if t == v {
            out.push((p.clone(), Program::skip()));
        }
        out.truncate(SPLIT_LIMIT);
        Ok(out)
    }
}

/// Split `alpha` at the articulation node `v` of the minimal witness graph
/// `g` for `u --alpha--> w`. Returns `(b1, b2)` with `u --b1--> v`,
/// `v --b2--> w` and `b1;b2 ⇒ alpha`.
///
/// `alpha` must be union-free and contain at least one composition.
pub fn gateway_split(
    k: &KripkeStructure,
    g: &WitnessGraph,
    u: World,
    w: World,
    v: World,
    alpha: &Program,
) -> Result<(Program, Program), SemanticsError> {
    if alpha.contains_union() || !alpha.contains_seq() {
        return Err(SemanticsError::Precondition(
            "program must be union-free and contain a composition".into(),
        ));
    }
    let q = TransitionQuery::new(k, u, alpha, w)?;
    if !is_minimal_witness(g, &q)? {
        return Err(SemanticsError::Precondition(
            "graph is not a minimal witness graph for the transition".into(),
        ));
    }
    if !articulation_nodes(g, u, w)?.contains(&v) {
        return Err(SemanticsError::Precondition(format!(
            "{} is not an articulation node",
            k.world_name(v)
        )));
    }
    let r = Restricted::new(k, g, &BTreeSet::new());
    r.splits(alpha, u, w, v)?
        .into_iter()
        .next()
        .ok_or_else(|| SemanticsError::Precondition("no split exists at the given node".into()))
}

/// Replace the part of `alpha` that walks `region` (a detour from `v` back
/// to `v`) by the test `(<b^>true)?` at `v`. The result's witness on `g`
/// avoids `region`, and it refines `alpha`.
pub fn excise_loop(
    k: &KripkeStructure,
    g: &WitnessGraph,
    u: World,
    w: World,
    v: World,
    region: &BTreeSet<Edge>,
    alpha: &Program,
) -> Result<Program, SemanticsError> {
    if region.is_empty() {
        return Err(SemanticsError::Precondition("region must contain an edge".into()));
    }
    if !region.is_subset(&g.edges) {
        return Err(SemanticsError::Precondition("region edges must belong to the graph".into()));
    }
    if v == u || v == w || !g.nodes.contains(&v) {
        return Err(SemanticsError::Precondition(
            "loop node must be an inner node of the graph".into(),
        ));
    }
    for e in region {
        let before = e.from == v || (e.from != u && !g.reaches_avoiding(u, e.from, Some(v)));
        let after = e.to == v || (e.to != w && !g.reaches_avoiding(e.to, w, Some(v)));
        if !before || !after {
            return Err(SemanticsError::Precondition(format!(
                "paths do not pass {} both before and after edge {} -{}-> {}",
                k.world_name(v),
                k.world_name(e.from),
                e.label,
                k.world_name(e.to)
            )));
        }
    }
    let q = TransitionQuery::new(k, u, alpha, w)?;
    if !is_witness(g, &q)? {
        return Err(SemanticsError::Precondition(
            "graph is not a witness graph for the transition".into(),
        ));
    }
    let full = Restricted::new(k, g, &BTreeSet::new());
    let outside = Restricted::new(k, g, region);
    for (pre, rest) in full.splits(alpha, u, w, v)? {
        if !outside.related(&pre, u, v)? {
            continue;
        }
        for (body, suf) in full.splits(&rest, v, w, v)? {
            if body.is_skip() || !outside.related(&suf, v, w)? {
                continue;
            }
            let test = Program::test(Formula::diamond(Program::loop_of(body), Formula::True));
            return Ok(Program::seq_all([pre, test, suf]));
        }
    }
    Err(SemanticsError::Precondition(
        "no decomposition isolates the region at the loop node".into(),
    ))
}
