use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::SemanticsError;
use crate::syntax::Vocabulary;

pub const MAX_WORLDS: usize = 64;

/// World index into `KripkeStructure::worlds`.
pub type World = usize;

/// Set of worlds as a bitmask.
pub type WorldSet = u64;

/// A binary relation over the worlds of one structure, stored as successor
/// masks per world.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relation {
    pub rows: Vec<WorldSet>,
}

impl Relation {
    pub fn empty(n: usize) -> Self {
        Relation { rows: vec![0; n] }
    }

    pub fn identity_on(n: usize, set: WorldSet) -> Self {
        Relation {
            rows: (0..n)
                .map(|u| if set >> u & 1 == 1 { 1 << u } else { 0 })
                .collect(),
        }
    }

    pub fn contains(&self, u: World, v: World) -> bool {
        self.rows.get(u).is_some_and(|r| r >> v & 1 == 1)
    }

    pub fn compose(&self, other: &Relation) -> Relation {
        let rows = self
            .rows
            .iter()
            .map(|&r| {
                let mut acc = 0;
                for v in bits(r) {
                    acc |= other.rows[v];
                }
                acc
            })
            .collect();
        Relation { rows }
    }

    pub fn union(&self, other: &Relation) -> Relation {
        Relation {
            rows: self.rows.iter().zip(&other.rows).map(|(a, b)| a | b).collect(),
        }
    }

    pub fn intersect(&self, other: &Relation) -> Relation {
        Relation {
            rows: self.rows.iter().zip(&other.rows).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.rows.iter().zip(&other.rows).all(|(a, b)| a & !b == 0)
    }

    /// Worlds with at least one successor.
    pub fn domain(&self) -> WorldSet {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| **r != 0)
            .fold(0, |acc, (u, _)| acc | 1 << u)
    }

    pub fn pairs(&self) -> Vec<(World, World)> {
        let mut out = Vec::new();
        for (u, &r) in self.rows.iter().enumerate() {
            for v in bits(r) {
                out.push((u, v));
            }
        }
        out
    }
}

/// Indices of set bits, ascending.
pub fn bits(mut set: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if set == 0 {
            None
        } else {
            let i = set.trailing_zeros() as usize;
            set &= set - 1;
            Some(i)
        }
    })
}

/// Finite Kripke structure with at most 64 worlds.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KripkeStructure {
    worlds: Vec<String>,
    props: BTreeMap<String, WorldSet>,
    programs: BTreeMap<String, Relation>,
}

#[derive(Serialize, Deserialize)]
struct KripkeJson {
    worlds: Vec<String>,
    #[serde(default)]
    props: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    programs: BTreeMap<String, Vec<(String, String)>>,
}

impl KripkeStructure {
    /// Structure with the given worlds and every symbol of `vocab`
    /// interpreted as empty.
    pub fn new(worlds: Vec<String>, vocab: &Vocabulary) -> Result<Self, SemanticsError> {
        if worlds.len() > MAX_WORLDS {
            return Err(SemanticsError::TooManyWorlds(worlds.len()));
        }
        if worlds.is_empty() {
            return Err(SemanticsError::NoWorlds);
        }
        let distinct: BTreeSet<&String> = worlds.iter().collect();
        if distinct.len() != worlds.len() {
            return Err(SemanticsError::DuplicateWorld);
        }
        vocab
            .check_disjoint()
            .map_err(|e| SemanticsError::Vocabulary(e.to_string()))?;
        let n = worlds.len();
        Ok(KripkeStructure {
            worlds,
            props: vocab.props.iter().map(|p| (p.clone(), 0)).collect(),
            programs: vocab
                .programs
                .iter()
                .map(|a| (a.clone(), Relation::empty(n)))
                .collect(),
        })
    }

    /// Worlds named `w0..w{n-1}`.
    pub fn with_size(n: usize, vocab: &Vocabulary) -> Result<Self, SemanticsError> {
        Self::new((0..n).map(|i| format!("w{i}")).collect(), vocab)
    }

    pub fn size(&self) -> usize {
        self.worlds.len()
    }

    pub fn all_worlds(&self) -> WorldSet {
        if self.worlds.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.worlds.len()) - 1
        }
    }

    pub fn world_names(&self) -> &[String] {
        &self.worlds
    }

    pub fn world_name(&self, w: World) -> &str {
        &self.worlds[w]
    }

    pub fn world(&self, name: &str) -> Result<World, SemanticsError> {
        self.worlds
            .iter()
            .position(|w| w == name)
            .ok_or_else(|| SemanticsError::UnknownWorld(name.to_string()))
    }

    pub fn vocabulary(&self) -> Vocabulary {
        Vocabulary {
            props: self.props.keys().cloned().collect(),
            programs: self.programs.keys().cloned().collect(),
        }
    }

    pub fn valuation(&self, p: &str) -> Result<WorldSet, SemanticsError> {
        self.props
            .get(p)
            .copied()
            .ok_or_else(|| SemanticsError::UnknownProposition(p.to_string()))
    }

    pub fn edges(&self, a: &str) -> Result<&Relation, SemanticsError> {
        self.programs
            .get(a)
            .ok_or_else(|| SemanticsError::UnknownProgram(a.to_string()))
    }

    pub fn props(&self) -> impl Iterator<Item = (&str, WorldSet)> {
        self.props.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn programs(&self) -> impl Iterator<Item = (&str, &Relation)> {
        self.programs.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn set_valuation(&mut self, p: &str, set: WorldSet) -> Result<(), SemanticsError> {
        if self.programs.contains_key(p) {
            return Err(SemanticsError::Vocabulary(format!(
                "`{p}` is already an atomic program"
            )));
        }
        self.props.insert(p.to_string(), set & self.all_worlds());
        Ok(())
    }

    pub fn set_true(&mut self, p: &str, w: World) -> Result<(), SemanticsError> {
        let cur = self.props.get(p).copied().unwrap_or(0);
        self.set_valuation(p, cur | 1 << w)
    }

    /// Adds `a` to the vocabulary if absent.
    pub fn add_edge(&mut self, a: &str, u: World, v: World) -> Result<(), SemanticsError> {
        if self.props.contains_key(a) {
            return Err(SemanticsError::Vocabulary(format!(
                "`{a}` is already a proposition"
            )));
        }
        let n = self.size();
        if u >= n || v >= n {
            return Err(SemanticsError::UnknownWorld(format!("#{}", u.max(v))));
        }
        self.programs
            .entry(a.to_string())
            .or_insert_with(|| Relation::empty(n))
            .rows[u] |= 1 << v;
        Ok(())
    }

    pub fn remove_edge(&mut self, a: &str, u: World, v: World) {
        if let Some(r) = self.programs.get_mut(a) {
            r.rows[u] &= !(1 << v);
        }
    }

    pub fn set_relation(&mut self, a: &str, rel: Relation) -> Result<(), SemanticsError> {
        if rel.rows.len() != self.size() {
            return Err(SemanticsError::Vocabulary(format!(
                "relation for `{a}` has wrong size"
            )));
        }
        if self.props.contains_key(a) {
            return Err(SemanticsError::Vocabulary(format!(
                "`{a}` is already a proposition"
            )));
        }
        self.programs.insert(a.to_string(), rel);
        Ok(())
    }

    /// Extend the vocabulary with empty interpretations for missing symbols.
    pub fn extend_vocabulary(&mut self, vocab: &Vocabulary) -> Result<(), SemanticsError> {
        let n = self.size();
        for p in &vocab.props {
            if self.programs.contains_key(p) {
                return Err(SemanticsError::Vocabulary(format!("`{p}` clashes")));
            }
            self.props.entry(p.clone()).or_insert(0);
        }
        for a in &vocab.programs {
            if self.props.contains_key(a) {
                return Err(SemanticsError::Vocabulary(format!("`{a}` clashes")));
            }
            self.programs
                .entry(a.clone())
                .or_insert_with(|| Relation::empty(n));
        }
        Ok(())
    }

    /// Sub-structure on the worlds in `keep`, renumbered in ascending order.
    pub fn restrict(&self, keep: WorldSet) -> Result<(Self, Vec<World>), SemanticsError> {
        let kept: Vec<World> = bits(keep & self.all_worlds()).collect();
        let mut out = KripkeStructure::new(
            kept.iter().map(|&w| self.worlds[w].clone()).collect(),
            &self.vocabulary(),
        )?;
        let remap = |set: WorldSet| {
            kept.iter()
                .enumerate()
                .filter(|(_, &w)| set >> w & 1 == 1)
                .fold(0u64, |acc, (i, _)| acc | 1 << i)
        };
        for (p, set) in &self.props {
            out.props.insert(p.clone(), remap(*set));
        }
        for (a, rel) in &self.programs {
            let rows = kept.iter().map(|&w| remap(rel.rows[w])).collect();
            out.programs.insert(a.clone(), Relation { rows });
        }
        Ok((out, kept))
    }

    pub fn from_json(text: &str) -> Result<Self, SemanticsError> {
        let raw: KripkeJson =
            serde_json::from_str(text).map_err(|e| SemanticsError::Json(e.to_string()))?;
        Self::from_raw(raw)
    }

    pub fn from_value(value: &serde_json::Value) -> Result<Self, SemanticsError> {
        let raw: KripkeJson = serde_json::from_value(value.clone())
            .map_err(|e| SemanticsError::Json(e.to_string()))?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: KripkeJson) -> Result<Self, SemanticsError> {
        let vocab = Vocabulary {
            props: raw.props.keys().cloned().collect(),
            programs: raw.programs.keys().cloned().collect(),
        };
        let mut k = KripkeStructure::new(raw.worlds, &vocab)?;
        for (p, ws) in &raw.props {
            for w in ws {
                let i = k.world(w)?;
                k.set_true(p, i)?;
            }
        }
        for (a, pairs) in &raw.programs {
            for (u, v) in pairs {
                let (u, v) = (k.world(u)?, k.world(v)?);
                k.add_edge(a, u, v)?;
            }
        }
        Ok(k)
    }

    pub fn to_value(&self) -> serde_json::Value {
        let raw = KripkeJson {
            worlds: self.worlds.clone(),
            props: self
                .props
                .iter()
                .map(|(p, &s)| (p.clone(), bits(s).map(|w| self.worlds[w].clone()).collect()))
                .collect(),
            programs: self
                .programs
                .iter()
                .map(|(a, r)| {
                    let pairs = r
                        .pairs()
                        .into_iter()
                        .map(|(u, v)| (self.worlds[u].clone(), self.worlds[v].clone()))
                        .collect();
                    (a.clone(), pairs)
                })
                .collect(),
        };
        serde_json::to_value(raw).expect("structure serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_value()).expect("structure serializes")
    }
}
