use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use super::engine::{
    decode, first_violating_pair, first_world, inclusion_violations, is_canonical_edges,
    nontrivial_permutations, some_world, some_world_fails, Compiled, Compiler, Frame, Symbols,
    Val, MAXW,
};
use super::SearchError;
use crate::semantics::{eval, relation, KripkeStructure, World};
use crate::syntax::{Formula, JudgementKind, Program, Vocabulary};

pub const DEFAULT_CEILING: u64 = 1 << 33;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    Random { samples: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_worlds: usize,
    /// Symbols every reported structure interprets (as empty if unused).
    pub vocab: Vocabulary,
    pub mode: SearchMode,
    /// Largest number of raw structures an exhaustive search may visit.
    pub ceiling: u64,
    pub parallel: bool,
}

impl SearchBudget {
    pub fn exhaustive(max_worlds: usize) -> Self {
        SearchBudget {
            max_worlds,
            vocab: Vocabulary::default(),
            mode: SearchMode::Exhaustive,
            ceiling: DEFAULT_CEILING,
            parallel: true,
        }
    }

    pub fn random(max_worlds: usize, samples: u64, seed: u64) -> Self {
        SearchBudget {
            mode: SearchMode::Random { samples, seed },
            ..Self::exhaustive(max_worlds)
        }
    }

    pub fn with_vocab(mut self, vocab: Vocabulary) -> Self {
        self.vocab = vocab;
        self
    }

    pub fn serial(mut self) -> Self {
        self.parallel = false;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    ModelFound {
        structure: KripkeStructure,
        world: World,
    },
    /// No model among the structures searched. Evidence only, not a proof of
    /// unsatisfiability.
    NoModelUpTo(usize),
    ValidUpTo(usize),
    Countermodel {
        structure: KripkeStructure,
        world: World,
        /// For program judgements, the pair in the left relation but not
        /// the right one; `world` is its source.
        pair: Option<(World, World)>,
    },
}

impl SearchOutcome {
    pub fn is_model(&self) -> bool {
        matches!(self, SearchOutcome::ModelFound { .. })
    }

    pub fn is_countermodel(&self) -> bool {
        matches!(self, SearchOutcome::Countermodel { .. })
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            SearchOutcome::ModelFound { structure, world } => json!({
                "outcome": "model-found",
                "worlds": structure.size(),
                "world": structure.world_name(*world),
                "structure": structure.to_value(),
            }),
            SearchOutcome::NoModelUpTo(n) => json!({"outcome": "no-model-up-to", "bound": n}),
            SearchOutcome::ValidUpTo(n) => json!({"outcome": "valid-up-to", "bound": n}),
            SearchOutcome::Countermodel {
                structure,
                world,
                pair,
            } => json!({
                "outcome": "countermodel",
                "worlds": structure.size(),
                "world": structure.world_name(*world),
                "pair": pair.map(|(u, v)| [structure.world_name(u), structure.world_name(v)]),
                "structure": structure.to_value(),
            }),
        }
    }
}

/// How the structures with `n` worlds are split into batches.
#[derive(Clone, Debug)]
pub(crate) struct Layout {
    pub n: usize,
    pub lane_vars: usize,
    pub batches: u64,
    /// Edge configurations are reduced modulo world permutations.
    pub perms: Option<Vec<Vec<usize>>>,
}

impl Layout {
    /// Lanes hold every valuation bit when that, together with skipping
    /// non-canonical edge configurations, needs fewer batches than filling
    /// all 64 lanes.
    pub fn new(symbols: &Symbols, n: usize) -> Layout {
        let vars = symbols.var_count(n);
        let val_bits = symbols.props.len() * n;
        let fact: u64 = (1..=n as u64).product();
        let iso = n >= 2
            && !symbols.programs.is_empty()
            && val_bits <= 6
            && fact > 1u64 << (6 - val_bits).min(vars.saturating_sub(val_bits));
        if iso {
            Layout {
                n,
                lane_vars: val_bits,
                batches: 1u64 << (vars - val_bits),
                perms: Some(nontrivial_permutations(n)),
            }
        } else {
            let lane_vars = vars.min(6);
            Layout {
                n,
                lane_vars,
                batches: 1u64 << (vars - lane_vars),
                perms: None,
            }
        }
    }

    pub fn skip(&self, symbols: &Symbols, batch: u64) -> bool {
        match &self.perms {
            Some(perms) => !is_canonical_edges(batch, symbols.programs.len(), self.n, perms),
            None => false,
        }
    }
}

pub(crate) fn check_budget(symbols: &Symbols, b: &SearchBudget) -> Result<(), SearchError> {
    if b.max_worlds == 0 {
        return Err(SearchError::Budget("max_worlds must be positive".into()));
    }
    if let SearchMode::Random { .. } = b.mode {
        if b.max_worlds > crate::semantics::MAX_WORLDS {
            return Err(SearchError::Budget("at most 64 worlds".into()));
        }
        return Ok(());
    }
    if b.max_worlds > MAXW {
        return Err(SearchError::Budget(format!(
            "exhaustive search supports at most {MAXW} worlds"
        )));
    }
    let mut total: u64 = 0;
    for n in 1..=b.max_worlds {
        let vars = symbols.var_count(n);
        if vars >= 63 {
            return Err(SearchError::Budget(format!("{vars} variables at {n} worlds")));
        }
        total = total.saturating_add(1u64 << vars);
    }
    if total > b.ceiling {
        return Err(SearchError::Budget(format!(
            "{total} structures exceed the ceiling of {}",
            b.ceiling
        )));
    }
    Ok(())
}

/// First `(batch, lane, payload)` in enumeration order for which `probe`
/// reports a hit.
pub(crate) fn sweep<T, F>(symbols: &Symbols, layout: &Layout, parallel: bool, probe: F) -> Option<(u64, u32, T)>
where
    T: Send,
    F: Fn(&Frame, &mut Vec<Val>) -> Option<(u32, T)> + Sync,
{
    const CHUNK: u64 = 1 << 10;
    let scan = |chunk: u64| {
        let mut buf = Vec::new();
        let start = chunk * CHUNK;
        let end = (start + CHUNK).min(layout.batches);
        for batch in start..end {
            if layout.skip(symbols, batch) {
                continue;
            }
            let frame = Frame::new(symbols, layout.n, layout.lane_vars, batch);
            if let Some((lane, t)) = probe(&frame, &mut buf) {
                return Some((batch, lane, t));
            }
        }
        None
    };
    let chunks = layout.batches.div_ceil(CHUNK);
    if parallel && chunks > 1 {
        (0..chunks).into_par_iter().map(scan).find_first(Option::is_some).flatten()
    } else {
        (0..chunks).find_map(scan)
    }
}

fn symbols_for(vocab: &Vocabulary) -> Symbols {
    Symbols::from_vocabulary(vocab)
}

fn compile(symbols: &Symbols, f: &Formula) -> Compiled {
    Compiler::new(symbols, &[], &[]).compile_formula(f)
}

enum Goal {
    Satisfy,
    Falsify,
}

fn search_world(
    f: &Formula,
    b: &SearchBudget,
    goal: Goal,
) -> Result<Option<(KripkeStructure, World)>, SearchError> {
    let used = f.vocabulary();
    used.check_disjoint()?;
    b.vocab.union(&used).check_disjoint()?;
    let symbols = symbols_for(&used);
    check_budget(&symbols, b)?;
    let want = matches!(goal, Goal::Satisfy);
    if let SearchMode::Random { samples, seed } = b.mode {
        let full = b.vocab.union(&used);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let k = random_structure(&mut rng, &full, b.max_worlds);
            for w in 0..k.size() {
                if eval(&k, w, f)? == want {
                    return Ok(Some((k, w)));
                }
            }
        }
        return Ok(None);
    }
    let c = compile(&symbols, f);
    for n in 1..=b.max_worlds {
        let layout = Layout::new(&symbols, n);
        let hit = sweep(&symbols, &layout, b.parallel, |frame, buf| {
            c.run(frame, &[], &[], buf);
            let root = buf.last().expect("nonempty program").ws();
            let lanes = if want {
                some_world(root, n)
            } else {
                some_world_fails(root, n)
            };
            if lanes == 0 {
                None
            } else {
                let lane = lanes.trailing_zeros();
                Some((lane, first_world(root, n, lane, want)))
            }
        });
        if let Some((batch, lane, w)) = hit {
            let k = decode(&symbols, &b.vocab, n, layout.lane_vars, batch, lane);
            if eval(&k, w, f)? != want {
                return Err(SearchError::Internal(
                    "sliced evaluation disagrees with direct evaluation".into(),
                ));
            }
            return Ok(Some((k, w)));
        }
    }
    Ok(None)
}

/// Search for a pointed structure satisfying `f`, smallest world count first.
pub fn find_model(f: &Formula, b: &SearchBudget) -> Result<SearchOutcome, SearchError> {
    Ok(match search_world(f, b, Goal::Satisfy)? {
        Some((structure, world)) => SearchOutcome::ModelFound { structure, world },
        None => SearchOutcome::NoModelUpTo(b.max_worlds),
    })
}

pub fn check_validity(f: &Formula, b: &SearchBudget) -> Result<SearchOutcome, SearchError> {
    Ok(match search_world(f, b, Goal::Falsify)? {
        Some((structure, world)) => SearchOutcome::Countermodel {
            structure,
            world,
            pair: None,
        },
        None => SearchOutcome::ValidUpTo(b.max_worlds),
    })
}

/// Exhaustive validity check of many formulae in one sweep: each structure
/// is enumerated once over the combined vocabulary and every formula is
/// evaluated on it. Entry `i` is the outcome for `fs[i]`.
pub fn check_validity_all(fs: &[Formula], b: &SearchBudget) -> Result<Vec<SearchOutcome>, SearchError> {
    if let SearchMode::Random { .. } = b.mode {
        return fs.iter().map(|f| check_validity(f, b)).collect();
    }
    let used = fs.iter().fold(b.vocab.clone(), |v, f| v.union(&f.vocabulary()));
    used.check_disjoint()?;
    let symbols = symbols_for(&used);
    check_budget(&symbols, b)?;
    let mut compiler = Compiler::new(&symbols, &[], &[]);
    let roots: Vec<usize> = fs.iter().map(|f| compiler.add_formula(f)).collect();
    let c = compiler.finish();
    let mut out: Vec<Option<SearchOutcome>> = vec![None; fs.len()];
    for n in 1..=b.max_worlds {
        let open: Vec<usize> = (0..fs.len()).filter(|&i| out[i].is_none()).collect();
        if open.is_empty() {
            break;
        }
        let layout = Layout::new(&symbols, n);
        const CHUNK: u64 = 1 << 10;
        let scan = |chunk: u64| {
            let mut buf = Vec::new();
            let mut hits: Vec<Option<(u64, u32, World)>> = vec![None; open.len()];
            let start = chunk * CHUNK;
            for batch in start..(start + CHUNK).min(layout.batches) {
                if layout.skip(&symbols, batch) {
                    continue;
                }
                let frame = Frame::new(&symbols, n, layout.lane_vars, batch);
                c.run(&frame, &[], &[], &mut buf);
                for (slot, &i) in hits.iter_mut().zip(&open) {
                    if slot.is_some() {
                        continue;
                    }
                    let root = buf[roots[i]].ws();
                    let lanes = some_world_fails(root, n);
                    if lanes != 0 {
                        let lane = lanes.trailing_zeros();
                        *slot = Some((batch, lane, first_world(root, n, lane, false)));
                    }
                }
            }
            hits
        };
        let chunks = layout.batches.div_ceil(CHUNK);
        let per_chunk: Vec<Vec<Option<(u64, u32, World)>>> = if b.parallel && chunks > 1 {
            (0..chunks).into_par_iter().map(scan).collect()
        } else {
            (0..chunks).map(scan).collect()
        };
        for (j, &i) in open.iter().enumerate() {
            let Some((batch, lane, w)) = per_chunk.iter().find_map(|h| h[j]) else {
                continue;
            };
            let k = decode(&symbols, &b.vocab, n, layout.lane_vars, batch, lane);
            if eval(&k, w, &fs[i])? {
                return Err(SearchError::Internal(
                    "sliced evaluation disagrees with direct evaluation".into(),
                ));
            }
            out[i] = Some(SearchOutcome::Countermodel {
                structure: k,
                world: w,
                pair: None,
            });
        }
    }
    Ok(out
        .into_iter()
        .map(|o| o.unwrap_or(SearchOutcome::ValidUpTo(b.max_worlds)))
        .collect())
}

/// Check `left ⇒ right` (or `⇔`) as relation inclusion on every structure
/// in the budget.
pub fn check_program_judgement(
    left: &Program,
    right: &Program,
    kind: JudgementKind,
    b: &SearchBudget,
) -> Result<SearchOutcome, SearchError> {
    let used = left.vocabulary().union(&right.vocabulary());
    used.check_disjoint()?;
    b.vocab.union(&used).check_disjoint()?;
    let symbols = symbols_for(&used);
    check_budget(&symbols, b)?;
    let both = matches!(kind, JudgementKind::Equiv);
    let directions: Vec<(&Program, &Program)> = if both {
        vec![(left, right), (right, left)]
    } else {
        vec![(left, right)]
    };
    if let SearchMode::Random { samples, seed } = b.mode {
        let full = b.vocab.union(&used);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let k = random_structure(&mut rng, &full, b.max_worlds);
            for (l, r) in &directions {
                let (rl, rr) = (relation(&k, l)?, relation(&k, r)?);
                if let Some(&(u, v)) = rl.pairs().iter().find(|(u, v)| !rr.contains(*u, *v)) {
                    return Ok(SearchOutcome::Countermodel {
                        structure: k,
                        world: u,
                        pair: Some((u, v)),
                    });
                }
            }
        }
        return Ok(SearchOutcome::ValidUpTo(b.max_worlds));
    }
    for (l, r) in directions {
        let (c, li, ri) = Compiler::new(&symbols, &[], &[]).compile_pair(l, r);
        for n in 1..=b.max_worlds {
            let layout = Layout::new(&symbols, n);
            let hit = sweep(&symbols, &layout, b.parallel, |frame, buf| {
                c.run(frame, &[], &[], buf);
                let (lv, rv) = (buf[li].rl(), buf[ri].rl());
                let bad = inclusion_violations(lv, rv, n);
                if bad == 0 {
                    None
                } else {
                    let lane = bad.trailing_zeros();
                    Some((lane, first_violating_pair(lv, rv, n, lane)))
                }
            });
            if let Some((batch, lane, (u, v))) = hit {
                let k = decode(&symbols, &b.vocab, n, layout.lane_vars, batch, lane);
                if !relation(&k, l)?.contains(u, v) || relation(&k, r)?.contains(u, v) {
                    return Err(SearchError::Internal(
                        "sliced relation disagrees with direct evaluation".into(),
                    ));
                }
                return Ok(SearchOutcome::Countermodel {
                    structure: k,
                    world: u,
                    pair: Some((u, v)),
                });
            }
        }
    }
    Ok(SearchOutcome::ValidUpTo(b.max_worlds))
}

pub fn random_structure(rng: &mut ChaCha8Rng, vocab: &Vocabulary, max_worlds: usize) -> KripkeStructure {
    let n = rng.gen_range(1..=max_worlds);
    let mut k = KripkeStructure::with_size(n, vocab).expect("vocabulary is disjoint");
    for p in &vocab.props {
        let set: u64 = rng.gen::<u64>() & k.all_worlds();
        k.set_valuation(p, set).expect("proposition");
    }
    for a in &vocab.programs {
        for u in 0..n {
            for v in 0..n {
                if rng.gen_bool(0.5) {
                    k.add_edge(a, u, v).expect("program");
                }
            }
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, parse_judgement};

    const SPLIT: &str = "<a>true & <b>true & [a & b]false";

    #[test]
    fn batched_validity_matches_single_checks() {
        let fs: Vec<Formula> = ["p | ~p", "<a>p -> [a]p", "[a & b]q -> [a]q", "<a;b>true -> <a>true", "<a>p & <a>~p -> <a>true"]
            .iter()
            .map(|s| parse(s).unwrap())
            .collect();
        let b = SearchBudget::exhaustive(2);
        let all = check_validity_all(&fs, &b).unwrap();
        for (f, got) in fs.iter().zip(&all) {
            let single = check_validity(f, &b).unwrap();
            assert_eq!(got.is_countermodel(), single.is_countermodel(), "{f}");
            if let SearchOutcome::Countermodel { structure, world, .. } = got {
                assert!(!eval(structure, *world, f).unwrap());
            }
        }
        assert_eq!(all.iter().filter(|o| o.is_countermodel()).count(), 2);
        assert_eq!(check_validity_all(&fs, &b.clone().serial()).unwrap(), all);
    }

    #[test]
    fn split_formula_models() {
        // u -a-> v, u -b-> u already satisfies the three conjuncts
        let f = parse(SPLIT).unwrap();
        assert_eq!(find_model(&f, &SearchBudget::exhaustive(1)).unwrap(), SearchOutcome::NoModelUpTo(1));
        match find_model(&f, &SearchBudget::exhaustive(3)).unwrap() {
            SearchOutcome::ModelFound { structure, world } => {
                assert_eq!(structure.size(), 2);
                assert!(eval(&structure, world, &f).unwrap());
            }
            other => panic!("unexpected {other:?}"),
        }
        // with successors that have no successors, the copies must be disjoint worlds
        let g = parse(&format!("{SPLIT} & [a][a]false & [a][b]false & [b][a]false & [b][b]false")).unwrap();
        assert_eq!(find_model(&g, &SearchBudget::exhaustive(2)).unwrap(), SearchOutcome::NoModelUpTo(2));
        match find_model(&g, &SearchBudget::exhaustive(3)).unwrap() {
            SearchOutcome::ModelFound { structure, .. } => assert_eq!(structure.size(), 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn falsum_has_no_model() {
        let out = find_model(&Formula::bot(), &SearchBudget::exhaustive(4)).unwrap();
        assert_eq!(out, SearchOutcome::NoModelUpTo(4));
    }

    #[test]
    fn validity_examples() {
        let b = SearchBudget::exhaustive(3);
        let dual = parse("[a]p <-> ~<a>~p").unwrap();
        assert_eq!(check_validity(&dual, &b).unwrap(), SearchOutcome::ValidUpTo(3));
        match check_validity(&parse("p").unwrap(), &b).unwrap() {
            SearchOutcome::Countermodel { structure, .. } => assert_eq!(structure.size(), 1),
            other => panic!("unexpected {other:?}"),
        }
        let fwd = parse("<a & b>p -> <a>p & <b>p").unwrap();
        assert_eq!(check_validity(&fwd, &b).unwrap(), SearchOutcome::ValidUpTo(3));
        let back = parse("<a>p & <b>p -> <a & b>p").unwrap();
        match check_validity(&back, &b).unwrap() {
            SearchOutcome::Countermodel { structure, world, .. } => {
                assert_eq!(structure.size(), 2);
                assert!(!eval(&structure, world, &back).unwrap());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn judgement_examples() {
        let b = SearchBudget::exhaustive(3);
        let check = |s: &str| {
            let j = parse_judgement(s).unwrap();
            check_program_judgement(&j.left, &j.right, j.kind, &b).unwrap()
        };
        assert_eq!(check("a & b => a"), SearchOutcome::ValidUpTo(3));
        assert!(check("a => a & b").is_countermodel());
        assert_eq!(check("(a + b);c <=> a;c + b;c"), SearchOutcome::ValidUpTo(3));
        assert!(check("a;b <=> b;a").is_countermodel());
    }

    #[test]
    fn serial_and_parallel_agree() {
        let f = parse("<a;b>p & [b;a]~p & <a & b^>true").unwrap();
        let b = SearchBudget::exhaustive(3);
        assert_eq!(find_model(&f, &b).unwrap(), find_model(&f, &b.clone().serial()).unwrap());
    }

    #[test]
    fn random_mode_is_seeded() {
        let f = parse(SPLIT).unwrap();
        let b = SearchBudget::random(5, 2000, 7);
        let first = find_model(&f, &b).unwrap();
        assert!(first.is_model());
        assert_eq!(first, find_model(&f, &b).unwrap());
    }

    #[test]
    fn budget_limits() {
        let f = parse("p & <a>q & <b>r").unwrap();
        assert!(matches!(find_model(&f, &SearchBudget::exhaustive(5)), Err(SearchError::Budget(_))));
        let mut b = SearchBudget::exhaustive(4);
        b.ceiling = 1000;
        assert!(matches!(find_model(&f, &b), Err(SearchError::Budget(_))));
    }
}
