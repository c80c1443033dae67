//! Random formulae and programs over a fixed vocabulary.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::syntax::{Formula, Program, Vocabulary};

/// Terms that scheme metavariables are instantiated with.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InstancePool {
    pub vocab: Vocabulary,
    pub formulas: Vec<Formula>,
    pub programs: Vec<Program>,
}

impl InstancePool {
    /// Atoms, `true` and `false` first, then distinct random terms of depth
    /// at most `depth` until each sort has `size` entries (or attempts run out).
    pub fn random(vocab: &Vocabulary, depth: usize, size: usize, seed: u64) -> InstancePool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut formulas: Vec<Formula> = vec![Formula::True, Formula::bot()];
        formulas.extend(vocab.props.iter().map(Formula::prop));
        let mut programs: Vec<Program> = vocab.programs.iter().map(Program::atomic).collect();
        if programs.is_empty() {
            programs.push(Program::skip());
        }
        let mut seen_f: HashSet<Formula> = formulas.iter().cloned().collect();
        let mut seen_p: HashSet<Program> = programs.iter().cloned().collect();
        for _ in 0..size * 20 {
            if formulas.len() >= size && programs.len() >= size {
                break;
            }
            if formulas.len() < size {
                let f = random_formula(&mut rng, vocab, depth);
                if seen_f.insert(f.clone()) {
                    formulas.push(f);
                }
            }
            if programs.len() < size {
                let p = random_program(&mut rng, vocab, depth);
                if seen_p.insert(p.clone()) {
                    programs.push(p);
                }
            }
        }
        formulas.truncate(size);
        programs.truncate(size);
        InstancePool {
            vocab: vocab.clone(),
            formulas,
            programs,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty() || self.programs.is_empty()
    }
}

/// Random core formula of depth at most `depth`.
pub fn random_formula<R: Rng + ?Sized>(rng: &mut R, vocab: &Vocabulary, depth: usize) -> Formula {
    if depth == 0 || rng.gen_ratio(1, 4) {
        return leaf(rng, vocab);
    }
    match rng.gen_range(0..4) {
        0 => Formula::not(random_formula(rng, vocab, depth - 1)),
        1 => Formula::or(random_formula(rng, vocab, depth - 1), random_formula(rng, vocab, depth - 1)),
        _ => Formula::diamond(random_program(rng, vocab, depth - 1), random_formula(rng, vocab, depth - 1)),
    }
}

/// Random program of depth at most `depth`. Without atomic programs the
/// smallest program is a test, so depth 0 yields `⊤?` (depth 1).
pub fn random_program<R: Rng + ?Sized>(rng: &mut R, vocab: &Vocabulary, depth: usize) -> Program {
    let atoms: Vec<&String> = vocab.programs.iter().collect();
    if atoms.is_empty() && depth <= 1 {
        return Program::test(leaf(rng, vocab));
    }
    if depth == 0 || rng.gen_ratio(1, 4) {
        if atoms.is_empty() {
            return Program::test(leaf(rng, vocab));
        }
        return Program::atomic(atoms[rng.gen_range(0..atoms.len())].clone());
    }
    let d = depth - 1;
    match rng.gen_range(0..5) {
        0 => Program::seq(random_program(rng, vocab, d), random_program(rng, vocab, d)),
        1 => Program::union(random_program(rng, vocab, d), random_program(rng, vocab, d)),
        2 => Program::inter(random_program(rng, vocab, d), random_program(rng, vocab, d)),
        3 => Program::test(random_formula(rng, vocab, d)),
        // the loop's ⊤? already has depth 1
        _ if d >= 1 => Program::loop_of(random_program(rng, vocab, d)),
        _ => Program::seq(random_program(rng, vocab, d), random_program(rng, vocab, d)),
    }
}

fn leaf<R: Rng + ?Sized>(rng: &mut R, vocab: &Vocabulary) -> Formula {
    let props: Vec<&String> = vocab.props.iter().collect();
    if props.is_empty() || rng.gen_ratio(1, 8) {
        Formula::True
    } else {
        Formula::prop(props[rng.gen_range(0..props.len())].clone())
    }
}
