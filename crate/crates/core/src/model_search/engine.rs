//! Bit-sliced evaluation over 64 structures at once.
//!
//! A batch fixes the world count `n` and every variable (valuation bit or
//! edge bit) except the first `lane_vars` ones, which vary across the 64
//! lanes of a `u64`. World sets are stored as one lane mask per world and
//! relations as one lane mask per pair.

use std::collections::HashMap;

use crate::semantics::{KripkeStructure, World};
use crate::syntax::{Formula, Program, Term, Vocabulary};

pub const MAXW: usize = 4;

pub type WS = [u64; MAXW];
pub type RL = [[u64; MAXW]; MAXW];

const LANE_PATTERNS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

#[derive(Clone, Copy, Debug)]
enum Op {
    True,
    Prop(usize),
    Not(usize),
    Or(usize, usize),
    Diamond(usize, usize),
    FSlot(usize),
    Atomic(usize),
    Seq(usize, usize),
    Union(usize, usize),
    Inter(usize, usize),
    Test(usize),
    PSlot(usize),
}

#[derive(Clone, Copy)]
pub enum Val {
    W(WS),
    R(RL),
}

impl Val {
    pub fn ws(&self) -> &WS {
        match self {
            Val::W(w) => w,
            Val::R(_) => unreachable!("sort checked at compile time"),
        }
    }

    pub fn rl(&self) -> &RL {
        match self {
            Val::R(r) => r,
            Val::W(_) => unreachable!("sort checked at compile time"),
        }
    }
}

/// Symbols that get enumerated, in variable order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Symbols {
    pub props: Vec<String>,
    pub programs: Vec<String>,
}

impl Symbols {
    pub fn from_vocabulary(v: &Vocabulary) -> Self {
        Symbols {
            props: v.props.iter().cloned().collect(),
            programs: v.programs.iter().cloned().collect(),
        }
    }

    pub fn var_count(&self, n: usize) -> usize {
        self.props.len() * n + self.programs.len() * n * n
    }
}

/// Post-order program over the sliced domain, shared subterms computed once.
#[derive(Clone, Debug)]
pub struct Compiled {
    ops: Vec<Op>,
}

pub struct Compiler<'a> {
    symbols: &'a Symbols,
    fmeta: &'a [String],
    pmeta: &'a [String],
    ops: Vec<Op>,
    seen: HashMap<Term, usize>,
}

impl<'a> Compiler<'a> {
    pub fn new(symbols: &'a Symbols, fmeta: &'a [String], pmeta: &'a [String]) -> Self {
        Compiler {
            symbols,
            fmeta,
            pmeta,
            ops: Vec::new(),
            seen: HashMap::new(),
        }
    }

    fn push(&mut self, key: Term, op: Op) -> usize {
        let i = self.ops.len();
        self.ops.push(op);
        self.seen.insert(key, i);
        i
    }

    fn formula(&mut self, f: &Formula) -> usize {
        let key = Term::Formula(f.clone());
        if let Some(&i) = self.seen.get(&key) {
            return i;
        }
        let op = match f {
            Formula::True => Op::True,
            Formula::Prop(p) => match self.fmeta.iter().position(|m| m == p) {
                Some(s) => Op::FSlot(s),
                None => Op::Prop(
                    self.symbols
                        .props
                        .iter()
                        .position(|q| q == p)
                        .expect("proposition listed in symbols"),
                ),
            },
            Formula::Not(g) => Op::Not(self.formula(g)),
            Formula::Or(a, b) => Op::Or(self.formula(a), self.formula(b)),
            Formula::Diamond(p, g) => Op::Diamond(self.program(p), self.formula(g)),
        };
        self.push(key, op)
    }

    fn program(&mut self, p: &Program) -> usize {
        let key = Term::Program(p.clone());
        if let Some(&i) = self.seen.get(&key) {
            return i;
        }
        let op = match p {
            Program::Atomic(a) => match self.pmeta.iter().position(|m| m == a) {
                Some(s) => Op::PSlot(s),
                None => Op::Atomic(
                    self.symbols
                        .programs
                        .iter()
                        .position(|q| q == a)
                        .expect("program listed in symbols"),
                ),
            },
            Program::Seq(a, b) => Op::Seq(self.program(a), self.program(b)),
            Program::Union(a, b) => Op::Union(self.program(a), self.program(b)),
            Program::Inter(a, b) => Op::Inter(self.program(a), self.program(b)),
            Program::Test(f) => Op::Test(self.formula(f)),
        };
        self.push(key, op)
    }

    /// Add a root to a shared op list; subterms already added are reused.
    pub fn add_formula(&mut self, f: &Formula) -> usize {
        self.formula(f)
    }

    pub fn add_program(&mut self, p: &Program) -> usize {
        self.program(p)
    }

    pub fn finish(self) -> Compiled {
        Compiled { ops: self.ops }
    }

    pub fn compile_formula(mut self, f: &Formula) -> Compiled {
        self.formula(f);
        Compiled { ops: self.ops }
    }

    pub fn compile_program(mut self, p: &Program) -> Compiled {
        self.program(p);
        Compiled { ops: self.ops }
    }

    /// Compile two programs into one op list, returning both root indices.
    pub fn compile_pair(mut self, l: &Program, r: &Program) -> (Compiled, usize, usize) {
        let li = self.program(l);
        let ri = self.program(r);
        (Compiled { ops: self.ops }, li, ri)
    }
}

/// Leaf values for one batch.
pub struct Frame {
    pub n: usize,
    pub all: WS,
    pub props: Vec<WS>,
    pub progs: Vec<RL>,
}

impl Frame {
    /// `lane_vars` variables vary across lanes; variable `i >= lane_vars`
    /// takes bit `i - lane_vars` of `batch`.
    pub fn new(symbols: &Symbols, n: usize, lane_vars: usize, batch: u64) -> Self {
        let var = |i: usize| -> u64 {
            if i < lane_vars {
                LANE_PATTERNS[i]
            } else if batch >> (i - lane_vars) & 1 == 1 {
                u64::MAX
            } else {
                0
            }
        };
        let mut all = [0u64; MAXW];
        for slot in all.iter_mut().take(n) {
            *slot = u64::MAX;
        }
        let np = symbols.props.len();
        let props = (0..np)
            .map(|j| {
                let mut ws = [0u64; MAXW];
                for (w, slot) in ws.iter_mut().enumerate().take(n) {
                    *slot = var(j * n + w);
                }
                ws
            })
            .collect();
        let progs = (0..symbols.programs.len())
            .map(|k| {
                let mut rl = [[0u64; MAXW]; MAXW];
                for u in 0..n {
                    for v in 0..n {
                        rl[u][v] = var(np * n + (k * n + u) * n + v);
                    }
                }
                rl
            })
            .collect();
        Frame {
            n,
            all,
            props,
            progs,
        }
    }
}

/// Decode one lane of a batch into a concrete structure over `vocab`
/// (symbols of `vocab` not in `symbols` are empty).
pub fn decode(
    symbols: &Symbols,
    vocab: &Vocabulary,
    n: usize,
    lane_vars: usize,
    batch: u64,
    lane: u32,
) -> KripkeStructure {
    let var = |i: usize| -> bool {
        if i < lane_vars {
            (lane >> i) & 1 == 1
        } else {
            batch >> (i - lane_vars) & 1 == 1
        }
    };
    let full = vocab.union(&Vocabulary {
        props: symbols.props.iter().cloned().collect(),
        programs: symbols.programs.iter().cloned().collect(),
    });
    let mut k = KripkeStructure::with_size(n, &full).expect("vocabulary is disjoint");
    let np = symbols.props.len();
    for (j, p) in symbols.props.iter().enumerate() {
        for w in 0..n {
            if var(j * n + w) {
                k.set_true(p, w).expect("proposition");
            }
        }
    }
    for (a_i, a) in symbols.programs.iter().enumerate() {
        for u in 0..n {
            for v in 0..n {
                if var(np * n + (a_i * n + u) * n + v) {
                    k.add_edge(a, u, v).expect("program");
                }
            }
        }
    }
    k
}

impl Compiled {
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Evaluate every op; the root is the last entry of `buf`.
    pub fn run(&self, frame: &Frame, fslots: &[WS], pslots: &[RL], buf: &mut Vec<Val>) {
        let n = frame.n;
        buf.clear();
        for op in &self.ops {
            let v = match *op {
                Op::True => Val::W(frame.all),
                Op::Prop(j) => Val::W(frame.props[j]),
                Op::FSlot(s) => Val::W(fslots[s]),
                Op::Not(a) => {
                    let x = buf[a].ws();
                    let mut out = [0u64; MAXW];
                    for w in 0..n {
                        out[w] = !x[w];
                    }
                    Val::W(out)
                }
                Op::Or(a, b) => {
                    let (x, y) = (buf[a].ws(), buf[b].ws());
                    let mut out = [0u64; MAXW];
                    for w in 0..n {
                        out[w] = x[w] | y[w];
                    }
                    Val::W(out)
                }
                Op::Diamond(r, f) => {
                    let (rel, x) = (buf[r].rl(), buf[f].ws());
                    let mut out = [0u64; MAXW];
                    for u in 0..n {
                        let mut acc = 0;
                        for v in 0..n {
                            acc |= rel[u][v] & x[v];
                        }
                        out[u] = acc;
                    }
                    Val::W(out)
                }
                Op::Atomic(k) => Val::R(frame.progs[k]),
                Op::PSlot(s) => Val::R(pslots[s]),
                Op::Seq(a, b) => {
                    let (x, y) = (buf[a].rl(), buf[b].rl());
                    let mut out = [[0u64; MAXW]; MAXW];
                    for u in 0..n {
                        for m in 0..n {
                            let xm = x[u][m];
                            if xm == 0 {
                                continue;
                            }
                            for v in 0..n {
                                out[u][v] |= xm & y[m][v];
                            }
                        }
                    }
                    Val::R(out)
                }
                Op::Union(a, b) => {
                    let (x, y) = (buf[a].rl(), buf[b].rl());
                    let mut out = [[0u64; MAXW]; MAXW];
                    for u in 0..n {
                        for v in 0..n {
                            out[u][v] = x[u][v] | y[u][v];
                        }
                    }
                    Val::R(out)
                }
                Op::Inter(a, b) => {
                    let (x, y) = (buf[a].rl(), buf[b].rl());
                    let mut out = [[0u64; MAXW]; MAXW];
                    for u in 0..n {
                        for v in 0..n {
                            out[u][v] = x[u][v] & y[u][v];
                        }
                    }
                    Val::R(out)
                }
                Op::Test(f) => {
                    let x = buf[f].ws();
                    let mut out = [[0u64; MAXW]; MAXW];
                    for w in 0..n {
                        out[w][w] = x[w];
                    }
                    Val::R(out)
                }
            };
            buf.push(v);
        }
    }
}

/// Lanes in which some world satisfies `ws`.
pub fn some_world(ws: &WS, n: usize) -> u64 {
    ws.iter().take(n).fold(0, |a, b| a | b)
}

/// Lanes in which some world falsifies `ws`.
pub fn some_world_fails(ws: &WS, n: usize) -> u64 {
    ws.iter().take(n).fold(0, |a, b| a | !b)
}

/// Lowest world satisfying `ws` in `lane`.
pub fn first_world(ws: &WS, n: usize, lane: u32, want: bool) -> World {
    (0..n)
        .find(|&w| (ws[w] >> lane & 1 == 1) == want)
        .expect("lane was selected because such a world exists")
}

/// Lanes where `l` relates a pair that `r` does not.
pub fn inclusion_violations(l: &RL, r: &RL, n: usize) -> u64 {
    let mut acc = 0;
    for u in 0..n {
        for v in 0..n {
            acc |= l[u][v] & !r[u][v];
        }
    }
    acc
}

pub fn first_violating_pair(l: &RL, r: &RL, n: usize, lane: u32) -> (World, World) {
    for u in 0..n {
        for v in 0..n {
            if (l[u][v] & !r[u][v]) >> lane & 1 == 1 {
                return (u, v);
            }
        }
    }
    unreachable!("lane was selected because a violation exists")
}

/// Whether the edge configuration `config` (bits ordered by program, source,
/// target) is the least element of its orbit under world permutations.
pub fn is_canonical_edges(config: u64, programs: usize, n: usize, perms: &[Vec<usize>]) -> bool {
    for perm in perms {
        let mut image = 0u64;
        for k in 0..programs {
            for u in 0..n {
                for v in 0..n {
                    let b = (k * n + u) * n + v;
                    if config >> b & 1 == 1 {
                        image |= 1 << ((k * n + perm[u]) * n + perm[v]);
                    }
                }
            }
        }
        if image < config {
            return false;
        }
    }
    true
}

/// All permutations of `0..n` except the identity.
pub fn nontrivial_permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut Vec<bool>, n: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(cur, used, n, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], n, &mut out);
    out.retain(|p| p.iter().enumerate().any(|(i, &x)| i != x));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::eval;
    use crate::syntax::parse;

    #[test]
    fn sliced_agrees_with_plain_eval() {
        let f = parse("<a;p?>q | [b & a^]~p -> <(a + b);q?>true").unwrap();
        let symbols = Symbols::from_vocabulary(&f.vocabulary());
        let c = Compiler::new(&symbols, &[], &[]).compile_formula(&f);
        let n = 2;
        let lane_vars = 6;
        let vars = symbols.var_count(n);
        let mut buf = Vec::new();
        for batch in 0..(1u64 << (vars - lane_vars)) {
            let frame = Frame::new(&symbols, n, lane_vars, batch);
            c.run(&frame, &[], &[], &mut buf);
            let root = *buf.last().unwrap().ws();
            for lane in 0..64u32 {
                let k = decode(&symbols, &Vocabulary::default(), n, lane_vars, batch, lane);
                for w in 0..n {
                    assert_eq!(root[w] >> lane & 1 == 1, eval(&k, w, &f).unwrap());
                }
            }
        }
    }

    #[test]
    fn permutations_and_canonical_forms() {
        assert_eq!(nontrivial_permutations(3).len(), 5);
        // single edge 0->1 vs 1->0 for one program over 2 worlds
        let perms = nontrivial_permutations(2);
        let e01 = 1 << 1;
        let e10 = 1 << 2;
        assert!(is_canonical_edges(e01, 1, 2, &perms));
        assert!(!is_canonical_edges(e10, 1, 2, &perms));
    }
}
