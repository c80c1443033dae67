use super::SearchError;
use crate::semantics::{bits, eval, KripkeStructure, World};
use crate::syntax::Formula;

/// Greedily delete worlds, then edges, then true valuation bits while `f`
/// stays false at (the image of) `u`. Repeats until nothing can go.
pub fn minimize_countermodel(
    k: &KripkeStructure,
    u: World,
    f: &Formula,
) -> Result<(KripkeStructure, World), SearchError> {
    if eval(k, u, f)? {
        return Err(SearchError::Precondition(
            "formula is true at the given world".into(),
        ));
    }
    let mut cur = k.clone();
    let mut at = u;
    loop {
        let mut changed = false;

        let mut w = 0;
        while w < cur.size() {
            if w == at {
                w += 1;
                continue;
            }
            let keep = cur.all_worlds() & !(1u64 << w);
            let (smaller, kept) = cur.restrict(keep)?;
            let image = kept.iter().position(|&x| x == at).expect("pointed world kept");
            if !eval(&smaller, image, f)? {
                cur = smaller;
                at = image;
                changed = true;
            } else {
                w += 1;
            }
        }

        let edges: Vec<(String, World, World)> = cur
            .programs()
            .flat_map(|(a, r)| r.pairs().into_iter().map(move |(x, y)| (a.to_string(), x, y)))
            .collect();
        for (a, x, y) in edges {
            let mut next = cur.clone();
            next.remove_edge(&a, x, y);
            if !eval(&next, at, f)? {
                cur = next;
                changed = true;
            }
        }

        let vals: Vec<(String, u64)> = cur.props().map(|(p, s)| (p.to_string(), s)).collect();
        for (p, set) in vals {
            for x in bits(set) {
                let mut next = cur.clone();
                let now = next.valuation(&p)?;
                next.set_valuation(&p, now & !(1 << x))?;
                if !eval(&next, at, f)? {
                    cur = next;
                    changed = true;
                }
            }
        }

        if !changed {
            return Ok((cur, at));
        }
    }
}
