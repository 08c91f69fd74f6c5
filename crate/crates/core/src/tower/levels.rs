use fixedbitset::FixedBitSet;

use super::{Elem, Tower};
use crate::error::{domain, Result};
use crate::graph::Graph;
use crate::rel::{compose, Rel};

fn check_depth(t: &Tower, depth: usize) -> Result<()> {
    if depth > t.depth() {
        return domain(format!("depth {depth} beyond tower depth {}", t.depth()));
    }
    Ok(())
}

/// `p ∧ q` for `p` at level `m` and `q` at level `m2`, with common lower
/// bounds looked for at level `max(depth, m, m2)`; returned as a relation from
/// level `m2` to level `m`.
///
/// A lower bound at some level gives lower bounds at every deeper level
/// (bonds are surjective), so the deepest level searched decides.
pub fn wedge_rel(t: &Tower, m: usize, m2: usize, depth: usize) -> Result<Rel> {
    let w = depth.max(m).max(m2);
    check_depth(t, w)?;
    compose(t.geq(m, w)?, &t.geq(m2, w)?.inverse())
}

/// The wedge relation on one level, as a graph.
pub fn wedge(t: &Tower, level: usize, depth: usize) -> Result<Graph> {
    if depth < level {
        return domain(format!("depth {depth} above level {level}"));
    }
    let r = wedge_rel(t, level, level, depth)?;
    let rows: Vec<FixedBitSet> = (0..r.cod().len()).map(|y| r.row(y).clone()).collect();
    Graph::from_adjacency(rows)
}

/// `p ⌅ q` approximated by the levels `0..=depth`: every such level has an
/// element `c` with `p ∧ c ∧ q` (lower bounds searched down to the deepest
/// level). A witness at level `depth` gives one at every shallower level, so
/// only that level is searched. Deeper `depth` can only remove pairs.
pub fn barwedge_rel(t: &Tower, m: usize, m2: usize, depth: usize) -> Result<Rel> {
    check_depth(t, depth)?;
    let d = t.depth();
    compose(&wedge_rel(t, m, depth, d)?, &wedge_rel(t, depth, m2, d)?)
}

pub fn barwedge_at_depth(t: &Tower, p: Elem, q: Elem, depth: usize) -> Result<bool> {
    Ok(barwedge_rel(t, p.0, q.0, depth)?.relates(p.1, q.1))
}

/// `p ⊲_C q` with `C` the level `cap`: every element of `C` meeting `p` lies
/// below `q`. Returned as a relation from level `m` to level `m2` relating
/// `q` to `p` exactly when `p ⊲_C q`.
pub fn star_below_rel(t: &Tower, m: usize, m2: usize, cap: usize) -> Result<Rel> {
    check_depth(t, cap)?;
    check_depth(t, m.max(m2))?;
    let cp = wedge_rel(t, cap, m, t.depth())?;
    let mut out = Rel::empty(t.level(m)?.clone(), t.level(m2)?.clone());
    for q in 0..t.level(m2)?.len() {
        let below = if cap >= m2 {
            t.geq(m2, cap)?.row(q).clone()
        } else {
            FixedBitSet::with_capacity(t.level(cap)?.len())
        };
        for p in 0..t.level(m)?.len() {
            if cp.col(p).is_subset(&below) {
                out.insert(q, p);
            }
        }
    }
    Ok(out)
}

pub fn star_below(t: &Tower, p: Elem, q: Elem, cap: usize) -> Result<bool> {
    Ok(star_below_rel(t, p.0, q.0, cap)?.relates(q.1, p.1))
}

/// Whether level `witness` refines `c`: each of its elements lies below some
/// member of `c`.
pub fn is_level_cap(t: &Tower, c: &[Elem], witness: usize) -> Result<bool> {
    check_depth(t, witness)?;
    for &(l, v) in c {
        if v >= t.level(l)?.len() {
            return domain(format!("vertex {v} not on level {l}"));
        }
    }
    Ok((0..t.level(witness)?.len()).all(|x| c.iter().any(|&p| t.above(p, (witness, x)))))
}
