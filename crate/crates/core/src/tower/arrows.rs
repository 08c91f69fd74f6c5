//! Arrows between two towers and decreasing sequences of them.
//!
//! An [`Arrow`] is a relation from a level of the domain tower `ℙ` to a level
//! of the codomain tower `ℚ` (the two may be the same tower). The derived
//! relations `⟨!←` and `[!←`, the orders `≤` and `⊲`, and star composition
//! are evaluated with the quantifiers over deeper elements cut off at the
//! truncation depth; each function says which way the cut-off errs.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use super::levels::{barwedge_rel, star_below_rel, wedge_rel};
use super::Tower;
use crate::error::{domain, Error, Result};
use crate::rel::{compose, same_graph, Rel};

#[derive(Clone, Debug, PartialEq)]
pub struct Arrow {
    pub dom_level: usize,
    pub cod_level: usize,
    pub rel: Rel,
}

impl Arrow {
    pub fn new(p: &Tower, q: &Tower, dom_level: usize, cod_level: usize, rel: Rel) -> Result<Arrow> {
        if !same_graph(rel.dom(), p.level(dom_level)?) || !same_graph(rel.cod(), q.level(cod_level)?) {
            return Err(Error::Mismatch(format!(
                "arrow graphs are not levels {dom_level} and {cod_level}"
            )));
        }
        Ok(Arrow {
            dom_level,
            cod_level,
            rel,
        })
    }
}

fn require_deeper(a: &Arrow, b: &Arrow) -> Result<()> {
    if a.dom_level < b.dom_level || a.cod_level < b.cod_level {
        return Err(Error::Mismatch(
            "first arrow must sit at levels at least as deep as the second".into(),
        ));
    }
    Ok(())
}

/// `a ≤ b`, i.e. `a ⊆ ≤ ∘ b ∘ ≥`, for `a` at deeper levels than `b`.
pub fn arrow_leq(p: &Tower, q: &Tower, a: &Arrow, b: &Arrow) -> Result<bool> {
    require_deeper(a, b)?;
    let down = p.geq(b.dom_level, a.dom_level)?;
    let up = q.geq(b.cod_level, a.cod_level)?.inverse();
    let rhs = compose(&up, &compose(&b.rel, down)?)?;
    a.rel.is_subset(&rhs)
}

/// `a ⊲ b`, i.e. `a ⊆ ⊲ ∘ b ∘ ⊳`, with the star relations taken over the caps
/// formed by `a`'s own levels.
pub fn arrow_triangleleft_n(p: &Tower, q: &Tower, a: &Arrow, b: &Arrow) -> Result<bool> {
    require_deeper(a, b)?;
    let sp = star_below_rel(p, a.dom_level, b.dom_level, a.dom_level)?;
    let sq = star_below_rel(q, a.cod_level, b.cod_level, a.cod_level)?.inverse();
    let rhs = compose(&sq, &compose(&b.rel, &sp)?)?;
    a.rel.is_subset(&rhs)
}

/// `⊲` over the deepest level as cap, which refines every other level cap and
/// so admits the most pairs: relates `q` (on `q_level`) to `x` (on `level`)
/// when `x ⊲ q`.
fn star_below_any(q: &Tower, level: usize, q_level: usize) -> Result<Rel> {
    star_below_rel(q, level, q_level, q.depth())
}

/// `⟨!←` between `ℙ`-level `levels.0` and `ℚ`-level `levels.1`:
/// `q ⟨!← p` iff `p^{⌅→}` is non-empty and star-below `q`.
///
/// `⌅` is taken at `depth` and `⊲` over the deepest level. Both
/// cut-offs make the result smaller than the limit relation, never larger, and
/// the result grows with `depth`.
pub fn langle_arrow_at(
    p: &Tower,
    q: &Tower,
    a: &Arrow,
    levels: (usize, usize),
    depth: usize,
) -> Result<Rel> {
    let (pl, ql) = levels;
    let reach = compose(&a.rel, &barwedge_rel(p, a.dom_level, pl, depth)?)?;
    let below = star_below_any(q, a.cod_level, ql)?;
    let mut out = Rel::empty(p.level(pl)?.clone(), q.level(ql)?.clone());
    for x in 0..reach.dom().len() {
        let img = reach.col(x);
        if img.is_clear() {
            continue;
        }
        for y in 0..out.cod().len() {
            if img.is_subset(below.row(y)) {
                out.insert(y, x);
            }
        }
    }
    Ok(out)
}

/// [`langle_arrow_at`] on the arrow's own levels.
pub fn langle_arrow(p: &Tower, q: &Tower, a: &Arrow, depth: usize) -> Result<Rel> {
    langle_arrow_at(p, q, a, (a.dom_level, a.cod_level), depth)
}

/// `[!←` between `ℙ`-level `levels.0` and `ℚ`-level `levels.1` (with
/// `levels.1 ≤ a.cod_level`): `q [!← p` iff `p^{∧→}` is non-empty and lies
/// below `q`.
pub fn square_arrow(p: &Tower, q: &Tower, a: &Arrow, levels: (usize, usize)) -> Result<Rel> {
    let (pl, ql) = levels;
    if ql > a.cod_level {
        return domain("bracket arrow target level must not be deeper than the arrow");
    }
    let reach = compose(&a.rel, &wedge_rel(p, a.dom_level, pl, p.depth())?)?;
    let up = q.geq(ql, a.cod_level)?;
    let mut out = Rel::empty(p.level(pl)?.clone(), q.level(ql)?.clone());
    for x in 0..reach.dom().len() {
        let img = reach.col(x);
        if img.is_clear() {
            continue;
        }
        for y in 0..out.cod().len() {
            if img.is_subset(up.row(y)) {
                out.insert(y, x);
            }
        }
    }
    Ok(out)
}

/// `← ∘ ⌅` is co-surjective on the arrow's domain level, with `⌅` at `depth`.
pub fn is_arrow_at_depth(p: &Tower, a: &Arrow, depth: usize) -> Result<bool> {
    let r = compose(&a.rel, &barwedge_rel(p, a.dom_level, a.dom_level, depth)?)?;
    Ok((0..r.dom().len()).all(|x| !r.col(x).is_clear()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArrowSequence {
    arrows: Vec<Arrow>,
}

impl ArrowSequence {
    /// Checks that levels strictly increase and that each arrow is `≤` the previous one.
    pub fn new(p: &Tower, q: &Tower, arrows: Vec<Arrow>) -> Result<ArrowSequence> {
        for (k, w) in arrows.windows(2).enumerate() {
            if w[1].dom_level <= w[0].dom_level || w[1].cod_level <= w[0].cod_level {
                return domain(format!("arrow {} does not sit deeper than arrow {k}", k + 1));
            }
            if !arrow_leq(p, q, &w[1], &w[0])? {
                return domain(format!("arrow {} is not ≤ arrow {k}", k + 1));
            }
        }
        Ok(ArrowSequence { arrows })
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn len(&self) -> usize {
        self.arrows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrows.is_empty()
    }
}

/// The equality arrows `=_{ℙ_k}` for every level of `t`, from `t` to itself.
pub fn identity_sequence(t: &Tower) -> ArrowSequence {
    let arrows = (0..=t.depth())
        .map(|k| Arrow {
            dom_level: k,
            cod_level: k,
            rel: Rel::identity(t.levels()[k].clone()),
        })
        .collect();
    ArrowSequence { arrows }
}

/// Entrywise `↞_n ∘ ⌅ ∘ ←_n` for `s1` from `ℙ` to `ℚ` and `s2` from `ℚ` to
/// `ℝ`, with `⌅` on `ℚ` at `depth`. The result is re-checked to be decreasing.
pub fn compose_sequences(
    p: &Tower,
    q: &Tower,
    r: &Tower,
    s1: &ArrowSequence,
    s2: &ArrowSequence,
    depth: usize,
) -> Result<ArrowSequence> {
    let mut out = Vec::new();
    for (a, b) in s1.arrows.iter().zip(&s2.arrows) {
        let bw = barwedge_rel(q, b.dom_level, a.cod_level, depth)?;
        let rel = compose(&b.rel, &compose(&bw, &a.rel)?)?;
        out.push(Arrow::new(p, r, a.dom_level, b.cod_level, rel)?);
    }
    ArrowSequence::new(p, r, out)
}

/// `x*` for a relation `x` out of level `level` of `t`: `q x* p` iff for some
/// level cap `C`, every element of `C` meeting `p` lies below an element that
/// `x` relates to `q`. Refining the cap only shrinks the condition, so the
/// deepest level decides; the result can only grow with depth.
pub fn star(t: &Tower, level: usize, x: &Rel) -> Result<Rel> {
    if !same_graph(x.dom(), t.level(level)?) {
        return Err(Error::Mismatch(format!("relation is not out of level {level}")));
    }
    let d = t.depth();
    let lifted = compose(x, t.geq(level, d)?)?;
    let cp = wedge_rel(t, d, level, d)?;
    let mut out = Rel::empty(x.dom().clone(), x.cod().clone());
    for pv in 0..x.dom().len() {
        let meets = cp.col(pv);
        for y in 0..x.cod().len() {
            if meets.is_subset(lifted.row(y)) {
                out.insert(y, pv);
            }
        }
    }
    Ok(out)
}

/// `(s ∘ r)*` for `r` out of level `level` of `t`.
pub fn star_compose(t: &Tower, level: usize, s: &Rel, r: &Rel) -> Result<Rel> {
    star(t, level, &compose(s, r)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularityStep {
    pub m: usize,
    /// Least later index with `←_n ⊲_n ←_m`.
    pub n: usize,
    /// A level of `ℙ` refining the domain of `←_n`.
    pub cap_level: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularityCertificate {
    pub steps: Vec<RegularityStep>,
    /// First index with no witness, if any.
    pub failure: Option<usize>,
    /// Deepest levels of the two towers consulted.
    pub depth_p: usize,
    pub depth_q: usize,
}

impl RegularityCertificate {
    pub fn is_regular(&self) -> bool {
        self.failure.is_none()
    }
}

fn domain_cap_level(p: &Tower, a: &Arrow) -> Result<Option<usize>> {
    let mut dom = FixedBitSet::with_capacity(a.rel.dom().len());
    for x in 0..a.rel.dom().len() {
        if !a.rel.col(x).is_clear() {
            dom.insert(x);
        }
    }
    let set: Vec<(usize, usize)> = dom.ones().map(|x| (a.dom_level, x)).collect();
    for w in a.dom_level..=p.depth() {
        if super::levels::is_level_cap(p, &set, w)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// For every index but the last, the least later index `n` with
/// `←_n ⊲_n ←_m` whose domain is a cap of `ℙ`.
pub fn regularity_certificate(
    p: &Tower,
    q: &Tower,
    seq: &ArrowSequence,
) -> Result<RegularityCertificate> {
    let mut steps = Vec::new();
    let mut failure = None;
    let k = seq.arrows.len();
    'outer: for m in 0..k.saturating_sub(1) {
        for n in m + 1..k {
            let (an, am) = (&seq.arrows[n], &seq.arrows[m]);
            if !arrow_triangleleft_n(p, q, an, am)? {
                continue;
            }
            if let Some(cap_level) = domain_cap_level(p, an)? {
                steps.push(RegularityStep { m, n, cap_level });
                continue 'outer;
            }
        }
        failure = Some(m);
        break;
    }
    Ok(RegularityCertificate {
        steps,
        failure,
        depth_p: p.depth(),
        depth_q: q.depth(),
    })
}
