/*!
Relations between finite graphs.

A relation from `Q` to `R` (domain `Q`, codomain `R`) is a set of pairs `(r, q)`
with `r ∈ R`, `q ∈ Q`. It is stored twice as bitsets: one row per codomain vertex
(its preimage) and one column per domain vertex (its image), so images,
preimages and compositions are all unions of rows.

Morphisms of the path category are relations that are co-bijective and
edge-preserving; [`check_morphism`] evaluates each predicate by its definition.
*/

use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;

use crate::error::{domain, Error, Result};
use crate::graph::Graph;

#[derive(Clone)]
pub struct Rel {
    dom: Arc<Graph>,
    cod: Arc<Graph>,
    rows: Vec<FixedBitSet>,
    cols: Vec<FixedBitSet>,
}

impl PartialEq for Rel {
    fn eq(&self, other: &Self) -> bool {
        same_graph(&self.dom, &other.dom)
            && same_graph(&self.cod, &other.cod)
            && self.rows == other.rows
    }
}

impl Eq for Rel {}

impl fmt::Debug for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rel({}→{}: ", self.dom.len(), self.cod.len())?;
        let images: Vec<Vec<usize>> = self.cols.iter().map(|c| c.ones().collect()).collect();
        write!(f, "{images:?})")
    }
}

/// Structural graph equality with a pointer fast path.
pub fn same_graph(a: &Arc<Graph>, b: &Arc<Graph>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl Rel {
    pub fn empty(dom: Arc<Graph>, cod: Arc<Graph>) -> Rel {
        let rows = vec![FixedBitSet::with_capacity(dom.len()); cod.len()];
        let cols = vec![FixedBitSet::with_capacity(cod.len()); dom.len()];
        Rel {
            dom,
            cod,
            rows,
            cols,
        }
    }

    /// Builds a relation from `(cod, dom)` pairs.
    pub fn from_pairs(
        dom: Arc<Graph>,
        cod: Arc<Graph>,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Rel> {
        let mut r = Rel::empty(dom, cod);
        for (y, x) in pairs {
            if y >= r.cod.len() || x >= r.dom.len() {
                return domain(format!("pair ({y},{x}) out of range"));
            }
            r.insert(y, x);
        }
        Ok(r)
    }

    /// The graph of a function given as one image per domain vertex.
    pub fn from_function(dom: Arc<Graph>, cod: Arc<Graph>, f: &[usize]) -> Result<Rel> {
        if f.len() != dom.len() {
            return domain(format!("function has {} values for {} vertices", f.len(), dom.len()));
        }
        Rel::from_pairs(dom, cod, f.iter().enumerate().map(|(x, &y)| (y, x)))
    }

    /// Builds a relation from the image set of each domain vertex.
    pub fn from_images(dom: Arc<Graph>, cod: Arc<Graph>, images: &[Vec<usize>]) -> Result<Rel> {
        if images.len() != dom.len() {
            return domain("one image per domain vertex expected");
        }
        let pairs = images
            .iter()
            .enumerate()
            .flat_map(|(x, ys)| ys.iter().map(move |&y| (y, x)));
        Rel::from_pairs(dom, cod, pairs)
    }

    pub fn identity(g: Arc<Graph>) -> Rel {
        let n = g.len();
        let mut r = Rel::empty(g.clone(), g);
        for v in 0..n {
            r.insert(v, v);
        }
        r
    }

    pub fn full(dom: Arc<Graph>, cod: Arc<Graph>) -> Rel {
        let mut r = Rel::empty(dom, cod);
        for y in 0..r.cod.len() {
            for x in 0..r.dom.len() {
                r.insert(y, x);
            }
        }
        r
    }

    pub(crate) fn insert(&mut self, y: usize, x: usize) {
        self.rows[y].insert(x);
        self.cols[x].insert(y);
    }

    pub fn dom(&self) -> &Arc<Graph> {
        &self.dom
    }

    pub fn cod(&self) -> &Arc<Graph> {
        &self.cod
    }

    pub fn relates(&self, y: usize, x: usize) -> bool {
        self.rows[y].contains(x)
    }

    /// Domain vertices related to codomain vertex `y`.
    pub fn row(&self, y: usize) -> &FixedBitSet {
        &self.rows[y]
    }

    /// Codomain vertices related to domain vertex `x`.
    pub fn col(&self, x: usize) -> &FixedBitSet {
        &self.cols[x]
    }

    /// All pairs `(cod, dom)` in lexicographic order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (y, row) in self.rows.iter().enumerate() {
            out.extend(row.ones().map(|x| (y, x)));
        }
        out
    }

    pub fn pair_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones(..)).sum()
    }

    pub fn is_function(&self) -> bool {
        self.cols.iter().all(|c| c.count_ones(..) == 1)
    }

    /// The function's values, if every domain vertex has exactly one image.
    pub fn as_function(&self) -> Option<Vec<usize>> {
        self.cols
            .iter()
            .map(|c| (c.count_ones(..) == 1).then(|| c.ones().next().unwrap()))
            .collect()
    }

    fn check_dom_set(&self, w: &FixedBitSet) -> Result<()> {
        if w.ones().any(|x| x >= self.dom.len()) {
            return domain("vertex set exceeds the domain");
        }
        Ok(())
    }

    fn check_cod_set(&self, z: &FixedBitSet) -> Result<()> {
        if z.ones().any(|y| y >= self.cod.len()) {
            return domain("vertex set exceeds the codomain");
        }
        Ok(())
    }

    /// Image of a domain set.
    pub fn image(&self, w: &FixedBitSet) -> Result<FixedBitSet> {
        self.check_dom_set(w)?;
        Ok(self.image_unchecked(w))
    }

    pub(crate) fn image_unchecked(&self, w: &FixedBitSet) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.cod.len());
        for x in w.ones() {
            out.union_with(&self.cols[x]);
        }
        out
    }

    /// Preimage of a codomain set: domain vertices whose image meets it.
    pub fn preimage(&self, z: &FixedBitSet) -> Result<FixedBitSet> {
        self.check_cod_set(z)?;
        Ok(self.preimage_unchecked(z))
    }

    pub(crate) fn preimage_unchecked(&self, z: &FixedBitSet) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.dom.len());
        for y in z.ones() {
            out.union_with(&self.rows[y]);
        }
        out
    }

    /// Demonic image: codomain vertices related to every member of `w`.
    pub fn demonic_image(&self, w: &FixedBitSet) -> Result<FixedBitSet> {
        self.check_dom_set(w)?;
        let mut out = FixedBitSet::with_capacity(self.cod.len());
        for y in 0..self.cod.len() {
            if w.is_subset(&self.rows[y]) {
                out.insert(y);
            }
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Rel {
        Rel {
            dom: self.cod.clone(),
            cod: self.dom.clone(),
            rows: self.cols.clone(),
            cols: self.rows.clone(),
        }
    }

    /// Restriction to `w × z`, as a relation between the induced subgraphs.
    /// Both vertex lists are sorted and deduplicated before relabelling.
    pub fn restrict(&self, w: &[usize], z: &[usize]) -> Result<Rel> {
        let mut w = w.to_vec();
        let mut z = z.to_vec();
        w.sort_unstable();
        w.dedup();
        z.sort_unstable();
        z.dedup();
        let dom = Arc::new(self.dom.induced(&w)?);
        let cod = Arc::new(self.cod.induced(&z)?);
        let mut out = Rel::empty(dom, cod);
        for (j, &y) in z.iter().enumerate() {
            for (i, &x) in w.iter().enumerate() {
                if self.relates(y, x) {
                    out.insert(j, i);
                }
            }
        }
        Ok(out)
    }

    fn check_same_graphs(&self, other: &Rel) -> Result<()> {
        if !same_graph(&self.dom, &other.dom) || !same_graph(&self.cod, &other.cod) {
            return Err(Error::Mismatch("relations are between different graphs".into()));
        }
        Ok(())
    }

    pub fn intersect(&self, other: &Rel) -> Result<Rel> {
        self.check_same_graphs(other)?;
        let mut out = Rel::empty(self.dom.clone(), self.cod.clone());
        for y in 0..self.cod.len() {
            for x in self.rows[y].intersection(&other.rows[y]) {
                out.insert(y, x);
            }
        }
        Ok(out)
    }

    pub fn union(&self, other: &Rel) -> Result<Rel> {
        self.check_same_graphs(other)?;
        let mut out = self.clone();
        for (y, x) in other.pairs() {
            out.insert(y, x);
        }
        Ok(out)
    }

    pub fn is_subset(&self, other: &Rel) -> Result<bool> {
        self.check_same_graphs(other)?;
        Ok(self
            .rows
            .iter()
            .zip(&other.rows)
            .all(|(a, b)| a.is_subset(b)))
    }

    /// Relabels along `dom_order[i] = old domain vertex at new index i` and likewise for the codomain.
    pub fn relabel(
        &self,
        dom: Arc<Graph>,
        dom_order: &[usize],
        cod: Arc<Graph>,
        cod_order: &[usize],
    ) -> Result<Rel> {
        let mut dpos = vec![usize::MAX; self.dom.len()];
        for (i, &v) in dom_order.iter().enumerate() {
            dpos[v] = i;
        }
        let mut cpos = vec![usize::MAX; self.cod.len()];
        for (i, &v) in cod_order.iter().enumerate() {
            cpos[v] = i;
        }
        if dpos.contains(&usize::MAX) || cpos.contains(&usize::MAX) {
            return domain("relabelling is not a permutation");
        }
        Rel::from_pairs(
            dom,
            cod,
            self.pairs().into_iter().map(|(y, x)| (cpos[y], dpos[x])),
        )
    }

    /// The same relation between canonically labelled paths P_n and P_m.
    pub fn to_canonical_paths(&self) -> Result<Rel> {
        let (Some(dorder), Some(corder)) = (self.dom.path_order(), self.cod.path_order()) else {
            return domain("relation is not between paths");
        };
        if self.dom.is_canonical_path() && self.cod.is_canonical_path() {
            return Ok(self.clone());
        }
        let dom = Arc::new(Graph::path(self.dom.len() - 1));
        let cod = Arc::new(Graph::path(self.cod.len() - 1));
        self.relabel(dom, dorder, cod, corder)
    }

    /// `self ∘ r`.
    pub fn compose(&self, r: &Rel) -> Result<Rel> {
        compose(self, r)
    }
}

fn check_composable(s: &Rel, r: &Rel) -> Result<()> {
    if !same_graph(&r.cod, &s.dom) {
        return Err(Error::Mismatch(format!(
            "cannot compose: codomain of the inner relation ({} vertices) is not the domain of the outer ({} vertices)",
            r.cod.len(),
            s.dom.len()
        )));
    }
    Ok(())
}

/// `s ∘ r`: `z` is related to `x` when some `y` has `z s y` and `y r x`.
pub fn compose(s: &Rel, r: &Rel) -> Result<Rel> {
    check_composable(s, r)?;
    let mut rows = Vec::with_capacity(s.cod.len());
    for z in 0..s.cod.len() {
        let mut row = FixedBitSet::with_capacity(r.dom.len());
        for y in s.rows[z].ones() {
            row.union_with(&r.rows[y]);
        }
        rows.push(row);
    }
    Ok(from_rows(r.dom.clone(), s.cod.clone(), rows))
}

/// Demonic composition: `z` related to `x` when the `r`-image of `x` is non-empty and lies inside `z`'s `s`-preimage.
pub fn demonic_compose(s: &Rel, r: &Rel) -> Result<Rel> {
    check_composable(s, r)?;
    let mut out = Rel::empty(r.dom.clone(), s.cod.clone());
    for x in 0..r.dom.len() {
        let img = &r.cols[x];
        if img.is_clear() {
            continue;
        }
        for z in 0..s.cod.len() {
            if img.is_subset(&s.rows[z]) {
                out.insert(z, x);
            }
        }
    }
    Ok(out)
}

/// Codemonic composition: `z` related to `x` when `z`'s `s`-preimage is non-empty and lies inside the `r`-image of `x`.
pub fn codemonic_compose(s: &Rel, r: &Rel) -> Result<Rel> {
    check_composable(s, r)?;
    let mut out = Rel::empty(r.dom.clone(), s.cod.clone());
    for z in 0..s.cod.len() {
        let pre = &s.rows[z];
        if pre.is_clear() {
            continue;
        }
        for x in 0..r.dom.len() {
            if pre.is_subset(&r.cols[x]) {
                out.insert(z, x);
            }
        }
    }
    Ok(out)
}

fn from_rows(dom: Arc<Graph>, cod: Arc<Graph>, rows: Vec<FixedBitSet>) -> Rel {
    let mut cols = vec![FixedBitSet::with_capacity(cod.len()); dom.len()];
    for (y, row) in rows.iter().enumerate() {
        for x in row.ones() {
            cols[x].insert(y);
        }
    }
    Rel {
        dom,
        cod,
        rows,
        cols,
    }
}

/// Composes a chain written outermost first: `chain[0] ∘ chain[1] ∘ ...`.
pub fn compose_all(chain: &[Rel]) -> Result<Rel> {
    let (last, rest) = chain
        .split_last()
        .ok_or_else(|| Error::Domain("empty composition chain".into()))?;
    rest.iter().rev().try_fold(last.clone(), |acc, s| compose(s, &acc))
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct MorphismReport {
    pub surjective: bool,
    pub co_surjective: bool,
    pub co_injective: bool,
    pub co_bijective: bool,
    pub edge_preserving: bool,
    pub edge_witnessing: bool,
    pub edge_injective: bool,
    pub end_preserving: bool,
    /// Only defined when both graphs are paths.
    pub proper: Option<bool>,
    pub is_function: bool,
}

impl MorphismReport {
    /// Co-bijective and edge-preserving.
    pub fn is_morphism(&self) -> bool {
        self.co_bijective && self.edge_preserving
    }
}

pub fn check_morphism(r: &Rel) -> MorphismReport {
    let co_surjective = r.cols.iter().all(|c| !c.is_clear());
    let co_injective = is_co_injective(r, &FixedBitSet::with_capacity(0), true);
    let proper = (r.dom.is_path() && r.cod.is_path()).then(|| is_proper(r));
    MorphismReport {
        surjective: r.rows.iter().all(|c| !c.is_clear()),
        co_surjective,
        co_injective,
        co_bijective: co_surjective && co_injective,
        edge_preserving: is_edge_preserving(r),
        edge_witnessing: is_edge_witnessing(r),
        edge_injective: is_edge_injective(r),
        end_preserving: is_end_preserving(r),
        proper,
        is_function: r.is_function(),
    }
}

/// Every codomain vertex is the whole image of some domain vertex, using only
/// domain vertices in `within` unless `all` is set.
fn is_co_injective(r: &Rel, within: &FixedBitSet, all: bool) -> bool {
    let mut hit = FixedBitSet::with_capacity(r.cod.len());
    for (x, c) in r.cols.iter().enumerate() {
        if (all || within.contains(x)) && c.count_ones(..) == 1 {
            hit.insert(c.ones().next().unwrap());
        }
    }
    hit.count_ones(..) == r.cod.len()
}

pub fn is_edge_preserving(r: &Rel) -> bool {
    (0..r.dom.len()).all(|x| {
        let reach = r.image_unchecked(r.dom.neighbours(x));
        r.cols[x].ones().all(|y| reach.is_subset(r.cod.neighbours(y)))
    })
}

pub fn is_edge_witnessing(r: &Rel) -> bool {
    let cod = &r.cod;
    (0..cod.len()).all(|y| {
        cod.neighbours(y)
            .ones()
            .all(|y2| r.rows[y].intersection(&r.rows[y2]).next().is_some())
    })
}

pub fn is_edge_injective(r: &Rel) -> bool {
    r.dom.edges().into_iter().all(|(q, q2)| {
        let (a, b) = (&r.cols[q], &r.cols[q2]);
        a.count_ones(..) == 1 && b.count_ones(..) == 1 && a != b
    })
}

pub fn is_end_preserving(r: &Rel) -> bool {
    let dom_ends = r.dom.ends();
    r.cod.ends().into_iter().all(|e| {
        dom_ends
            .iter()
            .any(|&q| r.cols[q].count_ones(..) == 1 && r.cols[q].contains(e))
    })
}

/// No proper subpath of the domain carries a co-injective restriction.
/// Co-injectivity only gets easier on larger sets, so the two maximal proper
/// subpaths (drop either end) decide it.
fn is_proper(r: &Rel) -> bool {
    let order = r.dom.path_order().expect("path");
    if order.len() == 1 {
        return true;
    }
    let n = order.len();
    for drop in [order[0], order[n - 1]] {
        let mut within = FixedBitSet::with_capacity(n);
        within.insert_range(..);
        within.set(drop, false);
        if is_co_injective(r, &within, false) {
            return false;
        }
    }
    true
}

/// Per-domain-vertex image intervals `(low, high)` of a canonical path morphism.
fn image_intervals(r: &Rel) -> Vec<(usize, usize)> {
    r.cols
        .iter()
        .map(|c| (c.minimum().unwrap(), c.maximum().unwrap()))
        .collect()
}

fn require_path_morphism(r: &Rel) -> Result<Rel> {
    let c = r.to_canonical_paths()?;
    let rep = check_morphism(&c);
    if !rep.is_morphism() {
        return domain("relation is not a co-bijective edge-preserving morphism");
    }
    Ok(c)
}

/// Tangledness: for subpaths `S`, `T` of the domain with connected union,
/// `S ⊆ T^⊏⊐` or `T ⊆ S^⊏⊐`.
///
/// Runs in quadratic time. For each `S` only the two smallest subpaths `T`
/// escaping the component of `S^⊏⊐` around `S` need testing; every other
/// failing pair contains one of these.
pub fn is_tangled(r: &Rel) -> Result<bool> {
    let c = require_path_morphism(r)?;
    let iv = image_intervals(&c);
    let n = iv.len() - 1;
    let lows: Vec<usize> = iv.iter().map(|p| p.0).collect();
    let highs: Vec<usize> = iv.iter().map(|p| p.1).collect();
    let min_low = SparseTable::new(&lows, usize::min);
    let max_high = SparseTable::new(&highs, usize::max);

    for a in 0..=n {
        let (mut lo, mut hi) = (usize::MAX, 0);
        let (mut max_l, mut min_h) = (0, usize::MAX);
        let mut cl = a;
        let mut cr = a;
        for b in a..=n {
            lo = lo.min(iv[b].0);
            hi = hi.max(iv[b].1);
            max_l = max_l.max(iv[b].0);
            min_h = min_h.min(iv[b].1);
            let member = |q: usize| iv[q].0 <= hi && iv[q].1 >= lo;
            while cl > 0 && member(cl - 1) {
                cl -= 1;
            }
            cr = cr.max(b);
            while cr < n && member(cr + 1) {
                cr += 1;
            }
            let covered = |t0: usize, t1: usize| {
                max_l <= max_high.query(t0, t1) && min_h >= min_low.query(t0, t1)
            };
            if cl > 0 && !covered(cl - 1, a - 1) {
                return Ok(false);
            }
            if cr < n && !covered(b + 1, cr + 1) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Literal subpath-pair scan for tangledness, quartic in the domain size.
pub fn is_tangled_literal(r: &Rel) -> Result<bool> {
    let c = require_path_morphism(r)?;
    let n = c.dom.len();
    let mut sat = vec![vec![FixedBitSet::new(); n]; n];
    for a in 0..n {
        for b in a..n {
            let mut s = FixedBitSet::with_capacity(n);
            s.insert_range(a..b + 1);
            sat[a][b] = c.preimage_unchecked(&c.image_unchecked(&s));
        }
    }
    let inside = |a: usize, b: usize, set: &FixedBitSet| (a..=b).all(|v| set.contains(v));
    for a in 0..n {
        for b in a..n {
            for c0 in 0..n {
                for d in c0..n {
                    if c0 > b + 1 || a > d + 1 {
                        continue;
                    }
                    if !inside(a, b, &sat[c0][d]) && !inside(c0, d, &sat[a][b]) {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

pub(crate) struct SparseTable<F: Fn(usize, usize) -> usize> {
    levels: Vec<Vec<usize>>,
    op: F,
}

impl<F: Fn(usize, usize) -> usize> SparseTable<F> {
    pub(crate) fn new(values: &[usize], op: F) -> Self {
        let mut levels = vec![values.to_vec()];
        let mut width = 1;
        while 2 * width <= values.len() {
            let prev = levels.last().unwrap();
            let next = (0..=values.len() - 2 * width)
                .map(|i| op(prev[i], prev[i + width]))
                .collect();
            levels.push(next);
            width *= 2;
        }
        SparseTable { levels, op }
    }

    /// Inclusive range query.
    pub(crate) fn query(&self, a: usize, b: usize) -> usize {
        let len = b - a + 1;
        let k = usize::BITS as usize - 1 - len.leading_zeros() as usize;
        (self.op)(self.levels[k][a], self.levels[k][b + 1 - (1 << k)])
    }
}
