use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, internal, Result};
use crate::graph::{canonical_path, clique_path, product_edges, Graph, Path, ProductMode};
use crate::paths::{membership_morphism, path};
use crate::rel::{check_morphism, compose, Rel};

/// A relation on a path, read as a directed graph on its vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct Digraph {
    path: Path,
    rel: Rel,
}

impl Digraph {
    /// Wraps `rel` after checking that it is bi-surjective and connected.
    pub fn new(path: Path, rel: Rel) -> Result<Digraph> {
        if !is_digraph(&path, &rel)? {
            return domain("relation is not bi-surjective and connected in the product");
        }
        Ok(Digraph { path, rel })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn rel(&self) -> &Rel {
        &self.rel
    }

    pub fn is_strict(&self) -> bool {
        is_strictly_connected(&self.rel)
    }
}

fn check_on(p: &Path, rel: &Rel) -> Result<()> {
    if **rel.dom() != **p.graph() || **rel.cod() != **p.graph() {
        return domain("relation is not on the given path");
    }
    Ok(())
}

fn bi_surjective(rel: &Rel) -> bool {
    let r = check_morphism(rel);
    r.surjective && r.co_surjective
}

/// Whether the pairs of `rel`, as vertices of the product of its graphs, form
/// a connected subgraph. Pair `(y, x)` is vertex `y * |dom| + x`.
fn pairs_connected(rel: &Rel, mode: ProductMode) -> bool {
    let pairs = rel.pairs();
    if pairs.is_empty() {
        return false;
    }
    let prod = product_edges(rel.cod(), rel.dom(), mode);
    let width = rel.dom().len();
    let ids: Vec<usize> = pairs.iter().map(|&(y, x)| y * width + x).collect();
    let mut members = fixedbitset::FixedBitSet::with_capacity(prod.len());
    members.extend(ids.iter().copied());
    let mut seen = fixedbitset::FixedBitSet::with_capacity(prod.len());
    let mut stack = vec![ids[0]];
    seen.insert(ids[0]);
    while let Some(u) = stack.pop() {
        for w in prod.neighbours(u).ones() {
            if members.contains(w) && !seen.put(w) {
                stack.push(w);
            }
        }
    }
    seen.count_ones(..) == ids.len()
}

/// Bi-surjective and connected in the canonical product.
pub fn is_digraph(p: &Path, rel: &Rel) -> Result<bool> {
    check_on(p, rel)?;
    Ok(bi_surjective(rel) && pairs_connected(rel, ProductMode::Canonical))
}

/// Connected in the product where a step moves one coordinate only.
pub fn is_strictly_connected(rel: &Rel) -> bool {
    pairs_connected(rel, ProductMode::Strict)
}

/// A walk `R` through the pairs of a digraph relation and its two
/// coordinate functions, with `rel = f ∘ g⁻¹`.
#[derive(Clone, Debug, PartialEq)]
pub struct DigraphDecomposition {
    pub walk: Path,
    /// Codomain coordinate of each walk vertex.
    pub f: Rel,
    /// Domain coordinate of each walk vertex.
    pub g: Rel,
}

/// Traces a depth-first walk through the pairs of `rel` in the canonical
/// product, stepping back along the search tree, so consecutive pairs are
/// adjacent or equal in both coordinates.
pub fn digraph_decompose(p: &Path, rel: &Rel) -> Result<DigraphDecomposition> {
    if !is_digraph(p, rel)? {
        return domain("relation is not a digraph: it must be bi-surjective and connected");
    }
    let pairs = rel.pairs();
    let adjacent = |a: (usize, usize), b: (usize, usize)| {
        rel.cod().adjacent(a.0, b.0) && rel.dom().adjacent(a.1, b.1)
    };
    let mut visited = vec![false; pairs.len()];
    let mut walk = vec![0];
    let mut stack = vec![0];
    visited[0] = true;
    while let Some(&top) = stack.last() {
        match (0..pairs.len()).find(|&j| !visited[j] && adjacent(pairs[top], pairs[j])) {
            Some(j) => {
                visited[j] = true;
                stack.push(j);
                walk.push(j);
            }
            None => {
                stack.pop();
                if visited.iter().all(|&b| b) {
                    break;
                }
                if let Some(&back) = stack.last() {
                    walk.push(back);
                }
            }
        }
    }
    let r = path(walk.len() - 1);
    let f = Rel::from_function(r.clone(), p.graph().clone(), &walk.iter().map(|&k| pairs[k].0).collect::<Vec<_>>())?;
    let g = Rel::from_function(r.clone(), p.graph().clone(), &walk.iter().map(|&k| pairs[k].1).collect::<Vec<_>>())?;
    if compose(&f, &g.inverse())? != *rel {
        return internal("walk does not recompose to the relation");
    }
    if !check_morphism(&f).is_morphism() || !check_morphism(&g).is_morphism() {
        return internal("coordinate functions are not morphisms");
    }
    Ok(DigraphDecomposition {
        walk: Path::new(r)?,
        f,
        g,
    })
}

/// Lifts a digraph to the clique path of its path: cliques `Y, X` are related
/// when some member of `Y` is related to some member of `X`.
pub fn strictify(d: &Digraph) -> Result<Digraph> {
    let cp = clique_path(&d.path);
    let member = membership_morphism(&d.path);
    let g = cp.path.graph().clone();
    let mut pairs = Vec::new();
    for (cy, ys) in cp.cliques.iter().enumerate() {
        for (cx, xs) in cp.cliques.iter().enumerate() {
            if ys.iter().any(|&y| xs.iter().any(|&x| d.rel.relates(y, x))) {
                pairs.push((cy, cx));
            }
        }
    }
    let rel = Rel::from_pairs(g.clone(), g, pairs)?;
    if !is_strictly_connected(&rel) || !bi_surjective(&rel) {
        return internal("strictified relation is not strictly connected and bi-surjective");
    }
    let conj = compose(&member.inverse(), &compose(&d.rel, &member)?)?;
    if !rel.is_subset(&conj)? {
        return internal("membership is not a digraph morphism onto the input");
    }
    Digraph::new(cp.path, rel)
}

/// Two digraph morphisms into the inputs from a common digraph on `P_l`.
#[derive(Clone, Debug, PartialEq)]
pub struct Join {
    pub f: Rel,
    pub g: Rel,
    pub c: Digraph,
}

/// Joins strictly connected digraphs on `P_m` and `P_n` over `P_l`,
/// `l = (m+1)(n+1) - 1`: `f` reads the block index, `g` sweeps each block
/// forwards or backwards by parity, and `c` is the meet of the two pullbacks.
pub fn digraph_join(a: &Digraph, b: &Digraph) -> Result<Join> {
    for (name, d) in [("first", a), ("second", b)] {
        if !d.is_strict() || !bi_surjective(&d.rel) {
            return domain(format!("{name} digraph is not strictly connected and bi-surjective"));
        }
    }
    let (m, n) = (a.path.length(), b.path.length());
    let l = (m + 1) * (n + 1) - 1;
    let pl = path(l);
    let (oa, ob) = (a.path.order_witness(), b.path.order_witness());
    let mut fv = Vec::with_capacity(l + 1);
    let mut gv = Vec::with_capacity(l + 1);
    for i in 0..=m {
        for j in 0..=n {
            fv.push(oa[i]);
            gv.push(ob[if i % 2 == 0 { j } else { n - j }]);
        }
    }
    let f = Rel::from_function(pl.clone(), a.path.graph().clone(), &fv)?;
    let g = Rel::from_function(pl.clone(), b.path.graph().clone(), &gv)?;
    let pull_a = compose(&f.inverse(), &compose(&a.rel, &f)?)?;
    let pull_b = compose(&g.inverse(), &compose(&b.rel, &g)?)?;
    let c = pull_a.intersect(&pull_b)?;
    if !is_strictly_connected(&c) || !bi_surjective(&c) {
        return internal("joined relation is not strictly connected and bi-surjective");
    }
    if !check_morphism(&f).is_morphism() || !check_morphism(&g).is_morphism() {
        return internal("join maps are not morphisms");
    }
    Ok(Join {
        f,
        g,
        c: Digraph::new(Path::new(pl)?, c)?,
    })
}

/// A random strictly connected digraph on `P_len`: a walk in the strict
/// product that runs until both coordinates have covered the path.
pub fn random_digraph(len: usize, seed: u64) -> Result<Digraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Arc<Graph> = path(len);
    let k = len + 1;
    let mut cur = (rng.gen_range(0..k), rng.gen_range(0..k));
    let (mut seen_y, mut seen_x) = (vec![false; k], vec![false; k]);
    let mut pairs = vec![cur];
    seen_y[cur.0] = true;
    seen_x[cur.1] = true;
    while !(seen_y.iter().all(|&b| b) && seen_x.iter().all(|&b| b)) {
        let step = |v: usize, rng: &mut ChaCha8Rng| -> usize {
            match (v, rng.gen_bool(0.5)) {
                (0, _) => (v + 1).min(len),
                (v, _) if v == len => v - 1,
                (v, true) => v + 1,
                (v, false) => v - 1,
            }
        };
        if len > 0 {
            if rng.gen_bool(0.5) {
                cur.0 = step(cur.0, &mut rng);
            } else {
                cur.1 = step(cur.1, &mut rng);
            }
        }
        pairs.push(cur);
        seen_y[cur.0] = true;
        seen_x[cur.1] = true;
    }
    let rel = Rel::from_pairs(g.clone(), g.clone(), pairs)?;
    Digraph::new(canonical_path(len), rel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn digraph_of(len: usize, pairs: &[(usize, usize)]) -> Rel {
        Rel::from_pairs(path(len), path(len), pairs.iter().copied()).unwrap()
    }

    /// Connectivity by repeated pairwise merging, independent of the product graph.
    fn connected_oracle(rel: &Rel, strict: bool) -> bool {
        let pairs = rel.pairs();
        let near = |a: usize, b: usize| a.abs_diff(b) <= 1;
        let adj = |p: (usize, usize), q: (usize, usize)| {
            if strict {
                (p.0 == q.0 && near(p.1, q.1)) || (p.1 == q.1 && near(p.0, q.0))
            } else {
                near(p.0, q.0) && near(p.1, q.1)
            }
        };
        let mut comp: Vec<usize> = (0..pairs.len()).collect();
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..pairs.len() {
                for j in 0..pairs.len() {
                    if adj(pairs[i], pairs[j]) && comp[i] != comp[j] {
                        let (lo, hi) = (comp[i].min(comp[j]), comp[i].max(comp[j]));
                        comp.iter_mut().filter(|c| **c == hi).for_each(|c| *c = lo);
                        changed = true;
                    }
                }
            }
        }
        !pairs.is_empty() && comp.iter().all(|&c| c == comp[0])
    }

    #[test]
    fn small_examples() {
        let p1 = canonical_path(1);
        assert!(is_digraph(&p1, &Rel::full(path(1), path(1))).unwrap());
        assert!(is_digraph(&p1, &Rel::identity(path(1))).unwrap());
        // (0,2) is two steps from every other pair in some coordinate
        let iso = digraph_of(2, &[(0, 0), (1, 0), (2, 1), (2, 2), (0, 2)]);
        assert!(!is_digraph(&canonical_path(2), &iso).unwrap());
        assert!(!is_strictly_connected(&Rel::identity(path(1))));
    }

    #[test]
    fn full_relation_decomposes_shortly() {
        let full = Rel::full(path(1), path(1));
        let d = digraph_decompose(&canonical_path(1), &full).unwrap();
        assert!(d.walk.length() <= 4);
        assert_eq!(compose(&d.f, &d.g.inverse()).unwrap(), full);
    }

    #[test]
    fn decompose_rejects_non_digraphs() {
        let iso = digraph_of(2, &[(0, 0), (1, 0), (2, 1), (2, 2), (0, 2)]);
        assert!(digraph_decompose(&canonical_path(2), &iso).is_err());
    }

    #[test]
    fn strictify_examples() {
        let full = Digraph::new(canonical_path(1), Rel::full(path(1), path(1))).unwrap();
        let s = strictify(&full).unwrap();
        assert_eq!(s.path().length(), 2);
        assert!(s.is_strict());
        assert_eq!(*s.rel(), Rel::full(path(2), path(2)));
        let trivial = Digraph::new(canonical_path(0), Rel::identity(path(0))).unwrap();
        let st = strictify(&trivial).unwrap();
        assert_eq!(st.rel(), trivial.rel());
        let id = Digraph::new(canonical_path(2), Rel::identity(path(2))).unwrap();
        assert!(strictify(&id).unwrap().is_strict());
    }

    #[test]
    fn join_of_full_edges() {
        let full = Digraph::new(canonical_path(1), Rel::full(path(1), path(1))).unwrap();
        let j = digraph_join(&full, &full).unwrap();
        assert_eq!(j.c.path().length(), 3);
        assert_eq!(j.f.as_function().unwrap(), vec![0, 0, 1, 1]);
        assert_eq!(j.g.as_function().unwrap(), vec![0, 1, 1, 0]);
        assert_eq!(*j.c.rel(), Rel::full(path(3), path(3)));
    }

    #[test]
    fn join_of_half_edges() {
        let half = digraph_of(1, &[(0, 0), (0, 1), (1, 1)]);
        let d = Digraph::new(canonical_path(1), half.clone()).unwrap();
        let j = digraph_join(&d, &d).unwrap();
        // both pullbacks evaluated pair by pair
        let (f, g) = ([0, 0, 1, 1], [0, 1, 1, 0]);
        let expect: Vec<(usize, usize)> = (0..4)
            .flat_map(|y| (0..4).map(move |x| (y, x)))
            .filter(|&(y, x)| half.relates(f[y], f[x]) && half.relates(g[y], g[x]))
            .collect();
        assert_eq!(j.c.rel().pairs(), expect);
        assert!(j.c.is_strict());
    }

    #[test]
    fn join_length_arithmetic() {
        let a = random_digraph(2, 0).unwrap();
        let b = random_digraph(3, 1).unwrap();
        assert_eq!(digraph_join(&a, &b).unwrap().c.path().length(), 11);
    }

    #[test]
    fn join_rejects_loose_inputs() {
        let id = Digraph::new(canonical_path(1), Rel::identity(path(1))).unwrap();
        assert!(matches!(digraph_join(&id, &id), Err(crate::Error::Domain(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn connectivity_matches_oracle(len in 0usize..=3, bits in any::<u16>()) {
            let k = len + 1;
            let pairs: Vec<(usize, usize)> = (0..k * k).filter(|i| bits >> (i % 16) & 1 == 1).map(|i| (i / k, i % k)).collect();
            let rel = digraph_of(len, &pairs);
            prop_assert_eq!(pairs_connected(&rel, ProductMode::Canonical), connected_oracle(&rel, false));
            prop_assert_eq!(is_strictly_connected(&rel), connected_oracle(&rel, true));
        }

        #[test]
        fn joins_stay_strict(m in 0usize..=4, n in 0usize..=4, s1 in any::<u64>(), s2 in any::<u64>()) {
            let (a, b) = (random_digraph(m, s1).unwrap(), random_digraph(n, s2).unwrap());
            let j = digraph_join(&a, &b).unwrap();
            prop_assert!(j.c.is_strict());
            let pa = compose(&j.f.inverse(), &compose(a.rel(), &j.f).unwrap()).unwrap();
            let pb = compose(&j.g.inverse(), &compose(b.rel(), &j.g).unwrap()).unwrap();
            prop_assert!(j.c.rel().is_subset(&pa).unwrap() && j.c.rel().is_subset(&pb).unwrap());
        }

        #[test]
        fn strictify_is_strict(len in 0usize..=3, seed in any::<u64>()) {
            let d = random_digraph(len, seed).unwrap();
            let s = strictify(&d).unwrap();
            prop_assert!(s.is_strict());
        }
    }
}
