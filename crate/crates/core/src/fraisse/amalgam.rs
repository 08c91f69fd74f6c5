use std::collections::{HashMap, VecDeque};

use crate::error::{domain, internal, Error, Result};
use crate::graph::{clique_path, Path};
use crate::limits::max_vertices;
use crate::paths::path;
use crate::rel::{check_morphism, compose, same_graph, Rel};

/// Functions `u: S → Q` and `v: S → R` with `f ∘ u = g ∘ v`.
#[derive(Clone, Debug, PartialEq)]
pub struct Amalgam {
    pub s: Path,
    pub u: Rel,
    pub v: Rel,
}

type Mask = u128;

fn low_bits(n: usize) -> Mask {
    if n >= 128 {
        Mask::MAX
    } else {
        (1 << n) - 1
    }
}

fn inconclusive<T>(bound: usize, what: &str) -> Result<T> {
    Err(Error::Inconclusive {
        bound,
        what: what.into(),
    })
}

/// Shortest walk in the pullback of two functions between canonical paths,
/// stepping to pairs adjacent in both coordinates, whose coordinates cover
/// both domains. With `padded`, the first and last vertex of each domain are
/// padding: the walk runs from padding pair to padding pair, using the other
/// padding vertex on each side at its far end, and touches no padding in
/// between.
fn search(fv: &[usize], gv: &[usize], max_edges: usize, bound: usize, padded: bool) -> Result<Vec<(usize, usize)>> {
    let (nq, nr) = (fv.len(), gv.len());
    if nq > 128 || nr > 128 {
        return inconclusive(bound, "paths longer than 128 vertices are outside the search");
    }
    let nodes: Vec<(usize, usize)> = (0..nq)
        .flat_map(|q| (0..nr).map(move |r| (q, r)))
        .filter(|&(q, r)| fv[q] == gv[r])
        .collect();
    let near = |a: usize, b: usize| a.abs_diff(b) <= 1;
    let adj: Vec<Vec<usize>> = nodes
        .iter()
        .map(|&(q, r)| {
            (0..nodes.len())
                .filter(|&j| nodes[j] != (q, r) && near(q, nodes[j].0) && near(r, nodes[j].1))
                .collect()
        })
        .collect();
    let is_pad = |k: usize| {
        let (q, r) = nodes[k];
        padded && (q == 0 || q == nq - 1) && (r == 0 || r == nr - 1)
    };
    let touches_pad = |k: usize| {
        let (q, r) = nodes[k];
        padded && (q == 0 || q == nq - 1 || r == 0 || r == nr - 1)
    };
    let (full_q, full_r) = if padded {
        (low_bits(nq - 1) & !1, low_bits(nr - 1) & !1)
    } else {
        (low_bits(nq), low_bits(nr))
    };
    let bit = |i: usize| -> Mask { 1 << i };

    // node, covered Q, covered R, starting node
    type State = (usize, Mask, Mask, usize);
    let mut parent: HashMap<State, Option<State>> = HashMap::new();
    let mut queue: VecDeque<(State, usize)> = VecDeque::new();
    for k in 0..nodes.len() {
        let s = match padded {
            false => (k, bit(nodes[k].0), bit(nodes[k].1), k),
            true if is_pad(k) => (k, 0, 0, k),
            true => continue,
        };
        parent.insert(s, None);
        queue.push_back((s, 0));
    }
    let cap = max_vertices() as usize;
    while let Some((s, len)) = queue.pop_front() {
        let (k, mq, mr, start) = s;
        let done = mq == full_q
            && mr == full_r
            && (!padded || (len > 0 && is_pad(k) && nodes[k].0 != nodes[start].0 && nodes[k].1 != nodes[start].1));
        if done {
            let mut walk = vec![nodes[k]];
            let mut cur = s;
            while let Some(Some(prev)) = parent.get(&cur) {
                walk.push(nodes[prev.0]);
                cur = *prev;
            }
            walk.reverse();
            return Ok(walk);
        }
        if len >= max_edges || (padded && len > 0 && is_pad(k)) {
            continue;
        }
        for &j in &adj[k] {
            if touches_pad(j) && !is_pad(j) {
                continue;
            }
            let next = if is_pad(j) {
                (j, mq, mr, start)
            } else {
                (j, mq | bit(nodes[j].0), mr | bit(nodes[j].1), start)
            };
            if !parent.contains_key(&next) {
                if parent.len() >= cap {
                    return inconclusive(bound, "search state budget exhausted");
                }
                parent.insert(next, Some(s));
                queue.push_back((next, len + 1));
            }
        }
    }
    inconclusive(bound, "no amalgamating walk within the bound")
}

/// Function values after adding a vertex past each end of the domain and of
/// the codomain `P_{np-1}`; each domain end goes to the new vertex next to its
/// image (first end low, last end high when the codomain is a point).
fn pad_values(vals: &[usize], np: usize) -> Vec<usize> {
    let side = |v: usize, low_default: bool| match np {
        1 if low_default => 0,
        1 => np + 1,
        _ if v == 0 => 0,
        _ => np + 1,
    };
    let mut out = vec![side(vals[0], true)];
    out.extend(vals.iter().map(|&x| x + 1));
    out.push(side(vals[vals.len() - 1], false));
    out
}

/// Searches for an amalgam of `f: Q → P` and `g: R → P` over paths `S` with
/// at most `bound` edges. Failure is always inconclusive.
///
/// With `end_preserving`, both inputs must send ends onto ends; each graph
/// gets a fresh vertex past each end, the search runs between the new end
/// pairs, and those are stripped afterwards.
pub fn amalgamate_bruteforce(f: &Rel, g: &Rel, bound: usize, end_preserving: bool) -> Result<Amalgam> {
    if !same_graph(f.cod(), g.cod()) {
        return Err(Error::Mismatch("the two functions have different codomains".into()));
    }
    for (name, h) in [("f", f), ("g", g)] {
        let r = check_morphism(h);
        if !(r.is_function && r.surjective && r.edge_preserving) {
            return domain(format!("{name} must be a surjective edge-preserving function"));
        }
        if end_preserving && !r.end_preserving {
            return domain(format!("{name} is not end-preserving"));
        }
    }
    if f == g {
        return Ok(Amalgam {
            s: Path::new(f.dom().clone())?,
            u: Rel::identity(f.dom().clone()),
            v: Rel::identity(g.dom().clone()),
        });
    }
    let fv = f.to_canonical_paths()?.as_function().expect("checked");
    let gv = g.to_canonical_paths()?.as_function().expect("checked");
    let walk: Vec<(usize, usize)> = if end_preserving {
        let np = f.cod().len();
        let w = search(&pad_values(&fv, np), &pad_values(&gv, np), bound + 2, bound, true)?;
        w[1..w.len() - 1].iter().map(|&(q, r)| (q - 1, r - 1)).collect()
    } else {
        search(&fv, &gv, bound, bound, false)?
    };
    let s = path(walk.len() - 1);
    let (oq, or) = (f.dom().path_order().unwrap(), g.dom().path_order().unwrap());
    let u = Rel::from_function(s.clone(), f.dom().clone(), &walk.iter().map(|&(q, _)| oq[q]).collect::<Vec<_>>())?;
    let v = Rel::from_function(s.clone(), g.dom().clone(), &walk.iter().map(|&(_, r)| or[r]).collect::<Vec<_>>())?;
    let (ru, rv) = (check_morphism(&u), check_morphism(&v));
    if !(ru.is_morphism() && rv.is_morphism()) || compose(f, &u)? != compose(g, &v)? {
        return internal("amalgam failed verification");
    }
    if end_preserving && !(ru.end_preserving && rv.end_preserving) {
        return internal("padded amalgam is not end-preserving");
    }
    Ok(Amalgam { s: Path::new(s)?, u, v })
}

/// Morphisms `⊐, ⊐̄` from `H` to the relation's path with `rel ⊆ ⊐ ∘ ⊐̄⁻¹`
/// and `=_H ⊆ ⊐⁻¹ ∘ rel ∘ ⊐̄`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubfactorWitness {
    pub h: Path,
    pub sq: Rel,
    pub sq_bar: Rel,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Subfactorisability {
    Witness(SubfactorWitness),
    /// No witness exists at any length; the reason says which requirement fails.
    Refuted(String),
    /// A witness exists but the one found is longer than the bound.
    Inconclusive { bound: usize, found: usize },
}

/// Decides whether `rel` on a path `Q` has a witness pair, returning one when
/// its walk fits in `bound` edges.
///
/// A witness is a walk through pairs of cliques `(A, B)` of `Q` meeting `rel`,
/// with consecutive `A`s (and `B`s) spanning a clique. It needs every singleton
/// on both sides and every pair of `rel` inside some `A × B`; such a walk
/// exists exactly when one component of the state graph supplies all of them.
pub fn subfactorisability_bruteforce(rel: &Rel, bound: usize) -> Result<Subfactorisability> {
    if !same_graph(rel.dom(), rel.cod()) {
        return domain("relation must be on a single path");
    }
    let q = Path::new(rel.dom().clone())?;
    let report = check_morphism(rel);
    if !report.co_surjective {
        return Ok(Subfactorisability::Refuted("relation is not co-surjective".into()));
    }
    if !report.surjective {
        return Ok(Subfactorisability::Refuted("relation is not surjective".into()));
    }
    let g = rel.dom();
    let cliques = clique_path(&q).cliques;
    let n = g.len();
    let pairs = rel.pairs();
    let states: Vec<(usize, usize)> = (0..cliques.len())
        .flat_map(|a| (0..cliques.len()).map(move |b| (a, b)))
        .filter(|&(a, b)| cliques[a].iter().any(|&y| cliques[b].iter().any(|&x| rel.relates(y, x))))
        .collect();
    let union_clique = |a: &[usize], b: &[usize]| a.iter().all(|&u| b.iter().all(|&w| g.adjacent(u, w)));
    let adj: Vec<Vec<usize>> = states
        .iter()
        .map(|&(a, b)| {
            (0..states.len())
                .filter(|&j| {
                    let (a2, b2) = states[j];
                    (a, b) != (a2, b2) && union_clique(&cliques[a], &cliques[a2]) && union_clique(&cliques[b], &cliques[b2])
                })
                .collect()
        })
        .collect();
    // requirements: A = {v}, then B = {v}, then each pair of rel
    let n_req = 2 * n + pairs.len();
    let covers: Vec<Vec<usize>> = states
        .iter()
        .map(|&(a, b)| {
            let (ca, cb) = (&cliques[a], &cliques[b]);
            let mut out = Vec::new();
            if ca.len() == 1 {
                out.push(ca[0]);
            }
            if cb.len() == 1 {
                out.push(n + cb[0]);
            }
            for (i, &(y, x)) in pairs.iter().enumerate() {
                if ca.contains(&y) && cb.contains(&x) {
                    out.push(2 * n + i);
                }
            }
            out
        })
        .collect();

    let mut comp = vec![usize::MAX; states.len()];
    let mut chosen = None;
    for root in 0..states.len() {
        if comp[root] != usize::MAX {
            continue;
        }
        let mut members = vec![root];
        comp[root] = root;
        let mut i = 0;
        while i < members.len() {
            for &j in &adj[members[i]] {
                if comp[j] == usize::MAX {
                    comp[j] = root;
                    members.push(j);
                }
            }
            i += 1;
        }
        let mut covered = vec![false; n_req];
        for &m in &members {
            for &c in &covers[m] {
                covered[c] = true;
            }
        }
        if covered.iter().all(|&c| c) {
            chosen = Some(members);
            break;
        }
    }
    let Some(members) = chosen else {
        return Ok(Subfactorisability::Refuted(
            "no connected family of clique pairs supplies every singleton and every pair".into(),
        ));
    };

    let walk = if n_req < 64 && members.len() << n_req <= 1 << 22 {
        shortest_tour(&members, &adj, &covers, n_req)
    } else {
        greedy_tour(&members, &adj, &covers, n_req)
    };
    if walk.len() - 1 > bound {
        return Ok(Subfactorisability::Inconclusive {
            bound,
            found: walk.len() - 1,
        });
    }
    let h = path(walk.len() - 1);
    let a_images: Vec<Vec<usize>> = walk.iter().map(|&k| cliques[states[k].0].clone()).collect();
    let b_images: Vec<Vec<usize>> = walk.iter().map(|&k| cliques[states[k].1].clone()).collect();
    let sq = Rel::from_images(h.clone(), g.clone(), &a_images)?;
    let sq_bar = Rel::from_images(h.clone(), g.clone(), &b_images)?;
    let w = SubfactorWitness {
        h: Path::new(h)?,
        sq,
        sq_bar,
    };
    if !verify_witness(rel, &w)? {
        return internal("subfactor witness failed verification");
    }
    Ok(Subfactorisability::Witness(w))
}

fn req_mask(cover: &[usize]) -> u64 {
    cover.iter().fold(0, |m, &c| m | 1 << c)
}

/// Shortest walk inside one component covering every requirement, by
/// breadth-first search over (state, covered set).
fn shortest_tour(members: &[usize], adj: &[Vec<usize>], covers: &[Vec<usize>], n_req: usize) -> Vec<usize> {
    let full = (1u64 << n_req) - 1;
    let mut parent: HashMap<(usize, u64), Option<(usize, u64)>> = HashMap::new();
    let mut queue = VecDeque::new();
    for &m in members {
        let s = (m, req_mask(&covers[m]));
        parent.insert(s, None);
        queue.push_back(s);
    }
    while let Some(s) = queue.pop_front() {
        if s.1 == full {
            let mut walk = vec![s.0];
            let mut cur = s;
            while let Some(Some(p)) = parent.get(&cur) {
                walk.push(p.0);
                cur = *p;
            }
            walk.reverse();
            return walk;
        }
        for &j in &adj[s.0] {
            let next = (j, s.1 | req_mask(&covers[j]));
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(next) {
                e.insert(Some(s));
                queue.push_back(next);
            }
        }
    }
    unreachable!("the component covers every requirement")
}

/// Starts where the most is covered, then repeatedly walks to the nearest
/// state adding something new.
fn greedy_tour(members: &[usize], adj: &[Vec<usize>], covers: &[Vec<usize>], n_req: usize) -> Vec<usize> {
    let mut covered = vec![false; n_req];
    let mut cur = *members
        .iter()
        .max_by_key(|&&m| (covers[m].len(), std::cmp::Reverse(m)))
        .unwrap();
    let mut walk = vec![cur];
    covers[cur].iter().for_each(|&c| covered[c] = true);
    while covered.iter().any(|&c| !c) {
        let mut prev = vec![usize::MAX; adj.len()];
        prev[cur] = cur;
        let mut queue = VecDeque::from([cur]);
        let mut target = None;
        while let Some(u) = queue.pop_front() {
            if covers[u].iter().any(|&c| !covered[c]) {
                target = Some(u);
                break;
            }
            for &w in &adj[u] {
                if prev[w] == usize::MAX {
                    prev[w] = u;
                    queue.push_back(w);
                }
            }
        }
        let t = target.expect("the component covers every requirement");
        let mut leg = vec![t];
        while *leg.last().unwrap() != cur {
            leg.push(prev[*leg.last().unwrap()]);
        }
        leg.pop();
        leg.reverse();
        for &u in &leg {
            covers[u].iter().for_each(|&c| covered[c] = true);
        }
        walk.extend(leg);
        cur = t;
    }
    walk
}

/// Checks both containments and that the two relations are morphisms.
pub fn verify_witness(rel: &Rel, w: &SubfactorWitness) -> Result<bool> {
    let morphisms = check_morphism(&w.sq).is_morphism() && check_morphism(&w.sq_bar).is_morphism();
    let covers = rel.is_subset(&compose(&w.sq, &w.sq_bar.inverse())?)?;
    let loops = Rel::identity(w.h.graph().clone()).is_subset(&compose(&w.sq.inverse(), &compose(rel, &w.sq_bar)?)?)?;
    Ok(morphisms && covers && loops)
}
