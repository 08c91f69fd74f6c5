use fixedbitset::FixedBitSet;

use super::{canon_morphism, classify, e, path, ClassTag};
use crate::error::{Error, Result};
use crate::rel::{check_morphism, compose, Rel};

/// Decides primality by searching every factorization `f = g ∘ h` through a
/// path whose length lies strictly between the codomain's and the domain's.
///
/// Factorizations through paths of the same length as either end force that
/// factor to be an isomorphism, so nothing outside this range can refute
/// primality. Intermediate lengths above `bound` are not searched; if any were
/// skipped and no factorization turned up the result is `Inconclusive`.
pub fn is_prime_bruteforce(f: &Rel, bound: usize) -> Result<bool> {
    let f = canon_morphism(f)?;
    if classify(&f)?.tag == ClassTag::Isomorphism {
        return Ok(false);
    }
    let (lo, hi) = (e(f.cod()), e(f.dom()));
    for k in lo + 1..hi {
        if k > bound {
            return Err(Error::Inconclusive {
                bound,
                what: format!("intermediate paths of length {k}..{} not searched", hi - 1),
            });
        }
        if factors_through(&f, k) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Cliques of `P_k` indexed as in the clique path: `2i ↦ {i}`, `2i+1 ↦ {i, i+1}`.
fn clique(c: usize) -> (usize, usize) {
    (c / 2, c.div_ceil(2))
}

fn factors_through(f: &Rel, k: usize) -> bool {
    let n = e(f.dom());
    let mut h = Vec::with_capacity(n + 1);
    search_h(f, k, n, &mut h)
}

fn search_h(f: &Rel, k: usize, n: usize, h: &mut Vec<usize>) -> bool {
    if h.len() == n + 1 {
        return try_h(f, k, h);
    }
    for c in 0..=2 * k {
        if let Some(&prev) = h.last() {
            let (a, b) = (clique(prev), clique(c));
            if a.1.max(b.1) - a.0.min(b.0) > 1 {
                continue;
            }
        }
        h.push(c);
        if search_h(f, k, n, h) {
            return true;
        }
        h.pop();
    }
    false
}

fn try_h(f: &Rel, k: usize, h: &[usize]) -> bool {
    let mut singled = FixedBitSet::with_capacity(k + 1);
    for &c in h {
        if c % 2 == 0 {
            singled.insert(c / 2);
        }
    }
    if singled.count_ones(..) != k + 1 {
        return false;
    }
    // candidate images of each intermediate vertex under g
    let width = f.cod().len();
    let mut allowed = vec![full(width); k + 1];
    for (x, &c) in h.iter().enumerate() {
        let (a, b) = clique(c);
        for y in a..=b {
            allowed[y].intersect_with(f.col(x));
        }
    }
    if allowed.iter().any(|s| s.is_clear()) {
        return false;
    }
    let options: Vec<Vec<Vec<usize>>> = allowed.iter().map(nonempty_subsets).collect();
    let mut choice = vec![0usize; k + 1];
    loop {
        let images: Vec<Vec<usize>> = (0..=k).map(|y| options[y][choice[y]].clone()).collect();
        if accepts(f, k, h, &images) {
            return true;
        }
        let mut i = 0;
        loop {
            if i > k {
                return false;
            }
            choice[i] += 1;
            if choice[i] < options[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

fn accepts(f: &Rel, k: usize, h: &[usize], g_images: &[Vec<usize>]) -> bool {
    let mid = path(k);
    let h_images: Vec<Vec<usize>> = h
        .iter()
        .map(|&c| {
            let (a, b) = clique(c);
            (a..=b).collect()
        })
        .collect();
    let h_rel = Rel::from_images(f.dom().clone(), mid.clone(), &h_images).expect("in range");
    let g_rel = Rel::from_images(mid, f.cod().clone(), g_images).expect("in range");
    check_morphism(&h_rel).is_morphism()
        && check_morphism(&g_rel).is_morphism()
        && compose(&g_rel, &h_rel).is_ok_and(|c| c == *f)
}

fn full(width: usize) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(width);
    s.insert_range(..);
    s
}

fn nonempty_subsets(s: &FixedBitSet) -> Vec<Vec<usize>> {
    let members: Vec<usize> = s.ones().collect();
    (1u32..1 << members.len())
        .map(|mask| {
            members
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &v)| v)
                .collect()
        })
        .collect()
}
