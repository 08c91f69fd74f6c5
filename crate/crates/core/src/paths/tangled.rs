use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::path;
use crate::error::{internal, Error, Result};
use crate::graph::Path;
use crate::limits::max_vertices;
use crate::rel::{check_morphism, is_edge_witnessing, is_tangled, Rel};

/// Image intervals `(low, high)` per domain vertex of a path relation.
type Intervals = Vec<(usize, usize)>;

/// Domain size of the recursive construction onto `P_n`, saturating.
pub fn tangled_size(n: usize) -> u64 {
    let mut sizes: Vec<u64> = vec![1, 3];
    for k in 2..=n {
        let v = sizes[k - 1]
            .saturating_mul(2)
            .saturating_add(sizes[k - 2])
            .saturating_add(2);
        sizes.push(v);
    }
    sizes[n]
}

/// A tangled morphism onto `target`, built by gluing tangled pieces onto
/// `P_n` minus an end, the interior, and `P_n` minus the other end with two
/// fresh vertices.
///
/// The seed decides, level by level, which way round each recursive piece is
/// laid down before it is oriented to meet its end condition; the output is
/// re-validated before it is returned.
pub fn build_tangled(target: &Path, seed: u64) -> Result<Rel> {
    build_tangled_capped(target, seed, max_vertices())
}

/// [`build_tangled`] with an explicit vertex cap instead of the environment's.
pub fn build_tangled_capped(target: &Path, seed: u64, limit: u64) -> Result<Rel> {
    let n = target.length();
    let size = tangled_size(n);
    if size > limit {
        return Err(Error::Size {
            level: 0,
            vertices: size,
            limit,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut memo = HashMap::new();
    let iv = build(n, &mut rng, &mut memo);
    let images: Vec<Vec<usize>> = iv.iter().map(|&(a, b)| (a..=b).collect()).collect();
    let r = Rel::from_images(path(images.len() - 1), path(n), &images)?;
    if !check_morphism(&r).is_morphism() || !is_tangled(&r)? || !is_edge_witnessing(&r) {
        return internal(format!("tangled construction onto P_{n} failed validation"));
    }
    // express the result over the caller's labelling of the target
    let order = target.order_witness();
    let relabelled: Vec<Vec<usize>> = iv
        .iter()
        .map(|&(a, b)| (a..=b).map(|k| order[k]).collect())
        .collect();
    Rel::from_images(path(images.len() - 1), target.graph().clone(), &relabelled)
}

fn build(n: usize, rng: &mut ChaCha8Rng, memo: &mut HashMap<(usize, bool), Intervals>) -> Intervals {
    let flip: bool = rng.gen();
    if let Some(hit) = memo.get(&(n, flip)) {
        return hit.clone();
    }
    let mut out = match n {
        0 => vec![(0, 0)],
        1 => vec![(0, 0), (0, 1), (1, 1)],
        _ => {
            let shift = |iv: Intervals, by: usize| -> Intervals {
                iv.into_iter().map(|(a, b)| (a + by, b + by)).collect()
            };
            let q = orient(build(n - 1, rng, memo), n - 1, false);
            let r = orient(shift(build(n - 2, rng, memo), 1), n - 1, true);
            let r = orient_last(r, 1);
            let q2 = orient(shift(build(n - 1, rng, memo), 1), 1, true);
            let mut s = q;
            s.push((n - 1, n));
            s.extend(r);
            s.push((0, 1));
            s.extend(q2);
            s
        }
    };
    if flip {
        out.reverse();
    }
    memo.insert((n, flip), out.clone());
    out
}

/// Orients a piece so that its first (`at_start`) or last vertex maps exactly
/// to `{want}`, padding with one vertex when an end only touches `want`.
fn orient(mut iv: Intervals, want: usize, at_start: bool) -> Intervals {
    let is = |x: (usize, usize)| x == (want, want);
    let (first, last) = (iv[0], iv[iv.len() - 1]);
    let ok_here = if at_start { is(first) } else { is(last) };
    if ok_here {
        return iv;
    }
    let ok_there = if at_start { is(last) } else { is(first) };
    if ok_there {
        iv.reverse();
        return iv;
    }
    // the end touches `want` through an edge; extend by one vertex mapped to it
    let end = if at_start { first } else { last };
    debug_assert!(end.0 <= want && want <= end.1);
    if at_start {
        iv.insert(0, (want, want));
    } else {
        iv.push((want, want));
    }
    iv
}

/// Like [`orient`] for the last vertex, keeping the first vertex where it is.
fn orient_last(mut iv: Intervals, want: usize) -> Intervals {
    if iv[iv.len() - 1] != (want, want) {
        iv.push((want, want));
    }
    iv
}

#[cfg(test)]
pub(crate) fn relation_of(iv: &[(usize, usize)], n: usize) -> Rel {
    let images: Vec<Vec<usize>> = iv.iter().map(|&(a, b)| (a..=b).collect()).collect();
    Rel::from_images(path(iv.len() - 1), path(n), &images).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::canonical_path;
    use crate::rel::is_tangled_literal;

    #[test]
    fn base_cases() {
        let t0 = build_tangled(&canonical_path(0), 1).unwrap();
        assert_eq!(t0, Rel::identity(path(0)));
        let t1 = build_tangled(&canonical_path(1), 1).unwrap();
        assert_eq!(t1.dom().len(), 3);
        assert!(is_tangled_literal(&t1).unwrap());
    }

    #[test]
    fn sizes_follow_the_recursion() {
        let expect = [1u64, 3, 9, 23, 57, 139, 337, 815, 1969];
        for (n, &size) in expect.iter().enumerate() {
            assert_eq!(tangled_size(n), size);
        }
        for n in 0..=5 {
            let t = build_tangled(&canonical_path(n), 7).unwrap();
            assert_eq!(t.dom().len() as u64, tangled_size(n));
            assert!(check_morphism(&t).end_preserving);
        }
    }

    #[test]
    fn literal_check_agrees_on_small_outputs() {
        for n in 0..=3 {
            for seed in 0..4 {
                let t = build_tangled(&canonical_path(n), seed).unwrap();
                assert!(is_tangled_literal(&t).unwrap());
            }
        }
    }

    /// Smallest domain of a tangled morphism onto P_1, by trying every
    /// interval-valued relation from P_k for growing k.
    fn smallest_tangled_onto_edge() -> usize {
        let choices = [(0, 0), (1, 1), (0, 1)];
        for k in 0.. {
            let total = 3usize.pow(k as u32 + 1);
            for code in 0..total {
                let mut c = code;
                let iv: Vec<(usize, usize)> = (0..=k)
                    .map(|_| {
                        let x = choices[c % 3];
                        c /= 3;
                        x
                    })
                    .collect();
                let r = relation_of(&iv, 1);
                if check_morphism(&r).is_morphism() && is_tangled_literal(&r).unwrap() {
                    return k + 1;
                }
            }
        }
        unreachable!()
    }

    #[test]
    fn edge_target_is_minimal() {
        assert_eq!(smallest_tangled_onto_edge(), 3);
        assert_eq!(build_tangled(&canonical_path(1), 0).unwrap().dom().len(), 3);
    }

    #[test]
    fn size_guard() {
        let err = build_tangled_capped(&canonical_path(6), 0, 100).unwrap_err();
        assert!(matches!(err, Error::Size { vertices: 337, limit: 100, .. }));
    }

    #[test]
    fn padding_reaches_the_wanted_end() {
        let iv = vec![(0, 1), (1, 1)];
        assert_eq!(orient(iv.clone(), 0, true), vec![(0, 0), (0, 1), (1, 1)]);
        assert_eq!(orient(iv, 1, false), vec![(0, 1), (1, 1)]);
    }
}
