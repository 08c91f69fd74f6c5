use serde::{Deserialize, Serialize};

use super::{classify, e, path_fn, segments, turning_points, ClassTag};
use crate::error::{domain, internal, Error, Result};
use crate::limits::{max_vertices, MAX_RELATION_CELLS};
use crate::rel::{check_morphism, compose_all, Rel};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    pub rel: Rel,
    pub tag: ClassTag,
}

/// Factors written outermost first, so `factors[0] ∘ factors[1] ∘ ...` is the input.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PrimeFactorization {
    pub factors: Vec<Factor>,
}

impl PrimeFactorization {
    /// Composite of all factors, or `None` for the empty factorization.
    pub fn recompose(&self) -> Option<Result<Rel>> {
        if self.factors.is_empty() {
            return None;
        }
        let rels: Vec<Rel> = self.factors.iter().map(|f| f.rel.clone()).collect();
        Some(compose_all(&rels))
    }
}

/// A function between canonical paths, as values plus codomain length.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct Fun {
    values: Vec<usize>,
    cod: usize,
}

impl Fun {
    fn dom(&self) -> usize {
        self.values.len() - 1
    }

    fn is_identity(&self) -> bool {
        self.cod == self.dom() && self.values.iter().enumerate().all(|(i, &v)| i == v)
    }

    fn is_reversal(&self) -> bool {
        self.cod == self.dom() && self.values.iter().enumerate().all(|(i, &v)| v == self.cod - i)
    }

    fn image(&self, (a, b): (usize, usize)) -> (usize, usize) {
        let (x, y) = (self.values[a], self.values[b]);
        (x.min(y), x.max(y))
    }

    /// Vertex of segment `[a, b]` (monotone there) taking value `v`.
    fn lift_in(&self, (a, b): (usize, usize), v: usize) -> usize {
        (a..=b)
            .find(|&q| self.values[q] == v)
            .expect("value lies in the segment image")
    }
}

/// Decomposes a surjective edge-preserving function between paths into
/// simple, hook and proper-snake factors.
///
/// Ties are broken by the smallest domain index: the first collapsed fiber
/// edge, the first foldable segment. Reversal isomorphisms are absorbed into a
/// neighbouring factor; a lone non-identity isomorphism is returned as a single
/// factor tagged `Isomorphism`.
pub fn decompose_in_f(f: &Rel) -> Result<PrimeFactorization> {
    let c = f.to_canonical_paths()?;
    let Some(values) = c.as_function() else {
        return domain("decomposition in F needs a function");
    };
    let report = check_morphism(&c);
    if !(report.surjective && report.edge_preserving) {
        return domain("decomposition in F needs a surjective edge-preserving function");
    }
    let funs = absorb_isomorphisms(split(Fun {
        values,
        cod: e(c.cod()),
    }));
    // every factor becomes a dense relation; refuse chains that would not fit
    let total: u64 = funs.iter().map(|f| f.values.len() as u64).sum();
    let cells: u64 = funs.iter().map(|f| f.values.len() as u64 * (f.cod as u64 + 1)).sum();
    if total > max_vertices() || cells > MAX_RELATION_CELLS {
        return Err(Error::Size {
            level: 0,
            vertices: total,
            limit: max_vertices(),
        });
    }
    let mut factors = Vec::with_capacity(funs.len());
    for fun in funs {
        let rel = path_fn(fun.dom(), fun.cod, &fun.values);
        let tag = classify(&rel)?.tag;
        factors.push(Factor { rel, tag });
    }
    let out = PrimeFactorization { factors };
    let lone_iso = out.factors.len() == 1 && out.factors[0].tag == ClassTag::Isomorphism;
    if !lone_iso
        && out
            .factors
            .iter()
            .any(|f| !matches!(f.tag, ClassTag::Simple | ClassTag::Hook | ClassTag::ProperSnake))
    {
        return internal("decomposition produced a non-prime factor");
    }
    match out.recompose() {
        None if c == Rel::identity(c.dom().clone()) => Ok(out),
        Some(Ok(r)) if r == c => Ok(out),
        _ => internal("decomposition does not recompose to its input"),
    }
}

fn split(f: Fun) -> Vec<Fun> {
    let n = f.dom();
    if let Some(i) = (0..n).find(|&i| f.values[i] == f.values[i + 1]) {
        let q = Fun {
            values: (0..=n).map(|k| if k <= i { k } else { k - 1 }).collect(),
            cod: n - 1,
        };
        let mut rest = f.values.clone();
        rest.remove(i + 1);
        let mut out = split(Fun {
            values: rest,
            cod: f.cod,
        });
        out.push(q);
        return out;
    }
    match turning_points(&f.values).len() {
        0 if f.is_identity() => vec![],
        0 | 1 => vec![f],
        2 if is_proper_fn(&f) => vec![f],
        2 => {
            let (g, h) = split_improper_snake(&f);
            vec![g, h]
        }
        _ => {
            let (g, h) = split_higher(&f);
            let mut out = split(g);
            out.extend(split(h));
            out
        }
    }
}

/// A function is proper when the preimage of the codomain ends is exactly the domain ends.
fn is_proper_fn(f: &Fun) -> bool {
    let n = f.dom();
    (0..=n).all(|q| {
        let at_end = f.values[q] == 0 || f.values[q] == f.cod;
        at_end == (q == 0 || q == n)
    })
}

/// Splits off a snake at the first segment whose image sits inside both neighbours.
fn split_higher(f: &Fun) -> (Fun, Fun) {
    let segs = segments(&f.values);
    let t = segs.len() - 1;
    let inside = |a: (usize, usize), b: (usize, usize)| b.0 <= a.0 && a.1 <= b.1;
    let k = (1..t)
        .find(|&k| {
            let mid = f.image(segs[k]);
            inside(mid, f.image(segs[k - 1])) && inside(mid, f.image(segs[k + 1]))
        })
        .expect("some segment is covered by both neighbours");
    let (ak, bk) = segs[k];
    let mid = f.image(segs[k]);
    let next = segs[k + 1];
    let c = (next.0..=next.1)
        .take_while(|&q| mid.0 <= f.values[q] && f.values[q] <= mid.1)
        .last()
        .expect("segment k+1 starts inside the image of segment k");
    debug_assert!(c > bk);
    let width = c - ak;
    let n = f.dom();
    let idx = |q: usize| {
        if q < ak {
            q
        } else if q <= c {
            ak
        } else {
            q - width
        }
    };
    let r = f.values[ak];
    let g_values: Vec<usize> = (0..=n - width)
        .map(|v| {
            if v < ak {
                f.values[v]
            } else if v == ak {
                r
            } else {
                f.values[v + width]
            }
        })
        .collect();
    let h_values: Vec<usize> = (0..=n)
        .map(|q| {
            if q <= ak || q >= c {
                idx(q)
            } else {
                f.lift_in(segs[k - 1], f.values[q])
            }
        })
        .collect();
    (
        Fun {
            values: g_values,
            cod: f.cod,
        },
        Fun {
            values: h_values,
            cod: n - width,
        },
    )
}

/// An improper snake factors as a hook restricted to two segments after a hook
/// folding the third segment onto the middle one.
fn split_improper_snake(f: &Fun) -> (Fun, Fun) {
    let segs = segments(&f.values);
    let n = f.dom();
    let covers = |s: (usize, usize)| f.image(s) == (0, f.cod);
    if covers(segs[0]) || covers(segs[1]) {
        let b1 = segs[1].1;
        let h: Vec<usize> = (0..=n)
            .map(|q| if q <= b1 { q } else { f.lift_in(segs[1], f.values[q]) })
            .collect();
        let g = f.values[..=b1].to_vec();
        (Fun { values: g, cod: f.cod }, Fun { values: h, cod: b1 })
    } else {
        let a1 = segs[1].0;
        let h: Vec<usize> = (0..=n)
            .map(|q| {
                if q >= a1 {
                    q - a1
                } else {
                    f.lift_in(segs[1], f.values[q]) - a1
                }
            })
            .collect();
        let g = f.values[a1..].to_vec();
        (Fun { values: g, cod: f.cod }, Fun { values: h, cod: n - a1 })
    }
}

/// Drops identities and folds reversals into a neighbour, inner neighbour first.
fn absorb_isomorphisms(mut funs: Vec<Fun>) -> Vec<Fun> {
    funs.retain(|f| !f.is_identity());
    while funs.len() > 1 {
        let Some(i) = funs.iter().position(Fun::is_reversal) else {
            break;
        };
        let rev = funs.remove(i);
        if i < funs.len() {
            let inner = &mut funs[i];
            for v in inner.values.iter_mut() {
                *v = rev.values[*v];
            }
        } else {
            let outer = &mut funs[i - 1];
            outer.values = rev.values.iter().map(|&x| outer.values[x]).collect();
        }
        funs.retain(|f| !f.is_identity());
    }
    funs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::{make_simple, path, SimpleVariant};
    use crate::rel::compose;

    fn tags(p: &PrimeFactorization) -> Vec<ClassTag> {
        p.factors.iter().map(|f| f.tag).collect()
    }

    #[test]
    fn identity_has_no_factors() {
        let d = decompose_in_f(&Rel::identity(path(3))).unwrap();
        assert!(d.factors.is_empty());
    }

    #[test]
    fn lone_reversal() {
        let d = decompose_in_f(&path_fn(2, 2, &[2, 1, 0])).unwrap();
        assert_eq!(tags(&d), vec![ClassTag::Isomorphism]);
    }

    #[test]
    fn two_simples() {
        let a = make_simple(2, 1, SimpleVariant::Weak).unwrap();
        let b = make_simple(1, 0, SimpleVariant::Weak).unwrap();
        let f = compose(&b, &a).unwrap();
        let d = decompose_in_f(&f).unwrap();
        assert_eq!(tags(&d), vec![ClassTag::Simple, ClassTag::Simple]);
        assert_eq!(d.recompose().unwrap().unwrap(), f);
    }

    #[test]
    fn three_turns() {
        // two hooks and a turn glued end to end
        let f = path_fn(7, 2, &[0, 1, 2, 1, 0, 1, 2, 1]);
        let d = decompose_in_f(&f).unwrap();
        assert!(d
            .factors
            .iter()
            .all(|x| matches!(x.tag, ClassTag::Hook | ClassTag::ProperSnake)));
        assert_eq!(d.recompose().unwrap().unwrap(), f);
    }

    #[test]
    fn improper_snakes_split_into_hooks() {
        for values in [vec![0, 1, 2, 1, 2], vec![1, 0, 1, 2, 1], vec![1, 2, 1, 0, 1, 2]] {
            let n = values.len() - 1;
            let cod = *values.iter().max().unwrap();
            let f = path_fn(n, cod, &values);
            let d = decompose_in_f(&f).unwrap();
            assert_eq!(tags(&d), vec![ClassTag::Hook, ClassTag::Hook], "{values:?}");
            assert_eq!(d.recompose().unwrap().unwrap(), f);
        }
    }

    #[test]
    fn rejects_relations() {
        let r = Rel::from_images(path(2), path(1), &[vec![0], vec![0, 1], vec![1]]).unwrap();
        assert!(decompose_in_f(&r).is_err());
    }
}
