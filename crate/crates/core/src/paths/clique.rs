use super::{canon_morphism, e, path};
use crate::error::Result;
use crate::graph::{clique_path, Path};
use crate::rel::Rel;

/// The induced map on clique paths, `X ↦ X^⊏`, as a surjective function.
pub fn clique_functor(r: &Rel) -> Result<Rel> {
    let r = canon_morphism(r)?;
    let (n, m) = (e(r.dom()), e(r.cod()));
    let values: Vec<usize> = (0..=2 * n)
        .map(|c| {
            let (a, b) = (c / 2, c.div_ceil(2));
            let lo = r.col(a).minimum().unwrap().min(r.col(b).minimum().unwrap());
            let hi = r.col(a).maximum().unwrap().max(r.col(b).maximum().unwrap());
            lo + hi
        })
        .collect();
    Rel::from_function(path(2 * n), path(2 * m), &values)
}

/// Membership relation from the clique path of `p` onto `p`.
pub fn membership_morphism(p: &Path) -> Rel {
    let cp = clique_path(p);
    Rel::from_images(cp.path.graph().clone(), p.graph().clone(), &cp.cliques)
        .expect("cliques are vertex sets of p")
}

/// The membership morphism of `P_k` as a chain of `k` proper simple relations,
/// outermost first. The `j`-th factor (from the inside) splits the `j`-th edge
/// into its own vertex related to both of its ends.
pub fn membership_factors(k: usize) -> Vec<Rel> {
    (1..=k)
        .map(|j| {
            let dom = k + j;
            let split = 2 * j - 1;
            let images: Vec<Vec<usize>> = (0..=dom)
                .map(|p| {
                    if p < split {
                        vec![p]
                    } else if p == split {
                        vec![split - 1, split]
                    } else {
                        vec![p - 1]
                    }
                })
                .collect();
            Rel::from_images(path(dom), path(dom - 1), &images).expect("in range")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::canonical_path;
    use crate::paths::{classify, path_fn, ClassTag};
    use crate::rel::{check_morphism, compose, compose_all};

    #[test]
    fn identity_goes_to_identity() {
        let id = Rel::identity(path(2));
        assert_eq!(clique_functor(&id).unwrap(), Rel::identity(path(4)));
    }

    #[test]
    fn membership_on_an_edge() {
        let m = membership_morphism(&canonical_path(1));
        assert_eq!(m.pairs(), vec![(0, 0), (0, 1), (1, 1), (1, 2)]);
        assert!(check_morphism(&m).is_morphism());
    }

    #[test]
    fn naturality_for_the_turn() {
        let t = path_fn(2, 1, &[0, 1, 0]);
        let left = compose(&t, &membership_morphism(&canonical_path(2))).unwrap();
        let right = compose(
            &membership_morphism(&canonical_path(1)),
            &clique_functor(&t).unwrap(),
        )
        .unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn membership_chain() {
        for k in 1..6 {
            let chain = membership_factors(k);
            for s in &chain {
                assert!(check_morphism(s).is_morphism());
                assert_eq!(check_morphism(s).proper, Some(true));
                assert_eq!(classify(s).unwrap().tag, ClassTag::NonEdgeInjective);
            }
            assert_eq!(
                compose_all(&chain).unwrap(),
                membership_morphism(&canonical_path(k))
            );
        }
    }
}
