use serde::{Deserialize, Serialize};

use super::TangledTower;
use crate::error::{domain, internal, Error, Result};
use crate::graph::{canonical_path, Path};
use crate::paths::{
    classify, clique_functor, decompose_in_f, membership_factors, membership_morphism, registry,
    ClassTag,
};
use crate::rel::{check_morphism, compose, is_tangled, same_graph, Rel};

/// One peeled factor: which construction handled it and the levels it used.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeelStep {
    pub strategy: String,
    pub tag: ClassTag,
    pub dom_len: usize,
    pub cod_len: usize,
    pub from_level: usize,
    pub to_level: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Absorbed {
    /// The level `n′` the returned relation starts from.
    pub level: usize,
    /// `m′` from level `n′` to the domain of `m`, with `m ∘ m′ ⊆ ≥^n_{n′}`.
    pub rel: Rel,
    pub steps: Vec<PeelStep>,
}

/// Pushes `m` (from a path `Q` onto level `n`) back into the tower: returns
/// `m′` from a strictly deeper level with `m ∘ m′ ⊆ ≥^n_{n′}`.
///
/// `m` is first replaced by a composite of simple, hook and snake factors: its
/// own prime decomposition when it is a function, otherwise the membership
/// chain of level `n` after `𝖥^m`, finished off by the membership morphism of
/// `Q`. Factors are peeled outermost first, each against the previous result
/// composed with the shallowest bond composite that lets the matching
/// construction succeed. The level reached is the first that works, not
/// necessarily the least possible.
pub fn subabsorb(t: &TangledTower, n: usize, m: &Rel) -> Result<Absorbed> {
    let tower = t.tower();
    let level = tower.level(n)?.clone();
    if !same_graph(m.cod(), &level) {
        return Err(Error::Mismatch(format!("relation does not land on level {n}")));
    }
    if !check_morphism(m).is_morphism() {
        return domain("subabsorb needs a co-bijective edge-preserving relation");
    }
    let q = Path::new(m.dom().clone())?;
    let canon = m.relabel(
        canonical_path(q.length()).graph().clone(),
        q.order_witness(),
        level.clone(),
        &(0..level.len()).collect::<Vec<_>>(),
    )?;

    let (factors, tail) = match canon.as_function() {
        Some(_) => (decompose_in_f(&canon)?.factors.into_iter().map(|f| f.rel).collect(), None),
        None => {
            let fm = clique_functor(&canon)?;
            let mut fs = membership_factors(level.len() - 1);
            fs.extend(decompose_in_f(&fm)?.factors.into_iter().map(|f| f.rel));
            (fs, Some(membership_morphism(&canonical_path(q.length()))))
        }
    };

    let mut x = Rel::identity(level.clone());
    let mut at = n;
    let mut steps = Vec::new();
    for (j, factor) in factors.iter().enumerate() {
        let tag = classify(factor)?.tag;
        if tag == ClassTag::Isomorphism {
            x = compose(&factor.inverse(), &x)?;
            continue;
        }
        let Some(strategy) = registry().find_for(factor) else {
            return internal(format!("factor {j} ({tag:?}) has no subfactor construction"));
        };
        let mut peeled = None;
        for to in at..=tower.depth() {
            let target = compose(&x, tower.geq(at, to)?)?;
            if to == at && !is_tangled(&target)? {
                continue;
            }
            if let Ok(mj) = strategy.subfactor(factor, &target) {
                peeled = Some((to, mj));
                break;
            }
        }
        let Some((to, mj)) = peeled else {
            return Err(Error::Depth(format!(
                "factor {j} ({tag:?}, P_{} → P_{}) could not be peeled between level {at} and level {}",
                factor.dom().len() - 1,
                factor.cod().len() - 1,
                tower.depth()
            )));
        };
        steps.push(PeelStep {
            strategy: strategy.name().to_string(),
            tag,
            dom_len: factor.dom().len() - 1,
            cod_len: factor.cod().len() - 1,
            from_level: at,
            to_level: to,
        });
        // the construction works on canonical paths; put level labels back
        x = mj.relabel(
            tower.level(to)?.clone(),
            &(0..mj.dom().len()).collect::<Vec<_>>(),
            mj.cod().clone(),
            &(0..mj.cod().len()).collect::<Vec<_>>(),
        )?;
        at = to;
    }
    if at == n {
        // nothing was peeled below level n; one more bond keeps the inclusion
        if n == tower.depth() {
            return Err(Error::Depth(format!("level {n} is the deepest, nothing lies below it")));
        }
        x = compose(&x, tower.geq(n, n + 1)?)?;
        at = n + 1;
    }
    let canon_out = match tail {
        Some(member) => compose(&member, &x)?,
        None => x,
    };
    let rel = canon_out.relabel(
        canon_out.dom().clone(),
        &(0..canon_out.dom().len()).collect::<Vec<_>>(),
        m.dom().clone(),
        &q.positions(),
    )?;
    if !check_morphism(&rel).is_morphism() {
        return internal("subabsorbed relation is not a morphism");
    }
    if !compose(m, &rel)?.is_subset(tower.geq(n, at)?)? {
        return internal("subabsorbed relation fails the inclusion");
    }
    Ok(Absorbed {
        level: at,
        rel,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::fraisse::generate_tangled_tower;
    use crate::paths::path;

    fn tower() -> TangledTower {
        generate_tangled_tower(3, 1, 2).unwrap()
    }

    #[test]
    fn identity_absorbs_into_the_bond() {
        let t = tower();
        let id = Rel::identity(t.tower().levels()[1].clone());
        let a = subabsorb(&t, 1, &id).unwrap();
        assert_eq!(a.level, 2);
        assert!(a.steps.is_empty());
        assert_eq!(a.rel, t.tower().bonds()[1]);
    }

    #[test]
    fn a_bond_absorbs_deeper() {
        let t = tower();
        let bond = t.tower().bonds()[0].clone();
        let a = subabsorb(&t, 0, &bond).unwrap();
        assert!(a.level >= 2);
        assert!(compose(&bond, &a.rel)
            .unwrap()
            .is_subset(t.tower().geq(0, a.level).unwrap())
            .unwrap());
    }

    #[test]
    fn simples_onto_level_one() {
        let t = tower();
        // P_3 → P_2 collapsing the middle edge, then the last edge
        for (values, kind) in [([0, 1, 1, 2], "simple"), ([0, 1, 2, 2], "improper-simple")] {
            let m = Rel::from_function(path(3), t.tower().levels()[1].clone(), &values).unwrap();
            let a = subabsorb(&t, 1, &m).unwrap();
            assert_eq!(a.steps.len(), 1);
            assert_eq!(a.steps[0].strategy, kind);
            assert!(a.level > 1);
        }
    }

    #[test]
    fn relabelled_domain() {
        let t = tower();
        // P_3 labelled 2-0-3-1, mapped like the simple above
        let q = crate::graph::Graph::new(4, &[(2, 0), (0, 3), (3, 1)]).unwrap();
        let mut values = vec![0; 4];
        for (i, v) in [2, 0, 3, 1].into_iter().enumerate() {
            values[v] = [0, 1, 2, 2][i];
        }
        let m = Rel::from_function(q.into(), t.tower().levels()[1].clone(), &values).unwrap();
        let a = subabsorb(&t, 1, &m).unwrap();
        assert!(compose(&m, &a.rel).unwrap().is_subset(t.tower().geq(1, a.level).unwrap()).unwrap());
    }

    #[test]
    fn depth_error_names_the_factor() {
        let t = generate_tangled_tower(1, 1, 2).unwrap();
        // a hook onto the deepest level has nothing below it to peel against
        let m = Rel::from_function(path(3), t.tower().levels()[1].clone(), &[0, 1, 2, 1]).unwrap();
        let err = subabsorb(&t, 1, &m);
        assert!(matches!(err, Err(Error::Depth(ref s)) if s.contains("factor 0")), "{err:?}");
    }

    #[test]
    fn random_functions_onto_level_one() {
        let t = tower();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut absorbed = 0;
        for _ in 0..20 {
            let len = rng.gen_range(2..=5);
            let mut v = vec![rng.gen_range(0..3usize)];
            while v.len() <= len {
                let last = *v.last().unwrap() as i64;
                let next = (last + rng.gen_range(-1..=1)).clamp(0, 2) as usize;
                v.push(next);
            }
            if (0..3).any(|k| !v.contains(&k)) {
                continue;
            }
            let m = Rel::from_function(path(len), t.tower().levels()[1].clone(), &v).unwrap();
            match subabsorb(&t, 1, &m) {
                Ok(a) => {
                    absorbed += 1;
                    assert!(compose(&m, &a.rel).unwrap().is_subset(t.tower().geq(1, a.level).unwrap()).unwrap());
                }
                Err(Error::Depth(_)) => {}
                Err(e) => panic!("{e}"),
            }
        }
        assert!(absorbed > 0);
    }
}
