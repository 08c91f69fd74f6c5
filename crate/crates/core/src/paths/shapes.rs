use serde::{Deserialize, Serialize};

use super::{canon_morphism, e, path, path_fn, turning_points};
use crate::error::{domain, Result};
use crate::rel::{check_morphism, is_edge_injective, Rel};

/// Number of length-two subpaths folded onto an edge.
pub fn turning_number(f: &Rel) -> Result<usize> {
    let c = f.to_canonical_paths()?;
    let Some(values) = c.as_function() else {
        return domain("turning number needs a function");
    };
    if !is_edge_injective(&c) {
        return domain("turning number needs an edge-injective function");
    }
    Ok(turning_points(&values).len())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SimpleVariant {
    /// The `≥ / ≤` relation, a function collapsing the edge `{m, m+1}`.
    Weak,
    /// The `> / <` subrelation.
    Strict,
}

/// Simple relation `P_{n+1} → P_n` folding at `m`.
///
/// The strict variant leaves `p_m` and `p_{m+1}` unrelated, so it is a
/// subrelation of the weak one but not itself co-surjective.
pub fn make_simple(n: usize, m: usize, variant: SimpleVariant) -> Result<Rel> {
    if m > n {
        return domain(format!("simple fold point {m} exceeds {n}"));
    }
    let mut pairs = Vec::new();
    for j in 0..=n {
        for k in 0..=n + 1 {
            let hit = match variant {
                SimpleVariant::Weak => (m >= j && j == k) || (m <= j && j + 1 == k),
                SimpleVariant::Strict => (m > j && j == k) || (m < j && j + 1 == k),
            };
            if hit {
                pairs.push((j, k));
            }
        }
    }
    Rel::from_pairs(path(n + 1), path(n), pairs)
}

/// Hook `P_{m+n} → P_n`, folding back after `p_n`.
pub fn make_hook(m: usize, n: usize) -> Result<Rel> {
    if !(1 <= m && m <= n) {
        return domain(format!("hook needs 1 ≤ m ≤ n, got m={m}, n={n}"));
    }
    let values: Vec<usize> = (0..=m + n)
        .map(|k| if k <= n { k } else { 2 * n - k })
        .collect();
    Ok(path_fn(m + n, n, &values))
}

/// Proper snake `P_{l+m+n} → P_{l-m+n}`.
pub fn make_snake(l: usize, m: usize, n: usize) -> Result<Rel> {
    if !(m >= 1 && l > m && n > m) {
        return domain(format!("snake needs l, n > m ≥ 1, got l={l}, m={m}, n={n}"));
    }
    let values: Vec<usize> = (0..=l + m + n)
        .map(|k| {
            if k <= l {
                k
            } else if k <= l + m {
                2 * l - k
            } else {
                k - 2 * m
            }
        })
        .collect();
    Ok(path_fn(l + m + n, l + n - m, &values))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassTag {
    Isomorphism,
    Simple,
    Hook,
    ProperSnake,
    ImproperSnake,
    HigherTurning,
    NonEdgeInjective,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismClass {
    pub tag: ClassTag,
    pub turning: Option<usize>,
}

pub fn classify(f: &Rel) -> Result<MorphismClass> {
    let c = canon_morphism(f)?;
    let report = check_morphism(&c);
    let Some(values) = c.as_function() else {
        return Ok(MorphismClass {
            tag: ClassTag::NonEdgeInjective,
            turning: None,
        });
    };
    if report.edge_injective {
        let t = turning_points(&values).len();
        let tag = match t {
            0 => ClassTag::Isomorphism,
            1 => ClassTag::Hook,
            2 if report.proper == Some(true) => ClassTag::ProperSnake,
            2 => ClassTag::ImproperSnake,
            _ => ClassTag::HigherTurning,
        };
        return Ok(MorphismClass {
            tag,
            turning: Some(t),
        });
    }
    let tag = if e(c.cod()) + 1 == e(c.dom()) {
        ClassTag::Simple
    } else {
        ClassTag::NonEdgeInjective
    };
    Ok(MorphismClass { tag, turning: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn turning_examples() {
        assert_eq!(turning_number(&Rel::identity(path(3))).unwrap(), 0);
        assert_eq!(turning_number(&path_fn(2, 1, &[0, 1, 0])).unwrap(), 1);
        let s = make_snake(2, 1, 2).unwrap();
        assert_eq!(s.as_function(), Some(vec![0, 1, 2, 1, 2, 3]));
        assert_eq!(turning_number(&s).unwrap(), 2);
        assert!(turning_number(&path_fn(2, 1, &[0, 0, 1])).is_err());
    }

    #[test]
    fn simple_examples() {
        let a = make_simple(1, 0, SimpleVariant::Weak).unwrap();
        assert_eq!(a.as_function(), Some(vec![0, 0, 1]));
        let b = make_simple(1, 1, SimpleVariant::Weak).unwrap();
        assert_eq!(b.as_function(), Some(vec![0, 1, 1]));
        let weak = make_simple(2, 1, SimpleVariant::Weak).unwrap();
        let strict = make_simple(2, 1, SimpleVariant::Strict).unwrap();
        assert!(strict.is_subset(&weak).unwrap());
        assert!(!check_morphism(&strict).co_surjective);
        assert!(make_simple(1, 2, SimpleVariant::Weak).is_err());
    }

    #[test]
    fn hook_examples() {
        assert_eq!(make_hook(1, 2).unwrap().as_function(), Some(vec![0, 1, 2, 1]));
        let h = make_hook(3, 3).unwrap().as_function().unwrap();
        assert_eq!((h[0], h[6]), (0, 0));
        assert!(make_hook(0, 2).is_err());
        assert!(make_hook(3, 2).is_err());
        assert!(make_snake(1, 1, 2).is_err());
    }

    #[test]
    fn classify_examples() {
        let c = |r: &Rel| classify(r).unwrap().tag;
        assert_eq!(c(&Rel::identity(path(4))), ClassTag::Isomorphism);
        let h = classify(&make_hook(1, 1).unwrap()).unwrap();
        assert_eq!(h, MorphismClass { tag: ClassTag::Hook, turning: Some(1) });
        assert_eq!(c(&make_simple(1, 0, SimpleVariant::Weak).unwrap()), ClassTag::Simple);
        assert_eq!(c(&make_snake(2, 1, 2).unwrap()), ClassTag::ProperSnake);
        assert_eq!(c(&path_fn(4, 2, &[0, 1, 2, 1, 2])), ClassTag::ImproperSnake);
        assert_eq!(c(&path_fn(5, 1, &[0, 1, 0, 1, 0, 1])), ClassTag::HigherTurning);
        assert_eq!(c(&path_fn(3, 1, &[0, 0, 0, 1])), ClassTag::NonEdgeInjective);
    }
}
