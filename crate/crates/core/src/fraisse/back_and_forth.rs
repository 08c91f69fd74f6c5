use serde::{Deserialize, Serialize};

use super::{subabsorb, TangledTower};
use crate::error::{domain, internal, Error, Result};
use crate::rel::{check_morphism, compose, Rel};
use crate::tower::{wedge_rel, Tower};

/// Alternating relations between two tangled towers.
///
/// `forward[k]` (`⊐_k`) goes from ℙ-level `p_levels[k]` to ℚ-level
/// `q_levels[k]`; `backward[k]` (`⊐̄_k`) goes from ℚ-level `q_levels[k + 1]`
/// to ℙ-level `p_levels[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BackAndForthCertificate {
    pub forward: Vec<Rel>,
    pub backward: Vec<Rel>,
    pub p_levels: Vec<usize>,
    pub q_levels: Vec<usize>,
    /// Depths of the two towers the certificate was built against.
    pub depth_p: usize,
    pub depth_q: usize,
}

/// Outcome of re-verifying a certificate, one flag per invariant family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub co_surjective: bool,
    pub wedge_preserving: bool,
    /// `⊐_k ∘ ⊐̄_k ⊆ ≥_ℚ` for every `k`.
    pub forward_subequality: bool,
    /// `⊐̄_k ∘ ⊐_{k+1} ⊆ ≥_ℙ` for every `k`.
    pub backward_subequality: bool,
}

impl CertificateReport {
    pub fn all(&self) -> bool {
        self.co_surjective && self.wedge_preserving && self.forward_subequality && self.backward_subequality
    }
}

/// A surjective monotone function from `P_a` onto `P_b`, `b ≤ a`, as evenly
/// spread as integer division allows.
fn staircase(dom: &std::sync::Arc<crate::Graph>, cod: &std::sync::Arc<crate::Graph>) -> Result<Rel> {
    let (a, b) = (dom.len(), cod.len());
    let values: Vec<usize> = (0..a).map(|i| i * b / a).collect();
    Rel::from_function(dom.clone(), cod.clone(), &values)
}

/// Builds `⊐_0, ⊐̄_0, ⊐_1, …` by alternately subabsorbing in `q` and `p`;
/// each round adds one backward and one forward relation.
///
/// `⊐_0` is a monotone staircase from the shallowest ℙ-level at least as long
/// as ℚ-level 0. When a tower runs out of depth the error carries the
/// completed prefix in its message and the partial certificate is returned
/// alongside it.
pub fn back_and_forth(
    p: &TangledTower,
    q: &TangledTower,
    rounds: usize,
) -> std::result::Result<BackAndForthCertificate, (Error, Option<BackAndForthCertificate>)> {
    let q0 = q.tower().levels()[0].clone();
    let Some(c0) = (0..=p.depth()).find(|&k| p.tower().levels()[k].len() >= q0.len()) else {
        return Err((
            Error::Depth("no ℙ-level is as long as ℚ-level 0".into()),
            None,
        ));
    };
    let seed = staircase(&p.tower().levels()[c0], &q0).map_err(|e| (e, None))?;
    let mut cert = BackAndForthCertificate {
        forward: vec![seed],
        backward: Vec::new(),
        p_levels: vec![c0],
        q_levels: vec![0],
        depth_p: p.depth(),
        depth_q: q.depth(),
    };
    for round in 0..rounds {
        let k = cert.forward.len() - 1;
        let partial = |e: Error, c: &BackAndForthCertificate| {
            let e = match e {
                Error::Depth(m) => m,
                e => e.to_string(),
            };
            let msg = format!("round {round}: {e} (completed {} forward, {} backward)", c.forward.len(), c.backward.len());
            (Error::Depth(msg), Some(c.clone()))
        };
        // both steps must go strictly deeper; fail before the costly one
        if cert.p_levels[k] == p.depth() || cert.q_levels[k] == q.depth() {
            let e = Error::Depth(format!(
                "no level below ℙ-level {} or ℚ-level {}",
                cert.p_levels[k], cert.q_levels[k]
            ));
            return Err(partial(e, &cert));
        }
        let back = match subabsorb(q, cert.q_levels[k], &cert.forward[k]) {
            Ok(a) => a,
            Err(e) => return Err(partial(e, &cert)),
        };
        cert.q_levels.push(back.level);
        cert.backward.push(back.rel);
        let forth = match subabsorb(p, cert.p_levels[k], &cert.backward[k]) {
            Ok(a) => a,
            Err(e) => return Err(partial(e, &cert)),
        };
        cert.p_levels.push(forth.level);
        cert.forward.push(forth.rel);
    }
    match verify_certificate(p.tower(), q.tower(), &cert) {
        Ok(r) if r.all() => Ok(cert),
        Ok(r) => Err((Error::Internal(format!("certificate failed verification: {r:?}")), Some(cert))),
        Err(e) => Err((e, Some(cert))),
    }
}

fn is_wedge_preserving(r: &Rel, from: (&Tower, usize), to: (&Tower, usize)) -> Result<bool> {
    let wf = wedge_rel(from.0, from.1, from.1, from.0.depth())?;
    let wt = wedge_rel(to.0, to.1, to.1, to.0.depth())?;
    compose(r, &compose(&wf, &r.inverse())?)?.is_subset(&wt)
}

/// Re-checks every invariant of a certificate against the two towers.
pub fn verify_certificate(p: &Tower, q: &Tower, c: &BackAndForthCertificate) -> Result<CertificateReport> {
    if c.forward.len() != c.p_levels.len()
        || c.q_levels.len() != c.backward.len() + 1
        || !(c.backward.len() + 1 == c.forward.len() || c.backward.len() == c.forward.len())
    {
        return domain("certificate level lists do not line up");
    }
    let mut report = CertificateReport {
        co_surjective: true,
        wedge_preserving: true,
        forward_subequality: true,
        backward_subequality: true,
    };
    for (k, f) in c.forward.iter().enumerate() {
        let (pl, ql) = (c.p_levels[k], c.q_levels[k]);
        if **f.dom() != *p.level(pl)?.clone() || **f.cod() != *q.level(ql)?.clone() {
            return Err(Error::Mismatch(format!("forward relation {k} is not between its levels")));
        }
        report.co_surjective &= check_morphism(f).co_surjective;
        report.wedge_preserving &= is_wedge_preserving(f, (p, pl), (q, ql))?;
    }
    for (k, b) in c.backward.iter().enumerate() {
        let (ql, pl) = (c.q_levels[k + 1], c.p_levels[k]);
        if **b.dom() != *q.level(ql)?.clone() || **b.cod() != *p.level(pl)?.clone() {
            return Err(Error::Mismatch(format!("backward relation {k} is not between its levels")));
        }
        report.co_surjective &= check_morphism(b).co_surjective;
        report.wedge_preserving &= is_wedge_preserving(b, (q, ql), (p, pl))?;
        let fwd = compose(&c.forward[k], b)?;
        report.forward_subequality &= fwd.is_subset(q.geq(c.q_levels[k], ql)?)?;
        if let Some(next) = c.forward.get(k + 1) {
            let bwd = compose(b, next)?;
            report.backward_subequality &= bwd.is_subset(p.geq(pl, c.p_levels[k + 1])?)?;
        }
    }
    if c.p_levels.windows(2).any(|w| w[1] <= w[0]) && c.forward.len() > 1 {
        return internal("ℙ-levels do not increase");
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fraisse::generate_tangled_tower;

    #[test]
    fn staircase_is_a_morphism() {
        let a = crate::paths::path(5);
        let b = crate::paths::path(2);
        let s = staircase(&a, &b).unwrap();
        assert!(check_morphism(&s).is_morphism());
        assert_eq!(s.as_function().unwrap(), vec![0, 0, 1, 1, 2, 2]);
    }

    #[test]
    fn same_tower_one_round() {
        let p = generate_tangled_tower(3, 1, 5).unwrap();
        let cert = back_and_forth(&p, &p, 1).map_err(|e| e.0).unwrap();
        assert_eq!(cert.forward.len(), 2);
        assert_eq!(cert.backward.len(), 1);
        // the seed is the identity on level 0, which lies below ≥
        assert!(cert.forward[0].is_subset(p.tower().geq(0, 0).unwrap()).unwrap());
        assert!(verify_certificate(p.tower(), p.tower(), &cert).unwrap().all());
    }

    #[test]
    fn two_towers_one_round() {
        let p = generate_tangled_tower(3, 1, 11).unwrap();
        let q = generate_tangled_tower(3, 1, 40).unwrap();
        let cert = back_and_forth(&p, &q, 1).map_err(|e| e.0).unwrap();
        let r = verify_certificate(p.tower(), q.tower(), &cert).unwrap();
        assert!(r.all(), "{r:?}");
    }

    #[test]
    fn too_many_rounds_keep_the_prefix() {
        let p = generate_tangled_tower(2, 1, 1).unwrap();
        let q = generate_tangled_tower(2, 1, 2).unwrap();
        let (err, partial) = back_and_forth(&p, &q, 5).unwrap_err();
        assert!(matches!(err, Error::Depth(_)));
        let partial = partial.unwrap();
        assert!(!partial.forward.is_empty());
        let r = verify_certificate(p.tower(), q.tower(), &partial).unwrap();
        assert!(r.all());
    }
}
