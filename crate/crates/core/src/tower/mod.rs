//! Finite truncations of graded ω-posets.
//!
//! A [`Tower`] holds level graphs `ℙ_0, …, ℙ_D` (level 0 coarsest) and bonds
//! `≥^k_{k+1}` from level `k+1` to level `k`. Elements are named by
//! `(level, vertex)`; the order between levels is the composite of bonds, so
//! `p ≥ r` for `p` at level `m` and `r` at level `n ≥ m` iff `p ≥^m_n r`.
//!
//! Every quantifier over "all deeper elements" is cut off at the deepest level
//! of the truncation or at an explicit depth. Results that depend on that cut
//! are approximations and say so in their docs.

mod arrows;
mod levels;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::graph::Graph;
use crate::rel::{check_morphism, compose, is_edge_witnessing, same_graph, Rel};

pub use arrows::{
    arrow_leq, arrow_triangleleft_n, compose_sequences, identity_sequence, is_arrow_at_depth,
    langle_arrow, langle_arrow_at, regularity_certificate, square_arrow, star, star_compose, Arrow, ArrowSequence,
    RegularityCertificate, RegularityStep,
};
pub use levels::{
    barwedge_at_depth, barwedge_rel, is_level_cap, star_below, star_below_rel, wedge, wedge_rel,
};

/// An element of a tower: `(level, vertex)`.
pub type Elem = (usize, usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum BondMode {
    /// Bonds must also be edge-witnessing, so one-step wedges are level adjacency.
    #[default]
    EdgeWitnessing,
    /// Only the morphism conditions are enforced.
    Permissive,
}

#[derive(Clone, Debug)]
pub struct Tower {
    levels: Vec<Arc<Graph>>,
    bonds: Vec<Rel>,
    /// `composites[m][k]` is `≥^m_{m+k}`.
    composites: Vec<Vec<Rel>>,
    mode: BondMode,
}

impl PartialEq for Tower {
    fn eq(&self, other: &Self) -> bool {
        self.mode == other.mode
            && self.levels.len() == other.levels.len()
            && self.levels.iter().zip(&other.levels).all(|(a, b)| a == b)
            && self.bonds == other.bonds
    }
}

impl Tower {
    /// A single-level tower.
    pub fn root(level0: Arc<Graph>, mode: BondMode) -> Tower {
        Tower {
            composites: vec![vec![Rel::identity(level0.clone())]],
            levels: vec![level0],
            bonds: Vec::new(),
            mode,
        }
    }

    /// Validates and assembles a tower from its bonds, coarsest first.
    pub fn from_bonds(level0: Arc<Graph>, bonds: Vec<Rel>, mode: BondMode) -> Result<Tower> {
        let mut t = Tower::root(level0, mode);
        for b in bonds {
            t.push(b)?;
        }
        Ok(t)
    }

    /// Appends a bond from a new deepest level onto the current deepest level.
    pub fn push(&mut self, bond: Rel) -> Result<()> {
        let k = self.depth();
        if !same_graph(bond.cod(), &self.levels[k]) {
            return Err(Error::Mismatch(format!(
                "bond {k} codomain is not level {k}"
            )));
        }
        let report = check_morphism(&bond);
        if !report.is_morphism() {
            return domain(format!(
                "bond {k} is not co-bijective and edge-preserving"
            ));
        }
        if self.mode == BondMode::EdgeWitnessing && !is_edge_witnessing(&bond) {
            return domain(format!("bond {k} is not edge-witnessing"));
        }
        let new_level = bond.dom().clone();
        // composites[m] gains ≥^m_{k+1} = ≥^m_k ∘ bond
        for m in 0..=k {
            let c = compose(&self.composites[m][k - m], &bond)?;
            self.composites[m].push(c);
        }
        self.composites.push(vec![Rel::identity(new_level.clone())]);
        self.levels.push(new_level);
        self.bonds.push(bond);
        Ok(())
    }

    /// Number of bonds; the deepest level index.
    pub fn depth(&self) -> usize {
        self.bonds.len()
    }

    pub fn mode(&self) -> BondMode {
        self.mode
    }

    pub fn levels(&self) -> &[Arc<Graph>] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> Result<&Arc<Graph>> {
        self.levels
            .get(k)
            .ok_or_else(|| Error::Domain(format!("level {k} beyond depth {}", self.depth())))
    }

    pub fn bonds(&self) -> &[Rel] {
        &self.bonds
    }

    /// `≥^m_n`, a relation from level `n` to level `m`.
    pub fn geq(&self, m: usize, n: usize) -> Result<&Rel> {
        if m > n || n > self.depth() {
            return domain(format!(
                "no composite ≥^{m}_{n} in a tower of depth {}",
                self.depth()
            ));
        }
        Ok(&self.composites[m][n - m])
    }

    /// `p ≥ r` in the poset order.
    pub fn above(&self, p: Elem, r: Elem) -> bool {
        p.0 <= r.0
            && r.0 <= self.depth()
            && self.composites[p.0][r.0 - p.0].relates(p.1, r.1)
    }

    /// Re-checks every invariant from scratch: bonds are morphisms (and
    /// edge-witnessing in the default mode), composites are graded, and in the
    /// default mode each level's adjacency is the one-step wedge.
    pub fn validate(&self) -> Result<()> {
        for (k, b) in self.bonds.iter().enumerate() {
            if !check_morphism(b).is_morphism() {
                return domain(format!("bond {k} is not a morphism"));
            }
        }
        for l in 0..=self.depth() {
            for m in l..=self.depth() {
                for n in m..=self.depth() {
                    let via = compose(self.geq(l, m)?, self.geq(m, n)?)?;
                    if via != *self.geq(l, n)? {
                        return Err(Error::Internal(format!("composite ≥^{l}_{n} is not graded")));
                    }
                }
            }
        }
        if self.mode == BondMode::EdgeWitnessing {
            for k in 0..self.depth() {
                if wedge(self, k, k + 1)? != *self.levels[k] {
                    return domain(format!("level {k} adjacency differs from its one-step wedge"));
                }
            }
        }
        Ok(())
    }
}
