//! Tangled towers and the constructions built on them: subabsorption, the
//! back-and-forth certificate between two towers, end-moving partitions, and
//! the digraph category (decomposition, strictification, joins), plus two
//! bounded search oracles.

mod amalgam;
mod back_and_forth;
mod digraph;
mod end_move;
mod subabsorb;

use serde::{Deserialize, Serialize};

use crate::error::{domain, internal, Error, Result};
use crate::graph::Path;
use crate::limits::max_vertices;
use crate::paths::{build_tangled_capped, path, tangled_size};
use crate::rel::is_tangled;
use crate::tower::{BondMode, Tower};

pub use amalgam::{
    amalgamate_bruteforce, subfactorisability_bruteforce, verify_witness, Amalgam,
    Subfactorisability, SubfactorWitness,
};
pub use back_and_forth::{back_and_forth, verify_certificate, BackAndForthCertificate, CertificateReport};
pub use digraph::{
    digraph_decompose, digraph_join, is_digraph, is_strictly_connected, strictify, Digraph,
    random_digraph, DigraphDecomposition, Join,
};
pub use end_move::{end_move, end_move_report, end_move_with_report, EndMoveReport};
pub use subabsorb::{subabsorb, Absorbed, PeelStep};

/// A tower whose bonds are tangled, with for each level `m` a deeper level `n`
/// such that `≥^m_n` is tangled.
#[derive(Clone, Debug, PartialEq)]
pub struct TangledTower {
    tower: Tower,
    tangle_witnesses: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerParams {
    pub depth: usize,
    pub root_len: usize,
    pub seed: u64,
}

impl TangledTower {
    /// Wraps a tower after checking that level 0 has an edge and that every
    /// bond is tangled.
    pub fn new(tower: Tower) -> Result<TangledTower> {
        if tower.levels()[0].len() < 2 {
            return domain("level 0 must have at least one edge");
        }
        for (k, b) in tower.bonds().iter().enumerate() {
            if !is_tangled(b)? {
                return domain(format!("bond {k} is not tangled"));
            }
        }
        let tangle_witnesses = (0..tower.depth()).map(|m| m + 1).collect();
        Ok(TangledTower {
            tower,
            tangle_witnesses,
        })
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    pub fn depth(&self) -> usize {
        self.tower.depth()
    }

    /// `tangle_witnesses()[m]` is a level `n > m` with `≥^m_n` tangled.
    pub fn tangle_witnesses(&self) -> &[usize] {
        &self.tangle_witnesses
    }

    /// Re-checks every recorded witness with the tangledness test.
    pub fn verify_witnesses(&self) -> Result<bool> {
        for (m, &n) in self.tangle_witnesses.iter().enumerate() {
            if n <= m || !is_tangled(self.tower.geq(m, n)?)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A tower over `P_{root_len}` whose bonds come from [`build_tangled`](crate::paths::build_tangled)
/// onto the current deepest level, seeded with `seed + k` for bond `k`.
pub fn generate_tangled_tower(depth: usize, root_len: usize, seed: u64) -> Result<TangledTower> {
    generate_tangled_tower_capped(depth, root_len, seed, max_vertices())
}

/// [`generate_tangled_tower`] with an explicit vertex cap per level.
pub fn generate_tangled_tower_capped(
    depth: usize,
    root_len: usize,
    seed: u64,
    limit: u64,
) -> Result<TangledTower> {
    if root_len == 0 {
        return domain("root level must have at least one edge (root_len ≥ 1)");
    }
    if depth == 0 {
        return domain("tower depth must be at least 1");
    }
    let mut tower = Tower::root(path(root_len), BondMode::EdgeWitnessing);
    for k in 0..depth {
        let target = Path::new(tower.levels()[k].clone())?;
        let bond = match build_tangled_capped(&target, seed.wrapping_add(k as u64), limit) {
            Err(Error::Size { vertices, limit, .. }) => {
                return Err(Error::Size {
                    level: k + 1,
                    vertices,
                    limit,
                })
            }
            other => other?,
        };
        tower.push(bond)?;
    }
    let t = TangledTower::new(tower)?;
    if !t.verify_witnesses()? {
        return internal("generated tower has an untangled bond");
    }
    Ok(t)
}

/// Level sizes of a generated tower, saturating, without building it.
pub fn tangled_tower_sizes(depth: usize, root_len: usize) -> Vec<u64> {
    let mut sizes = vec![root_len as u64 + 1];
    for _ in 0..depth {
        let last = *sizes.last().unwrap();
        let next = usize::try_from(last - 1).map_or(u64::MAX, tangled_size);
        sizes.push(next);
    }
    sizes
}
