//! Structure theory of the path category: turning numbers, canonical shapes,
//! classification, prime decomposition of surjective functions, the clique
//! functor, subfactor constructions and tangled-morphism synthesis.
//!
//! Every operation here first relabels its inputs along their order witnesses,
//! so results are expressed over canonically labelled paths `P_n`.

mod clique;
mod decompose;
mod prime;
mod registry;
mod shapes;
mod subfactor;
mod tangled;

use std::sync::Arc;

pub use clique::{clique_functor, membership_factors, membership_morphism};
pub use decompose::{decompose_in_f, Factor, PrimeFactorization};
pub use prime::is_prime_bruteforce;
pub use shapes::{
    classify, make_hook, make_simple, make_snake, turning_number, ClassTag, MorphismClass,
    SimpleVariant,
};
pub use subfactor::{
    hook_subfactor, improper_simple_subfactor, improper_simple_subfactor_of,
    proper_simple_subfactor, snake_subfactor,
};
pub use registry::{registry, SubfactorRegistry, SubfactorStrategy};
pub use tangled::{build_tangled, build_tangled_capped, tangled_size};

use crate::error::{domain, Result};
use crate::graph::Graph;
use crate::rel::{check_morphism, Rel};

pub(crate) fn path(n: usize) -> Arc<Graph> {
    Arc::new(Graph::path(n))
}

/// Function between canonical paths `P_d → P_c` given by its values.
pub(crate) fn path_fn(d: usize, c: usize, values: &[usize]) -> Rel {
    Rel::from_function(path(d), path(c), values).expect("values in range")
}

/// Canonical relabelling of a co-bijective edge-preserving relation between paths.
pub(crate) fn canon_morphism(f: &Rel) -> Result<Rel> {
    let c = f.to_canonical_paths()?;
    if !check_morphism(&c).is_morphism() {
        return domain("relation is not a co-bijective edge-preserving morphism between paths");
    }
    Ok(c)
}

/// Length of a canonical path graph.
pub(crate) fn e(g: &Graph) -> usize {
    g.len() - 1
}

/// Interior turning points `k` of an edge-injective function, where `f(k-1) = f(k+1)`.
pub(crate) fn turning_points(f: &[usize]) -> Vec<usize> {
    (1..f.len().saturating_sub(1))
        .filter(|&k| f[k - 1] == f[k + 1])
        .collect()
}

/// Maximal injective segments `[a, b]` of an edge-injective function, left to right.
pub(crate) fn segments(f: &[usize]) -> Vec<(usize, usize)> {
    let mut cuts = vec![0];
    cuts.extend(turning_points(f));
    cuts.push(f.len() - 1);
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}
