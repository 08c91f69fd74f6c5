/// Default cap on the vertex count of any single constructed path.
pub const DEFAULT_MAX_VERTICES: u64 = 2_000_000;

/// Environment variable overriding [`DEFAULT_MAX_VERTICES`].
pub const MAX_VERTICES_ENV: &str = "PSEUDOARC_LAB_MAX_VERTICES";

/// Current vertex cap; unparsable values fall back to the default.
pub fn max_vertices() -> u64 {
    std::env::var(MAX_VERTICES_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_VERTICES)
}

/// Cap on the adjacency cells (domain size times codomain size, summed) of a
/// batch of relations held at once, about 512 MiB of bitsets.
pub const MAX_RELATION_CELLS: u64 = 1 << 31;
