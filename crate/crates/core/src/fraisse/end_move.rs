use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{domain, internal, Error, Result};
use crate::graph::{quotient, Partition, Path};
use crate::rel::{check_morphism, is_tangled, Rel};

/// The four conditions an end-moving partition must meet, plus the windows
/// `R_v` chosen on the way down (as position intervals of each domain).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndMoveReport {
    pub quotient_is_path: bool,
    pub co_surjective: bool,
    pub v_block_is_end: bool,
    pub end_condition: bool,
    pub windows: Vec<(usize, usize)>,
}

impl EndMoveReport {
    pub fn holds(&self) -> bool {
        self.quotient_is_path && self.co_surjective && self.v_block_is_end && self.end_condition
    }
}

/// A partition of the domain of `t` into a path of blocks with `v` in an end
/// block, each block inside some `s^⊐`, and domain ends kept under the
/// codomain ends they already lie under.
///
/// Among equally short windows `R_v` the leftmost (in the domain's order
/// witness) is tried first; later ones are only tried if it fails.
pub fn end_move(t: &Rel, v: usize) -> Result<Partition> {
    end_move_with_report(t, v).map(|(p, _)| p)
}

/// [`end_move`] together with its verification report.
pub fn end_move_with_report(t: &Rel, v: usize) -> Result<(Partition, EndMoveReport)> {
    if v >= t.dom().len() {
        return domain(format!("vertex {v} is not in the domain"));
    }
    if !check_morphism(t).is_morphism() || !is_tangled(t)? {
        return domain("end_move needs a tangled morphism");
    }
    let mut windows = Vec::new();
    let blocks = build(t, v, None, &mut windows)?;
    let part = Partition::new(t.dom().clone(), blocks)?;
    let mut report = end_move_report(t, v, &part)?;
    report.windows = windows;
    if !report.holds() {
        return internal(format!("end-moving partition for vertex {v} failed verification: {report:?}"));
    }
    Ok((part, report))
}

/// Evaluates the four conditions for an arbitrary partition of `t`'s domain.
pub fn end_move_report(t: &Rel, v: usize, part: &Partition) -> Result<EndMoveReport> {
    evaluate(t, v, part, None)
}

/// With an `anchor`, the end condition is only asked of that codomain end;
/// the recursion needs no more than this from a window's partition.
fn evaluate(t: &Rel, v: usize, part: &Partition, anchor: Option<usize>) -> Result<EndMoveReport> {
    let (qg, _) = quotient(t.dom(), part)?;
    let inside = |b: &[usize], s: usize| b.iter().all(|&r| t.relates(s, r));
    let co_surjective = part
        .blocks()
        .iter()
        .all(|b| (0..t.cod().len()).any(|s| inside(b, s)));
    let end_condition = t.dom().ends().into_iter().all(|r| {
        let b = &part.blocks()[part.block_of(r)];
        t.cod()
            .ends()
            .into_iter()
            .filter(|&s| t.relates(s, r) && anchor.is_none_or(|a| a == s))
            .all(|s| inside(b, s))
    });
    Ok(EndMoveReport {
        quotient_is_path: qg.is_path(),
        co_surjective,
        v_block_is_end: qg.order_of(part.block_of(v)) <= 1,
        end_condition,
        windows: Vec::new(),
    })
}

fn passes(t: &Rel, v: usize, blocks: &[Vec<usize>], anchor: Option<usize>) -> bool {
    Partition::new(t.dom().clone(), blocks.to_vec())
        .and_then(|p| evaluate(t, v, &p, anchor))
        .is_ok_and(|r| r.holds())
}

fn build(t: &Rel, v: usize, anchor: Option<usize>, windows: &mut Vec<(usize, usize)>) -> Result<Vec<Vec<usize>>> {
    let n_r = t.dom().len();
    match t.cod().len() {
        1 => return Ok(vec![(0..n_r).collect()]),
        2 => {
            for s in 0..2 {
                let inner: Vec<usize> = t.row(s).ones().collect();
                let outer: Vec<usize> = (0..n_r).filter(|&r| !t.relates(s, r)).collect();
                let blocks = vec![inner, outer];
                if passes(t, v, &blocks, anchor) {
                    return Ok(blocks);
                }
            }
            return internal("neither two-block partition works");
        }
        _ => {}
    }
    let r_path = Path::new(t.dom().clone())?;
    let order = r_path.order_witness();
    let pos_v = r_path.positions()[v];
    let s_ends = t.cod().ends();
    let singleton = |r: usize, s: usize| t.col(r).count_ones(..) == 1 && t.relates(s, r);

    let mut last_err = None;
    for len in 0..n_r {
        let lo = pos_v.saturating_sub(len);
        for a in lo..=pos_v {
            let b = a + len;
            if b >= n_r {
                break;
            }
            for &s_v in &s_ends {
                let (ra, rb) = (order[a], order[b]);
                if !t.relates(s_v, ra) || !t.relates(s_v, rb) {
                    continue;
                }
                if !order[a..=b].iter().any(|&r| singleton(r, s_v)) {
                    continue;
                }
                let mut sub_windows = Vec::new();
                match step(t, v, s_v, &order[a..=b], anchor, &mut sub_windows) {
                    Ok(blocks) if passes(t, v, &blocks, anchor) => {
                        windows.push((a, b));
                        windows.extend(sub_windows);
                        return Ok(blocks);
                    }
                    Ok(_) => last_err = Some(Error::Internal(format!("window [{a}, {b}] gave a bad partition"))),
                    Err(e) => last_err = Some(e),
                }
            }
        }
    }
    Err(last_err.unwrap_or_else(|| Error::Internal("no window R_v exists".into())))
}

/// The recursive step for one window `R_v` (listed in path order) and end
/// `s_v`. The restriction goes to a proper subpath `T` of the codomain from
/// `s_v` on which it is still a tangled morphism, longest first.
fn step(
    t: &Rel,
    v: usize,
    s_v: usize,
    window: &[usize],
    anchor: Option<usize>,
    windows: &mut Vec<(usize, usize)>,
) -> Result<Vec<Vec<usize>>> {
    let mut w = window.to_vec();
    w.sort_unstable();
    let s_path = Path::new(t.cod().clone())?;
    let s_order = s_path.order_witness();
    let s_pos = s_path.positions();
    let n_s = s_order.len();
    let mut last_err = Error::Internal("no proper subpath T carries the window".into());
    for k in (1..n_s).rev() {
        let z: Vec<usize> = if s_pos[s_v] == 0 {
            s_order[..k].to_vec()
        } else {
            s_order[n_s - k..].to_vec()
        };
        let sub = t.restrict(&w, &z)?;
        if !check_morphism(&sub).is_morphism() || !is_tangled(&sub)? {
            continue;
        }
        let mut sub_windows = Vec::new();
        let sub_anchor = z.iter().filter(|&&y| y < s_v).count();
        match finish(t, v, s_v, window, &w, &sub, sub_anchor, &s_pos, &mut sub_windows) {
            Ok(blocks) if passes(t, v, &blocks, anchor) => {
                windows.extend(sub_windows);
                return Ok(blocks);
            }
            Ok(_) => last_err = Error::Internal(format!("subpath T of {k} vertices gave a bad partition")),
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    t: &Rel,
    v: usize,
    s_v: usize,
    window: &[usize],
    w: &[usize],
    sub: &Rel,
    sub_anchor: usize,
    s_pos: &[usize],
    windows: &mut Vec<(usize, usize)>,
) -> Result<Vec<Vec<usize>>> {
    let local = |r: usize| w.binary_search(&r).expect("window member");
    let sub_blocks = build(sub, local(v), Some(sub_anchor), windows)?;

    // walk the sub-partition's path of blocks from v's block
    let sub_part = Partition::new(sub.dom().clone(), sub_blocks)?;
    let (qg, _) = quotient(sub.dom(), &sub_part)?;
    let q_order = Path::new(qg)?.order_witness().to_vec();
    let start = sub_part.block_of(local(v));
    let walk: Vec<usize> = if q_order[0] == start {
        q_order
    } else {
        q_order.into_iter().rev().collect()
    };
    let window_ends = [local(window[0]), local(window[window.len() - 1])];
    let Some(e_idx) = walk
        .iter()
        .position(|&b| window_ends.iter().any(|&r| sub_part.block_of(r) == b))
    else {
        return internal("no block contains an end of the window");
    };
    let kept: Vec<Vec<usize>> = walk[..e_idx]
        .iter()
        .map(|&b| sub_part.blocks()[b].iter().map(|&i| w[i]).collect())
        .collect();
    let mut used = FixedBitSet::with_capacity(t.dom().len());
    for b in &kept {
        used.extend(b.iter().copied());
    }

    // the remaining vertices go under s_v, or under the point of their image farthest from it
    let mut by_s: Vec<Vec<usize>> = vec![Vec::new(); t.cod().len()];
    for r in (0..t.dom().len()).filter(|&r| !used.contains(r)) {
        let s = if t.relates(s_v, r) {
            s_v
        } else {
            t.col(r)
                .ones()
                .max_by_key(|&s| s_pos[s].abs_diff(s_pos[s_v]))
                .expect("co-surjective")
        };
        by_s[s].push(r);
    }
    let mut blocks = kept;
    blocks.extend(by_s.into_iter().filter(|b| !b.is_empty()));
    Ok(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::canonical_path;
    use crate::paths::build_tangled;

    #[test]
    fn point_target_is_trivial() {
        let t = build_tangled(&canonical_path(0), 0).unwrap();
        let p = end_move(&t, 0).unwrap();
        assert_eq!(p.blocks().len(), 1);
    }

    #[test]
    fn edge_target_has_two_blocks() {
        let t = build_tangled(&canonical_path(1), 3).unwrap();
        for v in 0..t.dom().len() {
            let (p, r) = end_move_with_report(&t, v).unwrap();
            assert_eq!(p.blocks().len(), 2);
            assert!(r.holds());
            let s_block = p.blocks().iter().any(|b| (0..2).any(|s| *b == t.row(s).ones().collect::<Vec<_>>()));
            assert!(s_block);
        }
    }

    #[test]
    fn every_vertex_onto_longer_paths() {
        for n in 2..=3 {
            for seed in 0..3 {
                let t = build_tangled(&canonical_path(n), seed).unwrap();
                for v in 0..t.dom().len() {
                    let (p, r) = end_move_with_report(&t, v).unwrap_or_else(|e| panic!("P_{n} seed {seed} v {v}: {e}"));
                    // an independent re-check of the report
                    assert_eq!(end_move_report(&t, v, &p).unwrap().holds(), r.holds());
                }
            }
        }
    }

    #[test]
    fn rejects_untangled() {
        let id = Rel::identity(crate::paths::path(2));
        assert!(matches!(end_move(&id, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn report_flags_bad_partitions() {
        let t = build_tangled(&canonical_path(2), 0).unwrap();
        let n = t.dom().len();
        let singletons = Partition::new(t.dom().clone(), (0..n).map(|r| vec![r]).collect()).unwrap();
        // v in the middle of the domain is not an end of the discrete partition
        let r = end_move_report(&t, n / 2, &singletons).unwrap();
        assert!(r.quotient_is_path && !r.v_block_is_end);
    }
}
