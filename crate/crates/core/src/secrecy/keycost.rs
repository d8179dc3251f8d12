//! Upper bounds on min I(XY:W|Z̄) subject to XY − Z − Z̄ and X − WZ̄ − Y.
//!
//! Z̄ ranges over deterministic coarse-grainings of the supported Eve
//! symbols. For each group of merged symbols W is a deterministic function
//! of (x, y) whose cells are product distributions, so the Markov condition
//! holds up to float noise and I(XY:W|Z̄) = H(W|Z̄). Two kinds of W are
//! tried: the structural one (common block, refined by the cheaper party
//! inside correlated blocks) and greedy cell merges starting from (x, y).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::intrinsic::{Method, OptResult};
use super::DenseChannel;
use crate::common_info::block_map;
use crate::dist::{Channel, JointTable};
use crate::error::{Error, Result};
use crate::partitions::{block_count, lift, set_partitions};
use crate::view::{cmi_dense, entropy_bits, Roles, Tripartite};

/// Largest |X||Y| (supported labels) accepted.
pub const MAX_XY: usize = 16;
/// Largest number of supported Eve symbols accepted.
pub const MAX_Z: usize = 6;
/// Feasibility gate on I(X:Y|W Z̄).
pub const MARKOV_GATE: f64 = 1e-7;
const CELL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct KeyCostOptions {
    /// Bound on |W|; defaults to |X||Y|.
    pub w_card: Option<usize>,
    /// Randomized merge orders tried in addition to the greedy one.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for KeyCostOptions {
    fn default() -> Self {
        Self { w_card: None, restarts: 16, seed: 0 }
    }
}

type Cells = Vec<Vec<usize>>;

fn cell_mi(q: &[f64], cell: &[usize], ny: usize) -> f64 {
    let m: f64 = cell.iter().map(|&i| q[i]).sum();
    if m <= 0.0 {
        return 0.0;
    }
    let mut px = std::collections::BTreeMap::new();
    let mut py = std::collections::BTreeMap::new();
    for &i in cell {
        *px.entry(i / ny).or_insert(0.0) += q[i];
        *py.entry(i % ny).or_insert(0.0) += q[i];
    }
    let mut mi = 0.0;
    for &i in cell {
        if q[i] > 0.0 {
            mi += q[i] / m * (q[i] * m / (px[&(i / ny)] * py[&(i % ny)])).log2();
        }
    }
    mi.max(0.0)
}

fn cost(q: &[f64], cells: &Cells) -> f64 {
    let masses: Vec<f64> = cells.iter().map(|c| c.iter().map(|&i| q[i]).sum()).collect();
    masses.iter().sum::<f64>() * entropy_bits(&masses)
}

/// Common block, with each correlated block split by whichever party has
/// the smaller conditional entropy inside it.
fn structural_cells(q: &[f64], nx: usize, ny: usize) -> Cells {
    let bm = block_map(q, nx, ny);
    let mut cells = Vec::new();
    for b in 0..bm.count {
        let members: Vec<usize> =
            (0..nx * ny).filter(|&i| q[i] > 0.0 && bm.of(i / ny, i % ny) == Some(b)).collect();
        if cell_mi(q, &members, ny) <= CELL_TOL {
            cells.push(members);
            continue;
        }
        let split = |key: &dyn Fn(usize) -> usize| {
            let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
            for &i in &members {
                groups.entry(key(i)).or_default().push(i);
            }
            groups.into_values().collect::<Cells>()
        };
        let by_x = split(&|i| i / ny);
        let by_y = split(&|i| i % ny);
        if cost(q, &by_x) <= cost(q, &by_y) {
            cells.extend(by_x);
        } else {
            cells.extend(by_y);
        }
    }
    cells
}

/// Repeatedly merges pairs of cells whose union stays a product. With no
/// RNG the merge with the largest cost drop is taken; otherwise pairs are
/// visited in a shuffled order and the first feasible one is merged.
fn merged_cells(q: &[f64], ny: usize, start: Cells, mut rng: Option<&mut ChaCha8Rng>) -> Cells {
    let mut cells = start;
    loop {
        let mut pairs: Vec<(usize, usize)> =
            (0..cells.len()).flat_map(|a| (a + 1..cells.len()).map(move |b| (a, b))).collect();
        if let Some(r) = rng.as_deref_mut() {
            pairs.shuffle(r);
        }
        let base = cost(q, &cells);
        let mut pick: Option<((usize, usize), f64)> = None;
        for (a, b) in pairs {
            let union: Vec<usize> = cells[a].iter().chain(&cells[b]).copied().collect();
            if cell_mi(q, &union, ny) > CELL_TOL {
                continue;
            }
            let mut trial = cells.clone();
            trial[a] = union;
            trial.remove(b);
            let drop = base - cost(q, &trial);
            if rng.is_some() {
                pick = Some(((a, b), drop));
                break;
            }
            if pick.is_none_or(|(_, d)| drop > d + 1e-15) {
                pick = Some(((a, b), drop));
            }
        }
        let Some(((a, b), _)) = pick else { return cells };
        let moved = std::mem::take(&mut cells[b]);
        cells[a].extend(moved);
        cells[a].sort_unstable();
        cells.remove(b);
    }
}

#[derive(Debug, Clone)]
struct GroupBest {
    cost: f64,
    cells: Cells,
    structural: bool,
}

fn best_for_group(q: &[f64], nx: usize, ny: usize, w_card: usize, opts: &KeyCostOptions, salt: u64) -> Option<GroupBest> {
    let structural = structural_cells(q, nx, ny);
    let mut best: Option<GroupBest> = None;
    let offer = |cells: Cells, structural: bool, best: &mut Option<GroupBest>| {
        if cells.len() > w_card.max(1) {
            return;
        }
        let c = cost(q, &cells);
        if best.as_ref().is_none_or(|b| c < b.cost - 1e-12) {
            *best = Some(GroupBest { cost: c, cells, structural });
        }
    };
    offer(structural.clone(), true, &mut best);
    let singletons: Cells = (0..nx * ny).filter(|&i| q[i] > 0.0).map(|i| vec![i]).collect();
    offer(merged_cells(q, ny, structural, None), false, &mut best);
    offer(merged_cells(q, ny, singletons.clone(), None), false, &mut best);
    for r in 0..opts.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(salt * 1024 + r as u64);
        offer(merged_cells(q, ny, singletons.clone(), Some(&mut rng)), false, &mut best);
    }
    best
}

pub fn key_cost_view(v: &Tripartite, opts: &KeyCostOptions) -> Result<OptResult> {
    let (ex, ey, _) = v.effective_sizes();
    let support = v.z_support();
    if ex * ey > MAX_XY || support.len() > MAX_Z {
        return Err(Error::SizeCap(format!(
            "key-cost search needs |X||Y| <= {MAX_XY} and |Z| <= {MAX_Z} (got {}, {})",
            ex * ey,
            support.len()
        )));
    }
    let w_card = opts.w_card.unwrap_or(v.nx * v.ny);
    let n = support.len();
    // best W for every subset of supported Eve symbols
    let groups: Vec<Option<GroupBest>> = (0..1u64 << n)
        .map(|mask| {
            if mask == 0 {
                return None;
            }
            let mut q = vec![0.0; v.nx * v.ny];
            for (i, &z) in support.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    for (xy, e) in q.iter_mut().enumerate() {
                        *e += v.p[xy * v.nz + z];
                    }
                }
            }
            best_for_group(&q, v.nx, v.ny, w_card, opts, mask)
        })
        .collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for part in set_partitions(n)? {
        let masks: Vec<u64> = (0..block_count(&part))
            .map(|b| part.iter().enumerate().filter(|(_, &c)| c == b).fold(0, |m, (i, _)| m | 1 << i))
            .collect();
        let Some(val) = masks.iter().map(|&m| groups[m as usize].as_ref().map(|g| g.cost)).sum::<Option<f64>>()
        else {
            continue;
        };
        if best.as_ref().is_none_or(|(b, _)| val < b - 1e-12) {
            best = Some((val, part));
        }
    }
    let (_, part) = best.ok_or_else(|| Error::Precondition(format!("no feasible W with at most {w_card} symbols")))?;
    let k = block_count(&part).max(1);
    let zbar = DenseChannel::deterministic(&lift(&part, &support, v.nz), k);
    let chosen: Vec<&GroupBest> = (0..k)
        .map(|b| {
            let mask = part.iter().enumerate().filter(|(_, &c)| c == b).fold(0u64, |m, (i, _)| m | 1 << i);
            groups[mask as usize].as_ref().expect("feasible block")
        })
        .collect();
    let nw = chosen.iter().map(|g| g.cells.len()).max().unwrap_or(1).max(1);

    // W as a function of (x, y, z̄); unreachable inputs go to w0
    let mut wmap = vec![0usize; v.nx * v.ny * k];
    for (zb, g) in chosen.iter().enumerate() {
        for (w, cell) in g.cells.iter().enumerate() {
            for &xy in cell {
                wmap[xy * k + zb] = w;
            }
        }
    }
    let pb = v.apply_channel(&zbar.w, k);
    let mut joint = vec![0.0; v.nx * v.ny * nw * k];
    for xy in 0..v.nx * v.ny {
        for zb in 0..k {
            joint[(xy * nw + wmap[xy * k + zb]) * k + zb] += pb.p[xy * k + zb];
        }
    }
    let value = cmi_dense(&joint, v.nx * v.ny, nw, k);
    let gate = cmi_dense(&joint, v.nx, v.ny, nw * k);
    if gate > MARKOV_GATE {
        return Err(Error::InternalConsistency(format!("key-cost witness leaves I(X:Y|W Z̄) = {gate:e}")));
    }
    let w_inputs: Vec<String> = (0..v.nx * v.ny * k)
        .map(|i| format!("{},{},zb{}", v.x_labels[i / (v.ny * k)], v.y_labels[(i / k) % v.ny], i % k))
        .collect();
    let w_channel = Channel::deterministic(&w_inputs, (0..nw).map(|w| format!("w{w}")).collect(), &wmap)?;
    let structural = chosen.iter().all(|g| g.structural);
    Ok(OptResult {
        value,
        method: if structural { Method::Structural } else { Method::LocalSearch },
        witness_channels: vec![zbar.to_channel(&v.z_labels), w_channel],
        gap_bound: None,
        certified: false,
        deterministic_value: None,
        local_value: None,
        dense: zbar,
    })
}

pub fn winter_key_cost(table: &JointTable, roles: &Roles, opts: &KeyCostOptions) -> Result<OptResult> {
    roles.check_disjoint()?;
    table.ensure_valid()?;
    key_cost_view(&Tripartite::from_table(table, roles)?, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn run(name: &str) -> OptResult {
        winter_key_cost(&corpus::named(name).unwrap(), &Roles::default(), &KeyCostOptions::default()).unwrap()
    }

    #[test]
    fn reference_values() {
        assert!((run("PERFECT_BIT").value - 1.0).abs() < 1e-9);
        let r = run("ERASURE_HALF");
        assert!((r.value - 0.5).abs() < 1e-9);
        assert_eq!(r.method, Method::Structural);
        assert!(run("PRODUCT_UNIF").value.abs() < 1e-12);
    }

    #[test]
    fn spoiled_bit_exceeds_intrinsic() {
        use crate::secrecy::intrinsic::{intrinsic_information, IntrinsicOptions};
        let t = corpus::named("SPOILED_BIT").unwrap();
        let i = intrinsic_information(&t, &Roles::default(), &IntrinsicOptions::default()).unwrap();
        assert!(run("SPOILED_BIT").value > i.value + 1e-6);
    }

    #[test]
    fn cardinality_bound() {
        let t = corpus::named("PERFECT_BIT").unwrap();
        let e = winter_key_cost(&t, &Roles::default(), &KeyCostOptions { w_card: Some(1), ..Default::default() });
        assert!(matches!(e, Err(Error::Precondition(_))));
    }
}
