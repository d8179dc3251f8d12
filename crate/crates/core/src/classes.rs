//! Membership detectors for the block-independence hierarchy.
//!
//! SBI ⊂ UBI ⊂ UBI-PD ⊂ UBI-PD↓ and LOPC-flagged ⊂ UBI-PD; BI contains
//! UBI-PD. Every "yes" carries a witness that is re-checked independently
//! by [`classify`].

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::Serialize;

use crate::common_info::{block_map, cmi_given_common, conditional_block_maps, BlockMap, CommonPartition};
use crate::dist::{Channel, JointTable};
use crate::error::{Error, Result};
use crate::partitions::set_partitions;
use crate::protocol::{
    apply_protocol, dense_to_protocol, extended_view, leak_about_common, round_choices, run_dense, CellState,
    DenseRound, Protocol, Speaker,
};
use crate::secrecy::certificates::{zero_pattern_scan_view, Certificate};
use crate::secrecy::intrinsic::{intrinsic_view, IntrinsicOptions, OptResult};
use crate::secrecy::DenseChannel;
use crate::view::{cmi_dense, Roles, Tripartite};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ROUNDS: usize = 2;
/// Protocol-search nodes evaluated before giving up with "unknown".
pub const DEFAULT_SEARCH_CAP: usize = 100_000;
/// Largest supported Eve alphabet whose partitions are enumerated.
pub const MAX_COARSE_GRAIN: usize = 8;

pub const CLASS_KEYS: [&str; 7] = ["sbi", "bi", "ubi", "ubi_pd", "ubi_pd_down", "lopc_flagged", "bidisjoint"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    CommonPartition {
        partition: CommonPartition,
    },
    /// A defining quantity that should vanish but does not.
    Violation {
        quantity: String,
        value: f64,
        tol: f64,
    },
    /// A defining quantity that vanishes within `tol`.
    Vanishes {
        quantity: String,
        value: f64,
        tol: f64,
    },
    BlockLabeling {
        k_x: BTreeMap<String, String>,
        k_y: BTreeMap<String, String>,
    },
    /// Two blocks of the same conditional forced to share a label.
    LabelConflict {
        z: String,
        blocks: [usize; 2],
    },
    Transcript {
        protocol: Protocol,
        leak: f64,
    },
    /// Binary-side regime: y occurs in a correlated conditional but does not
    /// determine the binary party's symbol.
    UndeterminedRow {
        y: String,
        z: String,
        h: f64,
        swapped: bool,
    },
    ChannelTranscript {
        channel: Channel,
        protocol: Protocol,
        eve_condition: f64,
    },
    Flag {
        cells: Vec<Vec<String>>,
        protocol: Protocol,
    },
    Certificates {
        intrinsic: f64,
        certificates: Vec<Certificate>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detection {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Detection {
    fn yes(w: Witness) -> Self {
        Self { verdict: Verdict::Yes, witness: Some(w), note: None }
    }

    fn no(w: Option<Witness>) -> Self {
        Self { verdict: Verdict::No, witness: w, note: None }
    }

    fn unknown(note: impl Into<String>) -> Self {
        Self { verdict: Verdict::Unknown, witness: None, note: Some(note.into()) }
    }

    fn violation(quantity: &str, value: f64, tol: f64) -> Self {
        Self::no(Some(Witness::Violation { quantity: quantity.into(), value, tol }))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyOptions {
    pub tol: f64,
    pub max_rounds: usize,
    pub search_cap: usize,
    pub intrinsic: IntrinsicOptions,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_rounds: DEFAULT_MAX_ROUNDS,
            search_cap: DEFAULT_SEARCH_CAP,
            intrinsic: IntrinsicOptions::default(),
        }
    }
}

/// Shared state for the detectors of one table: the dense view and a lazily
/// computed intrinsic-information result.
pub struct Analysis {
    pub view: Tripartite,
    pub opts: ClassifyOptions,
    intrinsic: OnceLock<std::result::Result<OptResult, String>>,
}

impl Analysis {
    pub fn new(table: &JointTable, roles: &Roles, opts: ClassifyOptions) -> Result<Self> {
        roles.check_disjoint()?;
        table.ensure_valid()?;
        Ok(Self::from_view(Tripartite::from_table(table, roles)?, opts))
    }

    pub fn from_view(view: Tripartite, opts: ClassifyOptions) -> Self {
        Self { view, opts, intrinsic: OnceLock::new() }
    }

    /// The intrinsic-information minimization, run once on first use.
    pub fn intrinsic(&self) -> Result<&OptResult> {
        self.intrinsic
            .get_or_init(|| intrinsic_view(&self.view, &self.opts.intrinsic).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| Error::SizeCap(e.clone()))
    }

    pub fn set_intrinsic(&self, r: OptResult) {
        let _ = self.intrinsic.set(Ok(r));
    }
}

// ---------------------------------------------------------------------------
// dense building blocks

/// I(X:Y|J_{XY|Z} Z) of a view.
pub fn bi_value(v: &Tripartite) -> f64 {
    cmi_given_common(v, &conditional_block_maps(v))
}

/// Cross-z consistent block labeling: components of the graph on (z, block)
/// nodes joined through shared x or y labels. Returns the label of every x
/// and y, or the first conflicting pair of blocks.
pub fn ubi_labeling(
    v: &Tripartite,
    maps: &[Option<BlockMap>],
) -> std::result::Result<(Vec<Option<usize>>, Vec<Option<usize>>), (usize, [usize; 2])> {
    // nodes: x labels, then y labels
    let n = v.nx + v.ny;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for b in maps.iter().flatten() {
        // every x and y of a block are joined through the block node
        let mut first = vec![None; b.count];
        for (x, bx) in b.x.iter().enumerate() {
            if let Some(k) = bx {
                match first[*k] {
                    None => first[*k] = Some(x),
                    Some(r) => {
                        let (a, c) = (find(&mut parent, r), find(&mut parent, x));
                        parent[a.max(c)] = a.min(c);
                    }
                }
            }
        }
        for (y, by) in b.y.iter().enumerate() {
            if let Some(k) = by {
                let r = first[*k].expect("every block has an x");
                let (a, c) = (find(&mut parent, r), find(&mut parent, v.nx + y));
                parent[a.max(c)] = a.min(c);
            }
        }
    }
    for (z, b) in maps.iter().enumerate() {
        let Some(b) = b else { continue };
        let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
        for (x, bx) in b.x.iter().enumerate() {
            if let Some(k) = bx {
                let root = find(&mut parent, x);
                if let Some(&other) = seen.get(&root) {
                    if other != *k {
                        return Err((z, [other.min(*k), other.max(*k)]));
                    }
                } else {
                    seen.insert(root, *k);
                }
            }
        }
    }
    let px = v.px();
    let py = v.py();
    let mut ids: BTreeMap<usize, usize> = BTreeMap::new();
    let mut label = |root: usize| {
        let next = ids.len();
        *ids.entry(root).or_insert(next)
    };
    let kx: Vec<Option<usize>> =
        (0..v.nx).map(|x| (px[x] > 0.0).then(|| label(find(&mut parent, x)))).collect();
    let ky: Vec<Option<usize>> =
        (0..v.ny).map(|y| (py[y] > 0.0).then(|| label(find(&mut parent, v.nx + y)))).collect();
    Ok((kx, ky))
}

fn ubi_holds(v: &Tripartite, tol: f64) -> bool {
    let maps = conditional_block_maps(v);
    cmi_given_common(v, &maps) <= tol && ubi_labeling(v, &maps).is_ok()
}

/// Whether the transcript reached by `rounds` makes the table UBI without
/// leaking anything about J_{XY|Z}.
fn transcript_succeeds(v: &Tripartite, maps: &[Option<BlockMap>], state: &CellState, tol: f64) -> Option<f64> {
    let leak = leak_about_common(v, maps, state);
    (leak <= tol && ubi_holds(&extended_view(v, state), tol)).then_some(leak)
}

// ---------------------------------------------------------------------------
// detectors

pub fn is_sbi(v: &Tripartite, tol: f64) -> Detection {
    let mi = v.mi_xy_z();
    if mi > tol {
        return Detection::violation("I(XY:Z)", mi, tol);
    }
    let xy = v.xy_only();
    let i = bi_value(&xy);
    if i > tol {
        return Detection::violation("I(X:Y|J_XY)", i, tol);
    }
    Detection::yes(Witness::CommonPartition { partition: partition_of(&xy) })
}

fn partition_of(v: &Tripartite) -> CommonPartition {
    let t = v.to_table(["X", "Y", "Z"]).expect("view labels are consistent");
    crate::common_info::maximal_common_partition(&t, "X", "Y").expect("variables exist")
}

pub fn is_bi(v: &Tripartite, tol: f64) -> Detection {
    let i = bi_value(v);
    if i > tol {
        return Detection::violation("I(X:Y|J_{XY|Z}Z)", i, tol);
    }
    Detection::yes(Witness::Vanishes { quantity: "I(X:Y|J_{XY|Z}Z)".into(), value: i, tol })
}

pub fn is_ubi(v: &Tripartite, tol: f64) -> Detection {
    let maps = conditional_block_maps(v);
    let i = cmi_given_common(v, &maps);
    if i > tol {
        return Detection::violation("I(X:Y|J_{XY|Z}Z)", i, tol);
    }
    match ubi_labeling(v, &maps) {
        Ok((kx, ky)) => {
            let named = |ks: &[Option<usize>], labels: &[String]| {
                ks.iter()
                    .zip(labels)
                    .filter_map(|(k, l)| k.map(|k| (l.clone(), format!("k{k}"))))
                    .collect()
            };
            Detection::yes(Witness::BlockLabeling { k_x: named(&kx, &v.x_labels), k_y: named(&ky, &v.y_labels) })
        }
        Err((z, blocks)) => Detection::no(Some(Witness::LabelConflict { z: v.z_labels[z].clone(), blocks })),
    }
}

/// Outcome of the public-discussion search on a view.
#[derive(Debug, Clone, PartialEq)]
pub struct PdOutcome {
    pub detection: Detection,
    pub rounds: Option<Vec<DenseRound>>,
}

/// Binary-side decision: with X effectively binary, the table is UBI-PD iff
/// every y occurring in a two-block conditional determines x. Returns the
/// verdict and, when positive, Bob's one-round message.
fn binary_side(v: &Tripartite, maps: &[Option<BlockMap>]) -> std::result::Result<DenseRound, (usize, usize, f64)> {
    let h = v.h_x_given_each_y();
    for (z, b) in maps.iter().enumerate() {
        let Some(b) = b else { continue };
        if b.count < 2 {
            continue;
        }
        for y in 0..v.ny {
            if b.y[y].is_some() && (0..v.nx).any(|x| v.at(x, y, z) > 0.0) && h[y] > 0.0 {
                return Err((y, z, h[y]));
            }
        }
    }
    let msg = vec![(0..v.ny).map(|y| usize::from(h[y] <= 0.0)).collect()];
    Ok(DenseRound { speaker: Speaker::Bob, msg })
}

pub fn is_ubi_pd(a: &Analysis) -> Result<PdOutcome> {
    ubi_pd_view(&a.view, a.opts.tol, a.opts.max_rounds, a.opts.search_cap)
}

pub fn ubi_pd_view(v: &Tripartite, tol: f64, max_rounds: usize, cap: usize) -> Result<PdOutcome> {
    let maps = conditional_block_maps(v);
    let i = cmi_given_common(v, &maps);
    if i > tol {
        return Ok(PdOutcome { detection: Detection::violation("I(X:Y|J_{XY|Z}Z)", i, tol), rounds: None });
    }
    let found = |rounds: Vec<DenseRound>, leak: f64| PdOutcome {
        detection: Detection::yes(Witness::Transcript { protocol: dense_to_protocol(v, &rounds), leak }),
        rounds: Some(rounds),
    };
    if ubi_labeling(v, &maps).is_ok() {
        return Ok(found(Vec::new(), 0.0));
    }
    let (ex, ey, _) = v.effective_sizes();
    if ex == 2 || ey == 2 {
        let swapped = ex != 2;
        let w = if swapped { v.transposed() } else { v.clone() };
        let wmaps = conditional_block_maps(&w);
        return Ok(match binary_side(&w, &wmaps) {
            Ok(mut round) => {
                if swapped {
                    round.speaker = Speaker::Alice;
                }
                let rounds = vec![round];
                let state = run_dense(v, &rounds);
                let Some(leak) = transcript_succeeds(v, &maps, &state, tol) else {
                    return Err(Error::InternalConsistency(
                        "binary-side message construction failed re-verification".into(),
                    ));
                };
                found(rounds, leak)
            }
            Err((y, z, h)) => PdOutcome {
                detection: Detection::no(Some(Witness::UndeterminedRow {
                    y: w.y_labels[y].clone(),
                    z: w.z_labels[z].clone(),
                    h,
                    swapped,
                })),
                rounds: None,
            },
        });
    }
    // a flag protocol, when one exists, is a candidate transcript
    if let Ok(FlagSearch::Found { rounds, .. }) = flag_search(v, tol, max_rounds) {
        let state = run_dense(v, &rounds);
        if let Some(leak) = transcript_succeeds(v, &maps, &state, tol) {
            return Ok(found(rounds, leak));
        }
    }
    let mut budget = cap;
    for first in [Speaker::Bob, Speaker::Alice] {
        let mut rounds = Vec::new();
        match dfs(v, &maps, tol, &CellState::initial(v), first, max_rounds, &mut rounds, &mut budget)? {
            Some(leak) => return Ok(found(rounds, leak)),
            None if budget == 0 => {
                return Ok(PdOutcome {
                    detection: Detection::unknown(format!("protocol search cap of {cap} nodes reached")),
                    rounds: None,
                })
            }
            None => {}
        }
    }
    Ok(PdOutcome {
        detection: Detection::unknown(format!("no protocol of at most {max_rounds} rounds found")),
        rounds: None,
    })
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    v: &Tripartite,
    maps: &[Option<BlockMap>],
    tol: f64,
    state: &CellState,
    speaker: Speaker,
    rounds_left: usize,
    rounds: &mut Vec<DenseRound>,
    budget: &mut usize,
) -> Result<Option<f64>> {
    if rounds_left == 0 {
        return Ok(None);
    }
    for round in round_choices(v, state, speaker)? {
        if round.msg.iter().all(|row| row.iter().all(|&m| m == 0)) {
            continue;
        }
        if *budget == 0 {
            return Ok(None);
        }
        *budget -= 1;
        let next = state.advance(v, &round);
        // leakage only grows as the transcript is refined
        if leak_about_common(v, maps, &next) > tol {
            continue;
        }
        rounds.push(round);
        if let Some(leak) = transcript_succeeds(v, maps, &next, tol) {
            return Ok(Some(leak));
        }
        if let Some(leak) = dfs(v, maps, tol, &next, speaker.other(), rounds_left - 1, rounds, budget)? {
            return Ok(Some(leak));
        }
        rounds.pop();
    }
    Ok(None)
}

/// I(Z : J_{XY|Z̄} | T Z̄) for a channel Z → Z̄ and a transcript on the
/// degraded view.
pub fn eve_condition(v: &Tripartite, ch: &DenseChannel, vb: &Tripartite, state: &CellState) -> f64 {
    let maps = conditional_block_maps(vb);
    let nj = maps.iter().flatten().map(|b| b.count).max().unwrap_or(1).max(1);
    let nt = state.count();
    let nc = nt * ch.k;
    let mut arr = vec![0.0; v.nz * nj * nc];
    for x in 0..v.nx {
        for y in 0..v.ny {
            let t = state.cell[x * v.ny + y];
            if t == usize::MAX {
                continue;
            }
            for z in 0..v.nz {
                let m = v.at(x, y, z);
                if m <= 0.0 {
                    continue;
                }
                for zb in 0..ch.k {
                    let w = ch.w[z * ch.k + zb];
                    if w <= 0.0 {
                        continue;
                    }
                    let j = maps[zb].as_ref().and_then(|b| b.of(x, y)).unwrap_or(0);
                    arr[(z * nj + j) * nc + t * ch.k + zb] += m * w;
                }
            }
        }
    }
    cmi_dense(&arr, v.nz, nj, nc)
}

/// Deterministic coarse-grainings of the supported Eve symbols, fewest
/// outputs first. `None` when the support is too large to enumerate.
pub fn coarse_grainings(v: &Tripartite) -> Option<Vec<DenseChannel>> {
    let support = v.z_support();
    if support.len() > MAX_COARSE_GRAIN {
        return None;
    }
    let parts = set_partitions(support.len()).ok()?;
    Some(
        parts
            .into_iter()
            .map(|p| {
                let k = crate::partitions::block_count(&p).max(1);
                let map = crate::partitions::lift(&p, &support, v.nz);
                DenseChannel::deterministic(&map, k)
            })
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct DownWitness {
    pub channel: DenseChannel,
    pub rounds: Vec<DenseRound>,
    pub eve_condition: f64,
}

fn try_channel(a: &Analysis, ch: &DenseChannel) -> Result<Option<DownWitness>> {
    let v = &a.view;
    let vb = v.apply_channel(&ch.w, ch.k);
    let pd = ubi_pd_view(&vb, a.opts.tol, a.opts.max_rounds, a.opts.search_cap)?;
    let Some(rounds) = pd.rounds else { return Ok(None) };
    let state = run_dense(&vb, &rounds);
    let e = eve_condition(v, ch, &vb, &state);
    Ok((e <= a.opts.tol).then(|| DownWitness { channel: ch.clone(), rounds, eve_condition: e }))
}

/// Search for a UBI-PD↓ witness among the identity channel, the
/// deterministic coarse-grainings and the intrinsic minimizer.
pub fn find_down_witness(a: &Analysis) -> Result<Option<DownWitness>> {
    let v = &a.view;
    if let Some(w) = try_channel(a, &DenseChannel::identity(v.nz))? {
        return Ok(Some(w));
    }
    if let Some(chs) = coarse_grainings(v) {
        for ch in &chs {
            if let Some(w) = try_channel(a, ch)? {
                return Ok(Some(w));
            }
        }
    }
    match a.intrinsic() {
        Ok(r) => try_channel(a, &r.dense),
        Err(_) => Ok(None),
    }
}

pub fn down_witness_detection(v: &Tripartite, w: &DownWitness) -> Detection {
    let vb = v.apply_channel(&w.channel.w, w.channel.k);
    Detection::yes(Witness::ChannelTranscript {
        channel: w.channel.to_channel(&v.z_labels),
        protocol: dense_to_protocol(&vb, &w.rounds),
        eve_condition: w.eve_condition,
    })
}

pub fn is_ubi_pd_down(a: &Analysis) -> Result<Detection> {
    let v = &a.view;
    if let Some(w) = find_down_witness(a)? {
        return Ok(down_witness_detection(v, &w));
    }
    let (ex, ey, _) = v.effective_sizes();
    if ex.min(ey) == 2 {
        let r = a.intrinsic()?;
        if r.value > a.opts.tol {
            let certificates = zero_pattern_scan_view(v);
            if !certificates.is_empty() {
                return Ok(Detection::no(Some(Witness::Certificates { intrinsic: r.value, certificates })));
            }
        }
        return Ok(Detection::unknown("no witness channel found and no impossibility certificate applies"));
    }
    Ok(Detection::unknown("no witness channel found; absence of a witness is not a refutation here"))
}

// ---------------------------------------------------------------------------
// flagged mixtures

enum Realize {
    Done(Vec<DenseRound>),
    Impossible,
    OutOfRounds,
}

/// Finest Z-determined message of `speaker` in each cell: own symbols are
/// merged when they co-occur with a common flag value.
fn finest_flag_round(v: &Tripartite, state: &CellState, flag: &[usize], speaker: Speaker) -> DenseRound {
    let n_own = if speaker == Speaker::Alice { v.nx } else { v.ny };
    let n_flag = flag.iter().filter(|&&f| f != usize::MAX).max().map_or(1, |m| m + 1);
    let mut msg = Vec::with_capacity(state.count());
    for c in 0..state.count() {
        let mut pairs = vec![0.0; n_own * n_flag];
        for x in 0..v.nx {
            for y in 0..v.ny {
                if state.cell[x * v.ny + y] == c {
                    let own = if speaker == Speaker::Alice { x } else { y };
                    pairs[own * n_flag + flag[x * v.ny + y]] = 1.0;
                }
            }
        }
        let b = block_map(&pairs, n_own, n_flag);
        msg.push(b.x.iter().map(|k| k.unwrap_or(0)).collect());
    }
    DenseRound { speaker, msg }
}

fn flag_constant_per_cell(state: &CellState, flag: &[usize]) -> bool {
    let mut seen = vec![usize::MAX; state.count()];
    for (i, &c) in state.cell.iter().enumerate() {
        if c == usize::MAX {
            continue;
        }
        if seen[c] == usize::MAX {
            seen[c] = flag[i];
        } else if seen[c] != flag[i] {
            return false;
        }
    }
    true
}

fn realize_flag(v: &Tripartite, flag: &[usize], max_rounds: usize) -> Realize {
    let init = CellState::initial(v);
    if flag_constant_per_cell(&init, flag) {
        return Realize::Done(Vec::new());
    }
    let mut out_of_rounds = false;
    for first in [Speaker::Bob, Speaker::Alice] {
        let mut state = init.clone();
        let mut rounds = Vec::new();
        let mut speaker = first;
        let mut idle = 0;
        loop {
            let round = finest_flag_round(v, &state, flag, speaker);
            let next = state.advance(v, &round);
            if next.count() == state.count() {
                idle += 1;
                if idle == 2 {
                    break;
                }
            } else {
                idle = 0;
                if rounds.len() == max_rounds {
                    out_of_rounds = true;
                    break;
                }
                rounds.push(round);
                state = next;
                if flag_constant_per_cell(&state, flag) {
                    return Realize::Done(rounds);
                }
            }
            speaker = speaker.other();
        }
    }
    if out_of_rounds {
        Realize::OutOfRounds
    } else {
        Realize::Impossible
    }
}

pub enum FlagSearch {
    Found { cells: Vec<Vec<usize>>, rounds: Vec<DenseRound> },
    Impossible,
    OutOfRounds,
}

/// Coarsest-first search for a flag M = P(Z) with (X,Y) ⊥ Z and SBI inside
/// each cell, F(x, y) = P(z) well defined on the support, and F computable
/// by a protocol whose messages are themselves functions of the flag.
pub fn flag_search(v: &Tripartite, tol: f64, max_rounds: usize) -> Result<FlagSearch> {
    let support = v.z_support();
    if support.len() > MAX_COARSE_GRAIN {
        return Err(Error::SizeCap(format!(
            "{} supported Eve symbols exceed the coarse-graining cap of {MAX_COARSE_GRAIN}",
            support.len()
        )));
    }
    let mut out_of_rounds = false;
    for p in set_partitions(support.len())? {
        let k = crate::partitions::block_count(&p).max(1);
        let map = crate::partitions::lift(&p, &support, v.nz);
        // I(XY:Z|P)
        let nxy = v.nx * v.ny;
        let mut arr = vec![0.0; nxy * v.nz * k];
        for xy in 0..nxy {
            for z in 0..v.nz {
                arr[(xy * v.nz + z) * k + map[z]] += v.p[xy * v.nz + z];
            }
        }
        if cmi_dense(&arr, nxy, v.nz, k) > tol {
            continue;
        }
        let vp = v.coarse_grain(&map, k);
        if bi_value(&vp) > tol {
            continue;
        }
        let mut flag = vec![usize::MAX; nxy];
        let mut ok = true;
        for xy in 0..nxy {
            for z in 0..v.nz {
                if v.p[xy * v.nz + z] > 0.0 {
                    if flag[xy] == usize::MAX {
                        flag[xy] = map[z];
                    } else if flag[xy] != map[z] {
                        ok = false;
                    }
                }
            }
        }
        if !ok {
            continue;
        }
        match realize_flag(v, &flag, max_rounds) {
            Realize::Done(rounds) => {
                let mut cells = vec![Vec::new(); k];
                for &z in &support {
                    cells[map[z]].push(z);
                }
                return Ok(FlagSearch::Found { cells, rounds });
            }
            Realize::OutOfRounds => out_of_rounds = true,
            Realize::Impossible => {}
        }
    }
    Ok(if out_of_rounds { FlagSearch::OutOfRounds } else { FlagSearch::Impossible })
}

pub fn is_lopc_flagged(v: &Tripartite, tol: f64, max_rounds: usize) -> Detection {
    match flag_search(v, tol, max_rounds) {
        Ok(FlagSearch::Found { cells, rounds }) => Detection::yes(Witness::Flag {
            cells: cells.iter().map(|c| c.iter().map(|&z| v.z_labels[z].clone()).collect()).collect(),
            protocol: dense_to_protocol(v, &rounds),
        }),
        Ok(FlagSearch::Impossible) => Detection::no(None),
        Ok(FlagSearch::OutOfRounds) => {
            Detection::unknown(format!("a flag exists but needs more than {max_rounds} rounds to announce"))
        }
        Err(e) => Detection::unknown(e.to_string()),
    }
}

/// Common information between the fused pair (X, Y) and Z, then
/// I(XY:Z|J_{(XY)Z}).
pub fn is_bidisjoint(v: &Tripartite, tol: f64) -> Detection {
    let fused = Tripartite::from_dense(v.nx * v.ny, v.nz, 1, v.p.clone());
    let i = bi_value(&fused);
    if i > tol {
        return Detection::violation("I(XY:Z|J_(XY)Z)", i, tol);
    }
    Detection::yes(Witness::Vanishes { quantity: "I(XY:Z|J_(XY)Z)".into(), value: i, tol })
}

// ---------------------------------------------------------------------------
// report

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub verdicts: BTreeMap<String, Verdict>,
    pub witnesses: BTreeMap<String, Witness>,
    pub notes: BTreeMap<String, String>,
    pub certificates_checked: Vec<String>,
}

pub fn classify(table: &JointTable, roles: &Roles, opts: &ClassifyOptions) -> Result<ClassReport> {
    let a = Analysis::new(table, roles, opts.clone())?;
    classify_analysis(table, roles, &a)
}

pub fn classify_analysis(table: &JointTable, roles: &Roles, a: &Analysis) -> Result<ClassReport> {
    let v = &a.view;
    let tol = a.opts.tol;
    let mut d: BTreeMap<&str, Detection> = BTreeMap::new();
    d.insert("sbi", is_sbi(v, tol));
    d.insert("bi", is_bi(v, tol));
    d.insert("ubi", is_ubi(v, tol));
    d.insert("ubi_pd", is_ubi_pd(a)?.detection);
    d.insert("ubi_pd_down", is_ubi_pd_down(a)?);
    d.insert("lopc_flagged", is_lopc_flagged(v, tol, a.opts.max_rounds));
    d.insert("bidisjoint", is_bidisjoint(v, tol));

    let mut report = ClassReport {
        verdicts: BTreeMap::new(),
        witnesses: BTreeMap::new(),
        notes: BTreeMap::new(),
        certificates_checked: Vec::new(),
    };
    if d["lopc_flagged"].verdict != Verdict::Unknown {
        report.notes.insert(
            "lopc_flagged".into(),
            "flags are realized by deterministic protocols whose messages are functions of Eve's symbol".into(),
        );
    }
    for (k, det) in d {
        report.verdicts.insert(k.to_string(), det.verdict);
        if let Some(w) = det.witness {
            report.witnesses.insert(k.to_string(), w);
        }
        if let Some(n) = det.note {
            report.notes.insert(k.to_string(), n);
        }
    }
    check_hierarchy(&report.verdicts)?;
    revalidate(table, roles, a, &mut report)?;
    Ok(report)
}

/// Proven inclusions must never be contradicted.
pub fn check_hierarchy(verdicts: &BTreeMap<String, Verdict>) -> Result<()> {
    let get = |k: &str| verdicts.get(k).copied().unwrap_or(Verdict::Unknown);
    let chains = [
        ("sbi", "ubi"),
        ("ubi", "ubi_pd"),
        ("ubi_pd", "ubi_pd_down"),
        ("lopc_flagged", "ubi_pd"),
        ("ubi_pd", "bi"),
        ("sbi", "bidisjoint"),
    ];
    for (sub, sup) in chains {
        if get(sub) == Verdict::Yes && get(sup) == Verdict::No {
            return Err(Error::InternalConsistency(format!("`{sub}` holds but `{sup}` was refuted")));
        }
    }
    Ok(())
}

/// Replays witnesses through the table-level entropy routines.
fn revalidate(table: &JointTable, roles: &Roles, a: &Analysis, report: &mut ClassReport) -> Result<()> {
    use crate::entropy::conditional_mutual_information as cmi;
    let tol = a.opts.tol;
    fn names(g: &[String]) -> Vec<&str> {
        g.iter().map(String::as_str).collect()
    }
    let (xs, ys, zs) = (names(&roles.x), names(&roles.y), names(&roles.z));
    let fail = |what: &str, value: f64| {
        Err(Error::InternalConsistency(format!("witness for `{what}` fails re-validation ({value:e})")))
    };
    for (class, w) in &report.witnesses {
        if report.verdicts[class] != Verdict::Yes {
            continue;
        }
        match w {
            Witness::CommonPartition { .. } => {
                let i = cmi(table, &[&xs[..], &ys[..]].concat(), &zs, &[])?;
                if i > tol {
                    return fail(class, i);
                }
                report.certificates_checked.push(format!("{class}: I(XY:Z) = {i:.3e}"));
            }
            Witness::Transcript { protocol, .. } | Witness::Flag { protocol, .. } => {
                let tr = apply_protocol(table, roles, protocol)?;
                let r = crate::protocol::verify_message_identity(&tr, roles, tol)?;
                let leak = (tr.extended.clone(), &tr.message_variables);
                let with_j = crate::common_info::extend_with_common_function(&leak.0, roles, "J*")?;
                let ms: Vec<&str> = leak.1.iter().map(String::as_str).collect();
                let l = if ms.is_empty() { 0.0 } else { cmi(&with_j, &ms, &["J*"], &zs)? };
                if l > tol || !r.extended_bi {
                    return fail(class, l);
                }
                report.certificates_checked.push(format!("{class}: I(M:J|Z) = {l:.3e}, message identity gap {:.3e}", r.gap));
            }
            Witness::ChannelTranscript { channel, protocol, eve_condition } => {
                if zs.len() != 1 {
                    report.certificates_checked.push(format!("{class}: eve condition {eve_condition:.3e} (grouped Eve)"));
                    continue;
                }
                let zb = "Zbar*";
                let ext = table.extend_with_channel(zs[0], channel, zb)?;
                let degraded = Roles { x: roles.x.clone(), y: roles.y.clone(), z: vec![zb.to_string()] };
                let tr = apply_protocol(&ext, &degraded, protocol)?;
                let with_j = crate::common_info::extend_with_common_function(&tr.extended, &degraded, "J*")?;
                let ms: Vec<&str> = tr.message_variables.iter().map(String::as_str).collect();
                let cond: Vec<&str> = ms.iter().copied().chain([zb]).collect();
                let e = cmi(&with_j, &zs, &["J*"], &cond)?;
                if e > tol {
                    return fail(class, e);
                }
                report.certificates_checked.push(format!("{class}: I(Z:J|M Zbar) = {e:.3e}"));
            }
            Witness::Vanishes { .. } if class == "bi" => {
                let with_j = crate::common_info::extend_with_common_function(table, roles, "J*")?;
                let cond: Vec<&str> = zs.iter().copied().chain(["J*"]).collect();
                let i = cmi(&with_j, &xs, &ys, &cond)?;
                if i > tol {
                    return fail(class, i);
                }
                report.certificates_checked.push(format!("{class}: I(X:Y|J Z) = {i:.3e}"));
            }
            _ => {}
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn view(name: &str) -> Tripartite {
        Tripartite::from_table(&corpus::named(name).unwrap(), &Roles::default()).unwrap()
    }

    #[test]
    fn ubi_examples() {
        assert_eq!(is_ubi(&view("ERASURE_HALF"), 1e-9).verdict, Verdict::Yes);
        assert_eq!(is_ubi(&view("SPOILED_BIT"), 1e-9).verdict, Verdict::No);
        assert_eq!(is_ubi(&view("XOR_TRIPLE"), 1e-9).verdict, Verdict::No);
        match is_ubi(&view("ERASURE_HALF"), 1e-9).witness {
            Some(Witness::BlockLabeling { k_x, k_y }) => {
                assert_eq!(k_x["0"], k_y["0"]);
                assert_ne!(k_x["0"], k_x["1"]);
            }
            w => panic!("unexpected witness {w:?}"),
        }
    }

    #[test]
    fn overlapping_branches_conflict() {
        // FLAGGED_QUAD with branch b moved onto the symbols {0, 1}
        let mut mass = vec![0.0; 2 * 2 * 2];
        mass[0] = 0.25; // (0,0,a)
        mass[6] = 0.25; // (1,1,a)
        for x in 0..2 {
            for y in 0..2 {
                mass[(x * 2 + y) * 2 + 1] += 0.125;
            }
        }
        let v = Tripartite::from_dense(2, 2, 2, mass);
        assert!(matches!(is_ubi(&v, 1e-9).witness, Some(Witness::LabelConflict { .. })));
    }

    #[test]
    fn binary_side_message() {
        let a = Analysis::new(&corpus::named("MIXED_2X3").unwrap(), &Roles::default(), ClassifyOptions::default())
            .unwrap();
        let pd = is_ubi_pd(&a).unwrap();
        assert_eq!(pd.detection.verdict, Verdict::Yes);
        assert_eq!(pd.rounds.unwrap()[0].msg[0], vec![1, 1, 0]);
        let a = Analysis::new(&corpus::named("SPOILED_BIT").unwrap(), &Roles::default(), ClassifyOptions::default())
            .unwrap();
        assert_eq!(is_ubi_pd(&a).unwrap().detection.verdict, Verdict::No);
    }

    #[test]
    fn flag_examples() {
        assert_eq!(is_lopc_flagged(&view("FLAGGED_QUAD"), 1e-9, 2).verdict, Verdict::Yes);
        assert_eq!(is_lopc_flagged(&view("FLAGGED_NONUBI"), 1e-9, 2).verdict, Verdict::Yes);
        assert_eq!(is_lopc_flagged(&view("ERASURE_HALF"), 1e-9, 2).verdict, Verdict::No);
        assert_eq!(is_lopc_flagged(&view("PERFECT_BIT"), 1e-9, 2).verdict, Verdict::Yes);
        assert_eq!(is_lopc_flagged(&view("XOR_TRIPLE"), 1e-9, 2).verdict, Verdict::No);
    }

    #[test]
    fn bidisjoint_examples() {
        assert_eq!(is_bidisjoint(&view("PERFECT_BIT"), 1e-9).verdict, Verdict::Yes);
        assert_eq!(is_bidisjoint(&view("FLAGGED_QUAD"), 1e-9).verdict, Verdict::Yes);
        assert_eq!(is_bidisjoint(&view("ERASURE_HALF"), 1e-9).verdict, Verdict::No);
    }

    #[test]
    fn hierarchy_violation_is_an_error() {
        let mut v = BTreeMap::new();
        v.insert("ubi".to_string(), Verdict::Yes);
        v.insert("ubi_pd".to_string(), Verdict::No);
        assert!(matches!(check_hierarchy(&v), Err(Error::InternalConsistency(_))));
    }
}
