//! Public-discussion protocols made of deterministic message functions.
//!
//! Round k's message is a function of the speaker's own symbol and of the
//! messages sent before it. In JSON a round's map is keyed by
//! `('<own label>','<prior messages joined by ,>')`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::common_info::{cmi_given_common, conditional_block_maps, extend_with_common_function, BlockMap};
use crate::dist::JointTable;
use crate::entropy::conditional_mutual_information;
use crate::error::{Error, Result};
use crate::partitions::set_partitions;
use crate::view::{Roles, Tripartite};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    Alice,
    Bob,
}

impl Speaker {
    pub fn other(self) -> Speaker {
        match self {
            Speaker::Alice => Speaker::Bob,
            Speaker::Bob => Speaker::Alice,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub speaker: Speaker,
    pub map: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Protocol {
    pub rounds: Vec<Round>,
}

impl Protocol {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let p: Protocol = serde_json::from_str(s)?;
        for r in &p.rounds {
            for k in r.map.keys() {
                parse_key(k)?;
            }
        }
        Ok(p)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("protocol serializes")
    }
}

pub fn format_key(own: &str, prior: &[String]) -> String {
    format!("('{}','{}')", own, prior.join(","))
}

/// Splits a map key into the own label and the prior message list.
pub fn parse_key(key: &str) -> Result<(String, Vec<String>)> {
    let bad = || Error::Malformed(format!("message map key `{key}` is not of the form ('own','m,…')"));
    let inner = key.strip_prefix("('").and_then(|k| k.strip_suffix("')")).ok_or_else(bad)?;
    let (own, prior) = inner.split_once("','").ok_or_else(bad)?;
    let prior = if prior.is_empty() { Vec::new() } else { prior.split(',').map(str::to_string).collect() };
    Ok((own.to_string(), prior))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub protocol: Protocol,
    /// Input table extended by one variable per round.
    pub extended: JointTable,
    pub message_variables: Vec<String>,
}

fn fresh_name(table: &JointTable, base: &str) -> String {
    let mut name = base.to_string();
    while table.has_variable(&name) {
        name.push('\'');
    }
    name
}

fn group_positions(table: &JointTable, group: &[String]) -> Result<Vec<usize>> {
    group.iter().map(|g| table.index_of(g)).collect()
}

fn group_label(table: &JointTable, pos: &[usize], idx: &[usize]) -> String {
    let alpha = table.alphabets();
    pos.iter().map(|&p| alpha[p][idx[p]].as_str()).collect::<Vec<_>>().join(",")
}

/// Runs the protocol on `table`: Alice speaks from the X group, Bob from the
/// Y group. Message variables are named `M1`, `M2`, … and each message
/// alphabet is the sorted set of labels its map can emit.
pub fn apply_protocol(table: &JointTable, roles: &Roles, protocol: &Protocol) -> Result<Transcript> {
    let x_pos = group_positions(table, &roles.x)?;
    let y_pos = group_positions(table, &roles.y)?;
    let mut ext = table.clone();
    let mut message_variables = Vec::new();
    for (k, round) in protocol.rounds.iter().enumerate() {
        let name = fresh_name(&ext, &format!("M{}", k + 1));
        let labels: Vec<String> = round.map.values().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        if labels.is_empty() {
            return Err(Error::NonTotalMessage(format!("round {} has an empty map", k + 1)));
        }
        let own_pos = if round.speaker == Speaker::Alice { &x_pos } else { &y_pos };
        let prior_pos = message_variables.iter().map(|m: &String| ext.index_of(m)).collect::<Result<Vec<_>>>()?;
        // totality is only required where the (own, prior) pair has mass
        let mut missing = None;
        ext.for_each_support(|idx, _| {
            if missing.is_some() {
                return;
            }
            let own = group_label(&ext, own_pos, idx);
            let prior: Vec<String> = prior_pos.iter().map(|&p| ext.alphabets()[p][idx[p]].clone()).collect();
            let key = format_key(&own, &prior);
            if !round.map.contains_key(&key) {
                missing = Some(key);
            }
        });
        if let Some(key) = missing {
            return Err(Error::NonTotalMessage(format!("round {} has no entry for {key}", k + 1)));
        }
        let snapshot = ext.clone();
        ext = ext.extend_with_function(&name, labels.clone(), |idx| {
            let own = group_label(&snapshot, own_pos, idx);
            let prior: Vec<String> = prior_pos.iter().map(|&p| snapshot.alphabets()[p][idx[p]].clone()).collect();
            round
                .map
                .get(&format_key(&own, &prior))
                .and_then(|m| labels.iter().position(|l| l == m))
                .unwrap_or(0)
        })?;
        message_variables.push(name);
    }
    Ok(Transcript { protocol: protocol.clone(), extended: ext, message_variables })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MessageIdentityReport {
    /// False when the input is not block independent; the other fields are
    /// then still filled in but carry no claim.
    pub applicable: bool,
    /// I(X:Y|ZM)
    pub lhs: f64,
    /// I(X:Y|Z) − I(M:J_{XY|Z}|Z)
    pub rhs: f64,
    pub gap: f64,
    /// BI of the regrouped table (XM, YM, ZM).
    pub extended_bi: bool,
    pub extended_bi_value: f64,
    pub pass: bool,
}

/// Compares I(X:Y|ZM) with I(X:Y|Z) − I(M:J_{XY|Z}|Z) for the full
/// transcript and re-checks block independence after the messages.
pub fn verify_message_identity(transcript: &Transcript, roles: &Roles, tol: f64) -> Result<MessageIdentityReport> {
    roles.check_disjoint()?;
    let ext = &transcript.extended;
    let ms: Vec<&str> = transcript.message_variables.iter().map(String::as_str).collect();
    let base = Tripartite::from_table(ext, roles)?;
    let bi_value = cmi_given_common(&base, &conditional_block_maps(&base));
    let applicable = bi_value <= tol;

    let xs: Vec<&str> = roles.x.iter().map(String::as_str).collect();
    let ys: Vec<&str> = roles.y.iter().map(String::as_str).collect();
    let zs: Vec<&str> = roles.z.iter().map(String::as_str).collect();
    let zm: Vec<&str> = zs.iter().chain(&ms).copied().collect();
    let lhs = conditional_mutual_information(ext, &xs, &ys, &zm)?;
    let cmi = conditional_mutual_information(ext, &xs, &ys, &zs)?;
    let leak = if ms.is_empty() {
        0.0
    } else {
        let jname = fresh_name(ext, "J");
        let with_j = extend_with_common_function(ext, roles, &jname)?;
        conditional_mutual_information(&with_j, &ms, &[jname.as_str()], &zs)?
    };
    let rhs = cmi - leak;
    let gap = (lhs - rhs).abs();

    let regroup = |g: &[String]| g.iter().cloned().chain(transcript.message_variables.iter().cloned()).collect();
    let ext_roles = Roles { x: regroup(&roles.x), y: regroup(&roles.y), z: regroup(&roles.z) };
    let ev = Tripartite::from_table(ext, &ext_roles)?;
    let extended_bi_value = cmi_given_common(&ev, &conditional_block_maps(&ev));
    let extended_bi = extended_bi_value <= tol;
    Ok(MessageIdentityReport {
        applicable,
        lhs,
        rhs,
        gap,
        extended_bi,
        extended_bi_value,
        pass: applicable && gap <= tol && extended_bi,
    })
}

// ---------------------------------------------------------------------------
// dense protocols over a tripartite view

/// Transcript state: every supported (x, y) pair sits in a cell named by the
/// messages exchanged so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellState {
    /// Cell per (x, y) (row-major); `usize::MAX` where p(x, y) = 0.
    pub cell: Vec<usize>,
    /// Message history of every cell.
    pub history: Vec<Vec<usize>>,
}

/// One round: `msg[cell][own symbol]` is the message index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseRound {
    pub speaker: Speaker,
    pub msg: Vec<Vec<usize>>,
}

impl CellState {
    pub fn initial(v: &Tripartite) -> Self {
        let pxy = v.pxy();
        let cell = pxy.iter().map(|&m| if m > 0.0 { 0 } else { usize::MAX }).collect();
        Self { cell, history: vec![Vec::new()] }
    }

    pub fn count(&self) -> usize {
        self.history.len()
    }

    /// Own symbols of `speaker` that occur in cell `c`, ascending.
    pub fn present(&self, v: &Tripartite, speaker: Speaker, c: usize) -> Vec<usize> {
        let mut set = BTreeSet::new();
        for x in 0..v.nx {
            for y in 0..v.ny {
                if self.cell[x * v.ny + y] == c {
                    set.insert(if speaker == Speaker::Alice { x } else { y });
                }
            }
        }
        set.into_iter().collect()
    }

    /// Applies a round. New cells are numbered by (old cell, message).
    pub fn advance(&self, v: &Tripartite, round: &DenseRound) -> CellState {
        let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut raw = vec![usize::MAX; self.cell.len()];
        for x in 0..v.nx {
            for y in 0..v.ny {
                let c = self.cell[x * v.ny + y];
                if c == usize::MAX {
                    continue;
                }
                let own = if round.speaker == Speaker::Alice { x } else { y };
                let key = (c, round.msg[c][own]);
                ids.entry(key).or_insert(0);
                raw[x * v.ny + y] = 0;
            }
        }
        let mut history = Vec::with_capacity(ids.len());
        for (i, (key, id)) in ids.iter_mut().enumerate() {
            *id = i;
            let mut h = self.history[key.0].clone();
            h.push(key.1);
            history.push(h);
        }
        for x in 0..v.nx {
            for y in 0..v.ny {
                let c = self.cell[x * v.ny + y];
                if c != usize::MAX {
                    let own = if round.speaker == Speaker::Alice { x } else { y };
                    raw[x * v.ny + y] = ids[&(c, round.msg[c][own])];
                }
            }
        }
        CellState { cell: raw, history }
    }
}

pub fn run_dense(v: &Tripartite, rounds: &[DenseRound]) -> CellState {
    rounds.iter().fold(CellState::initial(v), |s, r| s.advance(v, r))
}

/// Converts dense rounds to the labeled JSON form. Keys are listed for
/// every (own symbol, history) pair that occurs with positive probability.
pub fn dense_to_protocol(v: &Tripartite, rounds: &[DenseRound]) -> Protocol {
    let mut state = CellState::initial(v);
    let mut out = Vec::new();
    for r in rounds {
        let mut map = BTreeMap::new();
        for c in 0..state.count() {
            let prior: Vec<String> = state.history[c].iter().map(|m| format!("m{m}")).collect();
            for s in state.present(v, r.speaker, c) {
                let own = if r.speaker == Speaker::Alice { &v.x_labels[s] } else { &v.y_labels[s] };
                map.insert(format_key(own, &prior), format!("m{}", r.msg[c][s]));
            }
        }
        out.push(Round { speaker: r.speaker, map });
        state = state.advance(v, r);
    }
    Protocol { rounds: out }
}

/// View of ((X,T), (Y,T), (Z,T)) for transcript T, with only the label
/// combinations that occur kept.
pub fn extended_view(v: &Tripartite, state: &CellState) -> Tripartite {
    let t = state.count();
    let mut xid = vec![usize::MAX; v.nx * t];
    let mut yid = vec![usize::MAX; v.ny * t];
    let mut zid = vec![usize::MAX; v.nz * t];
    let (mut nx, mut ny, mut nz) = (0, 0, 0);
    let mut entries = Vec::new();
    for x in 0..v.nx {
        for y in 0..v.ny {
            let c = state.cell[x * v.ny + y];
            if c == usize::MAX {
                continue;
            }
            for z in 0..v.nz {
                let m = v.at(x, y, z);
                if m > 0.0 {
                    for (ids, n, k) in [(&mut xid, &mut nx, x), (&mut yid, &mut ny, y), (&mut zid, &mut nz, z)] {
                        if ids[k * t + c] == usize::MAX {
                            ids[k * t + c] = *n;
                            *n += 1;
                        }
                    }
                    entries.push((xid[x * t + c], yid[y * t + c], zid[z * t + c], m));
                }
            }
        }
    }
    let (nx, ny, nz) = (nx.max(1), ny.max(1), nz.max(1));
    let mut p = vec![0.0; nx * ny * nz];
    for (a, b, c, m) in entries {
        p[(a * ny + b) * nz + c] += m;
    }
    let mut out = Tripartite::from_dense(nx, ny, nz, p);
    out.eps = v.eps;
    out
}

/// I(T:J_{XY|Z}|Z) for transcript T.
pub fn leak_about_common(v: &Tripartite, maps: &[Option<BlockMap>], state: &CellState) -> f64 {
    let t = state.count();
    let nj = maps.iter().flatten().map(|b| b.count).max().unwrap_or(1).max(1);
    let mut ptjz = vec![0.0; t * nj * v.nz];
    for x in 0..v.nx {
        for y in 0..v.ny {
            let c = state.cell[x * v.ny + y];
            if c == usize::MAX {
                continue;
            }
            for z in 0..v.nz {
                let m = v.at(x, y, z);
                if m > 0.0 {
                    let j = maps[z].as_ref().and_then(|b| b.of(x, y)).unwrap_or(0);
                    ptjz[(c * nj + j) * v.nz + z] += m;
                }
            }
        }
    }
    crate::view::cmi_dense(&ptjz, t, nj, v.nz)
}

/// Every protocol of 1..=max_rounds alternating rounds in which each round
/// splits, per cell, the speaker's present symbols by a set partition. Up
/// to relabeling of messages this covers all deterministic protocols.
pub fn enumerate_protocols(v: &Tripartite, max_rounds: usize) -> Result<Vec<Vec<DenseRound>>> {
    let mut out = Vec::new();
    for first in [Speaker::Alice, Speaker::Bob] {
        let mut frontier: Vec<(Vec<DenseRound>, CellState)> = vec![(Vec::new(), CellState::initial(v))];
        let mut speaker = first;
        for _ in 0..max_rounds {
            let mut next = Vec::new();
            for (rounds, state) in &frontier {
                for round in round_choices(v, state, speaker)? {
                    let s = state.advance(v, &round);
                    let mut r = rounds.clone();
                    r.push(round);
                    out.push(r.clone());
                    next.push((r, s));
                }
            }
            frontier = next;
            speaker = speaker.other();
        }
    }
    Ok(out)
}

/// All rounds for `speaker` from `state`: a set partition of the present
/// symbols in every cell.
pub fn round_choices(v: &Tripartite, state: &CellState, speaker: Speaker) -> Result<Vec<DenseRound>> {
    let n_own = if speaker == Speaker::Alice { v.nx } else { v.ny };
    let per_cell: Vec<(Vec<usize>, Vec<Vec<usize>>)> = (0..state.count())
        .map(|c| {
            let present = state.present(v, speaker, c);
            set_partitions(present.len()).map(|ps| (present, ps))
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    let mut choice = vec![0usize; per_cell.len()];
    loop {
        let msg = per_cell
            .iter()
            .zip(&choice)
            .map(|((present, ps), &i)| {
                let mut row = vec![0; n_own];
                for (&s, &b) in present.iter().zip(&ps[i]) {
                    row[s] = b;
                }
                row
            })
            .collect();
        out.push(DenseRound { speaker, msg });
        // odometer over the per-cell choices
        let mut k = 0;
        loop {
            if k == choice.len() {
                return Ok(out);
            }
            choice[k] += 1;
            if choice[k] < per_cell[k].1.len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn one_round(speaker: Speaker, entries: &[(&str, &str)]) -> Protocol {
        Protocol {
            rounds: vec![Round {
                speaker,
                map: entries.iter().map(|(o, m)| (format_key(o, &[]), m.to_string())).collect(),
            }],
        }
    }

    #[test]
    fn key_round_trip() {
        let k = format_key("y0", &["m1".into(), "m0".into()]);
        assert_eq!(k, "('y0','m1,m0')");
        assert_eq!(parse_key(&k).unwrap(), ("y0".to_string(), vec!["m1".to_string(), "m0".to_string()]));
        assert_eq!(parse_key("('0','')").unwrap().1, Vec::<String>::new());
        assert!(parse_key("y0").is_err());
    }

    #[test]
    fn empty_protocol_is_identity() {
        let t = corpus::named("ERASURE_HALF").unwrap();
        let tr = apply_protocol(&t, &Roles::default(), &Protocol::default()).unwrap();
        assert_eq!(tr.extended, t);
        let r = verify_message_identity(&tr, &Roles::default(), 1e-9).unwrap();
        assert!(r.pass && r.gap < 1e-12);
    }

    #[test]
    fn bob_revealing_y_destroys_the_key() {
        let t = corpus::named("PERFECT_BIT").unwrap();
        let p = one_round(Speaker::Bob, &[("0", "m0"), ("1", "m1")]);
        let tr = apply_protocol(&t, &Roles::default(), &p).unwrap();
        assert_eq!(tr.message_variables, vec!["M1"]);
        let i = conditional_mutual_information(&tr.extended, &["X"], &["Y"], &["M1"]).unwrap();
        assert!(i.abs() < 1e-12);
        let r = verify_message_identity(&tr, &Roles::default(), 1e-9).unwrap();
        assert!(r.pass);
        assert!(r.lhs.abs() < 1e-12 && r.rhs.abs() < 1e-12);
        // marginal on the original variables is untouched
        let back = tr.extended.marginalize(&["X", "Y", "Z"]).unwrap();
        for (a, b) in back.mass().iter().zip(t.mass()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn non_total_maps_are_rejected() {
        let t = corpus::named("PERFECT_BIT").unwrap();
        let p = one_round(Speaker::Bob, &[("0", "m0")]);
        assert!(matches!(apply_protocol(&t, &Roles::default(), &p), Err(Error::NonTotalMessage(_))));
    }

    #[test]
    fn non_bi_input_is_not_applicable() {
        let t = corpus::named("NONBI_MIX").unwrap();
        let tr = apply_protocol(&t, &Roles::default(), &Protocol::default()).unwrap();
        let r = verify_message_identity(&tr, &Roles::default(), 1e-9).unwrap();
        assert!(!r.applicable && !r.pass);
    }

    #[test]
    fn dense_and_labeled_forms_agree() {
        let t = corpus::named("FLAGGED_NONUBI").unwrap();
        let v = Tripartite::from_table(&t, &Roles::default()).unwrap();
        for rounds in enumerate_protocols(&v, 2).unwrap() {
            let p = dense_to_protocol(&v, &rounds);
            let tr = apply_protocol(&t, &Roles::default(), &p).unwrap();
            let ms: Vec<&str> = tr.message_variables.iter().map(String::as_str).collect();
            let lhs = conditional_mutual_information(&tr.extended, &["X"], &["Y"], &[&["Z"][..], &ms].concat()).unwrap();
            let state = run_dense(&v, &rounds);
            assert!((extended_view(&v, &state).cmi() - lhs).abs() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip() {
        let p = one_round(Speaker::Bob, &[("y0", "m0"), ("y1", "m1")]);
        let s = p.to_json_string();
        assert_eq!(s, r#"{"rounds":[{"speaker":"bob","map":{"('y0','')":"m0","('y1','')":"m1"}}]}"#);
        assert_eq!(Protocol::from_json_str(&s).unwrap(), p);
    }
}
