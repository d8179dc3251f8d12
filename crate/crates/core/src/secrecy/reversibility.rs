//! Decision procedure for K_D = K_C.

use serde::Serialize;

use super::certificates::{zero_pattern_scan_view, Certificate};
use super::intrinsic::cmi_through;
use super::DenseChannel;
use crate::classes::{bi_value, coarse_grainings, find_down_witness, is_ubi_pd, Analysis, ClassifyOptions, Verdict};
use crate::dist::{Channel, JointTable};
use crate::error::Result;
use crate::protocol::{dense_to_protocol, Protocol};
use crate::view::Roles;

/// Zero intrinsic information counts as zero below this.
pub const ZERO_INTRINSIC: f64 = 1e-9;
/// Channels within this of the intrinsic minimum are treated as minimizers.
pub const MINIMIZER_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Reversible,
    NotReversible,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// Key agreement by public discussion alone, Eve untouched.
    UbiPd { protocol: Protocol },
    ZeroIntrinsic { channel: Channel, value: f64 },
    /// Degrading channel plus protocol after which the table is UBI.
    DownWitness { channel: Channel, protocol: Protocol, eve_condition: f64 },
    /// Zero-pattern certificate that K_D < I(X:Y|Z).
    Impossibility { certificate: Certificate },
    /// A near-minimizing channel whose output is not block independent.
    CandidateRejected { channel: Channel, value: f64, bi_value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReversibilityVerdict {
    pub status: Status,
    /// K_D = K_C when reversible.
    pub key_value: Option<f64>,
    /// Which rule decided: ubi_pd, zero_intrinsic, ubi_pd_down,
    /// binary_certificate, or none.
    pub characterization: Option<String>,
    pub certificates: Vec<Evidence>,
    pub intrinsic: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub fn decide_reversibility(table: &JointTable, roles: &Roles, opts: &ClassifyOptions) -> Result<ReversibilityVerdict> {
    decide(&Analysis::new(table, roles, opts.clone())?)
}

pub fn decide(a: &Analysis) -> Result<ReversibilityVerdict> {
    let v = &a.view;
    let tol = a.opts.tol;
    let verdict = |status, key_value, ch: Option<&str>, certificates, intrinsic, note: Option<&str>| ReversibilityVerdict {
        status,
        key_value,
        characterization: ch.map(String::from),
        certificates,
        intrinsic,
        note: note.map(String::from),
    };

    let pd = is_ubi_pd(a)?;
    if let (Verdict::Yes, Some(rounds)) = (pd.detection.verdict, &pd.rounds) {
        let key = v.cmi();
        return Ok(verdict(
            Status::Reversible,
            Some(key),
            Some("ubi_pd"),
            vec![Evidence::UbiPd { protocol: dense_to_protocol(v, rounds) }],
            // the key equals I(X:Y↓Z) here, so the minimization is skipped
            key,
            None,
        ));
    }

    let r = a.intrinsic()?;
    let intrinsic = r.value;
    if intrinsic <= ZERO_INTRINSIC {
        let ev = Evidence::ZeroIntrinsic { channel: r.dense.to_channel(&v.z_labels), value: intrinsic };
        return Ok(verdict(Status::Reversible, Some(0.0), Some("zero_intrinsic"), vec![ev], intrinsic, None));
    }

    if let Some(w) = find_down_witness(a)? {
        let vb = v.apply_channel(&w.channel.w, w.channel.k);
        let ev = Evidence::DownWitness {
            channel: w.channel.to_channel(&v.z_labels),
            protocol: dense_to_protocol(&vb, &w.rounds),
            eve_condition: w.eve_condition,
        };
        return Ok(verdict(Status::Reversible, Some(vb.cmi()), Some("ubi_pd_down"), vec![ev], intrinsic, None));
    }

    let (ex, ey, _) = v.effective_sizes();
    if ex.min(ey) != 2 {
        return Ok(verdict(
            Status::Unknown,
            None,
            None,
            Vec::new(),
            intrinsic,
            Some("no UBI-PD↓ witness found outside the binary regime"),
        ));
    }
    let scan = zero_pattern_scan_view(v);
    if scan.is_empty() {
        return Ok(verdict(
            Status::Unknown,
            None,
            None,
            Vec::new(),
            intrinsic,
            Some("no witness and no zero-pattern certificate"),
        ));
    }

    // K_D < I(X:Y|Z) by the certificate; irreversibility follows if that
    // bound already equals the intrinsic value, or if no near-minimizer is
    // block independent (so K_C exceeds the intrinsic value).
    let mut candidates = vec![DenseChannel::identity(v.nz), r.dense.clone()];
    candidates.extend(coarse_grainings(v).unwrap_or_default());
    let mut rejected = Vec::new();
    let mut bi_minimizer = false;
    for ch in &candidates {
        let val = cmi_through(v, ch);
        if val > intrinsic + MINIMIZER_SLACK {
            continue;
        }
        let b = bi_value(&v.apply_channel(&ch.w, ch.k));
        if b <= tol {
            bi_minimizer = true;
            break;
        }
        let channel = ch.to_channel(&v.z_labels);
        if !rejected.iter().any(|e| matches!(e, Evidence::CandidateRejected { channel: c, .. } if *c == channel)) {
            rejected.push(Evidence::CandidateRejected { channel, value: val, bi_value: b });
        }
    }
    let tight = intrinsic >= v.cmi() - ZERO_INTRINSIC;
    if tight || !bi_minimizer {
        let mut certificates: Vec<Evidence> =
            scan.into_iter().map(|certificate| Evidence::Impossibility { certificate }).collect();
        if !tight {
            certificates.extend(rejected);
        }
        return Ok(verdict(Status::NotReversible, None, Some("binary_certificate"), certificates, intrinsic, None));
    }
    Ok(verdict(
        Status::Unknown,
        None,
        None,
        Vec::new(),
        intrinsic,
        Some("a block-independent minimizer exists but no protocol was found"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn run(name: &str) -> ReversibilityVerdict {
        decide_reversibility(&corpus::named(name).unwrap(), &Roles::default(), &ClassifyOptions::default()).unwrap()
    }

    #[test]
    fn reference_decisions() {
        let r = run("ERASURE_HALF");
        assert_eq!(r.status, Status::Reversible);
        assert!((r.key_value.unwrap() - 0.5).abs() < 1e-9);
        let r = run("XOR_TRIPLE");
        assert_eq!(r.status, Status::Reversible);
        assert_eq!(r.key_value, Some(0.0));
        let r = run("SPOILED_BIT");
        assert_eq!(r.status, Status::NotReversible);
        assert!(r.certificates.iter().any(|c| matches!(
            c,
            Evidence::Impossibility { certificate: Certificate::ZeroPattern { .. } }
        )));
        let r = run("NONBI_MIX");
        assert_eq!(r.status, Status::Reversible);
        assert_eq!(r.characterization.as_deref(), Some("ubi_pd_down"));
        assert!((r.key_value.unwrap() - 1.0).abs() < 1e-9);
    }
}
