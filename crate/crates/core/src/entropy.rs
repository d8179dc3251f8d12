//! Shannon quantities (in bits) over variable groups of a [`JointTable`].

use std::collections::HashSet;
use std::fmt;

use crate::dist::JointTable;
use crate::error::{Error, Result};

/// Negative results above this value are float noise and clamp to zero.
pub const CLAMP_FLOOR: f64 = -1e-12;
/// Default tolerance for Markov-chain tests.
pub const MARKOV_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EntropyQuery {
    /// H(A)
    Entropy(Vec<String>),
    /// H(A|B)
    CondEntropy(Vec<String>, Vec<String>),
    /// I(A:B)
    Mutual(Vec<String>, Vec<String>),
    /// I(A:B|C)
    CondMutual(Vec<String>, Vec<String>, Vec<String>),
}

fn parse_group(s: &str) -> Result<Vec<String>> {
    let names: Vec<String> = s.split(',').map(|n| n.trim().to_string()).collect();
    if names.iter().any(String::is_empty) {
        return Err(Error::MalformedQuery(format!("empty variable name in `{s}`")));
    }
    Ok(names)
}

impl EntropyQuery {
    /// Parses `H(X)`, `H(X|Y)`, `I(X:Y)` or `I(X:Y|Z)`. Each slot may list
    /// several comma-separated variables, e.g. `I(X,Y:Z)`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::MalformedQuery(format!("expected H(A), H(A|B), I(A:B) or I(A:B|C), got `{s}`"));
        let (head, rest) = s.split_at(s.find('(').ok_or_else(bad)?);
        let inner = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
        let (main, cond) = match inner.split_once('|') {
            Some((m, c)) => (m, Some(parse_group(c)?)),
            None => (inner, None),
        };
        match head.trim() {
            "H" => {
                if main.contains(':') {
                    return Err(bad());
                }
                let a = parse_group(main)?;
                Ok(match cond {
                    Some(b) => EntropyQuery::CondEntropy(a, b),
                    None => EntropyQuery::Entropy(a),
                })
            }
            "I" => {
                let (a, b) = main.split_once(':').ok_or_else(bad)?;
                let (a, b) = (parse_group(a)?, parse_group(b)?);
                Ok(match cond {
                    Some(c) => EntropyQuery::CondMutual(a, b, c),
                    None => EntropyQuery::Mutual(a, b),
                })
            }
            _ => Err(bad()),
        }
    }

    fn groups(&self) -> Vec<&[String]> {
        match self {
            EntropyQuery::Entropy(a) => vec![a],
            EntropyQuery::CondEntropy(a, b) | EntropyQuery::Mutual(a, b) => vec![a, b],
            EntropyQuery::CondMutual(a, b, c) => vec![a, b, c],
        }
    }
}

impl fmt::Display for EntropyQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntropyQuery::Entropy(a) => write!(f, "H({})", a.join(",")),
            EntropyQuery::CondEntropy(a, b) => write!(f, "H({}|{})", a.join(","), b.join(",")),
            EntropyQuery::Mutual(a, b) => write!(f, "I({}:{})", a.join(","), b.join(",")),
            EntropyQuery::CondMutual(a, b, c) => {
                write!(f, "I({}:{}|{})", a.join(","), b.join(","), c.join(","))
            }
        }
    }
}

pub fn evaluate(table: &JointTable, query: &EntropyQuery) -> Result<f64> {
    let groups = query.groups();
    let mut seen = HashSet::new();
    for g in &groups {
        if g.is_empty() {
            return Err(Error::MalformedQuery("empty variable group".into()));
        }
        for v in g.iter() {
            if !seen.insert(v.as_str()) {
                return Err(Error::MalformedQuery(format!("variable `{v}` appears in more than one group")));
            }
            table.index_of(v)?;
        }
    }
    let refs: Vec<Vec<&str>> = groups.iter().map(|g| g.iter().map(String::as_str).collect()).collect();
    match query {
        EntropyQuery::Entropy(_) => entropy(table, &refs[0]),
        EntropyQuery::CondEntropy(..) => conditional_entropy(table, &refs[0], &refs[1]),
        EntropyQuery::Mutual(..) => mutual_information(table, &refs[0], &refs[1]),
        EntropyQuery::CondMutual(..) => conditional_mutual_information(table, &refs[0], &refs[1], &refs[2]),
    }
}

/// Flat indices of each group over the product of its alphabets, per support entry.
struct Projection {
    sizes: Vec<usize>,
    entries: Vec<(Vec<usize>, f64)>,
}

fn project(table: &JointTable, groups: &[&[&str]]) -> Result<Projection> {
    let pos: Vec<Vec<usize>> = groups
        .iter()
        .map(|g| g.iter().map(|v| table.index_of(v)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let shape = table.shape();
    let sizes = pos.iter().map(|p| p.iter().map(|&v| shape[v]).product()).collect();
    let mut entries = Vec::new();
    table.for_each_support(|idx, p| {
        let keys = pos
            .iter()
            .map(|g| g.iter().fold(0usize, |acc, &v| acc * shape[v] + idx[v]))
            .collect();
        entries.push((keys, p));
    });
    Ok(Projection { sizes, entries })
}

fn clamp(value: f64, what: &str) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= CLAMP_FLOOR {
        Ok(0.0)
    } else {
        Err(Error::InternalConsistency(format!("{what} evaluated to {value} < 0")))
    }
}

fn plogp_sum(masses: impl Iterator<Item = f64>) -> f64 {
    -masses.filter(|&p| p > 0.0).map(|p| p * p.log2()).sum::<f64>()
}

pub fn entropy(table: &JointTable, a: &[&str]) -> Result<f64> {
    let proj = project(table, &[a])?;
    let mut m = vec![0.0; proj.sizes[0]];
    for (k, p) in &proj.entries {
        m[k[0]] += p;
    }
    clamp(plogp_sum(m.into_iter()), "entropy")
}

pub fn conditional_entropy(table: &JointTable, a: &[&str], b: &[&str]) -> Result<f64> {
    let proj = project(table, &[a, b])?;
    let (na, nb) = (proj.sizes[0], proj.sizes[1]);
    let mut ab = vec![0.0; na * nb];
    let mut pb = vec![0.0; nb];
    for (k, p) in &proj.entries {
        ab[k[0] * nb + k[1]] += p;
        pb[k[1]] += p;
    }
    let mut h = 0.0;
    for ia in 0..na {
        for ib in 0..nb {
            let p = ab[ia * nb + ib];
            if p > 0.0 {
                h += p * (pb[ib] / p).log2();
            }
        }
    }
    clamp(h, "conditional entropy")
}

pub fn mutual_information(table: &JointTable, a: &[&str], b: &[&str]) -> Result<f64> {
    conditional_mutual_information(table, a, b, &[])
}

/// I(A:B|C), summed directly as Σ p(abc) log p(abc)p(c) / p(ac)p(bc).
/// An empty `c` gives the unconditional mutual information.
pub fn conditional_mutual_information(table: &JointTable, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
    let proj = project(table, &[a, b, c])?;
    let (na, nb, nc) = (proj.sizes[0], proj.sizes[1], proj.sizes[2]);
    let mut abc = vec![0.0; na * nb * nc];
    let mut ac = vec![0.0; na * nc];
    let mut bc = vec![0.0; nb * nc];
    let mut pc = vec![0.0; nc];
    for (k, p) in &proj.entries {
        let (ia, ib, ic) = (k[0], k[1], k[2]);
        abc[(ia * nb + ib) * nc + ic] += p;
        ac[ia * nc + ic] += p;
        bc[ib * nc + ic] += p;
        pc[ic] += p;
    }
    let mut i = 0.0;
    for ia in 0..na {
        for ib in 0..nb {
            for ic in 0..nc {
                let p = abc[(ia * nb + ib) * nc + ic];
                if p > 0.0 {
                    i += p * ((p * pc[ic]) / (ac[ia * nc + ic] * bc[ib * nc + ic])).log2();
                }
            }
        }
    }
    clamp(i, "conditional mutual information")
}

/// Markov chain A − B − C, tested as I(A:C|B) ≤ tol.
pub fn is_markov(table: &JointTable, a: &[&str], b: &[&str], c: &[&str], tol: f64) -> Result<bool> {
    let mut seen = HashSet::new();
    for v in a.iter().chain(b).chain(c) {
        if !seen.insert(*v) {
            return Err(Error::MalformedQuery(format!("variable `{v}` appears in more than one group")));
        }
    }
    Ok(conditional_mutual_information(table, a, c, b)? <= tol)
}
