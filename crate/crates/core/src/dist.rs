//! Finite joint distributions over named variables, and stochastic channels.
//!
//! A [`JointTable`] stores a dense probability tensor in row-major order (the
//! last variable varies fastest). Tables are immutable; every transformation
//! returns a new table.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default threshold below which a probability counts as zero.
pub const DEFAULT_SUPPORT_EPS: f64 = 1e-12;
/// Tolerance for normalization of tables and channel rows.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    variables: Vec<String>,
    alphabets: Vec<Vec<String>>,
    mass: Vec<f64>,
    strides: Vec<usize>,
    support_eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValidationIssue {
    Normalization { total: f64 },
    Negative { index: Vec<String>, value: f64 },
    NotFinite { index: Vec<String> },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self
            .issues
            .iter()
            .map(|issue| match issue {
                ValidationIssue::Normalization { total } => {
                    format!("total mass {total} differs from 1")
                }
                ValidationIssue::Negative { index, value } => {
                    format!("negative mass {value} at ({})", index.join(","))
                }
                ValidationIssue::NotFinite { index } => {
                    format!("non-finite mass at ({})", index.join(","))
                }
            })
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

fn strides_for(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * shape[i + 1];
    }
    strides
}

impl JointTable {
    /// Builds a table, checking only structure (names, labels, tensor shape).
    /// Use [`JointTable::validate`] for the probabilistic axioms.
    pub fn new(variables: Vec<String>, alphabets: Vec<Vec<String>>, mass: Vec<f64>) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::ShapeMismatch("a table needs at least one variable".into()));
        }
        if variables.len() != alphabets.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} variables but {} alphabets",
                variables.len(),
                alphabets.len()
            )));
        }
        let mut seen = HashSet::new();
        for v in &variables {
            if !seen.insert(v.as_str()) {
                return Err(Error::DuplicateVariable(v.clone()));
            }
        }
        for (v, alpha) in variables.iter().zip(&alphabets) {
            if alpha.is_empty() {
                return Err(Error::ShapeMismatch(format!("variable `{v}` has an empty alphabet")));
            }
            let mut labels = HashSet::new();
            for l in alpha {
                if !labels.insert(l.as_str()) {
                    return Err(Error::DuplicateLabel { variable: v.clone(), label: l.clone() });
                }
            }
        }
        let shape: Vec<usize> = alphabets.iter().map(Vec::len).collect();
        let len: usize = shape.iter().product();
        if mass.len() != len {
            return Err(Error::ShapeMismatch(format!(
                "tensor has {} entries, alphabets imply {len}",
                mass.len()
            )));
        }
        Ok(Self {
            variables,
            alphabets,
            mass,
            strides: strides_for(&shape),
            support_eps: DEFAULT_SUPPORT_EPS,
        })
    }

    /// Builds a table by evaluating `f` on every index tuple.
    pub fn from_fn(
        variables: Vec<String>,
        alphabets: Vec<Vec<String>>,
        mut f: impl FnMut(&[usize]) -> f64,
    ) -> Result<Self> {
        let shape: Vec<usize> = alphabets.iter().map(Vec::len).collect();
        let len: usize = shape.iter().product();
        let mut mass = Vec::with_capacity(len);
        let mut idx = vec![0usize; shape.len()];
        for _ in 0..len {
            mass.push(f(&idx));
            advance(&mut idx, &shape);
        }
        Self::new(variables, alphabets, mass)
    }

    /// Like [`JointTable::new`] but also requires the table to pass validation.
    pub fn checked(variables: Vec<String>, alphabets: Vec<Vec<String>>, mass: Vec<f64>) -> Result<Self> {
        let t = Self::new(variables, alphabets, mass)?;
        t.ensure_valid()?;
        Ok(t)
    }

    pub fn with_support_eps(mut self, eps: f64) -> Self {
        self.support_eps = eps;
        self
    }

    pub fn support_eps(&self) -> f64 {
        self.support_eps
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn alphabets(&self) -> &[Vec<String>] {
        &self.alphabets
    }

    pub fn shape(&self) -> Vec<usize> {
        self.alphabets.iter().map(Vec::len).collect()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn alphabet(&self, name: &str) -> Result<&[String]> {
        Ok(&self.alphabets[self.index_of(name)?])
    }

    pub fn label_index(&self, name: &str, label: &str) -> Result<usize> {
        self.alphabet(name)?
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel { variable: name.to_string(), label: label.to_string() })
    }

    pub fn has_variable(&self, name: &str) -> bool {
        self.variables.iter().any(|v| v == name)
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn prob(&self, idx: &[usize]) -> f64 {
        let p = self.mass[self.flat_index(idx)];
        if p < self.support_eps {
            0.0
        } else {
            p
        }
    }

    pub fn is_zero(&self, p: f64) -> bool {
        p < self.support_eps
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Visits every index tuple whose mass is at or above `support_eps`.
    pub fn for_each_support(&self, mut f: impl FnMut(&[usize], f64)) {
        let shape = self.shape();
        let mut idx = vec![0usize; shape.len()];
        for &p in &self.mass {
            if p >= self.support_eps {
                f(&idx, p);
            }
            advance(&mut idx, &shape);
        }
    }

    /// Support entries as (index tuple, mass) pairs, in tensor order.
    pub fn support(&self) -> Vec<(Vec<usize>, f64)> {
        let mut out = Vec::new();
        self.for_each_support(|idx, p| out.push((idx.to_vec(), p)));
        out
    }

    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        let shape = self.shape();
        let mut idx = vec![0usize; shape.len()];
        for &p in &self.mass {
            if !p.is_finite() {
                issues.push(ValidationIssue::NotFinite { index: self.labels_of(&idx) });
            } else if p < 0.0 {
                issues.push(ValidationIssue::Negative { index: self.labels_of(&idx), value: p });
            }
            advance(&mut idx, &shape);
        }
        let total = self.total();
        if !total.is_finite() || (total - 1.0).abs() > NORMALIZATION_TOL {
            issues.push(ValidationIssue::Normalization { total });
        }
        ValidationReport { issues }
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidDistribution(report))
        }
    }

    fn labels_of(&self, idx: &[usize]) -> Vec<String> {
        idx.iter().enumerate().map(|(v, &i)| self.alphabets[v][i].clone()).collect()
    }

    fn positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut seen = HashSet::new();
        names
            .iter()
            .map(|n| {
                if !seen.insert(*n) {
                    return Err(Error::DuplicateVariable(n.to_string()));
                }
                self.index_of(n)
            })
            .collect()
    }

    /// Sums out every variable not in `keep`. Kept variables retain their
    /// original relative order.
    pub fn marginalize(&self, keep: &[&str]) -> Result<JointTable> {
        if keep.is_empty() {
            return Err(Error::Malformed("marginalize needs at least one variable to keep".into()));
        }
        let mut pos = self.positions(keep)?;
        pos.sort_unstable();
        let variables: Vec<String> = pos.iter().map(|&i| self.variables[i].clone()).collect();
        let alphabets: Vec<Vec<String>> = pos.iter().map(|&i| self.alphabets[i].clone()).collect();
        let shape: Vec<usize> = alphabets.iter().map(Vec::len).collect();
        let strides = strides_for(&shape);
        let mut mass = vec![0.0; shape.iter().product()];
        let full_shape = self.shape();
        let mut idx = vec![0usize; full_shape.len()];
        for &p in &self.mass {
            let k: usize = pos.iter().zip(&strides).map(|(&v, s)| idx[v] * s).sum();
            mass[k] += p;
            advance(&mut idx, &full_shape);
        }
        Ok(JointTable { variables, alphabets, mass, strides, support_eps: self.support_eps })
    }

    /// Conditional distribution of the remaining variables given `on = value`.
    pub fn condition(&self, on: &str, value: &str) -> Result<JointTable> {
        let v = self.index_of(on)?;
        let li = self.label_index(on, value)?;
        if self.variables.len() == 1 {
            return Err(Error::Malformed("cannot condition a single-variable table".into()));
        }
        let marginal = self.marginalize(&[on])?;
        let pv = marginal.mass[li];
        if pv < self.support_eps {
            return Err(Error::ZeroProbability { variable: on.into(), label: value.into() });
        }
        let keep: Vec<usize> = (0..self.variables.len()).filter(|&i| i != v).collect();
        let variables: Vec<String> = keep.iter().map(|&i| self.variables[i].clone()).collect();
        let alphabets: Vec<Vec<String>> = keep.iter().map(|&i| self.alphabets[i].clone()).collect();
        let t = JointTable::from_fn(variables, alphabets, |sub| {
            let mut full = Vec::with_capacity(sub.len() + 1);
            full.extend_from_slice(&sub[..v]);
            full.push(li);
            full.extend_from_slice(&sub[v..]);
            self.mass[self.flat_index(&full)] / pv
        })?;
        Ok(t.with_support_eps(self.support_eps))
    }

    /// Appends `new_name` distributed as `channel(. | source)`.
    pub fn extend_with_channel(&self, source: &str, channel: &Channel, new_name: &str) -> Result<JointTable> {
        let s = self.index_of(source)?;
        if self.has_variable(new_name) {
            return Err(Error::NameCollision(new_name.into()));
        }
        if channel.input_alphabet() != self.alphabets[s].as_slice() {
            return Err(Error::AlphabetMismatch(format!(
                "channel input alphabet does not match alphabet of `{source}`"
            )));
        }
        let mut variables = self.variables.clone();
        variables.push(new_name.into());
        let mut alphabets = self.alphabets.clone();
        alphabets.push(channel.output_alphabet().to_vec());
        let n = variables.len();
        let t = JointTable::from_fn(variables, alphabets, |idx| {
            let p = self.mass[self.flat_index(&idx[..n - 1])];
            p * channel.prob(idx[s], idx[n - 1])
        })?;
        Ok(t.with_support_eps(self.support_eps))
    }

    /// Appends a variable that is a deterministic function of the existing
    /// index tuple. `f` returns an index into `labels`.
    pub fn extend_with_function(
        &self,
        new_name: &str,
        labels: Vec<String>,
        f: impl Fn(&[usize]) -> usize,
    ) -> Result<JointTable> {
        if self.has_variable(new_name) {
            return Err(Error::NameCollision(new_name.into()));
        }
        let k = labels.len();
        let mut variables = self.variables.clone();
        variables.push(new_name.into());
        let mut alphabets = self.alphabets.clone();
        alphabets.push(labels);
        let shape = self.shape();
        let mut mass = vec![0.0; self.mass.len() * k];
        let mut idx = vec![0usize; shape.len()];
        for (flat, &p) in self.mass.iter().enumerate() {
            let j = f(&idx);
            if j >= k {
                return Err(Error::Malformed(format!("function value {j} outside alphabet of `{new_name}`")));
            }
            mass[flat * k + j] = p;
            advance(&mut idx, &shape);
        }
        Ok(JointTable::new(variables, alphabets, mass)?.with_support_eps(self.support_eps))
    }

    /// Appends an independent variable with the given distribution (local
    /// randomness).
    pub fn extend_product(&self, new_name: &str, labels: Vec<String>, dist: &[f64]) -> Result<JointTable> {
        if self.has_variable(new_name) {
            return Err(Error::NameCollision(new_name.into()));
        }
        if labels.len() != dist.len() {
            return Err(Error::ShapeMismatch("labels and distribution lengths differ".into()));
        }
        let mut variables = self.variables.clone();
        variables.push(new_name.into());
        let mut alphabets = self.alphabets.clone();
        alphabets.push(labels);
        let mass = self.mass.iter().flat_map(|&p| dist.iter().map(move |&q| p * q)).collect();
        Ok(JointTable::new(variables, alphabets, mass)?.with_support_eps(self.support_eps))
    }

    /// Reorders the variables.
    pub fn permute_variables(&self, order: &[&str]) -> Result<JointTable> {
        let pos = self.positions(order)?;
        if pos.len() != self.variables.len() {
            return Err(Error::Malformed("permutation must list every variable once".into()));
        }
        let variables = pos.iter().map(|&i| self.variables[i].clone()).collect();
        let alphabets = pos.iter().map(|&i| self.alphabets[i].clone()).collect();
        let t = JointTable::from_fn(variables, alphabets, |idx| {
            let mut orig = vec![0; idx.len()];
            for (k, &i) in pos.iter().enumerate() {
                orig[i] = idx[k];
            }
            self.mass[self.flat_index(&orig)]
        })?;
        Ok(t.with_support_eps(self.support_eps))
    }

    /// Reorders the labels of one variable; `perm[new] = old`.
    pub fn permute_labels(&self, name: &str, perm: &[usize]) -> Result<JointTable> {
        let v = self.index_of(name)?;
        let n = self.alphabets[v].len();
        let distinct: BTreeSet<usize> = perm.iter().copied().collect();
        if perm.len() != n || distinct.len() != n || distinct.iter().any(|&i| i >= n) {
            return Err(Error::Malformed(format!("not a permutation of the alphabet of `{name}`")));
        }
        let mut alphabets = self.alphabets.clone();
        alphabets[v] = perm.iter().map(|&i| self.alphabets[v][i].clone()).collect();
        let t = JointTable::from_fn(self.variables.clone(), alphabets, |idx| {
            let mut orig = idx.to_vec();
            orig[v] = perm[idx[v]];
            self.mass[self.flat_index(&orig)]
        })?;
        Ok(t.with_support_eps(self.support_eps))
    }

    /// Renames a variable.
    pub fn rename(&self, from: &str, to: &str) -> Result<JointTable> {
        let v = self.index_of(from)?;
        if from != to && self.has_variable(to) {
            return Err(Error::NameCollision(to.into()));
        }
        let mut t = self.clone();
        t.variables[v] = to.into();
        Ok(t)
    }
}

/// Odometer increment over a mixed-radix index (last position fastest).
pub(crate) fn advance(idx: &mut [usize], shape: &[usize]) {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < shape[i] {
            return;
        }
        idx[i] = 0;
    }
}

/// A row-stochastic map between two alphabets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    input_alphabet: Vec<String>,
    output_alphabet: Vec<String>,
    matrix: Vec<Vec<f64>>,
}

impl Channel {
    pub fn new(input_alphabet: Vec<String>, output_alphabet: Vec<String>, matrix: Vec<Vec<f64>>) -> Result<Self> {
        if matrix.len() != input_alphabet.len() {
            return Err(Error::InvalidChannel(format!(
                "{} rows for {} input symbols",
                matrix.len(),
                input_alphabet.len()
            )));
        }
        if output_alphabet.is_empty() {
            return Err(Error::InvalidChannel("empty output alphabet".into()));
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != output_alphabet.len() {
                return Err(Error::InvalidChannel(format!("row {i} has the wrong length")));
            }
            if row.iter().any(|&w| !w.is_finite() || w < 0.0) {
                return Err(Error::InvalidChannel(format!("row {i} has a negative or non-finite entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::InvalidChannel(format!("row {i} sums to {s}")));
            }
        }
        Ok(Self { input_alphabet, output_alphabet, matrix })
    }

    pub fn identity(alphabet: &[String]) -> Self {
        let n = alphabet.len();
        let matrix = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Self { input_alphabet: alphabet.to_vec(), output_alphabet: alphabet.to_vec(), matrix }
    }

    pub fn constant(alphabet: &[String], output: &str) -> Self {
        Self {
            input_alphabet: alphabet.to_vec(),
            output_alphabet: vec![output.to_string()],
            matrix: vec![vec![1.0]; alphabet.len()],
        }
    }

    /// A deterministic map; `map[i]` is the output index for input `i`.
    pub fn deterministic(input_alphabet: &[String], output_alphabet: Vec<String>, map: &[usize]) -> Result<Self> {
        if map.len() != input_alphabet.len() {
            return Err(Error::InvalidChannel("map length differs from input alphabet".into()));
        }
        let k = output_alphabet.len();
        if map.iter().any(|&j| j >= k) {
            return Err(Error::InvalidChannel("map points outside the output alphabet".into()));
        }
        let matrix = map
            .iter()
            .map(|&j| (0..k).map(|c| if c == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Ok(Self { input_alphabet: input_alphabet.to_vec(), output_alphabet, matrix })
    }

    pub fn input_alphabet(&self) -> &[String] {
        &self.input_alphabet
    }

    pub fn output_alphabet(&self) -> &[String] {
        &self.output_alphabet
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn prob(&self, input: usize, output: usize) -> f64 {
        self.matrix[input][output]
    }

    /// True when every row is a point mass.
    pub fn is_deterministic(&self) -> bool {
        self.matrix.iter().all(|row| row.iter().filter(|&&w| w > 0.0).count() == 1 && row.iter().any(|&w| w == 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(ls: &[&str]) -> Vec<String> {
        ls.iter().map(|s| s.to_string()).collect()
    }

    fn erasure_half() -> JointTable {
        JointTable::from_fn(
            labels(&["X", "Y", "Z"]),
            vec![labels(&["0", "1"]), labels(&["0", "1"]), labels(&["0", "1", "e"])],
            |i| match (i[0], i[1], i[2]) {
                (0, 0, 0) | (1, 1, 1) | (0, 0, 2) | (1, 1, 2) => 0.25,
                _ => 0.0,
            },
        )
        .unwrap()
    }

    #[test]
    fn validation_flags_normalization_and_negativity() {
        let ok = JointTable::new(labels(&["X"]), vec![labels(&["0", "1"])], vec![0.5, 0.5]).unwrap();
        assert!(ok.validate().is_valid());

        let short = JointTable::new(labels(&["X"]), vec![labels(&["0", "1"])], vec![0.49, 0.49]).unwrap();
        let r = short.validate();
        assert!(matches!(r.issues.as_slice(), [ValidationIssue::Normalization { .. }]));

        let neg = JointTable::new(labels(&["X", "Y"]), vec![labels(&["0", "1"]), labels(&["0"])], vec![1.1, -0.1])
            .unwrap();
        assert!(neg.validate().issues.iter().any(|i| matches!(i, ValidationIssue::Negative { .. })));
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(
            JointTable::new(labels(&["X", "X"]), vec![labels(&["0"]), labels(&["0"])], vec![1.0]),
            Err(Error::DuplicateVariable(_))
        ));
        assert!(matches!(
            JointTable::new(labels(&["X"]), vec![labels(&["0", "0"])], vec![0.5, 0.5]),
            Err(Error::DuplicateLabel { .. })
        ));
        assert!(matches!(
            JointTable::new(labels(&["X"]), vec![labels(&["0", "1"])], vec![1.0]),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn marginal_of_erasure_half() {
        let z = erasure_half().marginalize(&["Z"]).unwrap();
        assert_eq!(z.mass(), &[0.25, 0.25, 0.5]);
        let all = erasure_half().marginalize(&["Z", "X", "Y"]).unwrap();
        assert_eq!(all, erasure_half());
        assert!(matches!(erasure_half().marginalize(&["Q"]), Err(Error::UnknownVariable(_))));
    }

    #[test]
    fn conditioning() {
        let t = erasure_half();
        let e = t.condition("Z", "e").unwrap();
        assert_eq!(e.variables(), &["X", "Y"]);
        assert_eq!(e.mass(), &[0.5, 0.0, 0.0, 0.5]);
        let z0 = t.condition("Z", "0").unwrap();
        assert_eq!(z0.mass(), &[1.0, 0.0, 0.0, 0.0]);
        let x1 = t.marginalize(&["X", "Y"]).unwrap().condition("X", "1").unwrap();
        assert_eq!(x1.mass(), &[0.0, 1.0]);
        let pointy = JointTable::new(labels(&["X", "Y"]), vec![labels(&["0", "1"]), labels(&["0"])], vec![1.0, 0.0])
            .unwrap();
        assert!(matches!(pointy.condition("X", "1"), Err(Error::ZeroProbability { .. })));
    }

    #[test]
    fn condition_and_recombine_reconstructs() {
        let t = erasure_half();
        let pz = t.marginalize(&["Z"]).unwrap();
        for (zi, z) in t.alphabet("Z").unwrap().iter().enumerate() {
            let c = t.condition("Z", z).unwrap();
            for x in 0..2 {
                for y in 0..2 {
                    let rebuilt = c.prob(&[x, y]) * pz.mass()[zi];
                    assert!((rebuilt - t.prob(&[x, y, zi])).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn channel_extension_errors() {
        let t = erasure_half();
        let wrong = Channel::identity(&labels(&["0", "1"]));
        assert!(matches!(t.extend_with_channel("Z", &wrong, "W"), Err(Error::AlphabetMismatch(_))));
        let id = Channel::identity(t.alphabet("Z").unwrap());
        assert!(matches!(t.extend_with_channel("Z", &id, "X"), Err(Error::NameCollision(_))));
        let ext = t.extend_with_channel("Z", &id, "Zbar").unwrap();
        assert!(ext.validate().is_valid());
        assert_eq!(ext.marginalize(&["X", "Y", "Z"]).unwrap(), t);
    }

    #[test]
    fn channel_rows_must_be_stochastic() {
        let bad = Channel::new(labels(&["a"]), labels(&["0", "1"]), vec![vec![0.6, 0.6]]);
        assert!(matches!(bad, Err(Error::InvalidChannel(_))));
        let neg = Channel::new(labels(&["a"]), labels(&["0", "1"]), vec![vec![1.5, -0.5]]);
        assert!(matches!(neg, Err(Error::InvalidChannel(_))));
        let det = Channel::deterministic(&labels(&["a", "b"]), labels(&["k"]), &[0, 0]).unwrap();
        assert!(det.is_deterministic());
    }

    #[test]
    fn label_and_variable_permutations_preserve_mass() {
        let t = erasure_half();
        let p = t.permute_labels("Z", &[2, 0, 1]).unwrap();
        assert_eq!(p.alphabet("Z").unwrap(), &["e", "0", "1"]);
        assert_eq!(p.prob(&[1, 1, 0]), 0.25);
        let v = t.permute_variables(&["Z", "Y", "X"]).unwrap();
        assert_eq!(v.prob(&[1, 1, 1]), 0.25);
        assert_eq!(v.prob(&[0, 1, 1]), 0.0);
    }
}
