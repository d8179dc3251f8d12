//! Dense p(x, y, z) view of a table under designated roles.
//!
//! Each role is a group of variables; a group's alphabet is the product of
//! its members' alphabets with labels joined by `,`. Groups may overlap, which
//! is how (XM), (YM), (ZM) style regroupings are expressed.

use serde::{Deserialize, Serialize};

use crate::dist::{JointTable, DEFAULT_SUPPORT_EPS};
use crate::error::{Error, Result};

/// Largest product alphabet a role group may have.
pub const MAX_GROUP_ALPHABET: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roles {
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub z: Vec<String>,
}

impl Default for Roles {
    fn default() -> Self {
        Self::new("X", "Y", "Z")
    }
}

impl Roles {
    pub fn new(x: &str, y: &str, z: &str) -> Self {
        Self { x: vec![x.into()], y: vec![y.into()], z: vec![z.into()] }
    }

    /// Roles with no Eve variable (bipartite use).
    pub fn bipartite(x: &str, y: &str) -> Self {
        Self { x: vec![x.into()], y: vec![y.into()], z: Vec::new() }
    }

    pub fn grouped<S: AsRef<str>>(x: &[S], y: &[S], z: &[S]) -> Self {
        let own = |g: &[S]| g.iter().map(|s| s.as_ref().to_string()).collect();
        Self { x: own(x), y: own(y), z: own(z) }
    }

    pub(crate) fn check_disjoint(&self) -> Result<()> {
        for v in &self.x {
            if self.y.contains(v) || self.z.contains(v) {
                return Err(Error::Precondition(format!("variable `{v}` used in more than one role")));
            }
        }
        for v in &self.y {
            if self.z.contains(v) {
                return Err(Error::Precondition(format!("variable `{v}` used in more than one role")));
            }
        }
        if self.x.is_empty() || self.y.is_empty() {
            return Err(Error::Precondition("the X and Y roles must be nonempty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tripartite {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    /// Mass at `(x * ny + y) * nz + z`; sub-threshold values are stored as 0.
    pub p: Vec<f64>,
    pub x_labels: Vec<String>,
    pub y_labels: Vec<String>,
    pub z_labels: Vec<String>,
    pub eps: f64,
}

fn group_layout(table: &JointTable, group: &[String]) -> Result<(Vec<usize>, Vec<String>)> {
    let pos = group.iter().map(|v| table.index_of(v)).collect::<Result<Vec<_>>>()?;
    let mut labels = vec![String::new()];
    for &v in &pos {
        let alpha = &table.alphabets()[v];
        if labels.len() * alpha.len() > MAX_GROUP_ALPHABET {
            return Err(Error::SizeCap(format!("role group {group:?} has too many joint labels")));
        }
        labels = labels
            .iter()
            .flat_map(|prefix| {
                alpha.iter().map(move |l| if prefix.is_empty() { l.clone() } else { format!("{prefix},{l}") })
            })
            .collect();
    }
    if pos.is_empty() {
        labels = vec!["*".into()];
    }
    Ok((pos, labels))
}

impl Tripartite {
    pub fn from_table(table: &JointTable, roles: &Roles) -> Result<Self> {
        let (xp, x_labels) = group_layout(table, &roles.x)?;
        let (yp, y_labels) = group_layout(table, &roles.y)?;
        let (zp, z_labels) = group_layout(table, &roles.z)?;
        let (nx, ny, nz) = (x_labels.len(), y_labels.len(), z_labels.len());
        if nx * ny * nz > 1 << 22 {
            return Err(Error::SizeCap("tripartite view is too large".into()));
        }
        let shape = table.shape();
        let key = |pos: &[usize], idx: &[usize]| pos.iter().fold(0usize, |acc, &v| acc * shape[v] + idx[v]);
        let mut p = vec![0.0; nx * ny * nz];
        table.for_each_support(|idx, m| {
            p[(key(&xp, idx) * ny + key(&yp, idx)) * nz + key(&zp, idx)] += m;
        });
        let eps = table.support_eps();
        for v in p.iter_mut() {
            if *v < eps {
                *v = 0.0;
            }
        }
        Ok(Self { nx, ny, nz, p, x_labels, y_labels, z_labels, eps })
    }

    /// Builds a view from a dense array with numeric labels.
    pub fn from_dense(nx: usize, ny: usize, nz: usize, p: Vec<f64>) -> Self {
        assert_eq!(p.len(), nx * ny * nz);
        let labels = |n: usize| (0..n).map(|i| i.to_string()).collect();
        Self {
            nx,
            ny,
            nz,
            p,
            x_labels: labels(nx),
            y_labels: labels(ny),
            z_labels: labels(nz),
            eps: DEFAULT_SUPPORT_EPS,
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize, z: usize) -> f64 {
        self.p[(x * self.ny + y) * self.nz + z]
    }

    pub fn pz(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.nz];
        for (i, &m) in self.p.iter().enumerate() {
            out[i % self.nz] += m;
        }
        out
    }

    pub fn px(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.nx];
        for (i, &m) in self.p.iter().enumerate() {
            out[i / (self.ny * self.nz)] += m;
        }
        out
    }

    pub fn py(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.ny];
        for (i, &m) in self.p.iter().enumerate() {
            out[(i / self.nz) % self.ny] += m;
        }
        out
    }

    /// p(x, y) summed over z, row-major in x.
    pub fn pxy(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.nx * self.ny];
        for (i, &m) in self.p.iter().enumerate() {
            out[i / self.nz] += m;
        }
        out
    }

    /// Unnormalized slice p(., ., z), row-major in x.
    pub fn slice(&self, z: usize) -> Vec<f64> {
        (0..self.nx * self.ny).map(|xy| self.p[xy * self.nz + z]).collect()
    }

    /// Indices of z with positive mass.
    pub fn z_support(&self) -> Vec<usize> {
        self.pz().iter().enumerate().filter(|(_, &m)| m > 0.0).map(|(z, _)| z).collect()
    }

    /// Effective alphabet sizes (labels with positive marginal mass).
    pub fn effective_sizes(&self) -> (usize, usize, usize) {
        let count = |v: Vec<f64>| v.iter().filter(|&&m| m > 0.0).count();
        (count(self.px()), count(self.py()), count(self.pz()))
    }

    /// Bipartite view of (X, Y) with a constant Eve.
    pub fn xy_only(&self) -> Tripartite {
        Tripartite {
            nx: self.nx,
            ny: self.ny,
            nz: 1,
            p: self.pxy(),
            x_labels: self.x_labels.clone(),
            y_labels: self.y_labels.clone(),
            z_labels: vec!["*".into()],
            eps: self.eps,
        }
    }

    /// Pushes Z through a row-stochastic `nz × nzb` matrix (row-major).
    pub fn apply_channel(&self, w: &[f64], nzb: usize) -> Tripartite {
        let mut p = vec![0.0; self.nx * self.ny * nzb];
        for xy in 0..self.nx * self.ny {
            for z in 0..self.nz {
                let m = self.p[xy * self.nz + z];
                if m == 0.0 {
                    continue;
                }
                for zb in 0..nzb {
                    p[xy * nzb + zb] += m * w[z * nzb + zb];
                }
            }
        }
        for v in p.iter_mut() {
            if *v < self.eps {
                *v = 0.0;
            }
        }
        Tripartite {
            nx: self.nx,
            ny: self.ny,
            nz: nzb,
            p,
            x_labels: self.x_labels.clone(),
            y_labels: self.y_labels.clone(),
            z_labels: (0..nzb).map(|i| format!("zb{i}")).collect(),
            eps: self.eps,
        }
    }

    /// Merges z values according to a deterministic map into `k` outputs.
    pub fn coarse_grain(&self, map: &[usize], k: usize) -> Tripartite {
        let mut w = vec![0.0; self.nz * k];
        for (z, &b) in map.iter().enumerate() {
            w[z * k + b] = 1.0;
        }
        self.apply_channel(&w, k)
    }

    /// I(X:Y|Z) in bits.
    pub fn cmi(&self) -> f64 {
        cmi_dense(&self.p, self.nx, self.ny, self.nz)
    }

    /// I(XY:Z) in bits.
    pub fn mi_xy_z(&self) -> f64 {
        let pz = self.pz();
        let pxy = self.pxy();
        let mut i = 0.0;
        for xy in 0..self.nx * self.ny {
            for z in 0..self.nz {
                let m = self.p[xy * self.nz + z];
                if m > 0.0 {
                    i += m * (m / (pxy[xy] * pz[z])).log2();
                }
            }
        }
        i.max(0.0)
    }

    /// H(X|Y=y) for every y, computed from the (X, Y) marginal.
    pub fn h_x_given_each_y(&self) -> Vec<f64> {
        let pxy = self.pxy();
        (0..self.ny)
            .map(|y| {
                let col: Vec<f64> = (0..self.nx).map(|x| pxy[x * self.ny + y]).collect();
                let s: f64 = col.iter().sum();
                if s <= 0.0 {
                    return 0.0;
                }
                -col.iter().filter(|&&m| m > 0.0).map(|&m| (m / s) * (m / s).log2()).sum::<f64>()
            })
            .collect()
    }

    /// Swaps the X and Y roles.
    pub fn transposed(&self) -> Tripartite {
        let mut p = vec![0.0; self.p.len()];
        for x in 0..self.nx {
            for y in 0..self.ny {
                for z in 0..self.nz {
                    p[(y * self.nx + x) * self.nz + z] = self.at(x, y, z);
                }
            }
        }
        Tripartite {
            nx: self.ny,
            ny: self.nx,
            nz: self.nz,
            p,
            x_labels: self.y_labels.clone(),
            y_labels: self.x_labels.clone(),
            z_labels: self.z_labels.clone(),
            eps: self.eps,
        }
    }

    /// Back to a three-variable table named by `names`.
    pub fn to_table(&self, names: [&str; 3]) -> Result<JointTable> {
        Ok(JointTable::new(
            names.iter().map(|s| s.to_string()).collect(),
            vec![self.x_labels.clone(), self.y_labels.clone(), self.z_labels.clone()],
            self.p.clone(),
        )?
        .with_support_eps(self.eps))
    }
}

/// I(X:Y|Z) of a dense `nx × ny × nz` array (z fastest).
pub fn cmi_dense(p: &[f64], nx: usize, ny: usize, nz: usize) -> f64 {
    let mut pxz = vec![0.0; nx * nz];
    let mut pyz = vec![0.0; ny * nz];
    let mut pz = vec![0.0; nz];
    for x in 0..nx {
        for y in 0..ny {
            for z in 0..nz {
                let m = p[(x * ny + y) * nz + z];
                pxz[x * nz + z] += m;
                pyz[y * nz + z] += m;
                pz[z] += m;
            }
        }
    }
    let mut i = 0.0;
    for x in 0..nx {
        for y in 0..ny {
            for z in 0..nz {
                let m = p[(x * ny + y) * nz + z];
                if m > 0.0 {
                    i += m * ((m * pz[z]) / (pxz[x * nz + z] * pyz[y * nz + z])).log2();
                }
            }
        }
    }
    i.max(0.0)
}

pub(crate) fn entropy_bits(masses: &[f64]) -> f64 {
    let total: f64 = masses.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    -masses.iter().filter(|&&m| m > 0.0).map(|&m| (m / total) * (m / total).log2()).sum::<f64>()
}
