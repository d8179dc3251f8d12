//! Maximal common partitionings and (conditional) common functions.
//!
//! The maximal common partition of p_XY is read off the connected components
//! of the bipartite support graph: x and y are adjacent iff p(x, y) > 0.
//! Labels with zero marginal mass are left out of every block.

use serde::Serialize;

use crate::dist::JointTable;
use crate::entropy::conditional_mutual_information;
use crate::error::{Error, Result};
use crate::view::{entropy_bits, Roles, Tripartite};

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Block membership of every x and y label; `None` marks zero-mass labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockMap {
    pub x: Vec<Option<usize>>,
    pub y: Vec<Option<usize>>,
    pub count: usize,
}

impl BlockMap {
    /// Common block of (x, y), if both lie in the same block.
    #[inline]
    pub fn of(&self, x: usize, y: usize) -> Option<usize> {
        match (self.x[x], self.y[y]) {
            (Some(a), Some(b)) if a == b => Some(a),
            _ => None,
        }
    }
}

/// Connected components of the support of a dense `nx × ny` matrix
/// (row-major). Blocks are numbered by their smallest x label.
pub fn block_map(pxy: &[f64], nx: usize, ny: usize) -> BlockMap {
    let mut ds = DisjointSet::new(nx + ny);
    let mut live_x = vec![false; nx];
    let mut live_y = vec![false; ny];
    for x in 0..nx {
        for y in 0..ny {
            if pxy[x * ny + y] > 0.0 {
                live_x[x] = true;
                live_y[y] = true;
                ds.union(x, nx + y);
            }
        }
    }
    // union keeps the smallest index as root, so x-rooted components come
    // out in order of their smallest x
    let mut id = vec![usize::MAX; nx + ny];
    let mut count = 0;
    let mut xs = vec![None; nx];
    for x in 0..nx {
        if live_x[x] {
            let r = ds.find(x);
            if id[r] == usize::MAX {
                id[r] = count;
                count += 1;
            }
            xs[x] = Some(id[r]);
        }
    }
    let ys = (0..ny).map(|y| if live_y[y] { Some(id[ds.find(nx + y)]) } else { None }).collect();
    BlockMap { x: xs, y: ys, count }
}

/// Per-z block maps of a tripartite view (`None` for z with zero mass).
pub fn conditional_block_maps(v: &Tripartite) -> Vec<Option<BlockMap>> {
    let pz = v.pz();
    (0..v.nz).map(|z| (pz[z] > 0.0).then(|| block_map(&v.slice(z), v.nx, v.ny))).collect()
}

/// I(X:Y|J Z) for the conditional common function J = J_{XY|Z}.
pub fn cmi_given_common(v: &Tripartite, maps: &[Option<BlockMap>]) -> f64 {
    let mut pxjz = vec![0.0; v.nx * v.nz];
    let mut pyjz = vec![0.0; v.ny * v.nz];
    let mut pjz = vec![0.0; v.nx.max(v.ny) * v.nz];
    for x in 0..v.nx {
        for y in 0..v.ny {
            for z in 0..v.nz {
                let m = v.at(x, y, z);
                if m > 0.0 {
                    // x and y determine j given z on the support
                    let j = maps[z].as_ref().and_then(|b| b.of(x, y)).unwrap_or(0);
                    pxjz[x * v.nz + z] += m;
                    pyjz[y * v.nz + z] += m;
                    pjz[j * v.nz + z] += m;
                }
            }
        }
    }
    let mut i = 0.0;
    for x in 0..v.nx {
        for y in 0..v.ny {
            for z in 0..v.nz {
                let m = v.at(x, y, z);
                if m > 0.0 {
                    let j = maps[z].as_ref().and_then(|b| b.of(x, y)).unwrap_or(0);
                    i += m * (m * pjz[j * v.nz + z] / (pxjz[x * v.nz + z] * pyjz[y * v.nz + z])).log2();
                }
            }
        }
    }
    i.max(0.0)
}

/// H(J_{XY|Z} | Z).
pub fn h_common_given_z(v: &Tripartite, maps: &[Option<BlockMap>]) -> f64 {
    let mut h = 0.0;
    for z in 0..v.nz {
        let Some(b) = &maps[z] else { continue };
        let mut mass = vec![0.0; b.count];
        let mut total = 0.0;
        for x in 0..v.nx {
            for y in 0..v.ny {
                let m = v.at(x, y, z);
                if m > 0.0 {
                    if let Some(j) = b.of(x, y) {
                        mass[j] += m;
                    }
                    total += m;
                }
            }
        }
        h += total * entropy_bits(&mass);
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Block {
    pub xs: Vec<String>,
    pub ys: Vec<String>,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommonPartition {
    pub blocks: Vec<Block>,
    pub residual_x: Vec<String>,
    pub residual_y: Vec<String>,
    #[serde(skip)]
    pub map: BlockMap,
}

impl CommonPartition {
    fn from_dense(pxy: &[f64], x_labels: &[String], y_labels: &[String]) -> Self {
        let (nx, ny) = (x_labels.len(), y_labels.len());
        let map = block_map(pxy, nx, ny);
        let mut blocks: Vec<Block> =
            (0..map.count).map(|_| Block { xs: Vec::new(), ys: Vec::new(), mass: 0.0 }).collect();
        let total: f64 = pxy.iter().sum();
        for x in 0..nx {
            if let Some(b) = map.x[x] {
                blocks[b].xs.push(x_labels[x].clone());
                blocks[b].mass += (0..ny).map(|y| pxy[x * ny + y]).sum::<f64>() / total;
            }
        }
        for y in 0..ny {
            if let Some(b) = map.y[y] {
                blocks[b].ys.push(y_labels[y].clone());
            }
        }
        let residual_x = (0..nx).filter(|&x| map.x[x].is_none()).map(|x| x_labels[x].clone()).collect();
        let residual_y = (0..ny).filter(|&y| map.y[y].is_none()).map(|y| y_labels[y].clone()).collect();
        Self { blocks, residual_x, residual_y, map }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// H(J) of the block label.
    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.blocks.iter().map(|b| b.mass).collect::<Vec<_>>())
    }

    /// Block index of an x label, if the label carries mass.
    pub fn block_of_x(&self, label: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.xs.iter().any(|l| l == label))
    }

    pub fn block_of_y(&self, label: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.ys.iter().any(|l| l == label))
    }
}

/// The maximal common partitioning of the (X, Y) marginal. Other variables in
/// the table are summed out.
pub fn maximal_common_partition(table: &JointTable, x: &str, y: &str) -> Result<CommonPartition> {
    common_partition_of(table, &Roles::bipartite(x, y))
}

/// As [`maximal_common_partition`] for grouped roles; the z role is ignored.
pub fn common_partition_of(table: &JointTable, roles: &Roles) -> Result<CommonPartition> {
    let roles = Roles { x: roles.x.clone(), y: roles.y.clone(), z: Vec::new() };
    roles.check_disjoint()?;
    let v = Tripartite::from_table(table, &roles)?;
    Ok(CommonPartition::from_dense(&v.p, &v.x_labels, &v.y_labels))
}

/// Gács–Körner common information H(J_XY) in bits.
pub fn common_information(table: &JointTable, x: &str, y: &str) -> Result<f64> {
    Ok(maximal_common_partition(table, x, y)?.entropy())
}

/// The family of maximal common partitions of p_{XY|Z=z}. Within each z the
/// J label is the block index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalCommonFunction {
    pub z_labels: Vec<String>,
    pub z_mass: Vec<f64>,
    pub per_z: Vec<Option<CommonPartition>>,
    /// H(J_{XY|Z} | Z) in bits.
    pub conditional_entropy: f64,
}

impl ConditionalCommonFunction {
    pub fn from_view(v: &Tripartite) -> Self {
        let pz = v.pz();
        let per_z: Vec<Option<CommonPartition>> = (0..v.nz)
            .map(|z| (pz[z] > 0.0).then(|| CommonPartition::from_dense(&v.slice(z), &v.x_labels, &v.y_labels)))
            .collect();
        let conditional_entropy =
            per_z.iter().zip(&pz).map(|(c, &m)| c.as_ref().map_or(0.0, |c| m * c.entropy())).sum();
        Self { z_labels: v.z_labels.clone(), z_mass: pz, per_z, conditional_entropy }
    }

    /// J label for indices (x, y, z), if (x, y) share a block under z.
    pub fn label(&self, x: usize, y: usize, z: usize) -> Option<usize> {
        self.per_z[z].as_ref().and_then(|c| c.map.of(x, y))
    }

    /// Largest number of blocks over all z.
    pub fn max_blocks(&self) -> usize {
        self.per_z.iter().flatten().map(CommonPartition::len).max().unwrap_or(0)
    }

    pub fn maps(&self) -> Vec<Option<BlockMap>> {
        self.per_z.iter().map(|c| c.as_ref().map(|c| c.map.clone())).collect()
    }
}

pub fn conditional_common_function(
    table: &JointTable,
    x: &str,
    y: &str,
    z_group: &[&str],
) -> Result<ConditionalCommonFunction> {
    if z_group.is_empty() {
        return Err(Error::Precondition("conditioning group must be nonempty".into()));
    }
    let roles = Roles::grouped(&[x], &[y], z_group);
    roles.check_disjoint()?;
    Ok(ConditionalCommonFunction::from_view(&Tripartite::from_table(table, &roles)?))
}

/// Appends `name` = J_{XY|Z} under `roles` (labels `j0`, `j1`, ...). Tuples
/// outside a common block (zero mass) get label `j0`.
pub fn extend_with_common_function(table: &JointTable, roles: &Roles, name: &str) -> Result<JointTable> {
    roles.check_disjoint()?;
    let v = Tripartite::from_table(table, roles)?;
    let maps = conditional_block_maps(&v);
    let k = maps.iter().flatten().map(|b| b.count).max().unwrap_or(0).max(1);
    let shape = table.shape();
    let pos = |group: &[String]| group.iter().map(|g| table.index_of(g)).collect::<Result<Vec<_>>>();
    let (xp, yp, zp) = (pos(&roles.x)?, pos(&roles.y)?, pos(&roles.z)?);
    let key = |p: &[usize], idx: &[usize]| p.iter().fold(0usize, |acc, &i| acc * shape[i] + idx[i]);
    table.extend_with_function(name, (0..k).map(|j| format!("j{j}")).collect(), |idx| {
        let z = key(&zp, idx);
        maps[z].as_ref().and_then(|b| b.of(key(&xp, idx), key(&yp, idx))).unwrap_or(0)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoubleMarkovReport {
    /// I(X:W|YZ)
    pub x_yz_w_value: f64,
    /// I(Y:W|XZ)
    pub y_xz_w_value: f64,
    /// X − YZ − W holds
    pub x_yz_w: bool,
    /// Y − XZ − W holds
    pub y_xz_w: bool,
    /// I(XY:W | J_{XY|Z} Z)
    pub cmi: f64,
    pub both_chains: bool,
    pub cmi_vanishes: bool,
}

/// Tests X − YZ − W ∧ Y − XZ − W against I(XY:W|J_{XY|Z}Z) = 0. The two
/// sides must agree; disagreement is reported as an internal error.
pub fn check_double_markov(
    table: &JointTable,
    w: &str,
    x: &str,
    y: &str,
    z_group: &[&str],
    tol: f64,
) -> Result<DoubleMarkovReport> {
    let roles = Roles::grouped(&[x], &[y], z_group);
    roles.check_disjoint()?;
    if roles.x.iter().chain(&roles.y).chain(&roles.z).any(|v| v == w) {
        return Err(Error::Precondition(format!("variable `{w}` used in more than one role")));
    }
    let mut jname = String::from("J");
    while table.has_variable(&jname) {
        jname.push('\'');
    }
    let ext = extend_with_common_function(table, &roles, &jname)?;
    let mut yz: Vec<&str> = vec![y];
    yz.extend_from_slice(z_group);
    let mut xz: Vec<&str> = vec![x];
    xz.extend_from_slice(z_group);
    let mut jz: Vec<&str> = vec![jname.as_str()];
    jz.extend_from_slice(z_group);
    let x_yz_w_value = conditional_mutual_information(table, &[x], &[w], &yz)?;
    let y_xz_w_value = conditional_mutual_information(table, &[y], &[w], &xz)?;
    let cmi = conditional_mutual_information(&ext, &[x, y], &[w], &jz)?;
    let report = DoubleMarkovReport {
        x_yz_w_value,
        y_xz_w_value,
        x_yz_w: x_yz_w_value <= tol,
        y_xz_w: y_xz_w_value <= tol,
        cmi,
        both_chains: x_yz_w_value <= tol && y_xz_w_value <= tol,
        cmi_vanishes: cmi <= tol,
    };
    if report.both_chains != report.cmi_vanishes {
        return Err(Error::InternalConsistency(format!(
            "double Markov equivalence violated: I(X:W|YZ)={x_yz_w_value:e}, I(Y:W|XZ)={y_xz_w_value:e}, \
             I(XY:W|JZ)={cmi:e}"
        )));
    }
    Ok(report)
}
