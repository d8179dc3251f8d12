//! Zero-pattern certificates showing that the distillable key falls short
//! of I(X:Y|Z), and the ◀ relation between conditional distributions.

use serde::Serialize;

use crate::dist::JointTable;
use crate::error::{Error, Result};
use crate::view::{Roles, Tripartite};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Alphabet containment is checked on X.
    Xy,
    /// Roles of X and Y exchanged.
    Yx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TriangleCondition {
    /// q_XY is a product distribution.
    Uncorrelated,
    /// supp q_Y ⊆ supp p_Y.
    SupportContained,
    /// Every y outside supp p_Y determines x under q.
    Determined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriangleMatch {
    pub holds: bool,
    pub orientation: Option<Orientation>,
    pub condition: Option<TriangleCondition>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// p(x,y|z1) > 0 and p(x|z0) p(y|z0) > 0 but p(x,y|z0) = 0, with a
    /// binary party.
    ZeroPattern { x: String, y: String, z0: String, z1: String },
    /// p_{XY|z1} ◀ p_{XY|z0} together with the zero pattern at (x, y).
    Triangle {
        x: String,
        y: String,
        z0: String,
        z1: String,
        orientation: Orientation,
        condition: TriangleCondition,
    },
}

const PRODUCT_TOL: f64 = 1e-12;

fn marginals(m: &[f64], nx: usize, ny: usize) -> (Vec<f64>, Vec<f64>) {
    let mut px = vec![0.0; nx];
    let mut py = vec![0.0; ny];
    for x in 0..nx {
        for y in 0..ny {
            px[x] += m[x * ny + y];
            py[y] += m[x * ny + y];
        }
    }
    (px, py)
}

fn transpose(m: &[f64], nx: usize, ny: usize) -> Vec<f64> {
    let mut t = vec![0.0; m.len()];
    for x in 0..nx {
        for y in 0..ny {
            t[y * nx + x] = m[x * ny + y];
        }
    }
    t
}

fn one_way(q: &[f64], p: &[f64], nx: usize, ny: usize) -> Option<TriangleCondition> {
    let (qx, qy) = marginals(q, nx, ny);
    let (px, py) = marginals(p, nx, ny);
    let sq: f64 = qx.iter().sum();
    if (0..nx).any(|x| qx[x] > 0.0 && px[x] <= 0.0) {
        return None;
    }
    let product = (0..nx).all(|x| (0..ny).all(|y| (q[x * ny + y] / sq - qx[x] * qy[y] / (sq * sq)).abs() <= PRODUCT_TOL));
    if product {
        return Some(TriangleCondition::Uncorrelated);
    }
    if (0..ny).all(|y| qy[y] <= 0.0 || py[y] > 0.0) {
        return Some(TriangleCondition::SupportContained);
    }
    let determined = (0..ny)
        .filter(|&y| qy[y] > 0.0 && py[y] <= 0.0)
        .all(|y| (0..nx).filter(|&x| q[x * ny + y] > 0.0).count() == 1);
    determined.then_some(TriangleCondition::Determined)
}

/// q ◀ p on dense `nx × ny` matrices (unnormalized is fine).
pub fn blacktriangle_dense(q: &[f64], p: &[f64], nx: usize, ny: usize) -> Option<(Orientation, TriangleCondition)> {
    if let Some(c) = one_way(q, p, nx, ny) {
        return Some((Orientation::Xy, c));
    }
    one_way(&transpose(q, nx, ny), &transpose(p, nx, ny), ny, nx).map(|c| (Orientation::Yx, c))
}

/// Checks q_XY ◀ p_XY for two tables over the same X and Y alphabets.
pub fn check_blacktriangleleft(q: &JointTable, p: &JointTable, x: &str, y: &str) -> Result<TriangleMatch> {
    if q.alphabet(x)? != p.alphabet(x)? || q.alphabet(y)? != p.alphabet(y)? {
        return Err(Error::AlphabetMismatch("q and p must share the X and Y alphabets".into()));
    }
    let roles = Roles::bipartite(x, y);
    let (vq, vp) = (Tripartite::from_table(q, &roles)?, Tripartite::from_table(p, &roles)?);
    Ok(match blacktriangle_dense(&vq.p, &vp.p, vq.nx, vq.ny) {
        Some((o, c)) => TriangleMatch { holds: true, orientation: Some(o), condition: Some(c) },
        None => TriangleMatch { holds: false, orientation: None, condition: None },
    })
}

/// Every zero-pattern tuple (x, y, z0, z1). With a binary party each tuple is
/// reported as a direct certificate; otherwise a tuple counts only when the
/// z1 conditional is ◀-related to the z0 conditional.
pub fn zero_pattern_scan_view(v: &Tripartite) -> Vec<Certificate> {
    let (ex, ey, _) = v.effective_sizes();
    let binary = ex.min(ey) == 2;
    let support = v.z_support();
    let slices: Vec<Vec<f64>> = (0..v.nz).map(|z| v.slice(z)).collect();
    let mut out = Vec::new();
    for &z0 in &support {
        let (px0, py0) = marginals(&slices[z0], v.nx, v.ny);
        for &z1 in &support {
            if z0 == z1 {
                continue;
            }
            let rel = if binary { None } else { blacktriangle_dense(&slices[z1], &slices[z0], v.nx, v.ny) };
            if !binary && rel.is_none() {
                continue;
            }
            for x in 0..v.nx {
                for y in 0..v.ny {
                    let fires = slices[z1][x * v.ny + y] > 0.0
                        && px0[x] > 0.0
                        && py0[y] > 0.0
                        && slices[z0][x * v.ny + y] <= 0.0;
                    if !fires {
                        continue;
                    }
                    let (xl, yl) = (v.x_labels[x].clone(), v.y_labels[y].clone());
                    let (l0, l1) = (v.z_labels[z0].clone(), v.z_labels[z1].clone());
                    out.push(match rel {
                        None => Certificate::ZeroPattern { x: xl, y: yl, z0: l0, z1: l1 },
                        Some((orientation, condition)) => {
                            Certificate::Triangle { x: xl, y: yl, z0: l0, z1: l1, orientation, condition }
                        }
                    });
                }
            }
        }
    }
    out
}

pub fn zero_pattern_scan(table: &JointTable, roles: &Roles) -> Result<Vec<Certificate>> {
    roles.check_disjoint()?;
    Ok(zero_pattern_scan_view(&Tripartite::from_table(table, roles)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn bip(p: &[f64], nx: usize, ny: usize) -> JointTable {
        Tripartite::from_dense(nx, ny, 1, p.to_vec()).to_table(["X", "Y", "Z"]).unwrap()
    }

    #[test]
    fn triangle_examples() {
        let ebit = bip(&[0.5, 0.0, 0.0, 0.5], 2, 2);
        let point = bip(&[0.0, 1.0, 0.0, 0.0], 2, 2);
        let m = check_blacktriangleleft(&point, &ebit, "X", "Y").unwrap();
        assert_eq!(m.condition, Some(TriangleCondition::Uncorrelated));
        let m = check_blacktriangleleft(&ebit, &ebit, "X", "Y").unwrap();
        assert_eq!(m.condition, Some(TriangleCondition::SupportContained));

        // q uses x = 2 and y = 2, neither of which p has
        let q = bip(&[0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.5], 3, 3);
        let p = bip(&[0.5, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0], 3, 3);
        assert!(!check_blacktriangleleft(&q, &p, "X", "Y").unwrap().holds);

        let other = Tripartite::from_dense(3, 2, 1, vec![0.5, 0.0, 0.0, 0.5, 0.0, 0.0]).to_table(["X", "Y", "Z"]).unwrap();
        assert!(matches!(check_blacktriangleleft(&other, &ebit, "X", "Y"), Err(Error::AlphabetMismatch(_))));
    }

    #[test]
    fn scan_examples() {
        let c = zero_pattern_scan(&corpus::named("SPOILED_BIT").unwrap(), &Roles::default()).unwrap();
        assert_eq!(
            c,
            vec![Certificate::ZeroPattern { x: "0".into(), y: "1".into(), z0: "0".into(), z1: "1".into() }]
        );
        assert!(zero_pattern_scan(&corpus::named("ERASURE_HALF").unwrap(), &Roles::default()).unwrap().is_empty());
        assert!(zero_pattern_scan(&corpus::named("PERFECT_BIT").unwrap(), &Roles::default()).unwrap().is_empty());
    }
}
