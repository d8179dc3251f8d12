//! Named example distributions and seeded class-conditioned generators.
//!
//! Every generator builds its members from the defining product form of the
//! class rather than by rejection, so detectors are tested against an
//! independent construction.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dist::JointTable;
use crate::error::{Error, Result};

pub const NAMED: &[&str] = &[
    "PERFECT_BIT",
    "PRODUCT_UNIF",
    "XOR_TRIPLE",
    "ERASURE_HALF",
    "FLAGGED_QUAD",
    "SPOILED_BIT",
    "NONBI_MIX",
    "FLAGGED_NONUBI",
    "MIXED_2X3",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    SbiRandom,
    BiRandom,
    UbiRandom,
    UbiPdRandom,
    UbiPdDownRandom,
    FlaggedRandom,
    MaxcorrRandom,
}

impl Generator {
    pub const ALL: [Generator; 7] = [
        Generator::SbiRandom,
        Generator::BiRandom,
        Generator::UbiRandom,
        Generator::UbiPdRandom,
        Generator::UbiPdDownRandom,
        Generator::FlaggedRandom,
        Generator::MaxcorrRandom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Generator::SbiRandom => "sbi_random",
            Generator::BiRandom => "bi_random",
            Generator::UbiRandom => "ubi_random",
            Generator::UbiPdRandom => "ubi_pd_random",
            Generator::UbiPdDownRandom => "ubi_pd_down_random",
            Generator::FlaggedRandom => "flagged_random",
            Generator::MaxcorrRandom => "maxcorr_random",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.name() == name)
    }

    /// Class key (as used in classification reports) the members belong to.
    pub fn class(self) -> &'static str {
        match self {
            Generator::SbiRandom => "sbi",
            Generator::BiRandom => "bi",
            Generator::UbiRandom => "ubi",
            Generator::UbiPdRandom => "ubi_pd",
            Generator::UbiPdDownRandom => "ubi_pd_down",
            Generator::FlaggedRandom => "lopc_flagged",
            Generator::MaxcorrRandom => "ubi",
        }
    }

    pub fn generate(self, seed: u64) -> JointTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self {
            Generator::SbiRandom => sbi_random(&mut rng),
            Generator::BiRandom => bi_random(&mut rng),
            Generator::UbiRandom => ubi_random(&mut rng),
            Generator::UbiPdRandom => ubi_pd_random(&mut rng),
            Generator::UbiPdDownRandom => ubi_pd_down_random(&mut rng),
            Generator::FlaggedRandom => flagged_random(&mut rng),
            Generator::MaxcorrRandom => maxcorr_random(&mut rng),
        }
    }
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn strs(ls: &[&str]) -> Vec<String> {
    ls.iter().map(|s| s.to_string()).collect()
}

/// Builds an X, Y, Z table from a dense array (z fastest).
pub fn xyz(xl: Vec<String>, yl: Vec<String>, zl: Vec<String>, mass: Vec<f64>) -> JointTable {
    JointTable::checked(strs(&["X", "Y", "Z"]), vec![xl, yl, zl], mass).expect("corpus tables are valid")
}

fn sparse(xl: &[&str], yl: &[&str], zl: &[&str], entries: &[(&str, &str, &str, f64)]) -> JointTable {
    let (nx, ny, nz) = (xl.len(), yl.len(), zl.len());
    let mut mass = vec![0.0; nx * ny * nz];
    for &(x, y, z, p) in entries {
        let i = |ls: &[&str], l: &str| ls.iter().position(|s| *s == l).expect("label in alphabet");
        mass[(i(xl, x) * ny + i(yl, y)) * nz + i(zl, z)] += p;
    }
    xyz(strs(xl), strs(yl), strs(zl), mass)
}

/// Looks up a named table.
pub fn named(name: &str) -> Result<JointTable> {
    let bits = ["0", "1"];
    Ok(match name {
        "PERFECT_BIT" => sparse(&bits, &bits, &["0"], &[("0", "0", "0", 0.5), ("1", "1", "0", 0.5)]),
        "PRODUCT_UNIF" => sparse(
            &bits,
            &bits,
            &["0"],
            &[("0", "0", "0", 0.25), ("0", "1", "0", 0.25), ("1", "0", "0", 0.25), ("1", "1", "0", 0.25)],
        ),
        "XOR_TRIPLE" => sparse(
            &bits,
            &bits,
            &bits,
            &[("0", "0", "0", 0.25), ("0", "1", "1", 0.25), ("1", "0", "1", 0.25), ("1", "1", "0", 0.25)],
        ),
        "ERASURE_HALF" => sparse(
            &bits,
            &bits,
            &["0", "1", "e"],
            &[("0", "0", "0", 0.25), ("0", "0", "e", 0.25), ("1", "1", "1", 0.25), ("1", "1", "e", 0.25)],
        ),
        "FLAGGED_QUAD" => {
            let q = ["0", "1", "2", "3"];
            let mut e = vec![("0", "0", "a", 0.25), ("1", "1", "a", 0.25)];
            for x in ["2", "3"] {
                for y in ["2", "3"] {
                    e.push((x, y, "b", 0.125));
                }
            }
            sparse(&q, &q, &["a", "b"], &e)
        }
        "SPOILED_BIT" => sparse(&bits, &bits, &bits, &[("0", "0", "0", 0.25), ("1", "1", "0", 0.25), ("0", "1", "1", 0.5)]),
        "NONBI_MIX" => {
            // Two locally identifiable blocks {0,1} and {2,3}, each with
            // probability 1/2 under every z; the in-block pattern over
            // (00, 01, 10, 11) depends on z but averages to uniform.
            let pz = [0.2, 0.8];
            let pattern = [[0.5, 0.25, 0.0, 0.25], [3.0 / 16.0, 0.25, 5.0 / 16.0, 0.25]];
            let mut mass = vec![0.0; 4 * 4 * 2];
            for b in 0..2 {
                for (k, (dx, dy)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
                    for z in 0..2 {
                        mass[((2 * b + dx) * 4 + 2 * b + dy) * 2 + z] = pz[z] * 0.5 * pattern[z][k];
                    }
                }
            }
            xyz(labels(4), labels(4), labels(2), mass)
        }
        "FLAGGED_NONUBI" => sparse(
            &bits,
            &["0", "1", "2"],
            &["a", "b"],
            &[("0", "0", "a", 0.25), ("1", "1", "a", 0.25), ("0", "2", "b", 0.25), ("1", "2", "b", 0.25)],
        ),
        "MIXED_2X3" => sparse(
            &bits,
            &["0", "1", "2"],
            &bits,
            &[("0", "0", "0", 0.4 * 0.3), ("1", "1", "0", 0.4 * 0.7), ("0", "2", "1", 0.3), ("1", "2", "1", 0.3)],
        ),
        _ => return Err(Error::Malformed(format!("unknown corpus entry `{name}`"))),
    })
}

/// Named table or seeded generator member.
pub fn emit(name: &str, seed: u64) -> Result<JointTable> {
    match Generator::from_name(name) {
        Some(g) => Ok(g.generate(seed)),
        None => named(name),
    }
}

/// All names understood by [`emit`].
pub fn list() -> Vec<&'static str> {
    NAMED.iter().copied().chain(Generator::ALL.iter().map(|g| g.name())).collect()
}

// ---------------------------------------------------------------------------
// generators

/// Strictly positive random distribution of length n.
fn simplex(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Random surjection of `0..n` onto `0..k` (k ≤ n).
fn surjection(rng: &mut impl Rng, n: usize, k: usize) -> Vec<usize> {
    let mut map: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
    map.shuffle(rng);
    map
}

/// Distribution over `0..n` supported on `{i : map[i] == b}`.
fn supported_on(rng: &mut impl Rng, map: &[usize], b: usize) -> Vec<f64> {
    let w: Vec<f64> = map.iter().map(|&m| if m == b { rng.random_range(0.05..1.0) } else { 0.0 }).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

fn finish(nx: usize, ny: usize, nz: usize, mass: Vec<f64>) -> JointTable {
    let total: f64 = mass.iter().sum();
    xyz(labels(nx), labels(ny), labels(nz), mass.into_iter().map(|m| m / total).collect())
}

/// p(j) p(x|j) p(y|j) q(z) with disjoint block supports.
fn sbi_random(rng: &mut impl Rng) -> JointTable {
    let (nx, ny, nz) = (rng.random_range(2..=4), rng.random_range(2..=4), rng.random_range(1..=3));
    let k = rng.random_range(1..=nx.min(ny));
    let (fx, fy) = (surjection(rng, nx, k), surjection(rng, ny, k));
    let pj = simplex(rng, k);
    let q = simplex(rng, nz);
    let px: Vec<Vec<f64>> = (0..k).map(|j| supported_on(rng, &fx, j)).collect();
    let py: Vec<Vec<f64>> = (0..k).map(|j| supported_on(rng, &fy, j)).collect();
    let mut mass = vec![0.0; nx * ny * nz];
    for x in 0..nx {
        for y in 0..ny {
            if fx[x] != fy[y] {
                continue;
            }
            let j = fx[x];
            for z in 0..nz {
                mass[(x * ny + y) * nz + z] = pj[j] * px[j][x] * py[j][y] * q[z];
            }
        }
    }
    finish(nx, ny, nz, mass)
}

/// Per z an independent block structure: p(z) p(j|z) p(x|j,z) p(y|j,z).
fn bi_random(rng: &mut impl Rng) -> JointTable {
    let (nx, ny, nz) = (rng.random_range(2..=3), rng.random_range(2..=3), rng.random_range(1..=3));
    let pz = simplex(rng, nz);
    let mut mass = vec![0.0; nx * ny * nz];
    for z in 0..nz {
        let k = rng.random_range(1..=nx.min(ny));
        let (fx, fy) = (surjection(rng, nx, k), surjection(rng, ny, k));
        let pj = simplex(rng, k);
        let px: Vec<Vec<f64>> = (0..k).map(|j| supported_on(rng, &fx, j)).collect();
        let py: Vec<Vec<f64>> = (0..k).map(|j| supported_on(rng, &fy, j)).collect();
        for x in 0..nx {
            for y in 0..ny {
                if fx[x] == fy[y] {
                    let j = fx[x];
                    mass[(x * ny + y) * nz + z] = pz[z] * pj[j] * px[j][x] * py[j][y];
                }
            }
        }
    }
    finish(nx, ny, nz, mass)
}

/// Global block maps K_X, K_Y; per z a distribution over blocks and a full
/// product inside each block.
fn ubi_random(rng: &mut impl Rng) -> JointTable {
    let (nx, ny, nz) = (rng.random_range(2..=4), rng.random_range(2..=4), rng.random_range(1..=3));
    let k = rng.random_range(1..=nx.min(ny));
    let (fx, fy) = (surjection(rng, nx, k), surjection(rng, ny, k));
    let pz = simplex(rng, nz);
    let mut mass = vec![0.0; nx * ny * nz];
    for z in 0..nz {
        // some blocks may be absent under a given z
        let mut pj = simplex(rng, k);
        if k > 1 && rng.random_bool(0.3) {
            pj[rng.random_range(0..k)] = 0.0;
        }
        let px: Vec<Vec<f64>> = (0..k).map(|j| supported_on(rng, &fx, j)).collect();
        let py: Vec<Vec<f64>> = (0..k).map(|j| supported_on(rng, &fy, j)).collect();
        for x in 0..nx {
            for y in 0..ny {
                if fx[x] == fy[y] {
                    let j = fx[x];
                    mass[(x * ny + y) * nz + z] = pz[z] * pj[j] * px[j][x] * py[j][y];
                }
            }
        }
    }
    finish(nx, ny, nz, mass)
}

/// Binary X; each z is either correlated (X = Y on {0, 1}) or uncorrelated
/// (X independent of a Y drawn from {2, …}). Bob revealing whether y < 2
/// makes the table uniform block independent.
fn ubi_pd_random(rng: &mut impl Rng) -> JointTable {
    let ny = rng.random_range(3..=4);
    let nz = rng.random_range(2..=3);
    let pz = simplex(rng, nz);
    let mut mass = vec![0.0; 2 * ny * nz];
    for z in 0..nz {
        let correlated = z == 0 || (z > 1 && rng.random_bool(0.5));
        let px = simplex(rng, 2);
        if correlated {
            for x in 0..2 {
                mass[(x * ny + x) * nz + z] = pz[z] * px[x];
            }
        } else {
            let py = simplex(rng, ny - 2);
            for x in 0..2 {
                for y in 2..ny {
                    mass[(x * ny + y) * nz + z] = pz[z] * px[x] * py[y - 2];
                }
            }
        }
    }
    finish(2, ny, nz, mass)
}

/// Two locally identifiable 2×2 blocks, each with probability 1/2 under every
/// z; the in-block pattern varies with z but averages to uniform, so the
/// (X, Y) marginal is uniform block independent with a z-independent block.
fn ubi_pd_down_random(rng: &mut impl Rng) -> JointTable {
    let nz = rng.random_range(2..=3);
    let pz = simplex(rng, nz);
    let mut mass = vec![0.0; 4 * 4 * nz];
    for b in 0..2 {
        // perturbations d_z with Σ p(z) d_z = 0 and entries summing to 0
        let mut d: Vec<[f64; 4]> = (0..nz - 1)
            .map(|_| {
                let mut v = [0.0; 4];
                for e in v.iter_mut() {
                    *e = rng.random_range(-1.0..1.0);
                }
                let mean = v.iter().sum::<f64>() / 4.0;
                v.map(|e| e - mean)
            })
            .collect();
        let mut last = [0.0; 4];
        for (z, dz) in d.iter().enumerate() {
            for k in 0..4 {
                last[k] -= pz[z] * dz[k] / pz[nz - 1];
            }
        }
        d.push(last);
        let peak = d.iter().flatten().fold(0.0f64, |m, &e| m.max(-e));
        let scale = if peak > 0.0 { rng.random_range(0.3..1.0) * 0.25 / peak } else { 0.0 };
        for z in 0..nz {
            for (k, (dx, dy)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
                let c = 0.25 + scale * d[z][k];
                mass[((2 * b + dx) * 4 + 2 * b + dy) * nz + z] = pz[z] * 0.5 * c.max(0.0);
            }
        }
    }
    finish(4, 4, nz, mass)
}

/// Mixture of SBI branches with disjoint Eve supports. The branch is either
/// known to both parties (disjoint x and y labels) or only to Bob (shared x
/// labels, disjoint y labels).
fn flagged_random(rng: &mut impl Rng) -> JointTable {
    let branches = rng.random_range(1..=3usize);
    let shared_x = branches > 1 && rng.random_bool(0.5);
    let sizes: Vec<(usize, usize, usize)> =
        (0..branches).map(|_| (rng.random_range(1..=2), rng.random_range(1..=2), rng.random_range(1..=2))).collect();
    let nx = if shared_x { 2 } else { sizes.iter().map(|s| s.0).sum() };
    let ny: usize = sizes.iter().map(|s| s.1).sum();
    let nz: usize = sizes.iter().map(|s| s.2).sum();
    let pm = simplex(rng, branches);
    let mut mass = vec![0.0; nx * ny * nz];
    let (mut x0, mut y0, mut z0) = (0, 0, 0);
    for (m, &(sx, sy, sz)) in sizes.iter().enumerate() {
        let sx = if shared_x { 2 } else { sx };
        // SBI branch: blocks pair x and y labels; independent Eve
        let k = rng.random_range(1..=sx.min(sy));
        let (fx, fy) = (surjection(rng, sx, k), surjection(rng, sy, k));
        let pj = simplex(rng, k);
        let px: Vec<Vec<f64>> = (0..k).map(|j| supported_on(rng, &fx, j)).collect();
        let py: Vec<Vec<f64>> = (0..k).map(|j| supported_on(rng, &fy, j)).collect();
        let q = simplex(rng, sz);
        for x in 0..sx {
            for y in 0..sy {
                if fx[x] != fy[y] {
                    continue;
                }
                for z in 0..sz {
                    let j = fx[x];
                    mass[((x0 + x) * ny + y0 + y) * nz + z0 + z] = pm[m] * pj[j] * px[j][x] * py[j][y] * q[z];
                }
            }
        }
        if !shared_x {
            x0 += sx;
        }
        y0 += sy;
        z0 += sz;
    }
    finish(nx, ny, nz, mass)
}

/// p(x, y | z) = δ_xy p(x | z) over binary X and Y.
fn maxcorr_random(rng: &mut impl Rng) -> JointTable {
    let nz = rng.random_range(1..=4);
    let pz = simplex(rng, nz);
    let p0: Vec<f64> = (0..nz).map(|_| rng.random_range(0.02..0.98)).collect();
    maxcorr(&pz, &p0)
}

/// Maximally correlated table from p(z) and p(X=0 | z).
pub fn maxcorr(pz: &[f64], p0: &[f64]) -> JointTable {
    let nz = pz.len();
    let mut mass = vec![0.0; 4 * nz];
    for z in 0..nz {
        mass[z] = pz[z] * p0[z];
        mass[3 * nz + z] = pz[z] * (1.0 - p0[z]);
    }
    xyz(labels(2), labels(2), labels(nz), mass)
}

// ---------------------------------------------------------------------------
// manifest

/// How an expected value was obtained: `oracle` values were computed by an
/// independent script and frozen; `construction` ones follow directly from
/// how the table is built; `reference` marks a published parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Oracle,
    Construction,
    Reference,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expected {
    pub quantity: &'static str,
    pub value: f64,
    pub basis: Basis,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub expected: Vec<Expected>,
    /// class key → "yes" / "no"
    pub classes: BTreeMap<&'static str, &'static str>,
}

fn entry(name: &'static str, expected: &[(&'static str, f64, Basis)], classes: [&'static str; 7]) -> CorpusEntry {
    const KEYS: [&str; 7] = ["sbi", "bi", "ubi", "ubi_pd", "ubi_pd_down", "lopc_flagged", "bidisjoint"];
    CorpusEntry {
        name,
        expected: expected.iter().map(|&(quantity, value, basis)| Expected { quantity, value, basis }).collect(),
        classes: KEYS.into_iter().zip(classes).collect(),
    }
}

/// Expected quantities and class verdicts for the named tables. Class
/// arrays are in the order sbi, bi, ubi, ubi_pd, ubi_pd_down, lopc_flagged,
/// bidisjoint.
pub fn manifest() -> Vec<CorpusEntry> {
    use Basis::*;
    const Y: &str = "yes";
    const N: &str = "no";
    vec![
        entry(
            "PERFECT_BIT",
            &[("I(X:Y|Z)", 1.0, Construction), ("intrinsic", 1.0, Construction), ("key", 1.0, Construction)],
            [Y, Y, Y, Y, Y, Y, Y],
        ),
        entry(
            "PRODUCT_UNIF",
            &[("I(X:Y|Z)", 0.0, Construction), ("intrinsic", 0.0, Construction), ("key", 0.0, Construction)],
            [Y, Y, Y, Y, Y, Y, Y],
        ),
        entry(
            "XOR_TRIPLE",
            &[("I(X:Y)", 0.0, Oracle), ("I(X:Y|Z)", 1.0, Oracle), ("intrinsic", 0.0, Construction), ("key", 0.0, Construction)],
            [N, Y, N, N, Y, N, Y],
        ),
        entry(
            "ERASURE_HALF",
            &[
                ("I(X:Y|Z)", 0.5, Oracle),
                ("H(J|Z)", 0.5, Oracle),
                ("intrinsic", 0.5, Oracle),
                ("keycost", 0.5, Oracle),
                ("key", 0.5, Oracle),
            ],
            [N, Y, Y, Y, Y, N, N],
        ),
        entry(
            "FLAGGED_QUAD",
            &[("I(X:Y|Z)", 0.5, Oracle), ("intrinsic", 0.5, Oracle), ("key", 0.5, Oracle)],
            [N, Y, Y, Y, Y, Y, Y],
        ),
        entry(
            "SPOILED_BIT",
            &[("I(X:Y|Z)", 0.5, Oracle), ("I(X:Y)", SPOILED_MI, Oracle)],
            [N, Y, N, N, N, N, Y],
        ),
        entry(
            "NONBI_MIX",
            &[("p(Z=0)", 0.2, Reference), ("I(X:Y)", 1.0, Oracle), ("intrinsic", 1.0, Oracle), ("key", 1.0, Oracle)],
            [N, N, N, N, Y, N, N],
        ),
        entry(
            "FLAGGED_NONUBI",
            &[("I(X:Y|Z)", 0.5, Oracle), ("intrinsic", 0.5, Oracle), ("key", 0.5, Oracle)],
            [N, Y, N, Y, Y, Y, Y],
        ),
        entry(
            "MIXED_2X3",
            &[("I(X:Y|Z)", MIXED_CMI, Oracle), ("intrinsic", MIXED_CMI, Oracle), ("key", MIXED_CMI, Oracle)],
            [N, Y, N, Y, Y, Y, Y],
        ),
    ]
}

/// I(X:Y) of SPOILED_BIT: 2 h(1/4) − 3/2.
const SPOILED_MI: f64 = 0.12255624891826566;
/// I(X:Y|Z) of MIXED_2X3: 0.4 h(0.3).
const MIXED_CMI: f64 = 0.3525163596922771;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_tables_are_valid() {
        for name in NAMED {
            named(name).unwrap().ensure_valid().unwrap();
        }
        assert!(named("NOPE").is_err());
    }

    #[test]
    fn generators_are_reproducible() {
        for g in Generator::ALL {
            for seed in 0..20 {
                let a = g.generate(seed);
                a.ensure_valid().unwrap();
                assert_eq!(a, g.generate(seed));
            }
        }
    }

    #[test]
    fn manifest_covers_named_tables() {
        let m = manifest();
        assert_eq!(m.len(), NAMED.len());
        for (e, n) in m.iter().zip(NAMED) {
            assert_eq!(e.name, *n);
        }
    }
}
