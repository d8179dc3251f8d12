//! Brute-force reference computations, written independently of the main
//! algorithms and used to cross-check them in tests.

use crate::error::{Error, Result};

/// Largest alphabet accepted by [`oracle_common_partition`].
pub const ORACLE_MAX_XY: usize = 4;
/// Largest Eve alphabet accepted by [`oracle_intrinsic_exhaustive`].
pub const ORACLE_MAX_Z: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct OraclePartition {
    /// Supported x labels per block, blocks ordered by smallest x.
    pub x_blocks: Vec<Vec<usize>>,
    pub y_blocks: Vec<Vec<usize>>,
    pub entropy: f64,
}

fn h(masses: &[f64]) -> f64 {
    let t: f64 = masses.iter().sum();
    masses.iter().filter(|&&m| m > 0.0).map(|&m| -(m / t) * (m / t).log2()).sum()
}

/// All labelings of `n` items into blocks (restricted growth strings).
fn labelings(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for b in 0..=next {
            prefix.push(b);
            rec(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), n, &mut out);
    out
}

/// max H(K) over K = f(X) = g(Y) almost surely, by enumerating every
/// coarsening f of the supported x labels and deriving g from the support.
pub fn oracle_common_partition(pxy: &[f64], nx: usize, ny: usize) -> Result<OraclePartition> {
    if nx > ORACLE_MAX_XY || ny > ORACLE_MAX_XY {
        return Err(Error::SizeCap(format!("oracle partition search is limited to {ORACLE_MAX_XY} labels per side")));
    }
    let xs: Vec<usize> = (0..nx).filter(|&x| (0..ny).any(|y| pxy[x * ny + y] > 0.0)).collect();
    let ys: Vec<usize> = (0..ny).filter(|&y| (0..nx).any(|x| pxy[x * ny + y] > 0.0)).collect();
    let mut best: Option<(f64, Vec<usize>, Vec<usize>)> = None;
    for f in labelings(xs.len()) {
        let fx = |x: usize| f[xs.iter().position(|&s| s == x).unwrap()];
        let mut g = Vec::with_capacity(ys.len());
        let mut ok = true;
        for &y in &ys {
            let blocks: Vec<usize> = xs.iter().filter(|&&x| pxy[x * ny + y] > 0.0).map(|&x| fx(x)).collect();
            if blocks.iter().any(|&b| b != blocks[0]) {
                ok = false;
                break;
            }
            g.push(blocks[0]);
        }
        if !ok {
            continue;
        }
        let k = f.iter().max().map_or(0, |m| m + 1);
        let mut mass = vec![0.0; k];
        for (i, &x) in xs.iter().enumerate() {
            mass[f[i]] += (0..ny).map(|y| pxy[x * ny + y]).sum::<f64>();
        }
        let e = h(&mass);
        if best.as_ref().is_none_or(|(b, _, _)| e > *b + 1e-12) {
            best = Some((e, f.clone(), g));
        }
    }
    let Some((entropy, f, g)) = best else {
        return Ok(OraclePartition { x_blocks: Vec::new(), y_blocks: Vec::new(), entropy: 0.0 });
    };
    let k = f.iter().max().map_or(0, |m| m + 1);
    let x_blocks: Vec<Vec<usize>> =
        (0..k).map(|b| xs.iter().enumerate().filter(|(i, _)| f[*i] == b).map(|(_, &x)| x).collect()).collect();
    let y_blocks = (0..k).map(|b| ys.iter().enumerate().filter(|(i, _)| g[*i] == b).map(|(_, &y)| y).collect()).collect();
    Ok(OraclePartition { x_blocks, y_blocks, entropy })
}

/// I(X:Y|Z) from scratch, via H(XZ) + H(YZ) − H(XYZ) − H(Z).
pub fn oracle_cmi(p: &[f64], nx: usize, ny: usize, nz: usize) -> f64 {
    let idx = |x: usize, y: usize, z: usize| (x * ny + y) * nz + z;
    let marg = |keep: &dyn Fn(usize, usize, usize) -> usize, n: usize| {
        let mut m = vec![0.0; n];
        for x in 0..nx {
            for y in 0..ny {
                for z in 0..nz {
                    m[keep(x, y, z)] += p[idx(x, y, z)];
                }
            }
        }
        h(&m)
    };
    let hxz = marg(&|x, _, z| x * nz + z, nx * nz);
    let hyz = marg(&|_, y, z| y * nz + z, ny * nz);
    let hxyz = h(p);
    let hz = marg(&|_, _, z| z, nz);
    (hxz + hyz - hxyz - hz).max(0.0)
}

/// min I(X:Y|f(Z)) over every map f: Z → {0, …, |Z|−1}.
pub fn oracle_intrinsic_exhaustive(p: &[f64], nx: usize, ny: usize, nz: usize) -> Result<f64> {
    if nz > ORACLE_MAX_Z {
        return Err(Error::SizeCap(format!("oracle channel sweep is limited to {ORACLE_MAX_Z} Eve symbols")));
    }
    let mut best = f64::INFINITY;
    let mut f = vec![0usize; nz];
    loop {
        let mut q = vec![0.0; nx * ny * nz];
        for xy in 0..nx * ny {
            for z in 0..nz {
                q[xy * nz + f[z]] += p[xy * nz + z];
            }
        }
        best = best.min(oracle_cmi(&q, nx, ny, nz));
        // odometer over all nz^nz maps
        let mut i = 0;
        while i < nz && f[i] == nz - 1 {
            f[i] = 0;
            i += 1;
        }
        if i == nz {
            break;
        }
        f[i] += 1;
    }
    Ok(best)
}
