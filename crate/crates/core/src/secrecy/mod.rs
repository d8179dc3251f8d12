//! Intrinsic information, key-cost bounds, impossibility certificates and
//! the reversibility decision.

pub mod certificates;
pub mod intrinsic;
pub mod keycost;
pub mod reversibility;
pub mod simplex;

use crate::dist::Channel;

/// Row-major `nz × k` stochastic matrix acting on Eve's symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseChannel {
    pub nz: usize,
    pub k: usize,
    pub w: Vec<f64>,
}

impl DenseChannel {
    pub fn identity(nz: usize) -> Self {
        let map: Vec<usize> = (0..nz).collect();
        Self::deterministic(&map, nz)
    }

    pub fn constant(nz: usize) -> Self {
        Self::deterministic(&vec![0; nz], 1)
    }

    pub fn deterministic(map: &[usize], k: usize) -> Self {
        let nz = map.len();
        let mut w = vec![0.0; nz * k];
        for (z, &b) in map.iter().enumerate() {
            w[z * k + b] = 1.0;
        }
        Self { nz, k, w }
    }

    pub fn is_deterministic(&self) -> bool {
        self.w.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Drops output columns that receive no mass from `pz`-supported rows.
    pub fn trimmed(&self, pz: &[f64]) -> DenseChannel {
        let used: Vec<usize> = (0..self.k)
            .filter(|&c| (0..self.nz).any(|z| pz[z] > 0.0 && self.w[z * self.k + c] > 0.0))
            .collect();
        let k = used.len().max(1);
        let mut w = vec![0.0; self.nz * k];
        for z in 0..self.nz {
            if used.is_empty() {
                w[z * k] = 1.0;
                continue;
            }
            let s: f64 = used.iter().map(|&c| self.w[z * self.k + c]).sum();
            for (i, &c) in used.iter().enumerate() {
                w[z * k + i] = if s > 0.0 { self.w[z * self.k + c] / s } else { (i == 0) as u8 as f64 };
            }
        }
        DenseChannel { nz: self.nz, k, w }
    }

    pub fn to_channel(&self, z_labels: &[String]) -> Channel {
        let out: Vec<String> = (0..self.k).map(|i| format!("zb{i}")).collect();
        let rows = (0..self.nz).map(|z| self.w[z * self.k..(z + 1) * self.k].to_vec()).collect();
        Channel::new(z_labels.to_vec(), out, rows).expect("dense channels are row-stochastic")
    }

    pub fn from_channel(ch: &Channel) -> Self {
        let nz = ch.input_alphabet().len();
        let k = ch.output_alphabet().len();
        Self { nz, k, w: ch.matrix().iter().flatten().copied().collect() }
    }
}
