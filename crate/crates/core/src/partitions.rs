//! Set-partition enumeration via restricted growth strings.

use crate::error::{Error, Result};

/// Upper bound on the number of elements whose partitions we enumerate.
pub const MAX_PARTITION_ELEMENTS: usize = 10;

/// All set partitions of `{0..n}` as block-index maps, ordered by number of
/// blocks and then lexicographically. The single-block partition comes first,
/// the all-singletons partition last.
pub fn set_partitions(n: usize) -> Result<Vec<Vec<usize>>> {
    if n > MAX_PARTITION_ELEMENTS {
        return Err(Error::SizeCap(format!("partitions of {n} elements exceed the cap of {MAX_PARTITION_ELEMENTS}")));
    }
    let mut out = Vec::new();
    if n == 0 {
        out.push(Vec::new());
        return Ok(out);
    }
    let mut rgs = vec![0usize; n];
    loop {
        out.push(rgs.clone());
        // next restricted growth string
        let mut i = n - 1;
        loop {
            if i == 0 {
                out.sort_by_key(|p| (block_count(p), p.clone()));
                return Ok(out);
            }
            let max_prefix = rgs[..i].iter().copied().max().unwrap_or(0);
            if rgs[i] <= max_prefix {
                rgs[i] += 1;
                for r in rgs.iter_mut().skip(i + 1) {
                    *r = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

pub fn block_count(p: &[usize]) -> usize {
    p.iter().copied().max().map_or(0, |m| m + 1)
}

/// Lifts a partition of the listed `support` elements to a map over `0..n`;
/// elements outside the support join block 0.
pub fn lift(partition: &[usize], support: &[usize], n: usize) -> Vec<usize> {
    let mut map = vec![0; n];
    for (&s, &b) in support.iter().zip(partition) {
        map[s] = b;
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_numbers() {
        let bell = [1, 1, 2, 5, 15, 52, 203, 877, 4140];
        for (n, &b) in bell.iter().enumerate() {
            assert_eq!(set_partitions(n).unwrap().len(), b, "n={n}");
        }
    }

    #[test]
    fn ordering_is_coarsest_first() {
        let ps = set_partitions(3).unwrap();
        assert_eq!(ps.first().unwrap(), &vec![0, 0, 0]);
        assert_eq!(ps.last().unwrap(), &vec![0, 1, 2]);
        assert!(ps.windows(2).all(|w| block_count(&w[0]) <= block_count(&w[1])));
    }

    #[test]
    fn cap() {
        assert!(set_partitions(MAX_PARTITION_ELEMENTS + 1).is_err());
    }
}
