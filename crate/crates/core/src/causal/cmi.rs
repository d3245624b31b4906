use std::collections::HashMap;

use rand_chacha::ChaCha8Rng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Hypergeometric};

/// Compact stratum ids for a set of conditioning columns.
#[derive(Debug, Clone)]
pub struct Strata {
    ids: Vec<u32>,
    count: usize,
}

impl Strata {
    /// `columns` are `(codes, cardinality)` pairs of equal length `rows`.
    pub fn new(columns: &[(&[u16], usize)], rows: usize) -> Self {
        if columns.is_empty() {
            return Strata {
                ids: vec![0; rows],
                count: 1,
            };
        }
        let mut map: HashMap<u64, u32> = HashMap::new();
        let ids = (0..rows)
            .map(|r| {
                let key = columns
                    .iter()
                    .fold(0u64, |acc, (codes, card)| acc * *card as u64 + codes[r] as u64);
                let next = map.len() as u32;
                *map.entry(key).or_insert(next)
            })
            .collect();
        Strata { ids, count: map.len() }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiResult {
    /// Conditional mutual information, nats.
    pub cmi: f64,
    pub p_value: f64,
    /// Permutations actually drawn (sampling stops once the decision at `alpha` is settled).
    pub permutations: usize,
}

fn xlogx(n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        n as f64 * (n as f64).ln()
    }
}

/// Sum of `n ln n` over the cells of a (stratum, x, y) contingency table.
fn cell_term(counts: &[u32]) -> f64 {
    counts.iter().map(|&c| xlogx(c as usize)).sum()
}

struct Table {
    xyz: Vec<u32>,
    xz: Vec<u32>,
    yz: Vec<u32>,
    z: Vec<u32>,
}

fn tabulate(x: &[u16], xc: usize, y: &[u16], yc: usize, z: &Strata) -> Table {
    let k = z.count;
    let mut t = Table {
        xyz: vec![0; k * xc * yc],
        xz: vec![0; k * xc],
        yz: vec![0; k * yc],
        z: vec![0; k],
    };
    for r in 0..x.len() {
        let s = z.ids[r] as usize;
        let (a, b) = (x[r] as usize, y[r] as usize);
        t.xyz[(s * xc + a) * yc + b] += 1;
        t.xz[s * xc + a] += 1;
        t.yz[s * yc + b] += 1;
        t.z[s] += 1;
    }
    t
}

/// Plug-in conditional mutual information `I(X; Y | Z)` in nats.
pub fn cmi(x: &[u16], xc: usize, y: &[u16], yc: usize, z: &Strata) -> f64 {
    let n = x.len();
    if n == 0 {
        return 0.0;
    }
    let t = tabulate(x, xc, y, yc, z);
    let v = cell_term(&t.xyz) + cell_term(&t.z) - cell_term(&t.xz) - cell_term(&t.yz);
    (v / n as f64).max(0.0)
}

/// Marked items among `draws` taken without replacement from `total` items, `marked` of them
/// marked. Falls back to deciding marked items one at a time when the library sampler's
/// set-up underflows.
fn hypergeometric(total: u64, marked: u64, draws: u64, rng: &mut ChaCha8Rng) -> u64 {
    if let Ok(h) = Hypergeometric::new(total, marked, draws) {
        return h.sample(rng);
    }
    let (few, many) = if marked < draws { (marked, draws) } else { (draws, marked) };
    let mut hits = 0;
    for i in 0..few {
        if rng.random_range(0..total - i) < many - hits {
            hits += 1;
        }
    }
    hits
}

/// Cell counts of one stratum after a random shuffle of Y, drawn directly: with both margins
/// fixed the table is multivariate hypergeometric, filled row by row and column by column.
fn permuted_table(rows: &[u32], cols: &[u32], rng: &mut ChaCha8Rng, cells: &mut [u32], left: &mut [u64]) {
    let yc = cols.len();
    for (l, &c) in left.iter_mut().zip(cols) {
        *l = c as u64;
    }
    let mut pool: u64 = left.iter().sum();
    for (i, &r) in rows.iter().enumerate() {
        let row = &mut cells[i * yc..(i + 1) * yc];
        if i + 1 == rows.len() {
            for (cell, &l) in row.iter_mut().zip(left.iter()) {
                *cell = l as u32;
            }
            break;
        }
        let mut need = r as u64;
        let mut rest = pool;
        for j in 0..yc {
            let k = if need == 0 || left[j] == 0 {
                0
            } else if left[j] == rest || j + 1 == yc {
                need
            } else {
                hypergeometric(rest, left[j], need, rng)
            };
            row[j] = k as u32;
            rest -= left[j];
            left[j] -= k;
            need -= k;
        }
        pool -= r as u64;
    }
}

/// Permutation test of `X independent of Y given Z`: `Y` is shuffled within each stratum of
/// `Z`, which keeps both conditional margins fixed. Deterministic for a given `seed`.
///
/// With `alpha` set, sampling stops as soon as the outcome of `p < alpha` cannot change; the
/// decision is identical to the full run, the reported p-value is then an estimate.
pub fn ci_test(
    x: &[u16],
    xc: usize,
    y: &[u16],
    yc: usize,
    z: &Strata,
    permutations: usize,
    alpha: Option<f64>,
    seed: u64,
) -> CiResult {
    let n = x.len();
    let t = tabulate(x, xc, y, yc, z);
    let observed = cmi(x, xc, y, yc, z);

    // Only strata where both X and Y vary can change under permutation.
    let varies = |margin: &[u32], s: usize, c: usize| margin[s * c..(s + 1) * c].iter().filter(|&&m| m > 0).count() > 1;
    let active: Vec<bool> = (0..z.count).map(|s| varies(&t.xz, s, xc) && varies(&t.yz, s, yc)).collect();
    if n == 0 || !active.iter().any(|&a| a) {
        return CiResult {
            cmi: observed,
            p_value: 1.0,
            permutations: 0,
        };
    }
    let active_ids: Vec<usize> = (0..z.count).filter(|&s| active[s]).collect();
    let block = xc * yc;
    let obs_stat: f64 = active_ids.iter().map(|&s| cell_term(&t.xyz[s * block..(s + 1) * block])).sum();
    let mut cells = vec![0u32; block];
    let mut left = vec![0u64; yc];
    let mut stat = |rng: &mut ChaCha8Rng| -> f64 {
        active_ids
            .iter()
            .map(|&s| {
                permuted_table(&t.xz[s * xc..(s + 1) * xc], &t.yz[s * yc..(s + 1) * yc], rng, &mut cells, &mut left);
                cell_term(&cells)
            })
            .sum()
    };
    let tol = 1e-9 * obs_stat.abs().max(1.0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = permutations.max(1);
    let mut exceed = 0usize;
    let mut drawn = 0usize;
    while drawn < total {
        drawn += 1;
        if stat(&mut rng) >= obs_stat - tol {
            exceed += 1;
        }
        let Some(alpha) = alpha else { continue };
        let denom = (total + 1) as f64;
        if (1 + exceed) as f64 / denom >= alpha {
            break; // p can only grow: independence is already decided
        }
        if ((1 + exceed + total - drawn) as f64) / denom < alpha {
            break; // even if every remaining draw exceeded, p stays below alpha
        }
    }
    let p_value = if drawn == total {
        (1 + exceed) as f64 / (total + 1) as f64
    } else if (1 + exceed) as f64 / (total + 1) as f64 >= alpha.unwrap_or(0.0) {
        ((1 + exceed) as f64 / (drawn + 1) as f64).min(1.0)
    } else {
        (1 + exceed) as f64 / (total + 1) as f64
    };
    CiResult {
        cmi: observed,
        p_value,
        permutations: drawn,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cmi_matches_direct_formula() {
        // x = y on half the rows, z irrelevant
        let x: Vec<u16> = (0..8).map(|i| (i % 2) as u16).collect();
        let y = x.clone();
        let z = Strata::new(&[], 8);
        assert!((cmi(&x, 2, &y, 2, &z) - 2f64.ln()).abs() < 1e-12);
        let y2: Vec<u16> = (0..8).map(|i| ((i / 2) % 2) as u16).collect();
        assert!(cmi(&x, 2, &y2, 2, &z).abs() < 1e-12);
    }

    #[test]
    fn conditioning_removes_common_cause() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 4000;
        let z: Vec<u16> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let noisy = |rng: &mut ChaCha8Rng, v: u16| if rng.random::<f64>() < 0.8 { v } else { rng.random_range(0..3) };
        let x: Vec<u16> = z.iter().map(|&v| noisy(&mut rng, v)).collect();
        let y: Vec<u16> = z.iter().map(|&v| noisy(&mut rng, v)).collect();
        let none = Strata::new(&[], n);
        let given = Strata::new(&[(&z, 3)], n);
        assert!(ci_test(&x, 3, &y, 3, &none, 200, Some(0.05), 7).p_value < 0.05);
        assert!(ci_test(&x, 3, &y, 3, &given, 200, Some(0.05), 7).p_value >= 0.05);
    }

    #[test]
    fn permuted_tables_keep_margins() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (rows, cols) = ([5u32, 0, 9, 3], [7u32, 2, 8]);
        let mut cells = vec![0u32; 12];
        let mut left = vec![0u64; 3];
        for _ in 0..200 {
            permuted_table(&rows, &cols, &mut rng, &mut cells, &mut left);
            for (i, &r) in rows.iter().enumerate() {
                assert_eq!(cells[i * 3..(i + 1) * 3].iter().sum::<u32>(), r);
            }
            for (j, &c) in cols.iter().enumerate() {
                assert_eq!((0..4).map(|i| cells[i * 3 + j]).sum::<u32>(), c);
            }
        }
    }

    #[test]
    fn early_stopping_keeps_decision() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 500;
        let x: Vec<u16> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let y: Vec<u16> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let z = Strata::new(&[], n);
        let full = ci_test(&x, 2, &y, 2, &z, 500, None, 5);
        for alpha in [0.01, 0.05, 0.1, 0.5] {
            let fast = ci_test(&x, 2, &y, 2, &z, 500, Some(alpha), 5);
            assert_eq!(fast.p_value < alpha, full.p_value < alpha);
        }
    }
}
