use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dag::NodeKind;
use crate::pipeline::{Column, ProcessedDataset};

fn draw(rng: &mut ChaCha8Rng, probs: &[f64]) -> u16 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i as u16;
        }
    }
    (probs.len() - 1) as u16
}

/// `n` steps from a discrete structural model with the warehouse structure: sticky charging
/// and obstacle contexts drive speed (3 levels) and battery change (4 levels); waypoint and
/// time-slot drive a persistent density (4 levels). One row per step.
pub fn synthetic_dataset(n: usize, seed: u64) -> ProcessedDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (slots, waypoints) = (11usize, 5usize);
    let mut cols: Vec<Vec<u16>> = (0..7).map(|_| Vec::with_capacity(n)).collect();
    let (mut c, mut o, mut d) = (0u16, 0u16, 0u16);
    for t in 0..n {
        let s = (t * slots / n.max(1)) as u16;
        let w = rng.random_range(0..waypoints as u16);
        c = match c {
            0 if rng.random::<f64>() < 0.005 => 1,
            1 if rng.random::<f64>() < 0.02 => 0,
            x => x,
        };
        o = match o {
            0 if rng.random::<f64>() < 0.02 => 1,
            1 if rng.random::<f64>() < 0.06 => 0,
            x => x,
        };
        let v = if c == 1 {
            draw(&mut rng, &[0.9, 0.05, 0.05])
        } else if o == 1 {
            draw(&mut rng, &[0.3, 0.5, 0.2])
        } else {
            draw(&mut rng, &[0.1, 0.1, 0.8])
        };
        let l = if c == 1 {
            if rng.random::<f64>() < 0.9 {
                3
            } else {
                rng.random_range(0..3)
            }
        } else {
            let level = 2 - u16::from(v == 2) - o;
            if rng.random::<f64>() < 0.8 {
                level
            } else {
                rng.random_range(0..4)
            }
        };
        d = if t > 0 && rng.random::<f64>() < 0.5 {
            d
        } else if rng.random::<f64>() < 0.7 {
            (w + s) % 4
        } else {
            rng.random_range(0..4)
        };
        for (col, x) in cols.iter_mut().zip([v, l, d, s, w, c, o]) {
            col.push(x);
        }
    }
    let spec = [
        ("V", NodeKind::System, 3),
        ("L", NodeKind::System, 4),
        ("D", NodeKind::System, 4),
        ("S", NodeKind::Context, slots),
        ("W", NodeKind::Context, waypoints),
        ("C", NodeKind::Context, 2),
        ("O", NodeKind::Context, 2),
    ];
    let columns = spec
        .iter()
        .zip(cols)
        .map(|(&(name, kind, card), codes)| Column::new(name, kind, card, codes, true))
        .collect();
    ProcessedDataset::new(columns, 1).expect("consistent synthetic columns")
}
