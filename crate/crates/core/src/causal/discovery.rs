use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::cmi::{ci_test, Strata};
use super::dag::{Edge, LaggedDag, Node, NodeKind};
use crate::pipeline::ProcessedDataset;
use crate::sim::stream_seed;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryConfig {
    pub alpha: f64,
    pub permutations: usize,
    /// Largest conditioning set tried while pruning candidates.
    pub max_cond: usize,
    pub seed: u64,
    /// Background ordering of system variables, used only when the data cannot orient a
    /// contemporaneous edge.
    pub precedence: Vec<String>,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        DiscoveryConfig {
            alpha: 0.05,
            permutations: 500,
            max_cond: 3,
            seed: 0,
            precedence: vec!["V".into(), "L".into()],
        }
    }
}

/// One conditional-independence test that was run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRecord {
    pub parent: String,
    pub target: String,
    pub given: Vec<String>,
    pub cmi: f64,
    pub p_value: f64,
    pub permutations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryReport {
    pub dag: LaggedDag,
    pub tests: Vec<TestRecord>,
}

/// A column at lag 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Var {
    col: usize,
    lag: u8,
}

struct Search<'a> {
    data: &'a ProcessedDataset,
    config: &'a DiscoveryConfig,
    tests: Vec<TestRecord>,
    /// Strength of each surviving (parent, target) link: the smallest CMI seen.
    strength: BTreeMap<(Var, usize), f64>,
    sepsets: BTreeMap<(Var, usize), Vec<Var>>,
}

impl<'a> Search<'a> {
    fn name(&self, v: Var) -> String {
        let n = &self.data.columns[v.col].name;
        if v.lag == 0 {
            n.clone()
        } else {
            format!("{n}[t-{}]", v.lag)
        }
    }

    fn independent(&mut self, x: Var, target: usize, given: &[Var]) -> bool {
        let data = self.data;
        let stride = data.stride;
        let y = Var { col: target, lag: 0 };
        let involved: Vec<Var> = [x, y].iter().chain(given).copied().collect();
        let shared_only = involved.iter().all(|v| data.columns[v.col].shared);
        let lagged = involved.iter().any(|v| v.lag > 0);
        let start = if lagged { stride } else { 0 };
        let rows: Vec<usize> = (start..data.rows())
            .filter(|r| !shared_only || r % stride == 0)
            .collect();
        let pick = |v: Var| -> Vec<u16> {
            let codes = &data.columns[v.col].codes;
            let off = v.lag as usize * stride;
            rows.iter().map(|&r| codes[r - off]).collect()
        };
        let xs = pick(x);
        let ys = pick(y);
        let zs: Vec<Vec<u16>> = given.iter().map(|&v| pick(v)).collect();
        let zcols: Vec<(&[u16], usize)> = zs
            .iter()
            .zip(given)
            .map(|(c, v)| (c.as_slice(), data.columns[v.col].card))
            .collect();
        let strata = Strata::new(&zcols, rows.len());
        let label = format!("{}|{}|{:?}", self.name(x), target, given);
        let seed = stream_seed(self.config.seed, fnv(&label), 0, 0);
        let res = ci_test(
            &xs,
            data.columns[x.col].card,
            &ys,
            data.columns[target].card,
            &strata,
            self.config.permutations,
            Some(self.config.alpha),
            seed,
        );
        self.tests.push(TestRecord {
            parent: self.name(x),
            target: data.columns[target].name.clone(),
            given: given.iter().map(|&v| self.name(v)).collect(),
            cmi: res.cmi,
            p_value: res.p_value,
            permutations: res.permutations,
        });
        let s = self.strength.entry((x, target)).or_insert(f64::INFINITY);
        *s = s.min(res.cmi);
        let indep = res.p_value >= self.config.alpha;
        if indep {
            self.sepsets.insert((x, target), given.to_vec());
        }
        indep
    }

    /// PC-style pruning with growing conditioning sets (strongest other candidates first),
    /// then a final test of each survivor given all other survivors.
    fn parents_of(&mut self, target: usize, candidates: Vec<Var>) -> Vec<Var> {
        let mut current = candidates;
        let mut level = 0;
        while level <= self.config.max_cond {
            let snapshot = current.clone();
            let mut ranked = snapshot.clone();
            ranked.sort_by(|a, b| {
                let sa = self.strength.get(&(*a, target)).copied().unwrap_or(f64::INFINITY);
                let sb = self.strength.get(&(*b, target)).copied().unwrap_or(f64::INFINITY);
                sb.total_cmp(&sa).then(a.cmp(b))
            });
            if level > 0 && snapshot.len() <= level {
                break;
            }
            for &x in &snapshot {
                let given: Vec<Var> = ranked.iter().copied().filter(|&v| v != x).take(level).collect();
                if given.len() < level {
                    continue;
                }
                if self.independent(x, target, &given) {
                    current.retain(|&v| v != x);
                }
            }
            level += 1;
        }
        let snapshot = current.clone();
        let mut kept = Vec::new();
        for &x in &snapshot {
            let given: Vec<Var> = snapshot.iter().copied().filter(|&v| v != x).collect();
            if given.len() <= self.config.max_cond {
                // already tested given every other survivor during pruning
                let tested = self.tests.iter().any(|t| {
                    t.parent == self.name(x)
                        && t.target == self.data.columns[target].name
                        && t.given.len() == given.len()
                        && given.iter().all(|&g| t.given.contains(&self.name(g)))
                });
                if tested {
                    kept.push(x);
                    continue;
                }
            }
            if !self.independent(x, target, &given) {
                kept.push(x);
            }
        }
        kept
    }
}

fn fnv(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x1000_0000_01b3))
}

/// Constrained lag-aware discovery over the allowed edge classes: context to system
/// (contemporaneous), system to system (contemporaneous and lag 1) and lag-1 autocorrelation.
pub fn discover_structure(data: &ProcessedDataset, config: &DiscoveryConfig) -> Result<DiscoveryReport> {
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(Error::invalid("alpha", "must lie in (0, 1)"));
    }
    if data.rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    for c in &data.columns {
        if c.codes.iter().all(|&x| x == c.codes[0]) {
            return Err(Error::ConstantColumn(c.name.clone()));
        }
    }
    let n = data.columns.len();
    let system: Vec<usize> = (0..n).filter(|&i| data.columns[i].kind == NodeKind::System).collect();
    let context: Vec<usize> = (0..n).filter(|&i| data.columns[i].kind == NodeKind::Context).collect();
    let mut search = Search {
        data,
        config,
        tests: Vec::new(),
        strength: BTreeMap::new(),
        sepsets: BTreeMap::new(),
    };

    let mut parents: BTreeMap<usize, Vec<Var>> = BTreeMap::new();
    for &y in &system {
        let mut cands: Vec<Var> = context.iter().map(|&c| Var { col: c, lag: 0 }).collect();
        cands.extend(system.iter().filter(|&&x| x != y).map(|&x| Var { col: x, lag: 0 }));
        cands.extend(system.iter().map(|&x| Var { col: x, lag: 1 }));
        let found = search.parents_of(y, cands);
        parents.insert(y, found);
    }

    let name = |i: usize| data.columns[i].name.clone();
    let mut edges: Vec<Edge> = Vec::new();
    for (&y, ps) in &parents {
        for p in ps {
            if p.lag == 1 || data.columns[p.col].kind == NodeKind::Context {
                edges.push(Edge::new(&name(p.col), &name(y), p.lag));
            }
        }
    }
    // contemporaneous system adjacencies need support from both sides
    let mut adjacencies: Vec<(usize, usize)> = Vec::new();
    for (i, &a) in system.iter().enumerate() {
        for &b in &system[i + 1..] {
            let ab = parents[&b].contains(&Var { col: a, lag: 0 });
            let ba = parents[&a].contains(&Var { col: b, lag: 0 });
            if ab && ba {
                adjacencies.push((a, b));
            }
        }
    }

    let mut undirected = Vec::new();
    let nodes: Vec<Node> = data
        .columns
        .iter()
        .map(|c| Node {
            name: c.name.clone(),
            kind: c.kind,
        })
        .collect();
    for &(a, b) in &adjacencies {
        let mut votes_ab = 0;
        let mut votes_ba = 0;
        // unshielded triples z -> y - x with z not adjacent to x
        for (x, y, forward) in [(a, b, true), (b, a, false)] {
            for z in parents[&y].iter().filter(|z| !(z.lag == 0 && z.col == x)) {
                if parents[&x].contains(z) {
                    continue;
                }
                let Some(sep) = search.sepsets.get(&(*z, x)).cloned() else {
                    continue;
                };
                let yv = Var { col: y, lag: 0 };
                // a vote needs positive evidence either way, so a spurious z casts none:
                // collider (x -> y) if y is outside the sepset and z stays dependent on x given
                // the sepset, y and the other parents of x; non-collider (y -> x) if y is in the
                // sepset and z and x are dependent once y is dropped from it
                let x_to_y = if sep.contains(&yv) {
                    let without: Vec<Var> = sep.into_iter().filter(|&v| v != yv).collect();
                    if search.independent(*z, x, &without) {
                        continue;
                    }
                    false
                } else {
                    let mut given = sep;
                    for v in std::iter::once(yv).chain(parents[&x].iter().copied()) {
                        if v != *z && !given.contains(&v) {
                            given.push(v);
                        }
                    }
                    if search.independent(*z, x, &given) {
                        continue;
                    }
                    true
                };
                if x_to_y == forward {
                    votes_ab += 1;
                } else {
                    votes_ba += 1;
                }
            }
        }
        let direction = match (votes_ab > 0, votes_ba > 0) {
            (true, false) => Some((a, b)),
            (false, true) => Some((b, a)),
            _ => {
                let out = |v: usize| edges.iter().filter(|e| e.src == name(v)).count();
                let (oa, ob) = (out(a), out(b));
                let rank = |v: usize| config.precedence.iter().position(|p| *p == name(v));
                if oa != ob {
                    Some(if oa > ob { (a, b) } else { (b, a) })
                } else {
                    match (rank(a), rank(b)) {
                        (Some(ra), Some(rb)) => Some(if ra < rb { (a, b) } else { (b, a) }),
                        _ => None,
                    }
                }
            }
        };
        match direction {
            Some((s, d)) => {
                let mut trial = edges.clone();
                trial.push(Edge::new(&name(s), &name(d), 0));
                let ok = LaggedDag::new(nodes.clone(), trial.clone()).is_ok();
                if ok {
                    edges = trial;
                } else {
                    undirected.push((name(a), name(b)));
                }
            }
            None => undirected.push((name(a), name(b))),
        }
    }
    edges.sort();
    let mut dag = LaggedDag::new(nodes, edges)?;
    dag.undirected = undirected;
    dag.alpha = Some(config.alpha);
    Ok(DiscoveryReport {
        dag,
        tests: search.tests,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::Column;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn independent_noise_gives_no_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 3000;
        let mut col = |name: &str, kind, card: usize| {
            Column::new(name, kind, card, (0..n).map(|_| rng.random_range(0..card as u16)).collect(), true)
        };
        let cols = vec![
            col("A", NodeKind::System, 3),
            col("B", NodeKind::System, 3),
            col("X", NodeKind::Context, 2),
        ];
        let ds = ProcessedDataset::new(cols, 1).unwrap();
        let cfg = DiscoveryConfig {
            permutations: 200,
            alpha: 0.01,
            ..DiscoveryConfig::default()
        };
        let r = discover_structure(&ds, &cfg).unwrap();
        assert!(r.dag.edges.is_empty(), "{:?}", r.dag.edges);
    }

    #[test]
    fn rejects_bad_alpha_and_constant_columns() {
        let cols = vec![
            Column::new("A", NodeKind::System, 2, vec![0, 1, 0, 1], true),
            Column::new("B", NodeKind::System, 2, vec![1, 1, 1, 1], true),
        ];
        let ds = ProcessedDataset::new(cols, 1).unwrap();
        assert!(discover_structure(&ds, &DiscoveryConfig::default()).is_err());
        let bad = DiscoveryConfig {
            alpha: 1.5,
            ..DiscoveryConfig::default()
        };
        assert!(discover_structure(&ds, &bad).is_err());
    }
}
