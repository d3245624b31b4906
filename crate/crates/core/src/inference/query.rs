use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::factor::Factor;
use super::model::CausalInferenceModel;
use crate::pipeline::DiscretizationSchema;
use crate::{Error, Result};

/// `P(target | do(interventions), conditions)`. Lagged nodes are written `X[t-1]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuerySpec {
    pub interventions: BTreeMap<String, usize>,
    pub conditions: BTreeMap<String, usize>,
    pub target: String,
}

impl QuerySpec {
    pub fn new(target: &str) -> Self {
        QuerySpec {
            target: target.to_string(),
            ..QuerySpec::default()
        }
    }

    pub fn intervene(mut self, node: &str, value: usize) -> Self {
        self.interventions.insert(node.to_string(), value);
        self
    }

    pub fn given(mut self, node: &str, value: usize) -> Self {
        self.conditions.insert(node.to_string(), value);
        self
    }
}

/// Network node id: variable index, plus `n` for the lag-1 copy.
fn parse_node(model: &CausalInferenceModel, name: &str) -> Result<(usize, u8)> {
    let (base, lag) = match name.strip_suffix("[t-1]") {
        Some(b) => (b, 1),
        None => (name, 0),
    };
    let idx = model
        .variables
        .iter()
        .position(|v| v.name == base)
        .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
    if lag == 1 && !model.dag.edges.iter().any(|e| e.lag == 1 && e.src == base) {
        return Err(Error::InvalidQuery(format!("{name} is not a node of the model")));
    }
    Ok((idx, lag))
}

/// Stationary distribution of the lag-1 self transition when every other parent is fixed.
fn stationary(model: &CausalInferenceModel, var: usize, clamped: &HashMap<usize, usize>) -> Option<Vec<f64>> {
    let n = model.variables.len();
    let name = &model.variables[var].name;
    let cpd = model.cpd(name).ok()?;
    if !cpd.parents.iter().any(|(p, lag)| p == name && *lag == 1) {
        return None;
    }
    let mut fixed = Vec::with_capacity(cpd.parents.len());
    let mut self_pos = 0;
    for (k, (p, lag)) in cpd.parents.iter().enumerate() {
        if p == name && *lag == 1 {
            self_pos = k;
            fixed.push(0);
            continue;
        }
        let id = model.variables.iter().position(|v| &v.name == p)? + *lag as usize * n;
        fixed.push(*clamped.get(&id)?);
    }
    let card = cpd.card;
    let rows: Vec<Vec<f64>> = (0..card)
        .map(|x| {
            let mut pv = fixed.clone();
            pv[self_pos] = x;
            cpd.row(&pv).to_vec()
        })
        .collect();
    let marginal = model.marginals.get(name)?;
    Some(solve_stationary(&rows).unwrap_or_else(|| power_iteration(&rows, marginal)))
}

/// Unique stationary distribution of a row-stochastic matrix, by Gaussian elimination on
/// `pi (T - I) = 0, sum(pi) = 1`. `None` when the system is singular.
fn solve_stationary(t: &[Vec<f64>]) -> Option<Vec<f64>> {
    let k = t.len();
    // rows of the augmented system: k-1 balance equations plus normalisation
    let mut a = vec![vec![0.0; k + 1]; k];
    for (j, row) in a.iter_mut().enumerate().take(k - 1) {
        for i in 0..k {
            row[i] = t[i][j] - if i == j { 1.0 } else { 0.0 };
        }
    }
    a[k - 1] = vec![1.0; k + 1];
    for col in 0..k {
        let piv = (col..k).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..k {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..=k {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    let mut pi: Vec<f64> = (0..k).map(|i| (a[i][k] / a[i][i]).max(0.0)).collect();
    let total: f64 = pi.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    pi.iter_mut().for_each(|p| *p /= total);
    Some(pi)
}

fn power_iteration(t: &[Vec<f64>], start: &[f64]) -> Vec<f64> {
    let mut pi = start.to_vec();
    for _ in 0..10_000 {
        let mut next = vec![0.0; pi.len()];
        for (x, &px) in pi.iter().enumerate() {
            for (y, &p) in t[x].iter().enumerate() {
                next[y] += px * p;
            }
        }
        let diff: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if diff < 1e-15 {
            break;
        }
    }
    pi
}

/// Builds the factor of a table restricted to the clamped values, touching only the entries
/// that survive.
fn clamp(vars: &[usize], cards: &[usize], values: &[f64], clamped: &HashMap<usize, usize>) -> Factor {
    let mut stride = vec![1usize; vars.len()];
    for i in (0..vars.len().saturating_sub(1)).rev() {
        stride[i] = stride[i + 1] * cards[i + 1];
    }
    let mut base = 0;
    let mut free = Vec::new();
    for (i, v) in vars.iter().enumerate() {
        match clamped.get(v) {
            Some(&x) => base += x * stride[i],
            None => free.push(i),
        }
    }
    let out_cards: Vec<usize> = free.iter().map(|&i| cards[i]).collect();
    let size: usize = out_cards.iter().product();
    let mut out = Vec::with_capacity(size);
    let mut assign = vec![0usize; free.len()];
    let mut idx = base;
    for _ in 0..size {
        out.push(values[idx]);
        for k in (0..free.len()).rev() {
            assign[k] += 1;
            idx += stride[free[k]];
            if assign[k] < out_cards[k] {
                break;
            }
            idx -= stride[free[k]] * out_cards[k];
            assign[k] = 0;
        }
    }
    Factor::new(free.iter().map(|&i| vars[i]).collect(), out_cards, out)
}

/// Interventional distribution by truncated factorisation and variable elimination.
///
/// Intervened nodes lose their CPT and are clamped; conditions are clamped in the remaining
/// factors and the result is renormalised. A lag-1 copy `X[t-1]` that is not clamped gets the
/// stationary distribution of `X`'s own lag-1 chain when all other parents of `X` are fixed by
/// the query, and `X`'s empirical marginal otherwise.
pub fn do_query(model: &CausalInferenceModel, query: &QuerySpec) -> Result<Vec<f64>> {
    let n = model.variables.len();
    let (tv, tlag) = parse_node(model, &query.target)?;
    let target = tv + tlag as usize * n;
    let mut clamped: HashMap<usize, usize> = HashMap::new();
    let mut intervened: BTreeSet<usize> = BTreeSet::new();
    for (map, is_do) in [(&query.interventions, true), (&query.conditions, false)] {
        for (name, &value) in map {
            let (v, lag) = parse_node(model, name)?;
            let id = v + lag as usize * n;
            if id == target {
                return Err(Error::InvalidQuery(format!("target {name} is also fixed")));
            }
            if clamped.contains_key(&id) {
                return Err(Error::InvalidQuery(format!("{name} both intervened on and conditioned")));
            }
            let card = model.variables[v].card;
            if value >= card {
                return Err(Error::InvalidQuery(format!("{name}={value} outside 0..{card}")));
            }
            clamped.insert(id, value);
            if is_do {
                intervened.insert(id);
            }
        }
    }

    // parents of each network node in the mutilated graph
    let parents_of = |id: usize| -> Vec<usize> {
        if id >= n || intervened.contains(&id) {
            return Vec::new();
        }
        model.cpds[id]
            .parents
            .iter()
            .map(|(p, lag)| model.variables.iter().position(|v| &v.name == p).expect("validated") + *lag as usize * n)
            .collect()
    };
    // only ancestors of the target and the evidence matter
    let mut relevant: BTreeSet<usize> = BTreeSet::new();
    let mut stack: Vec<usize> = std::iter::once(target)
        .chain(clamped.keys().copied().filter(|id| !intervened.contains(id)))
        .collect();
    while let Some(id) = stack.pop() {
        if relevant.insert(id) {
            stack.extend(parents_of(id));
        }
    }

    let mut factors: Vec<Factor> = Vec::new();
    for &id in &relevant {
        if intervened.contains(&id) {
            continue;
        }
        let (vars, cards, values) = if id < n {
            let cpd = &model.cpds[id];
            let mut vars = parents_of(id);
            vars.push(id);
            let mut cards = cpd.parent_cards.clone();
            cards.push(cpd.card);
            (vars, cards, &cpd.table[..])
        } else {
            let var = id - n;
            let prior = stationary(model, var, &clamped)
                .unwrap_or_else(|| model.marginals[&model.variables[var].name].clone());
            factors.push(clamp(&[id], &[model.variables[var].card], &prior, &clamped));
            continue;
        };
        factors.push(clamp(&vars, &cards, values, &clamped));
    }

    // greedy elimination, smallest intermediate factor first
    let mut hidden: BTreeSet<usize> = factors.iter().flat_map(|f| f.vars.iter().copied()).collect();
    hidden.remove(&target);
    while !hidden.is_empty() {
        let cost = |v: usize| -> usize {
            let mut scope: BTreeMap<usize, usize> = BTreeMap::new();
            for f in factors.iter().filter(|f| f.contains(v)) {
                for (x, c) in f.vars.iter().zip(&f.cards) {
                    scope.insert(*x, *c);
                }
            }
            scope.values().product()
        };
        let v = *hidden.iter().min_by_key(|&&v| (cost(v), v)).expect("non-empty");
        hidden.remove(&v);
        let (with, without): (Vec<Factor>, Vec<Factor>) = factors.into_iter().partition(|f| f.contains(v));
        factors = without;
        let prod = with.iter().skip(1).fold(with[0].clone(), |acc, f| acc.product(f));
        factors.push(prod.sum_out(v));
    }
    let joint = factors
        .iter()
        .fold(Factor::scalar(1.0), |acc, f| acc.product(f));
    let total = joint.total();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::ZeroProbabilityEvidence);
    }
    Ok(joint.values.iter().map(|p| p / total).collect())
}

/// `sum_b p(b) * representative(b)` in the variable's own units.
pub fn expected_value(dist: &[f64], schema: &DiscretizationSchema, variable: &str) -> Result<f64> {
    let var = schema.get(variable)?;
    if dist.len() != var.bins() {
        return Err(Error::InvalidQuery(format!(
            "{} probabilities for {} bins of {variable}",
            dist.len(),
            var.bins()
        )));
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidQuery(format!("distribution sums to {total}")));
    }
    Ok(dist.iter().zip(&var.representatives).map(|(p, r)| p * r).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal::{Edge, LaggedDag, Node, NodeKind};
    use crate::inference::model::{DiscreteCpd, Variable};
    use crate::pipeline::VariableSchema;

    fn schema(reps: &[f64]) -> DiscretizationSchema {
        let mut s = DiscretizationSchema::default();
        s.variables.insert(
            "X".into(),
            VariableSchema {
                edges: reps[..reps.len() - 1].to_vec(),
                lo: reps[0],
                hi: reps[reps.len() - 1],
                representatives: reps.to_vec(),
                counts: vec![1; reps.len()],
            },
        );
        s
    }

    #[test]
    fn expectations() {
        assert_eq!(expected_value(&[0.0, 1.0], &schema(&[1.0, -0.007]), "X").unwrap(), -0.007);
        assert_eq!(expected_value(&[0.5, 0.5], &schema(&[0.0, 1.0]), "X").unwrap(), 0.5);
        let e = expected_value(&[0.2, 0.3, 0.5], &schema(&[1.0, 2.0, 4.0]), "X").unwrap();
        assert!((e - 2.8).abs() < 1e-12);
        assert!(expected_value(&[1.0], &schema(&[1.0]), "Y").is_err());
    }

    /// O -> V, O -> L, V -> L with hand-picked tables.
    pub(crate) fn confounded() -> CausalInferenceModel {
        let nodes = ["O", "V", "L"]
            .iter()
            .map(|n| Node {
                name: n.to_string(),
                kind: if *n == "O" { NodeKind::Context } else { NodeKind::System },
            })
            .collect();
        let dag = LaggedDag::new(
            nodes,
            vec![Edge::new("O", "V", 0), Edge::new("O", "L", 0), Edge::new("V", "L", 0)],
        )
        .unwrap();
        let var = |n: &str, card| Variable {
            name: n.into(),
            kind: NodeKind::System,
            card,
            labels: vec![],
        };
        let cpds = vec![
            DiscreteCpd {
                node: "O".into(),
                parents: vec![],
                card: 2,
                parent_cards: vec![],
                table: vec![0.75, 0.25],
            },
            DiscreteCpd {
                node: "V".into(),
                parents: vec![("O".into(), 0)],
                card: 2,
                parent_cards: vec![2],
                table: vec![0.2, 0.8, 0.7, 0.3],
            },
            DiscreteCpd {
                node: "L".into(),
                parents: vec![("V".into(), 0), ("O".into(), 0)],
                card: 2,
                parent_cards: vec![2, 2],
                table: vec![0.9, 0.1, 0.4, 0.6, 0.6, 0.4, 0.1, 0.9],
            },
        ];
        let marginals = [("O", vec![0.75, 0.25]), ("V", vec![0.5, 0.5]), ("L", vec![0.5, 0.5])]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        CausalInferenceModel {
            dag,
            schema: DiscretizationSchema::default(),
            variables: vec![var("O", 2), var("V", 2), var("L", 2)],
            cpds,
            marginals,
            period: 1.0,
            fallback_rows: 0,
        }
    }

    #[test]
    fn backdoor_adjustment() {
        let m = confounded();
        for v in 0..2 {
            let got = do_query(&m, &QuerySpec::new("L").intervene("V", v)).unwrap();
            let cpd = m.cpd("L").unwrap();
            let expect: f64 = (0..2).map(|o| cpd.row(&[v, o])[1] * [0.75, 0.25][o]).sum();
            assert!((got[1] - expect).abs() < 1e-15);
            // differs from plain conditioning because O confounds V and L
            let cond = do_query(&m, &QuerySpec::new("L").given("V", v)).unwrap();
            assert!((cond[1] - got[1]).abs() > 1e-3);
        }
    }

    #[test]
    fn root_intervention_equals_conditioning() {
        let m = confounded();
        let a = do_query(&m, &QuerySpec::new("L").intervene("O", 1)).unwrap();
        let b = do_query(&m, &QuerySpec::new("L").given("O", 1)).unwrap();
        assert!((a[0] - b[0]).abs() < 1e-15);
    }

    #[test]
    fn invalid_queries() {
        let m = confounded();
        assert!(do_query(&m, &QuerySpec::new("L").intervene("L", 0)).is_err());
        assert!(do_query(&m, &QuerySpec::new("L").intervene("V", 0).given("V", 0)).is_err());
        assert!(do_query(&m, &QuerySpec::new("L").given("V", 5)).is_err());
        assert!(do_query(&m, &QuerySpec::new("Q")).is_err());
    }

    #[test]
    fn zero_probability_evidence_is_an_error() {
        let mut m = confounded();
        m.cpds[0].table = vec![1.0, 0.0];
        assert!(matches!(
            do_query(&m, &QuerySpec::new("L").given("O", 1)),
            Err(Error::ZeroProbabilityEvidence)
        ));
    }
}
