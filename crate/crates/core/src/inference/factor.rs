/// A non-negative table over discrete variables, row-major with the last variable fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub vars: Vec<usize>,
    pub cards: Vec<usize>,
    pub values: Vec<f64>,
}

fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * cards[i + 1];
    }
    s
}

/// Advances a mixed-radix counter; returns false after the last assignment.
fn increment(assign: &mut [usize], cards: &[usize]) -> bool {
    for i in (0..assign.len()).rev() {
        assign[i] += 1;
        if assign[i] < cards[i] {
            return true;
        }
        assign[i] = 0;
    }
    false
}

impl Factor {
    pub fn new(vars: Vec<usize>, cards: Vec<usize>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), cards.iter().product::<usize>());
        Factor { vars, cards, values }
    }

    pub fn scalar(v: f64) -> Self {
        Factor::new(Vec::new(), Vec::new(), vec![v])
    }

    pub fn contains(&self, var: usize) -> bool {
        self.vars.contains(&var)
    }

    /// Pointwise product over the union of both scopes.
    pub fn product(&self, other: &Factor) -> Factor {
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        for (v, c) in other.vars.iter().zip(&other.cards) {
            if !vars.contains(v) {
                vars.push(*v);
                cards.push(*c);
            }
        }
        let sa = strides(&self.cards);
        let sb = strides(&other.cards);
        // stride of each result variable inside each operand (0 when absent)
        let map = |src: &[usize], st: &[usize]| -> Vec<usize> {
            vars.iter()
                .map(|v| src.iter().position(|x| x == v).map_or(0, |k| st[k]))
                .collect()
        };
        let ma = map(&self.vars, &sa);
        let mb = map(&other.vars, &sb);
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut assign = vec![0; vars.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        loop {
            values.push(self.values[ia] * other.values[ib]);
            // odometer step with incremental index updates
            let mut i = vars.len();
            loop {
                if i == 0 {
                    return Factor::new(vars, cards, values);
                }
                i -= 1;
                assign[i] += 1;
                ia += ma[i];
                ib += mb[i];
                if assign[i] < cards[i] {
                    break;
                }
                ia -= ma[i] * cards[i];
                ib -= mb[i] * cards[i];
                assign[i] = 0;
            }
        }
    }

    /// Sums `var` out.
    pub fn sum_out(&self, var: usize) -> Factor {
        let Some(k) = self.vars.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let st = strides(&self.cards);
        let (outer, card, inner) = (
            self.cards[..k].iter().product::<usize>(),
            self.cards[k],
            st[k],
        );
        let mut values = vec![0.0; outer * inner];
        for o in 0..outer {
            for c in 0..card {
                let base = o * card * inner + c * inner;
                for i in 0..inner {
                    values[o * inner + i] += self.values[base + i];
                }
            }
        }
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(k);
        cards.remove(k);
        Factor::new(vars, cards, values)
    }

    /// Restricts `var` to `value` and drops it from the scope; cost is linear in the output.
    pub fn reduce(&self, var: usize, value: usize) -> Factor {
        let Some(k) = self.vars.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let st = strides(&self.cards);
        let (outer, card, inner) = (self.cards[..k].iter().product::<usize>(), self.cards[k], st[k]);
        let mut values = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let base = o * card * inner + value * inner;
            values.extend_from_slice(&self.values[base..base + inner]);
        }
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(k);
        cards.remove(k);
        Factor::new(vars, cards, values)
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Value at a full assignment given in scope order.
    pub fn at(&self, assign: &[usize]) -> f64 {
        let st = strides(&self.cards);
        self.values[assign.iter().zip(&st).map(|(a, s)| a * s).sum::<usize>()]
    }

    /// Every assignment of the scope in row-major order.
    pub fn assignments(cards: &[usize]) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut a = vec![0; cards.len()];
        if cards.contains(&0) {
            return out;
        }
        loop {
            out.push(a.clone());
            if !increment(&mut a, cards) {
                return out;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_marginal() {
        let a = Factor::new(vec![0], vec![2], vec![0.3, 0.7]);
        let b = Factor::new(vec![0, 1], vec![2, 3], vec![0.1, 0.2, 0.7, 0.5, 0.25, 0.25]);
        let p = a.product(&b);
        assert_eq!(p.vars, vec![0, 1]);
        assert!((p.at(&[1, 2]) - 0.7 * 0.25).abs() < 1e-15);
        let m = p.sum_out(0);
        assert!((m.values[0] - (0.03 + 0.35)).abs() < 1e-15);
        assert!((m.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_with_reordered_scopes() {
        let a = Factor::new(vec![1, 0], vec![3, 2], (0..6).map(f64::from).collect());
        let b = Factor::new(vec![0], vec![2], vec![1.0, 10.0]);
        let p = a.product(&b);
        for x1 in 0..3 {
            for x0 in 0..2 {
                assert_eq!(p.at(&[x1, x0]), a.at(&[x1, x0]) * b.at(&[x0]));
            }
        }
    }

    #[test]
    fn reduce_middle_variable() {
        let f = Factor::new(vec![0, 1, 2], vec![2, 3, 2], (0..12).map(f64::from).collect());
        let r = f.reduce(1, 2);
        assert_eq!(r.vars, vec![0, 2]);
        for a in 0..2 {
            for c in 0..2 {
                assert_eq!(r.at(&[a, c]), f.at(&[a, 2, c]));
            }
        }
    }
}
