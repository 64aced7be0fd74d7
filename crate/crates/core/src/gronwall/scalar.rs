//! Time-only Gronwall lemma: `f <= c1 + (c1 + c2) U` with `U = int sum_n J^{*n}`.

use crate::error::{domain, Error, Result};

/// Discretization and truncation controls for [`gronwall_scalar_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarOptions {
    pub steps: usize,
    /// Stop once a term adds less than `tol * max(1, U(T))` to `U(T)`.
    pub tol: f64,
    pub max_terms: usize,
}

impl Default for ScalarOptions {
    fn default() -> Self {
        Self {
            steps: 4096,
            tol: 1e-10,
            max_terms: 500,
        }
    }
}

/// Tabulated bound `t -> c1 + (c1 + c2) U(t)` on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarBound {
    pub c1: f64,
    pub c2: f64,
    pub t_end: f64,
    /// `U` at `t_i = i T / steps`, `i = 0..=steps`.
    pub u: Vec<f64>,
    pub terms_used: usize,
}

impl ScalarBound {
    /// `U(t)` by linear interpolation of the table.
    pub fn u_at(&self, t: f64) -> f64 {
        let n = self.u.len() - 1;
        let s = (t / self.t_end).clamp(0.0, 1.0) * n as f64;
        let i = (s.floor() as usize).min(n.saturating_sub(1));
        let w = s - i as f64;
        (1.0 - w) * self.u[i] + w * self.u[(i + 1).min(n)]
    }

    pub fn bound(&self, t: f64) -> f64 {
        self.c1 + (self.c1 + self.c2) * self.u_at(t)
    }
}

/// [`gronwall_scalar_with`] with default options.
pub fn gronwall_scalar<F: Fn(f64) -> f64>(
    c1: f64,
    c2: f64,
    j_time: F,
    t_end: f64,
) -> Result<ScalarBound> {
    gronwall_scalar_with(c1, c2, j_time, t_end, ScalarOptions::default())
}

/// Sums the convolution powers of `J` on a midpoint time grid until the
/// next term is negligible, then integrates the sum.
pub fn gronwall_scalar_with<F: Fn(f64) -> f64>(
    c1: f64,
    c2: f64,
    j_time: F,
    t_end: f64,
    opts: ScalarOptions,
) -> Result<ScalarBound> {
    if !(c1 >= 0.0 && c2 >= 0.0) {
        return Err(domain("c1 and c2 must be nonnegative"));
    }
    if !(t_end > 0.0) || opts.steps < 2 {
        return Err(domain("need T > 0 and at least two steps"));
    }
    let n = opts.steps;
    let h = t_end / n as f64;
    let j: Vec<f64> = (0..n).map(|i| j_time((i as f64 + 0.5) * h)).collect();
    if j.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(domain(
            "time kernel must be finite and nonnegative on the grid",
        ));
    }
    // `sum` holds the resolvent at midpoints; `power` the current J^{*l}.
    let mut sum = j.clone();
    let mut power = j.clone();
    let mut terms_used = 1;
    let total = |v: &[f64]| h * v.iter().sum::<f64>();
    loop {
        let node: Vec<f64> = (0..n)
            .map(|m| h * (0..=m).map(|i| power[m - i] * j[i]).sum::<f64>())
            .collect();
        power = to_midpoint(&node);
        let added = total(&power);
        for (s, p) in sum.iter_mut().zip(&power) {
            *s += p;
        }
        terms_used += 1;
        if added <= opts.tol * total(&sum).max(1.0) {
            break;
        }
        if terms_used >= opts.max_terms {
            return Err(Error::Truncation {
                what: "scalar resolvent series",
                tol: opts.tol,
                max_terms: opts.max_terms,
            });
        }
    }
    let mut u = Vec::with_capacity(n + 1);
    u.push(0.0);
    let mut acc = 0.0;
    for v in &sum {
        acc += h * v;
        u.push(acc);
    }
    Ok(ScalarBound {
        c1,
        c2,
        t_end,
        u,
        terms_used,
    })
}

fn to_midpoint(node: &[f64]) -> Vec<f64> {
    let n = node.len();
    let mut mid = vec![0.0; n];
    mid[0] = if n > 1 {
        (1.5 * node[0] - 0.5 * node[1]).max(0.0)
    } else {
        node[0]
    };
    for i in 1..n {
        mid[i] = 0.5 * (node[i - 1] + node[i]);
    }
    mid
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_kernel_gives_c1() {
        let b = gronwall_scalar(0.7, 2.0, |_| 0.0, 1.0).unwrap();
        assert_eq!(b.bound(0.5), 0.7);
        assert_eq!(b.bound(1.0), 0.7);
    }

    #[test]
    fn constant_kernel_gives_exponential() {
        let lambda = 1.7;
        let opts = ScalarOptions {
            steps: 1024,
            ..ScalarOptions::default()
        };
        let b = gronwall_scalar_with(0.5, 0.25, |_| lambda, 1.0, opts).unwrap();
        for &t in &[0.25, 0.5, 1.0] {
            let exact = (lambda * t).exp() - 1.0;
            assert!(
                (b.u_at(t) - exact).abs() < 1e-6 * exact,
                "t={t}: {} vs {exact}",
                b.u_at(t)
            );
            assert!((b.bound(t) - (0.5 + 0.75 * exact)).abs() < 1e-6 * exact);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(gronwall_scalar(-1.0, 0.0, |_| 1.0, 1.0).is_err());
        assert!(gronwall_scalar(1.0, 0.0, |_| -1.0, 1.0).is_err());
        let opts = ScalarOptions {
            steps: 64,
            tol: 1e-14,
            max_terms: 3,
        };
        assert!(matches!(
            gronwall_scalar_with(1.0, 0.0, |_| 5.0, 1.0, opts),
            Err(Error::Truncation { .. })
        ));
    }
}
