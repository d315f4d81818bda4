//! Truncated power series in one variable, coefficients `c[k]` of `x^k`.

pub(crate) fn mul(a: &[f64], b: &[f64], order: usize) -> Vec<f64> {
    (0..=order)
        .map(|k| (0..=k).map(|i| a.get(i).unwrap_or(&0.0) * b.get(k - i).unwrap_or(&0.0)).sum())
        .collect()
}

/// `a / b` with `b[0] ≠ 0`.
pub(crate) fn div(a: &[f64], b: &[f64], order: usize) -> Vec<f64> {
    let mut q = vec![0.0; order + 1];
    for k in 0..=order {
        let mut s = *a.get(k).unwrap_or(&0.0);
        for i in 1..=k {
            s -= b.get(i).unwrap_or(&0.0) * q[k - i];
        }
        q[k] = s / b[0];
    }
    q
}

fn sign(j: usize) -> f64 {
    if j % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

pub(crate) fn sin(order: usize) -> Vec<f64> {
    (0..=order)
        .map(|k| if k % 2 == 1 { sign(k / 2) / factorial(k) } else { 0.0 })
        .collect()
}

pub(crate) fn cos(order: usize) -> Vec<f64> {
    (0..=order)
        .map(|k| if k % 2 == 0 { sign(k / 2) / factorial(k) } else { 0.0 })
        .collect()
}

/// `sin(x)/x`.
pub(crate) fn sinc(order: usize) -> Vec<f64> {
    let s = sin(order + 1);
    s[1..].to_vec()
}

/// Shift by `k` powers of `x` (multiply by `x^k`), truncating at `order`.
pub(crate) fn shift(a: &[f64], k: usize, order: usize) -> Vec<f64> {
    (0..=order).map(|i| if i >= k { *a.get(i - k).unwrap_or(&0.0) } else { 0.0 }).collect()
}

pub(crate) fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|c| c * s).collect()
}

pub(crate) fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n).map(|i| a.get(i).unwrap_or(&0.0) + b.get(i).unwrap_or(&0.0)).collect()
}

pub(crate) fn eval(a: &[f64], x: f64) -> f64 {
    a.iter().rev().fold(0.0, |acc, c| acc * x + c)
}
