//! Reference implementations used only by tests. None of them share code with the crate.
#![allow(dead_code)]

pub mod planarity;

use std::collections::BTreeSet;

/// Two-pass Pearson correlation of two equal-length series.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Link mutual information by enumerating every unordered vertex pair.
/// Returns `(I, H1, H2)` in nats.
pub fn pair_enumeration_mi(n: usize, e1: &BTreeSet<(usize, usize)>, e2: &BTreeSet<(usize, usize)>) -> (f64, f64, f64) {
    let mut counts = [[0usize; 2]; 2];
    for i in 0..n {
        for j in i + 1..n {
            let x = e1.contains(&(i, j)) as usize;
            let y = e2.contains(&(i, j)) as usize;
            counts[x][y] += 1;
        }
    }
    let total = (n * (n - 1) / 2) as f64;
    let p = |x: usize, y: usize| counts[x][y] as f64 / total;
    let px = |x: usize| p(x, 0) + p(x, 1);
    let py = |y: usize| p(0, y) + p(1, y);
    let mut mi = 0.0;
    for x in 0..2 {
        for y in 0..2 {
            let pxy = p(x, y);
            if pxy > 0.0 {
                mi += pxy * (pxy / (px(x) * py(y))).ln();
            }
        }
    }
    let h = |a: f64| {
        [a, 1.0 - a]
            .iter()
            .filter(|&&v| v > 0.0)
            .map(|&v| -v * v.ln())
            .sum::<f64>()
    };
    (mi, h(px(1)), h(py(1)))
}

/// Lanczos approximation (g = 7, n = 9) of ln Gamma for positive arguments.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (k, c) in C.iter().enumerate().skip(1) {
        a += c / (x + k as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}


fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 1 { n + 1 } else { n };
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let x = a + k as f64 * h;
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

/// Two-sided Student t p-value by integrating the density from 0 to |t|.
pub fn t_two_sided_by_quadrature(t: f64, nu: f64) -> f64 {
    let ln_c = ln_gamma((nu + 1.0) / 2.0) - ln_gamma(nu / 2.0) - 0.5 * (nu * std::f64::consts::PI).ln();
    let f = |x: f64| (ln_c - (nu + 1.0) / 2.0 * (1.0 + x * x / nu).ln()).exp();
    1.0 - 2.0 * simpson(&f, 0.0, t.abs(), 200_000)
}

/// `(t, dof, p)` of Welch's test, from the textbook formulas.
pub fn welch_reference(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let stats = |s: &[f64]| {
        let n = s.len() as f64;
        let m = s.iter().sum::<f64>() / n;
        let v = s.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (n, m, v)
    };
    let (n1, m1, v1) = stats(a);
    let (n2, m2, v2) = stats(b);
    let se1 = v1 / n1;
    let se2 = v2 / n2;
    let t = (m1 - m2) / (se1 + se2).sqrt();
    let dof = (se1 + se2).powi(2) / (se1 * se1 / (n1 - 1.0) + se2 * se2 / (n2 - 1.0));
    (t, dof, t_two_sided_by_quadrature(t, dof))
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix, sorted descending.
pub fn jacobi_eigenvalues(n: usize, values: &[f64]) -> Vec<f64> {
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| values[i * n..(i + 1) * n].to_vec()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-22 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Prim's algorithm on `1 - c` distances; returns the total correlation of the tree.
pub fn prim_max_weight(n: usize, c: &dyn Fn(usize, usize) -> f64) -> f64 {
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::NEG_INFINITY; n];
    best[0] = 0.0;
    let mut total = 0.0;
    for k in 0..n {
        let u = (0..n)
            .filter(|&v| !in_tree[v])
            .max_by(|&a, &b| best[a].total_cmp(&best[b]))
            .unwrap();
        in_tree[u] = true;
        if k > 0 {
            total += best[u];
        }
        for v in 0..n {
            if !in_tree[v] && c(u, v) > best[v] {
                best[v] = c(u, v);
            }
        }
    }
    total
}

/// Map-equation codelength in bits from edge flows, written directly from the module
/// exit rates `q_m` and node visit rates.
pub fn map_equation_reference(n: usize, edges: &[(usize, usize, f64)], assignment: &[usize]) -> f64 {
    let total: f64 = edges.iter().map(|e| e.2).sum();
    let mut p = vec![0.0; n];
    for &(i, j, w) in edges {
        p[i] += w / (2.0 * total);
        p[j] += w / (2.0 * total);
    }
    let n_mod = assignment.iter().max().map_or(0, |m| m + 1);
    let mut exit = vec![0.0; n_mod];
    for &(i, j, w) in edges {
        if assignment[i] != assignment[j] {
            exit[assignment[i]] += w / (2.0 * total);
            exit[assignment[j]] += w / (2.0 * total);
        }
    }
    let lg = |x: f64| if x > 0.0 { x * x.log2() } else { 0.0 };
    let q: f64 = exit.iter().sum();
    let mut l = 0.0;
    if q > 0.0 {
        // q H(Q) = -sum q_m log(q_m / q)
        l -= exit.iter().map(|&e| lg(e)).sum::<f64>() - lg(q);
    }
    for m in 0..n_mod {
        let members: Vec<usize> = (0..n).filter(|&v| assignment[v] == m).collect();
        if members.is_empty() {
            continue;
        }
        let pm = exit[m] + members.iter().map(|&v| p[v]).sum::<f64>();
        let mut h = -lg(exit[m] / pm);
        for &v in &members {
            h -= lg(p[v] / pm);
        }
        l += pm * h;
    }
    l
}

/// Every set partition of `0..n` as restricted-growth strings.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if k == n {
            out.push(cur.clone());
            return;
        }
        for m in 0..=max + 1 {
            cur.push(m);
            rec(k + 1, n, cur, max.max(m), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut cur = vec![0];
    rec(1, n, &mut cur, 0, &mut out);
    out
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

fn erf(x: f64) -> f64 {
    // Taylor series inside |x| < 3, asymptotic expansion of erfc outside.
    if x.abs() < 3.0 {
        let mut sum = 0.0_f64;
        let mut term = x;
        let mut k = 0.0;
        while term.abs() > 1e-17 * sum.abs().max(1e-300) || k < 5.0 {
            sum += term / (2.0 * k + 1.0);
            k += 1.0;
            term *= -x * x / k;
            if k > 200.0 {
                break;
            }
        }
        2.0 / std::f64::consts::PI.sqrt() * sum
    } else {
        let s = x.signum();
        let x = x.abs();
        let mut c = 1.0;
        let mut term = 1.0;
        for k in 1..8 {
            term *= -((2 * k - 1) as f64) / (2.0 * x * x);
            c += term;
        }
        s * (1.0 - (-x * x).exp() / (x * std::f64::consts::PI.sqrt()) * c)
    }
}
