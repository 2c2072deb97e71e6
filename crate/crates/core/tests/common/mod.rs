//! Oracles shared by the integration suites. Each one recomputes a library
//! quantity by a different algorithm: Simpson integration instead of the
//! continued fraction, a first-step linear solve instead of the matrix
//! inverse, and brute-force graph enumeration instead of the generators.

#![allow(dead_code)]

use gossip_core::graph::DirectedGraph;

/// Two-sided Student's t p-value by Simpson integration of the density over
/// [0, |t|]. The normalizing constant comes from the half-integer gamma
/// recurrence r(v) = Gamma((v+1)/2) / Gamma(v/2), so no code is shared with
/// the library's Lanczos/Lentz path.
pub fn simpson_t_two_sided_p(t: f64, df: u32) -> f64 {
    assert!(df >= 1, "degrees of freedom must be positive");
    let mut ratio = 1.0 / std::f64::consts::PI.sqrt();
    for v in 2..=df {
        ratio = ((v - 1) as f64 / 2.0) / ratio;
    }
    let v = df as f64;
    let norm = ratio / (v * std::f64::consts::PI).sqrt();
    let density = |x: f64| norm * (1.0 + x * x / v).powf(-(v + 1.0) / 2.0);

    let upper = t.abs();
    let steps = 40_000;
    let h = upper / steps as f64;
    let mut integral = density(0.0) + density(upper);
    for i in 1..steps {
        let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
        integral += weight * density(i as f64 * h);
    }
    integral *= h / 3.0;
    (1.0 - 2.0 * integral).clamp(0.0, 1.0)
}

/// Solves A x = b by Gaussian elimination with partial pivoting and back
/// substitution. Panics on a singular system; the callers only hand it
/// I - Q blocks of absorbing chains, which are invertible.
pub fn solve_linear_system(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .expect("column range is never empty");
        assert!(a[pivot][col].abs() > 1e-12, "singular system handed to the oracle");
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                a[row][j] -= factor * a[col][j];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for j in row + 1..n {
            acc -= a[row][j] * x[j];
        }
        x[row] = acc / a[row][row];
    }
    x
}

/// Every simple directed graph on `n` nodes: one graph per subset of the
/// n(n-1) ordered pairs.
pub fn all_directed_graphs(n: usize) -> Vec<DirectedGraph> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
        .collect();
    (0u64..1 << pairs.len())
        .map(|mask| {
            let edges = pairs
                .iter()
                .enumerate()
                .filter(|&(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e);
            DirectedGraph::from_edge_list(n, edges).expect("generated pairs are valid edges")
        })
        .collect()
}
