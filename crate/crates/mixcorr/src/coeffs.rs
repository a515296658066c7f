//! Classical correlation coefficients (Pearson, Spearman, Kendall) and
//! closed-form reference curves for thresholded normal data, for comparing
//! against the latent-correlation estimator.
//!
//! All three coefficients return `None` on degenerate input (fewer than two
//! observations or a constant column) rather than NaN.

use crate::data::{fmt_sig10, Dataset};
use crate::error::Result;
use crate::estimator::{OptimizerOpts, PairCase, PairObjective};
use crate::gauss::std_normal_cdf;
use rayon::prelude::*;
use serde::Serialize;

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let da = a - mx;
        let db = b - my;
        sxx += da * da;
        syy += db * db;
        sxy += da * db;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Mid-ranks (ties get the average of the ranks they span), 1-based.
fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with mid-ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    pearson(&mid_ranks(x), &mid_ranks(y))
}

/// Counts inversions in `values` by merge sort.
fn count_inversions(values: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = values.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let (left, right) = values.split_at_mut(mid);
    let mut swaps = count_inversions(left, buf) + count_inversions(right, buf);
    let (mut i, mut j, mut k) = (0usize, 0usize, 0usize);
    while i < mid && j < n - mid {
        if left[i] <= right[j] {
            buf[k] = left[i];
            i += 1;
        } else {
            buf[k] = right[j];
            swaps += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    while i < mid {
        buf[k] = left[i];
        i += 1;
        k += 1;
    }
    while j < n - mid {
        buf[k] = right[j];
        j += 1;
        k += 1;
    }
    values.copy_from_slice(&buf[..n]);
    swaps
}

/// Sum over tie groups of g*(g-1)/2, where groups are maximal runs of equal
/// keys in sorted order.
fn tie_pairs<K: PartialEq>(sorted_keys: &[K]) -> u64 {
    let mut total = 0u64;
    let mut i = 0;
    while i < sorted_keys.len() {
        let mut j = i;
        while j + 1 < sorted_keys.len() && sorted_keys[j + 1] == sorted_keys[i] {
            j += 1;
        }
        let g = (j - i + 1) as u64;
        total += g * (g - 1) / 2;
        i = j + 1;
    }
    total
}

/// Kendall's tau-b, with the tie correction in the denominator, computed in
/// O(n log n) by sorting and inversion counting.
pub fn kendall(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| {
        x[a].partial_cmp(&x[b])
            .unwrap()
            .then(y[a].partial_cmp(&y[b]).unwrap())
    });
    let xs: Vec<f64> = order.iter().map(|&i| x[i]).collect();
    let mut ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let joint: Vec<(f64, f64)> = xs.iter().cloned().zip(ys.iter().cloned()).collect();
    let n0 = (n as u64) * (n as u64 - 1) / 2;
    let n1 = tie_pairs(&xs);
    let n3 = tie_pairs(&joint);
    let mut ys_sorted = ys.clone();
    ys_sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n2 = tie_pairs(&ys_sorted);
    let mut buf = vec![0.0; n];
    let swaps = count_inversions(&mut ys, &mut buf);
    // Concordant minus discordant: total pairs, minus pairs tied in either
    // coordinate (adding back pairs tied in both, which were subtracted
    // twice), minus two for each discordant pair.
    let pq = n0 as i64 - n1 as i64 - n2 as i64 + n3 as i64 - 2 * swaps as i64;
    let denom = ((n0 - n1) as f64 * (n0 - n2) as f64).sqrt();
    if denom <= 0.0 {
        return None;
    }
    Some(pq as f64 / denom)
}

/// Pearson correlation of X and the indicator of X >= t when X is centered
/// normal with variance 3.
pub fn threshold_pearson(t: f64) -> f64 {
    let q = std_normal_cdf(t / 3.0_f64.sqrt());
    (-t * t / 6.0).exp() / (2.0 * std::f64::consts::PI * q * (1.0 - q)).sqrt()
}

/// Spearman correlation (mid-rank population version) of X and the indicator
/// of X >= t when X is centered normal with variance 3.
pub fn threshold_spearman(t: f64) -> f64 {
    let q = std_normal_cdf(t / 3.0_f64.sqrt());
    3.0_f64.sqrt() * (q * (1.0 - q)).sqrt()
}

/// One pair's coefficients side by side; `None` marks a coefficient that was
/// not computable on this pair.
#[derive(Debug, Clone, Serialize)]
pub struct PairComparison {
    pub var1: String,
    pub var2: String,
    pub case: PairCase,
    pub n_eff: usize,
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    pub kendall: Option<f64>,
    pub copula: Option<f64>,
}

/// Computes all four coefficients for every pair of columns, each on its
/// complete rows, in parallel.
pub fn compare_matrix(data: &Dataset, opts: &OptimizerOpts) -> Result<Vec<PairComparison>> {
    let d = data.n_cols();
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|i| ((i + 1)..d).map(move |j| (i, j)))
        .collect();
    let rows = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (x, y) = data.pairwise_complete(i, j);
            let copula = PairObjective::new(&x, &y, data.kind(i), data.kind(j))
                .ok()
                .map(|obj| obj.estimate(opts).rho_hat);
            let case = match (data.kind(i), data.kind(j)) {
                (
                    crate::marginals::MarginalKind::Continuous,
                    crate::marginals::MarginalKind::Continuous,
                ) => PairCase::CC,
                (
                    crate::marginals::MarginalKind::Discrete,
                    crate::marginals::MarginalKind::Discrete,
                ) => PairCase::DD,
                _ => PairCase::CD,
            };
            PairComparison {
                var1: data.name(i).to_string(),
                var2: data.name(j).to_string(),
                case,
                n_eff: x.len(),
                pearson: pearson(&x, &y),
                spearman: spearman(&x, &y),
                kendall: kendall(&x, &y),
                copula,
            }
        })
        .collect();
    Ok(rows)
}

/// Long-format CSV of a comparison table; missing coefficients are empty
/// fields.
pub fn comparison_csv(rows: &[PairComparison]) -> String {
    let mut out = String::from("var1,var2,type_pair,pearson,spearman,kendall,copula\n");
    for r in rows {
        let cell = |v: Option<f64>| v.map(fmt_sig10).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.var1,
            r.var2,
            r.case,
            cell(r.pearson),
            cell(r.spearman),
            cell(r.kendall),
            cell(r.copula)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_basics() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 4.0, 6.0, 8.0];
        assert!((pearson(&x, &y).unwrap() - 1.0).abs() < 1e-15);
        let y_neg: Vec<f64> = y.iter().map(|v| -v).collect();
        assert!((pearson(&x, &y_neg).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(pearson(&x, &[1.0, 1.0, 1.0, 1.0]), None);
        assert_eq!(pearson(&[1.0], &[2.0]), None);
    }

    #[test]
    fn pearson_reference_value() {
        let x = [3.1, 1.2, 4.5, 2.2, 5.0, 0.7, 3.3];
        let y = [1.0, 2.0, 2.0, 0.5, 3.0, 1.0, 2.5];
        assert!((pearson(&x, &y).unwrap() - 0.6047015754815702).abs() < 1e-12);
    }

    #[test]
    fn spearman_handles_ties_with_mid_ranks() {
        let x = [1.0, 1.0, 2.0, 2.0, 3.0];
        let y = [1.0, 2.0, 1.0, 2.0, 3.0];
        assert!((spearman(&x, &y).unwrap() - 0.5555555555555556).abs() < 1e-12);
        let x2 = [3.1, 1.2, 4.5, 2.2, 5.0, 0.7, 3.3];
        let y2 = [1.0, 2.0, 2.0, 0.5, 3.0, 1.0, 2.5];
        assert!((spearman(&x2, &y2).unwrap() - 0.6728384948943099).abs() < 1e-12);
    }

    #[test]
    fn spearman_is_invariant_to_monotone_transforms() {
        let x = [0.3, -1.0, 2.2, 0.9, -0.4, 1.5];
        let y = [1.0, 0.5, 2.0, 2.5, 0.2, 1.8];
        let base = spearman(&x, &y).unwrap();
        let xt: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let trans = spearman(&xt, &y).unwrap();
        assert!((base - trans).abs() < 1e-15);
    }

    #[test]
    fn kendall_without_ties() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [3.0, 1.0, 4.0, 2.0, 5.0];
        assert!((kendall(&x, &y).unwrap() - 0.4).abs() < 1e-15);
        assert!((kendall(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        let rev: Vec<f64> = x.iter().rev().cloned().collect();
        assert!((kendall(&x, &rev).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn kendall_tau_b_with_ties() {
        let x = [1.0, 1.0, 2.0, 2.0, 3.0];
        let y = [1.0, 2.0, 1.0, 2.0, 3.0];
        assert!((kendall(&x, &y).unwrap() - 0.5).abs() < 1e-12);
        let x2 = [3.1, 1.2, 4.5, 2.2, 5.0, 0.7, 3.3];
        let y2 = [1.0, 2.0, 2.0, 0.5, 3.0, 1.0, 2.5];
        assert!((kendall(&x2, &y2).unwrap() - 0.5506887917539347).abs() < 1e-12);
        assert_eq!(kendall(&x, &[7.0; 5]), None);
    }

    #[test]
    fn kendall_matches_quadratic_reference() {
        // Deterministic pseudo-random data with plenty of ties.
        let mut state = 12345u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 33) % 7) as f64
        };
        let x: Vec<f64> = (0..200).map(|_| next()).collect();
        let y: Vec<f64> = (0..200).map(|_| next()).collect();
        let mut conc = 0i64;
        let mut disc = 0i64;
        let mut tx = 0u64;
        let mut ty = 0u64;
        let n = x.len();
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = x[i] - x[j];
                let dy = y[i] - y[j];
                if dx == 0.0 && dy == 0.0 {
                    continue;
                }
                if dx == 0.0 {
                    tx += 1;
                } else if dy == 0.0 {
                    ty += 1;
                } else if (dx > 0.0) == (dy > 0.0) {
                    conc += 1;
                } else {
                    disc += 1;
                }
            }
        }
        let cd = (conc + disc) as f64;
        let want = (conc - disc) as f64 / ((cd + ty as f64) * (cd + tx as f64)).sqrt();
        let got = kendall(&x, &y).unwrap();
        assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn threshold_curves_match_reference_values() {
        let cases = [
            (0.0, 0.79788456080286536, 0.86602540378443865),
            (2.0, 0.62123717506715425, 0.57106244759101595),
            (4.0, 0.272455270990455, 0.17622067501418135),
            (6.0, 0.060639816511347375, 0.028245282532057467),
        ];
        for (t, rp, rs) in cases {
            assert!((threshold_pearson(t) - rp).abs() < 1e-12, "pearson at {t}");
            assert!(
                (threshold_spearman(t) - rs).abs() < 1e-12,
                "spearman at {t}"
            );
        }
    }

    #[test]
    fn threshold_curves_decay() {
        assert!(threshold_pearson(0.0) > threshold_pearson(2.0));
        assert!(threshold_pearson(4.0) > threshold_pearson(6.0));
        assert!(threshold_spearman(0.0) > threshold_spearman(6.0));
    }

    #[test]
    fn comparison_table_shape_and_missing() {
        use crate::data::{ColumnSchema, Dataset};
        use crate::marginals::MarginalKind::{Continuous, Discrete};
        let schema = vec![
            ColumnSchema {
                name: "a".into(),
                kind: Continuous,
            },
            ColumnSchema {
                name: "b".into(),
                kind: Discrete,
            },
            ColumnSchema {
                name: "c".into(),
                kind: Discrete,
            },
        ];
        let a: Vec<f64> = (0..20).map(|i| ((i * 13 % 23) as f64) * 0.3).collect();
        let b: Vec<f64> = a.iter().map(|&v| f64::from(u8::from(v > 3.0))).collect();
        let c = vec![2.0; 20];
        let data = Dataset::new(schema, vec![a, b, c]).unwrap();
        let rows = compare_matrix(&data, &OptimizerOpts::default()).unwrap();
        assert_eq!(rows.len(), 3);
        let ab = &rows[0];
        assert_eq!(ab.case, PairCase::CD);
        assert!(ab.pearson.is_some() && ab.copula.is_some());
        let bc = &rows[2];
        assert_eq!((bc.var1.as_str(), bc.var2.as_str()), ("b", "c"));
        assert_eq!(bc.pearson, None);
        assert_eq!(bc.spearman, None);
        assert_eq!(bc.kendall, None);
        // One constant discrete column still admits a likelihood estimate.
        assert!(bc.copula.is_some());
        let csv = comparison_csv(&rows);
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(
            csv.lines().next().unwrap(),
            "var1,var2,type_pair,pearson,spearman,kendall,copula"
        );
        let last = csv.lines().nth(3).unwrap();
        assert!(last.starts_with("b,c,DD,,,,"));
    }
}
