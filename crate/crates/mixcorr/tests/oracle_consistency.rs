//! Cross-checks between the small-model density oracle, the sampler, and
//! closed-form marginals: marginalizing the 3-variable density reproduces
//! the 2-variable one, block-independent models factorize, sampled cell
//! frequencies match the density, and sampled columns match their margins.

use mixcorr::estimator::CorrelationMatrix;
use mixcorr::oracle::SmallModel;
use mixcorr::quad::integrate;
use mixcorr::sim::{sample_dataset, MarginalSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn corr3(r01: f64, r02: f64, r12: f64) -> CorrelationMatrix {
    let mut m = CorrelationMatrix::identity(vec!["a".into(), "b".into(), "c".into()]);
    m.set(0, 1, r01);
    m.set(0, 2, r02);
    m.set(1, 2, r12);
    m
}

fn corr2(r: f64, names: (&str, &str)) -> CorrelationMatrix {
    let mut m = CorrelationMatrix::identity(vec![names.0.into(), names.1.into()]);
    m.set(0, 1, r);
    m
}

#[test]
fn summing_out_a_discrete_coordinate_recovers_the_pair_density() {
    let margins = vec![
        MarginalSpec::Normal { mean: 0.0, sd: 1.0 },
        MarginalSpec::Poisson { lambda: 2.0 },
        MarginalSpec::Bernoulli { p: 0.4 },
    ];
    let model3 = SmallModel::new(corr3(0.5, 0.3, 0.4), margins.clone()).unwrap();
    let model2 = SmallModel::new(corr2(0.5, ("a", "b")), margins[..2].to_vec()).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(14);
    let mut worst = 0.0f64;
    for _ in 0..25 {
        let x0 = rng.random_range(-3.0..3.0);
        let x1 = f64::from(rng.random_range(0..8u8));
        let summed: f64 = [0.0, 1.0]
            .iter()
            .map(|&x2| model3.joint_density(&[x0, x1, x2]).unwrap())
            .sum();
        let pair = model2.joint_density(&[x0, x1]).unwrap();
        worst = worst.max((summed - pair).abs());
    }
    assert!(worst <= 1e-6, "worst marginalization error {worst:.3e}");
}

#[test]
fn integrating_out_a_continuous_coordinate_recovers_the_pair_density() {
    let margins = vec![
        MarginalSpec::Normal { mean: 0.0, sd: 1.0 },
        MarginalSpec::Poisson { lambda: 2.0 },
        MarginalSpec::Normal { mean: 1.0, sd: 2.0 },
    ];
    let model3 = SmallModel::new(corr3(0.5, 0.3, 0.4), margins.clone()).unwrap();
    let model2 = SmallModel::new(corr2(0.5, ("a", "b")), margins[..2].to_vec()).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(15);
    let mut worst = 0.0f64;
    for _ in 0..25 {
        let x0 = rng.random_range(-3.0..3.0);
        let x1 = f64::from(rng.random_range(0..8u8));
        let integrated = integrate(
            |x2| model3.joint_density(&[x0, x1, x2]).unwrap(),
            1.0 - 9.0 * 2.0,
            1.0 + 9.0 * 2.0,
            1e-9,
        );
        let pair = model2.joint_density(&[x0, x1]).unwrap();
        worst = worst.max((integrated - pair).abs());
    }
    assert!(worst <= 1e-6, "worst marginalization error {worst:.3e}");
}

#[test]
fn block_independent_models_factorize() {
    let margins = vec![
        MarginalSpec::Normal { mean: 0.0, sd: 1.0 },
        MarginalSpec::Poisson { lambda: 1.5 },
        MarginalSpec::Bernoulli { p: 0.3 },
    ];
    // {a,b} correlated, c independent of both.
    let model3 = SmallModel::new(corr3(0.6, 0.0, 0.0), margins.clone()).unwrap();
    let model2 = SmallModel::new(corr2(0.6, ("a", "b")), margins[..2].to_vec()).unwrap();
    let third = margins[2];
    let mut rng = ChaCha12Rng::seed_from_u64(16);
    for _ in 0..100 {
        let x0 = rng.random_range(-3.0..3.0);
        let x1 = f64::from(rng.random_range(0..7u8));
        let x2 = f64::from(rng.random_range(0..2u8));
        let joint = model3.joint_density(&[x0, x1, x2]).unwrap();
        let product = model2.joint_density(&[x0, x1]).unwrap() * third.pmf(x2);
        let rel = (joint - product).abs() / product.max(1e-300);
        assert!(
            rel <= 1e-8,
            "joint {joint:.12e} vs product {product:.12e} at ({x0},{x1},{x2})"
        );
    }
}

/// Empirical cell frequencies from a million draws stay within four
/// Monte-Carlo standard errors of the oracle's cell masses.
fn check_discrete_cells(sigma: CorrelationMatrix, margins: Vec<MarginalSpec>, seed: u64) {
    let n = 1_000_000usize;
    let model = SmallModel::new(sigma.clone(), margins.clone()).unwrap();
    let data = sample_dataset(&sigma, &margins, n, seed).unwrap();
    let d = margins.len();
    let supports: Vec<Vec<f64>> = margins
        .iter()
        .map(|m| m.discrete_support(1e-9).unwrap())
        .collect();
    let mut cells: Vec<Vec<f64>> = vec![Vec::new()];
    for support in &supports {
        let mut next = Vec::new();
        for prefix in &cells {
            for &v in support {
                let mut cell = prefix.clone();
                cell.push(v);
                next.push(cell);
            }
        }
        cells = next;
    }
    let mut counts = vec![0usize; cells.len()];
    let index_of = |cell: &[f64], row: &[f64]| cell == row;
    'rows: for i in 0..n {
        let row: Vec<f64> = (0..d).map(|j| data.column(j)[i]).collect();
        for (k, cell) in cells.iter().enumerate() {
            if index_of(cell, &row) {
                counts[k] += 1;
                continue 'rows;
            }
        }
        // Rows outside the truncated support grid are vanishingly rare.
    }
    let mut covered = 0.0;
    for (cell, &count) in cells.iter().zip(&counts) {
        let p = model.joint_density(cell).unwrap();
        covered += p;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let observed = count as f64 / n as f64;
        assert!(
            (observed - p).abs() <= 4.0 * se + 1e-9,
            "cell {cell:?}: observed {observed:.6}, expected {p:.6}, se {se:.2e}"
        );
    }
    assert!(covered > 0.999_999, "support grid missed mass: {covered}");
}

#[test]
fn sampled_frequencies_match_density_for_two_discrete_variables() {
    check_discrete_cells(
        corr2(0.55, ("a", "b")),
        vec![
            MarginalSpec::Bernoulli { p: 0.3 },
            MarginalSpec::Poisson { lambda: 1.5 },
        ],
        21,
    );
}

#[test]
fn sampled_frequencies_match_density_for_three_discrete_variables() {
    check_discrete_cells(
        corr3(0.5, -0.3, 0.2),
        vec![
            MarginalSpec::Bernoulli { p: 0.5 },
            MarginalSpec::Bernoulli { p: 0.25 },
            MarginalSpec::Poisson { lambda: 1.0 },
        ],
        22,
    );
}

#[test]
fn sampled_columns_match_their_margins() {
    let specs = [
        MarginalSpec::Normal { mean: 1.0, sd: 2.0 },
        MarginalSpec::Uniform01,
        MarginalSpec::Poisson { lambda: 3.0 },
        MarginalSpec::NegBinomial { r: 2.0, p: 0.4 },
        MarginalSpec::Bernoulli { p: 0.3 },
    ];
    let n = 100_000usize;
    for (k, spec) in specs.iter().enumerate() {
        let sigma = CorrelationMatrix::identity(vec!["x".into()]);
        let data = sample_dataset(&sigma, &[*spec], n, 30 + k as u64).unwrap();
        let mut sorted = data.column(0).to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut worst = 0.0f64;
        match spec.kind() {
            mixcorr::MarginalKind::Continuous => {
                // Tie-free, so the Kolmogorov statistic is attained at a
                // sample point, approaching the step from either side.
                for (i, &x) in sorted.iter().enumerate() {
                    let f = spec.cdf(x);
                    let hi = (i + 1) as f64 / n as f64;
                    let lo = i as f64 / n as f64;
                    worst = worst.max((f - hi).abs().max((f - lo).abs()));
                }
            }
            mixcorr::MarginalKind::Discrete => {
                // The supremum deviation sits at a support point.
                for v in spec.discrete_support(1e-9).unwrap() {
                    let observed = sorted.iter().filter(|&&x| x <= v).count() as f64 / n as f64;
                    worst = worst.max((observed - spec.cdf(v)).abs());
                }
            }
        }
        assert!(worst <= 0.01, "margin {spec}: max CDF deviation {worst:.4}");
    }
}
