//! Accuracy metrics against a known truth matrix and a seeded replication
//! benchmark around the estimator.
//!
//! Replications are embarrassingly parallel: the truth matrix is generated
//! once per run, each replication derives its own RNG seed from the master
//! seed, and results are collected in replication order, so a benchmark's
//! numeric output is identical across thread counts and repeat runs.

use crate::data::fmt_sig10;
use crate::error::{Error, Result};
use crate::estimator::{estimate_matrix, CorrelationMatrix, OptimizerOpts};
use crate::sim::{permute_margins, sample_dataset, MarginalSpec, SigmaRecipe};
use rayon::prelude::*;
use serde::Serialize;

/// Truth entries with magnitude at least this count as actual associations.
pub const TRUTH_EDGE_TOL: f64 = 1e-12;

/// Compensated (Neumaier) summation; keeps replication averages stable.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn check_same_shape(est: &CorrelationMatrix, truth: &CorrelationMatrix) -> Result<()> {
    if est.dim() != truth.dim() {
        return Err(Error::DimensionMismatch(format!(
            "estimate is {}-dimensional, truth {}-dimensional",
            est.dim(),
            truth.dim()
        )));
    }
    if !truth.is_complete() {
        return Err(Error::InvalidParameter(
            "truth matrix has missing entries".into(),
        ));
    }
    Ok(())
}

/// Entrywise error summary over the estimated off-diagonal entries.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MatrixErrors {
    pub rmse: f64,
    pub mae: f64,
    /// Off-diagonal pairs that went into the average.
    pub n_pairs: usize,
    /// Pairs excluded because the estimate is missing.
    pub n_missing: usize,
}

/// Root mean square and mean absolute error over estimated pairs; missing
/// pairs are excluded and the averages renormalized.
pub fn matrix_errors(est: &CorrelationMatrix, truth: &CorrelationMatrix) -> Result<MatrixErrors> {
    check_same_shape(est, truth)?;
    let d = est.dim();
    let mut sq = 0.0;
    let mut abs = 0.0;
    let mut n = 0usize;
    let mut missing = 0usize;
    for i in 0..d {
        for j in (i + 1)..d {
            let t = truth.get(i, j).expect("truth is complete");
            match est.get(i, j) {
                Some(e) => {
                    sq += (e - t) * (e - t);
                    abs += (e - t).abs();
                    n += 1;
                }
                None => missing += 1,
            }
        }
    }
    if n == 0 {
        return Err(Error::Degenerate("no estimated pairs to score".into()));
    }
    Ok(MatrixErrors {
        rmse: (sq / n as f64).sqrt(),
        mae: abs / n as f64,
        n_pairs: n,
        n_missing: missing,
    })
}

/// Confusion counts for association detection at a magnitude threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Classification {
    pub fn tpr(&self) -> f64 {
        self.tp as f64 / (self.tp + self.fn_).max(1) as f64
    }

    pub fn fpr(&self) -> f64 {
        self.fp as f64 / (self.fp + self.tn).max(1) as f64
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / (self.tp + self.fp + self.tn + self.fn_).max(1) as f64
    }
}

/// Classifies each pair as detected (estimated magnitude at least
/// `threshold`) against the truth's nonzero pattern. Missing estimates
/// predict no association.
pub fn classify(
    est: &CorrelationMatrix,
    truth: &CorrelationMatrix,
    threshold: f64,
) -> Result<Classification> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "classification threshold must be positive, got {threshold}"
        )));
    }
    check_same_shape(est, truth)?;
    let d = est.dim();
    let mut c = Classification {
        tp: 0,
        fp: 0,
        tn: 0,
        fn_: 0,
    };
    for i in 0..d {
        for j in (i + 1)..d {
            let actual = truth.get(i, j).expect("truth is complete").abs() >= TRUTH_EDGE_TOL;
            let predicted = est.get(i, j).is_some_and(|e| e.abs() >= threshold);
            match (predicted, actual) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
    }
    Ok(c)
}

/// Area under the ROC curve for detecting the truth's nonzero pattern by
/// thresholding estimated magnitudes. Missing estimates score zero. Errors
/// when the truth has no zero entries or no nonzero entries off the
/// diagonal.
pub fn roc_auc(est: &CorrelationMatrix, truth: &CorrelationMatrix) -> Result<f64> {
    check_same_shape(est, truth)?;
    let d = est.dim();
    let mut scored: Vec<(f64, bool)> = Vec::new();
    for i in 0..d {
        for j in (i + 1)..d {
            let actual = truth.get(i, j).expect("truth is complete").abs() >= TRUTH_EDGE_TOL;
            let score = est.get(i, j).map_or(0.0, f64::abs);
            scored.push((score, actual));
        }
    }
    let pos = scored.iter().filter(|s| s.1).count();
    let neg = scored.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::DegenerateTruth);
    }
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut auc = 0.0;
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut prev_tpr = 0.0;
    let mut prev_fpr = 0.0;
    let mut i = 0;
    while i < scored.len() {
        // Advance through a whole group of tied scores at once so ties form
        // a single diagonal segment.
        let score = scored[i].0;
        while i < scored.len() && scored[i].0 == score {
            if scored[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let tpr = tp as f64 / pos as f64;
        let fpr = fp as f64 / neg as f64;
        auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        prev_tpr = tpr;
        prev_fpr = fpr;
    }
    auc += (1.0 - prev_fpr) * (1.0 + prev_tpr) / 2.0;
    Ok(auc)
}

/// All metrics for one estimated matrix against the truth.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub errors: MatrixErrors,
    pub auc: Option<f64>,
    pub classification: Classification,
    pub n_boundary: usize,
}

/// Scores an estimate against the truth at the given detection threshold.
/// The AUC is `None` when the truth's support pattern makes it undefined.
pub fn evaluate(
    est: &CorrelationMatrix,
    truth: &CorrelationMatrix,
    threshold: f64,
) -> Result<EvalReport> {
    let errors = matrix_errors(est, truth)?;
    let auc = match roc_auc(est, truth) {
        Ok(a) => Some(a),
        Err(Error::DegenerateTruth) => None,
        Err(e) => return Err(e),
    };
    let classification = classify(est, truth, threshold)?;
    Ok(EvalReport {
        errors,
        auc,
        classification,
        n_boundary: 0,
    })
}

/// Derives a stream seed from a master seed (splitmix-style mixing), so each
/// replication gets an independent, reproducible RNG stream.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Configuration of a replication benchmark.
#[derive(Debug, Clone)]
pub struct BenchOpts {
    pub recipe: SigmaRecipe,
    pub margins: Vec<MarginalSpec>,
    /// Shuffle which margin sits on which variable (seeded) before running.
    pub shuffle_margins: bool,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub threshold: f64,
    pub optimizer: OptimizerOpts,
}

/// One replication's scores.
#[derive(Debug, Clone, Serialize)]
pub struct RepResult {
    pub rep: usize,
    pub seed: u64,
    pub rmse: f64,
    pub mae: f64,
    pub auc: Option<f64>,
    pub n_missing: usize,
    pub n_boundary: usize,
    pub classification: Classification,
}

/// Mean, sample standard deviation, and 95% confidence half-width of one
/// metric across replications.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub sd: f64,
    pub ci95_half: f64,
}

fn summarize(values: &[f64]) -> MetricSummary {
    let n = values.len() as f64;
    let mean = neumaier_sum(values.iter().copied()) / n;
    let var = if values.len() < 2 {
        0.0
    } else {
        neumaier_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0)
    };
    let sd = var.max(0.0).sqrt();
    MetricSummary {
        mean,
        sd,
        ci95_half: 1.96 * sd / n.sqrt(),
    }
}

/// A finished benchmark: the configuration echo, the truth matrix, each
/// replication's scores, and cross-replication summaries.
#[derive(Debug, Clone)]
pub struct BenchResult {
    pub recipe: String,
    pub margins: Vec<MarginalSpec>,
    pub n: usize,
    pub seed: u64,
    pub threshold: f64,
    pub truth: CorrelationMatrix,
    /// Realized zero fraction for sparse recipes.
    pub gamma_f: Option<f64>,
    pub reps: Vec<RepResult>,
    pub rmse: MetricSummary,
    pub mae: MetricSummary,
    pub auc: Option<MetricSummary>,
}

/// Runs the benchmark: builds the truth matrix once, then runs seeded
/// replications in parallel, each sampling a fresh dataset and estimating
/// its correlation matrix.
pub fn bench_run(opts: &BenchOpts) -> Result<BenchResult> {
    if opts.reps == 0 {
        return Err(Error::InvalidParameter(
            "need at least one replication".into(),
        ));
    }
    if opts.margins.len() != opts.recipe.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} margins for a {}-dimensional recipe",
            opts.margins.len(),
            opts.recipe.dim()
        )));
    }
    let (truth, gamma_f) = opts.recipe.generate(derive_seed(opts.seed, 0))?;
    let margins = if opts.shuffle_margins {
        permute_margins(&opts.margins, derive_seed(opts.seed, u64::MAX))
    } else {
        opts.margins.clone()
    };
    let reps: Vec<RepResult> = (0..opts.reps)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = derive_seed(opts.seed, 1 + rep as u64);
            let data = sample_dataset(&truth, &margins, opts.n, rep_seed)?;
            let est = estimate_matrix(&data, &opts.optimizer)?;
            let report = evaluate(&est.matrix, &truth, opts.threshold)?;
            Ok(RepResult {
                rep,
                seed: rep_seed,
                rmse: report.errors.rmse,
                mae: report.errors.mae,
                auc: report.auc,
                n_missing: report.errors.n_missing,
                n_boundary: est.diagnostics.iter().filter(|d| d.boundary).count(),
                classification: report.classification,
            })
        })
        .collect::<Result<_>>()?;
    let rmse = summarize(&reps.iter().map(|r| r.rmse).collect::<Vec<_>>());
    let mae = summarize(&reps.iter().map(|r| r.mae).collect::<Vec<_>>());
    let aucs: Vec<f64> = reps.iter().filter_map(|r| r.auc).collect();
    let auc = if aucs.len() == reps.len() {
        Some(summarize(&aucs))
    } else {
        None
    };
    Ok(BenchResult {
        recipe: opts.recipe.to_string(),
        margins,
        n: opts.n,
        seed: opts.seed,
        threshold: opts.threshold,
        truth,
        gamma_f,
        reps,
        rmse,
        mae,
        auc,
    })
}

/// Per-replication CSV. Contains only seeded, deterministic quantities, so
/// two runs of the same configuration produce identical bytes.
pub fn reps_csv(result: &BenchResult) -> String {
    let mut out = String::from("rep,seed,rmse,mae,auc,n_missing,n_boundary,tp,fp,tn,fn\n");
    for r in &result.reps {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.rep,
            r.seed,
            fmt_sig10(r.rmse),
            fmt_sig10(r.mae),
            r.auc.map(fmt_sig10).unwrap_or_default(),
            r.n_missing,
            r.n_boundary,
            r.classification.tp,
            r.classification.fp,
            r.classification.tn,
            r.classification.fn_
        ));
    }
    out
}

/// Cross-replication summary CSV: one row per benchmark run, with means and
/// 95% confidence half-widths. The recipe field is double-quoted because
/// recipe strings contain commas; AUC fields are empty when any replication
/// had a degenerate truth.
pub fn summary_csv(results: &[BenchResult]) -> String {
    let mut out = String::from("recipe,n,reps,rmse_mean,rmse_ci,mae_mean,mae_ci,auc_mean,auc_ci\n");
    for r in results {
        let (auc_mean, auc_ci) = match &r.auc {
            Some(s) => (fmt_sig10(s.mean), fmt_sig10(s.ci95_half)),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!(
            "\"{}\",{},{},{},{},{},{},{},{}\n",
            r.recipe,
            r.n,
            r.reps.len(),
            fmt_sig10(r.rmse.mean),
            fmt_sig10(r.rmse.ci95_half),
            fmt_sig10(r.mae.mean),
            fmt_sig10(r.mae.ci95_half),
            auc_mean,
            auc_ci
        ));
    }
    out
}
