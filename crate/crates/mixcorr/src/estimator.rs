//! Pairwise maximum-likelihood estimation of the latent correlation matrix.
//!
//! Each pair of columns contributes a bivariate pseudo-likelihood whose shape
//! depends on the declared kinds:
//!
//! * continuous-continuous (CC): product of copula densities at the pseudo
//!   observations;
//! * continuous-discrete (CD): the copula CDF derivative integrated across
//!   the discrete value's pseudo-observation step;
//! * discrete-discrete (DD): bivariate normal rectangle probabilities over
//!   the pseudo-observation boxes.
//!
//! The marginal density factors of the continuous columns do not depend on
//! the correlation and are omitted from the objectives. Each pair is
//! maximized independently over one correlation parameter by a coarse grid
//! scan refined with Brent's method, so the assembled matrix is symmetric
//! with unit diagonal but not guaranteed positive semidefinite; an
//! informational eigenvalue report accompanies it.

use crate::data::{fmt_sig10, Dataset};
use crate::error::{Error, Result};
use crate::gauss::{bvn_cdf, std_normal_quantile, Rho, RHO_MAX};
use crate::marginals::{fit_empirical, MarginalKind};
use rayon::prelude::*;
use serde::Serialize;

/// Probabilities are clamped here before taking logs, so boundary cells
/// cannot produce `-inf` and wreck the optimizer.
const PROB_FLOOR: f64 = 1e-300;

/// Which likelihood shape a pair uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PairCase {
    CC,
    CD,
    DD,
}

impl std::fmt::Display for PairCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PairCase::CC => "CC",
            PairCase::CD => "CD",
            PairCase::DD => "DD",
        })
    }
}

/// One discrete level of a mixed pair: the Gaussian-scale bounds of its
/// pseudo-observation step and the continuous quantiles observed with it.
#[derive(Debug, Clone)]
struct MixedLevel {
    b_hi: f64,
    b_lo: f64,
    z: Vec<f64>,
}

/// One observed cell of a discrete-discrete pair with its multiplicity.
#[derive(Debug, Clone)]
struct Cell {
    a_hi: f64,
    a_lo: f64,
    b_hi: f64,
    b_lo: f64,
    count: f64,
}

#[derive(Debug, Clone)]
enum PairTerms {
    Continuous {
        n: usize,
        s11: f64,
        s22: f64,
        s12: f64,
    },
    Mixed {
        levels: Vec<MixedLevel>,
    },
    Discrete {
        cells: Vec<Cell>,
    },
}

/// The per-pair log-likelihood data, preprocessed so that evaluating at a new
/// correlation costs no quantile transforms.
#[derive(Debug, Clone)]
pub struct PairObjective {
    case: PairCase,
    n_eff: usize,
    terms: PairTerms,
}

fn quantiles_of_u_hi(values: &[f64]) -> Result<Vec<f64>> {
    let marginal = fit_empirical(values)?;
    values
        .iter()
        .map(|&x| {
            let (u_hi, _) = marginal.pseudo_u(x)?;
            std_normal_quantile(u_hi)
        })
        .collect()
}

/// Gaussian-scale bounds `(b_hi, b_lo)` per support point of a discrete
/// column; the lowest support point gets an infinite lower bound.
fn discrete_bounds(marginal: &crate::marginals::EmpiricalMarginal) -> Result<Vec<(f64, f64)>> {
    marginal
        .support()
        .iter()
        .map(|&x| {
            let (u_hi, u_lo) = marginal.pseudo_u(x)?;
            let b_hi = std_normal_quantile(u_hi)?;
            let b_lo = if u_lo == 0.0 {
                f64::NEG_INFINITY
            } else {
                std_normal_quantile(u_lo)?
            };
            Ok((b_hi, b_lo))
        })
        .collect()
}

impl PairObjective {
    /// Builds the objective for two aligned, complete columns. Fails for
    /// pairs that carry no rank information: fewer than 3 observations, a
    /// constant continuous column, or two constant columns.
    pub fn new(x: &[f64], y: &[f64], kx: MarginalKind, ky: MarginalKind) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "pair columns have lengths {} and {}",
                x.len(),
                y.len()
            )));
        }
        let n_eff = x.len();
        if n_eff < 3 {
            return Err(Error::Degenerate(format!(
                "only {n_eff} complete observations (need at least 3)"
            )));
        }
        let distinct = |v: &[f64]| {
            let mut s = v.to_vec();
            s.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            s.dedup();
            s.len()
        };
        let const_x = distinct(x) == 1;
        let const_y = distinct(y) == 1;
        if (const_x && kx == MarginalKind::Continuous)
            || (const_y && ky == MarginalKind::Continuous)
        {
            return Err(Error::Degenerate("constant continuous column".into()));
        }
        if const_x && const_y {
            return Err(Error::Degenerate("both columns are constant".into()));
        }

        use MarginalKind::*;
        let (case, terms) = match (kx, ky) {
            (Continuous, Continuous) => {
                let z1 = quantiles_of_u_hi(x)?;
                let z2 = quantiles_of_u_hi(y)?;
                let mut s11 = 0.0;
                let mut s22 = 0.0;
                let mut s12 = 0.0;
                for (a, b) in z1.iter().zip(&z2) {
                    s11 += a * a;
                    s22 += b * b;
                    s12 += a * b;
                }
                (
                    PairCase::CC,
                    PairTerms::Continuous {
                        n: z1.len(),
                        s11,
                        s22,
                        s12,
                    },
                )
            }
            (Continuous, Discrete) => (PairCase::CD, Self::mixed_terms(x, y)?),
            (Discrete, Continuous) => (PairCase::CD, Self::mixed_terms(y, x)?),
            (Discrete, Discrete) => {
                let mx = fit_empirical(x)?;
                let my = fit_empirical(y)?;
                let bx = discrete_bounds(&mx)?;
                let by = discrete_bounds(&my)?;
                let mut counts = std::collections::BTreeMap::new();
                for (xi, yi) in x.iter().zip(y) {
                    let i = mx
                        .support()
                        .binary_search_by(|v| v.partial_cmp(xi).unwrap())
                        .unwrap();
                    let j = my
                        .support()
                        .binary_search_by(|v| v.partial_cmp(yi).unwrap())
                        .unwrap();
                    *counts.entry((i, j)).or_insert(0u64) += 1;
                }
                let cells = counts
                    .into_iter()
                    .map(|((i, j), count)| Cell {
                        a_hi: bx[i].0,
                        a_lo: bx[i].1,
                        b_hi: by[j].0,
                        b_lo: by[j].1,
                        count: count as f64,
                    })
                    .collect();
                (PairCase::DD, PairTerms::Discrete { cells })
            }
        };
        Ok(PairObjective { case, n_eff, terms })
    }

    fn mixed_terms(cont: &[f64], disc: &[f64]) -> Result<PairTerms> {
        let z = quantiles_of_u_hi(cont)?;
        let md = fit_empirical(disc)?;
        let bounds = discrete_bounds(&md)?;
        let mut levels: Vec<MixedLevel> = bounds
            .iter()
            .map(|&(b_hi, b_lo)| MixedLevel {
                b_hi,
                b_lo,
                z: Vec::new(),
            })
            .collect();
        for (zi, yi) in z.iter().zip(disc) {
            let j = md
                .support()
                .binary_search_by(|v| v.partial_cmp(yi).unwrap())
                .unwrap();
            levels[j].z.push(*zi);
        }
        // Fixed summation order independent of the input row order.
        for level in &mut levels {
            level.z.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        }
        Ok(PairTerms::Mixed { levels })
    }

    pub fn case(&self) -> PairCase {
        self.case
    }

    /// Number of complete observations behind the objective.
    pub fn n_eff(&self) -> usize {
        self.n_eff
    }

    /// Log pseudo-likelihood at correlation `rho` (marginal density factors
    /// of continuous columns omitted).
    pub fn loglik(&self, rho: Rho) -> f64 {
        let r = rho.clamped();
        let omr2 = 1.0 - r * r;
        match &self.terms {
            PairTerms::Continuous { n, s11, s22, s12 } => {
                -0.5 * (*n as f64) * omr2.ln()
                    + (2.0 * r * s12 - r * r * (s11 + s22)) / (2.0 * omr2)
            }
            PairTerms::Mixed { levels } => {
                let w = omr2.sqrt();
                let mut total = 0.0;
                for level in levels {
                    for &z in &level.z {
                        let hi = crate::gauss::std_normal_cdf((level.b_hi - r * z) / w);
                        let lo = if level.b_lo == f64::NEG_INFINITY {
                            0.0
                        } else {
                            crate::gauss::std_normal_cdf((level.b_lo - r * z) / w)
                        };
                        total += (hi - lo).max(PROB_FLOOR).ln();
                    }
                }
                total
            }
            PairTerms::Discrete { cells } => {
                let rho = Rho::new(r).expect("clamped rho is valid");
                let mut total = 0.0;
                for c in cells {
                    let mass = bvn_cdf(c.a_hi, c.b_hi, rho)
                        - bvn_cdf(c.a_lo, c.b_hi, rho)
                        - bvn_cdf(c.a_hi, c.b_lo, rho)
                        + bvn_cdf(c.a_lo, c.b_lo, rho);
                    total += c.count * mass.max(PROB_FLOOR).ln();
                }
                total
            }
        }
    }

    /// Maximizes the pair log-likelihood over the correlation box.
    pub fn estimate(&self, opts: &OptimizerOpts) -> PairEstimate {
        let f = |r: f64| self.loglik(Rho::new(r).expect("grid point inside (-1, 1)"));
        let (rho_hat, loglik) = maximize_on_box(&f, opts);
        PairEstimate {
            rho_hat,
            loglik,
            boundary: opts.box_radius - rho_hat.abs() <= BOUNDARY_MARGIN,
        }
    }
}

/// A pair estimate is flagged as a boundary solution when it lands within
/// this distance of the correlation box edge.
const BOUNDARY_MARGIN: f64 = 1e-4;

/// Result of maximizing one pair.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PairEstimate {
    pub rho_hat: f64,
    pub loglik: f64,
    pub boundary: bool,
}

/// Settings for the per-pair 1-D maximizer.
#[derive(Debug, Clone, Copy)]
pub struct OptimizerOpts {
    /// Number of equally spaced pre-scan points across the box.
    pub grid_points: usize,
    /// The search stops once the bracket width falls below this.
    pub bracket_tol: f64,
    /// Correlations are searched in `[-box_radius, box_radius]`.
    pub box_radius: f64,
}

impl Default for OptimizerOpts {
    fn default() -> Self {
        OptimizerOpts {
            grid_points: 21,
            bracket_tol: 1e-6,
            box_radius: RHO_MAX,
        }
    }
}

/// Golden-section/parabolic (Brent) minimization on `[a, b]`, stopping when
/// the bracket is narrower than `width_tol`. Returns the best point found.
fn brent_min<F: Fn(f64) -> f64>(f: &F, a0: f64, b0: f64, width_tol: f64) -> (f64, f64) {
    const GOLD: f64 = 0.381_966_011_250_105_1;
    let (mut a, mut b) = (a0, b0);
    let step_tol = width_tol / 8.0;
    let mut x = a + GOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d = 0.0_f64;
    let mut e = 0.0_f64;
    for _ in 0..200 {
        if b - a <= width_tol {
            break;
        }
        let m = 0.5 * (a + b);
        let mut golden = true;
        if e.abs() > step_tol {
            // Parabola through x, w, v.
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            if p.abs() < (0.5 * q * e).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a >= step_tol && b - u >= step_tol {
                    golden = false;
                }
            }
        }
        if golden {
            e = if x < m { b - x } else { a - x };
            d = GOLD * e;
        }
        let u = if d.abs() >= step_tol {
            x + d
        } else {
            x + step_tol.copysign(d)
        };
        let fu = f(u);
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

/// Deterministic grid pre-scan followed by Brent refinement of `f` (to be
/// maximized) over the correlation box.
fn maximize_on_box<F: Fn(f64) -> f64>(f: &F, opts: &OptimizerOpts) -> (f64, f64) {
    let n = opts.grid_points.max(3);
    let radius = opts.box_radius;
    let step = 2.0 * radius / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|k| -radius + k as f64 * step).collect();
    let mut best = 0usize;
    let mut best_val = f64::NEG_INFINITY;
    for (k, &r) in grid.iter().enumerate() {
        let val = f(r);
        if val > best_val {
            best_val = val;
            best = k;
        }
    }
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(n - 1)];
    let neg = |r: f64| -f(r);
    let (x, fx_neg) = brent_min(&neg, lo, hi, opts.bracket_tol);
    if -fx_neg >= best_val {
        (x, -fx_neg)
    } else {
        (grid[best], best_val)
    }
}

/// A symmetric correlation matrix with unit diagonal; off-diagonal entries
/// may be missing when a pair failed to estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    names: Vec<String>,
    entries: Vec<Option<f64>>,
}

impl CorrelationMatrix {
    /// Identity matrix over the given variable names.
    pub fn identity(names: Vec<String>) -> Self {
        let d = names.len();
        let mut entries = vec![Some(0.0); d * d];
        for i in 0..d {
            entries[i * d + i] = Some(1.0);
        }
        CorrelationMatrix { names, entries }
    }

    /// Builds from full rows, validating shape, symmetry, unit diagonal, and
    /// that entries lie in [-1, 1].
    #[allow(clippy::needless_range_loop)]
    pub fn from_rows(names: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let d = names.len();
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch(format!(
                "expected a {d}x{d} matrix"
            )));
        }
        let mut m = CorrelationMatrix::identity(names);
        for i in 0..d {
            if (rows[i][i] - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "diagonal entry ({i},{i}) is {}, expected 1",
                    rows[i][i]
                )));
            }
            for j in (i + 1)..d {
                let v = rows[i][j];
                if (v - rows[j][i]).abs() > 1e-8 {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not symmetric at ({i},{j})"
                    )));
                }
                if !v.is_finite() || v.abs() > 1.0 + 1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "entry ({i},{j}) = {v} is not a correlation"
                    )));
                }
                m.set(i, j, v.clamp(-1.0, 1.0));
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Entry (i, j); `None` marks a failed pair.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.entries[i * self.dim() + j]
    }

    /// Sets entry (i, j) and its mirror.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let d = self.dim();
        self.entries[i * d + j] = Some(value);
        self.entries[j * d + i] = Some(value);
    }

    /// Marks entry (i, j) and its mirror as missing.
    pub fn set_missing(&mut self, i: usize, j: usize) {
        let d = self.dim();
        self.entries[i * d + j] = None;
        self.entries[j * d + i] = None;
    }

    /// True when every entry is present.
    pub fn is_complete(&self) -> bool {
        self.entries.iter().all(Option::is_some)
    }

    pub fn missing_pairs(&self) -> usize {
        let d = self.dim();
        let mut n = 0;
        for i in 0..d {
            for j in (i + 1)..d {
                if self.get(i, j).is_none() {
                    n += 1;
                }
            }
        }
        n
    }

    /// Dense copy with missing entries replaced by zero.
    pub fn to_dense_zero_filled(&self) -> nalgebra::DMatrix<f64> {
        let d = self.dim();
        nalgebra::DMatrix::from_fn(d, d, |i, j| self.get(i, j).unwrap_or(0.0))
    }

    /// Smallest eigenvalue of the zero-filled matrix.
    pub fn smallest_eigenvalue(&self) -> f64 {
        let eig = self.to_dense_zero_filled().symmetric_eigenvalues();
        eig.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Serializes as CSV: a header of variable names, then the full square
    /// matrix with 10 significant digits; missing entries are empty fields.
    pub fn to_csv_string(&self) -> String {
        let d = self.dim();
        let mut out = String::new();
        out.push_str(&self.names.join(","));
        out.push('\n');
        for i in 0..d {
            for j in 0..d {
                if j > 0 {
                    out.push(',');
                }
                if let Some(v) = self.get(i, j) {
                    out.push_str(&fmt_sig10(v));
                }
            }
            out.push('\n');
        }
        out
    }

    /// Parses the CSV form produced by [`to_csv_string`](Self::to_csv_string):
    /// a header of names and a full square grid where empty fields mark
    /// missing entries. The grid must be symmetric with unit diagonal.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::CsvParse {
            line: 1,
            message: "file is empty".into(),
        })?;
        let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let d = names.len();
        let mut grid: Vec<Option<f64>> = Vec::with_capacity(d * d);
        let mut got_rows = 0usize;
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            if got_rows >= d {
                return Err(Error::CsvParse {
                    line: idx + 1,
                    message: format!("expected {d} data rows"),
                });
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != d {
                return Err(Error::CsvParse {
                    line: idx + 1,
                    message: format!("row has {} fields, expected {d}", fields.len()),
                });
            }
            for field in fields {
                let field = field.trim();
                if field.is_empty() {
                    grid.push(None);
                } else {
                    let v: f64 = field.parse().map_err(|_| Error::CsvParse {
                        line: idx + 1,
                        message: format!("non-numeric field {field:?}"),
                    })?;
                    grid.push(Some(v));
                }
            }
            got_rows += 1;
        }
        if got_rows != d {
            return Err(Error::CsvParse {
                line: got_rows + 2,
                message: format!("expected {d} data rows, found {got_rows}"),
            });
        }
        let mut m = CorrelationMatrix::identity(names);
        for i in 0..d {
            match grid[i * d + i] {
                Some(v) if (v - 1.0).abs() <= 1e-9 => {}
                Some(v) => {
                    return Err(Error::InvalidParameter(format!(
                        "diagonal entry ({i},{i}) is {v}, expected 1"
                    )))
                }
                None => {
                    return Err(Error::InvalidParameter(format!(
                        "diagonal entry ({i},{i}) is missing"
                    )))
                }
            }
            for j in (i + 1)..d {
                match (grid[i * d + j], grid[j * d + i]) {
                    (Some(a), Some(b)) => {
                        if (a - b).abs() > 1e-8 {
                            return Err(Error::InvalidParameter(format!(
                                "matrix is not symmetric at ({i},{j})"
                            )));
                        }
                        if !a.is_finite() || a.abs() > 1.0 + 1e-12 {
                            return Err(Error::InvalidParameter(format!(
                                "entry ({i},{j}) = {a} is not a correlation"
                            )));
                        }
                        m.set(i, j, a.clamp(-1.0, 1.0));
                    }
                    (None, None) => m.set_missing(i, j),
                    _ => {
                        return Err(Error::InvalidParameter(format!(
                            "entry ({i},{j}) is missing on one side only"
                        )))
                    }
                }
            }
        }
        Ok(m)
    }
}

/// Per-pair record accompanying an estimated matrix.
#[derive(Debug, Clone, Serialize)]
pub struct PairDiagnostic {
    pub var1: String,
    pub var2: String,
    pub case: PairCase,
    pub n_eff: usize,
    pub rho_hat: Option<f64>,
    pub loglik: Option<f64>,
    pub boundary: bool,
    pub failure: Option<String>,
}

/// Informational eigenvalue summary of the assembled matrix (missing entries
/// counted as zero).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PsdReport {
    pub smallest_eigenvalue: f64,
    pub is_psd: bool,
}

/// An estimated correlation matrix together with per-pair diagnostics.
#[derive(Debug, Clone)]
pub struct MatrixEstimate {
    pub matrix: CorrelationMatrix,
    pub diagnostics: Vec<PairDiagnostic>,
    pub psd: PsdReport,
}

fn case_of(kx: MarginalKind, ky: MarginalKind) -> PairCase {
    use MarginalKind::*;
    match (kx, ky) {
        (Continuous, Continuous) => PairCase::CC,
        (Discrete, Discrete) => PairCase::DD,
        _ => PairCase::CD,
    }
}

/// Estimates the full correlation matrix of a dataset: every pair is fit
/// independently on its complete rows, in parallel. Failed pairs are left
/// missing in the matrix and explained in the diagnostics.
pub fn estimate_matrix(data: &Dataset, opts: &OptimizerOpts) -> Result<MatrixEstimate> {
    let d = data.n_cols();
    if d == 0 {
        return Err(Error::Schema("dataset has no columns".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|i| ((i + 1)..d).map(move |j| (i, j)))
        .collect();
    let results: Vec<PairDiagnostic> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (x, y) = data.pairwise_complete(i, j);
            let kx = data.kind(i);
            let ky = data.kind(j);
            let n_eff = x.len();
            let diag = |rho_hat, loglik, boundary, failure| PairDiagnostic {
                var1: data.name(i).to_string(),
                var2: data.name(j).to_string(),
                case: case_of(kx, ky),
                n_eff,
                rho_hat,
                loglik,
                boundary,
                failure,
            };
            match PairObjective::new(&x, &y, kx, ky) {
                Ok(obj) => {
                    let est = obj.estimate(opts);
                    diag(Some(est.rho_hat), Some(est.loglik), est.boundary, None)
                }
                Err(e) => diag(None, None, false, Some(e.to_string())),
            }
        })
        .collect();
    let mut matrix =
        CorrelationMatrix::identity(data.schema().iter().map(|c| c.name.clone()).collect());
    for (&(i, j), diag) in pairs.iter().zip(&results) {
        match diag.rho_hat {
            Some(r) => matrix.set(i, j, r),
            None => matrix.set_missing(i, j),
        }
    }
    let smallest = matrix.smallest_eigenvalue();
    Ok(MatrixEstimate {
        matrix,
        diagnostics: results,
        psd: PsdReport {
            smallest_eigenvalue: smallest,
            is_psd: smallest >= -1e-8,
        },
    })
}
