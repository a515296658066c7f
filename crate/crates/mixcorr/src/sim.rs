//! Synthetic data generation: parametric margins, correlation matrix
//! recipes, and seeded sampling from the latent Gaussian model.
//!
//! A dataset is drawn by sampling latent rows Z from N(0, Sigma) and pushing
//! each coordinate through its margin's quantile at Phi(z). All randomness
//! flows from a single `u64` seed through one ChaCha12 stream per call, with
//! normal deviates produced by inverse-CDF, so every output is reproducible
//! across platforms and thread counts. Singular but positive semidefinite
//! matrices are handled by an eigenvalue square root, so exactly coupled
//! coordinates (correlation +1 or -1) can be sampled too.

use crate::data::{ColumnSchema, Dataset};
use crate::error::{Error, Result};
use crate::estimator::CorrelationMatrix;
use crate::gauss::{std_normal_cdf, std_normal_quantile};
use crate::marginals::MarginalKind;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Discrete quantile loops stop once the accumulated CDF reaches 1 minus
/// this tail mass.
const DISCRETE_TAIL: f64 = 1e-12;

/// Advances a counting distribution's probability mass from p(k) to p(k+1).
type PmfStep = Box<dyn Fn(f64, f64) -> f64>;

/// A parametric marginal distribution for synthetic columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarginalSpec {
    Normal { mean: f64, sd: f64 },
    Uniform01,
    Poisson { lambda: f64 },
    NegBinomial { r: f64, p: f64 },
    Bernoulli { p: f64 },
}

impl MarginalSpec {
    pub fn kind(&self) -> MarginalKind {
        match self {
            MarginalSpec::Normal { .. } | MarginalSpec::Uniform01 => MarginalKind::Continuous,
            _ => MarginalKind::Discrete,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            MarginalSpec::Normal { mean, sd } => {
                if !mean.is_finite() || !sd.is_finite() || sd <= 0.0 {
                    return bad(format!("normal({mean},{sd}) needs finite mean and sd > 0"));
                }
            }
            MarginalSpec::Uniform01 => {}
            MarginalSpec::Poisson { lambda } => {
                if !lambda.is_finite() || lambda <= 0.0 {
                    return bad(format!("poisson({lambda}) needs lambda > 0"));
                }
            }
            MarginalSpec::NegBinomial { r, p } => {
                if !r.is_finite() || r <= 0.0 || !p.is_finite() || p <= 0.0 || p >= 1.0 {
                    return bad(format!("negbinomial({r},{p}) needs r > 0 and p in (0,1)"));
                }
            }
            MarginalSpec::Bernoulli { p } => {
                if !p.is_finite() || p <= 0.0 || p >= 1.0 {
                    return bad(format!("bernoulli({p}) needs p in (0,1)"));
                }
            }
        }
        Ok(())
    }

    /// Probability mass at the start of the support and the recursion that
    /// advances it, for the integer-valued variants.
    fn pmf_recursion(&self) -> Option<(f64, PmfStep)> {
        match *self {
            MarginalSpec::Poisson { lambda } => Some((
                (-lambda).exp(),
                Box::new(move |p, k| p * lambda / (k + 1.0)),
            )),
            MarginalSpec::NegBinomial { r, p } => Some((
                p.powf(r),
                Box::new(move |m, k| m * (1.0 - p) * (k + r) / (k + 1.0)),
            )),
            _ => None,
        }
    }

    /// Generalized inverse CDF. For the counting distributions this walks the
    /// probability mass recursion, stopping early once the tail above the
    /// current point is below `1e-12`.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            MarginalSpec::Normal { mean, sd } => {
                mean + sd
                    * std_normal_quantile(u).unwrap_or(if u <= 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        f64::INFINITY
                    })
            }
            MarginalSpec::Uniform01 => u.clamp(0.0, 1.0),
            MarginalSpec::Bernoulli { p } => {
                if u <= 1.0 - p {
                    0.0
                } else {
                    1.0
                }
            }
            _ => {
                let (p0, step) = self.pmf_recursion().expect("counting distribution");
                let mut k = 0.0;
                let mut p = p0;
                let mut c = p;
                while c < u && c < 1.0 - DISCRETE_TAIL {
                    p = step(p, k);
                    k += 1.0;
                    c += p;
                }
                k
            }
        }
    }

    /// CDF at `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            MarginalSpec::Normal { mean, sd } => std_normal_cdf((x - mean) / sd),
            MarginalSpec::Uniform01 => x.clamp(0.0, 1.0),
            MarginalSpec::Bernoulli { p } => {
                if x < 0.0 {
                    0.0
                } else if x < 1.0 {
                    1.0 - p
                } else {
                    1.0
                }
            }
            _ => {
                if x < 0.0 {
                    return 0.0;
                }
                let kmax = x.floor();
                let (p0, step) = self.pmf_recursion().expect("counting distribution");
                let mut k = 0.0;
                let mut p = p0;
                let mut c = p;
                while k < kmax {
                    p = step(p, k);
                    k += 1.0;
                    c += p;
                    if c >= 1.0 - DISCRETE_TAIL && k >= kmax {
                        break;
                    }
                }
                c.min(1.0)
            }
        }
    }

    /// Left limit of the CDF at `x`, i.e. P(X < x).
    pub fn cdf_minus(&self, x: f64) -> f64 {
        match self.kind() {
            MarginalKind::Continuous => self.cdf(x),
            MarginalKind::Discrete => {
                let f = x.floor();
                if x == f {
                    self.cdf(f - 1.0)
                } else {
                    self.cdf(f)
                }
            }
        }
    }

    /// Probability mass at an exact support point (discrete variants only;
    /// zero off the support).
    pub fn pmf(&self, x: f64) -> f64 {
        match self.kind() {
            MarginalKind::Continuous => 0.0,
            MarginalKind::Discrete => {
                if x < 0.0 || x.floor() != x {
                    0.0
                } else {
                    self.cdf(x) - self.cdf_minus(x)
                }
            }
        }
    }

    /// Density at `x` for the continuous variants (zero elsewhere).
    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            MarginalSpec::Normal { mean, sd } => crate::gauss::std_normal_pdf((x - mean) / sd) / sd,
            MarginalSpec::Uniform01 if (0.0..=1.0).contains(&x) => 1.0,
            _ => 0.0,
        }
    }

    /// The model's observation map: a latent standard normal value pushed
    /// through this margin's quantile at its CDF level.
    pub fn transform_z(&self, z: f64) -> f64 {
        match *self {
            MarginalSpec::Normal { mean, sd } => mean + sd * z,
            MarginalSpec::Uniform01 => std_normal_cdf(z),
            _ => self.quantile(std_normal_cdf(z)),
        }
    }

    /// Support points of a discrete margin whose total mass is at least
    /// `1 - tail`, in increasing order.
    pub fn discrete_support(&self, tail: f64) -> Result<Vec<f64>> {
        match *self {
            MarginalSpec::Bernoulli { .. } => Ok(vec![0.0, 1.0]),
            MarginalSpec::Poisson { .. } | MarginalSpec::NegBinomial { .. } => {
                let (p0, step) = self.pmf_recursion().expect("counting distribution");
                let mut out = vec![0.0];
                let mut k = 0.0;
                let mut p = p0;
                let mut c = p;
                while c < 1.0 - tail {
                    p = step(p, k);
                    k += 1.0;
                    c += p;
                    out.push(k);
                    if k > 1e7 {
                        return Err(Error::InvalidParameter(
                            "discrete support enumeration did not converge".into(),
                        ));
                    }
                }
                Ok(out)
            }
            _ => Err(Error::InvalidParameter(
                "continuous margins have no discrete support".into(),
            )),
        }
    }

    /// Parses a margin such as `normal(0,1)`, `uniform01`, `poisson(1)`,
    /// `negbinomial(1,0.5)`, or `bernoulli(0.5)` (short forms `n`, `u01`,
    /// `pois`, `nb`, `bern`/`b` also work).
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let bad = || Error::InvalidParameter(format!("cannot parse margin {s:?}"));
        let (head, args) = match s.find('(') {
            Some(i) => {
                let inner = s[i..].strip_prefix('(').and_then(|t| t.strip_suffix(')'));
                let inner = inner.ok_or_else(bad)?;
                let args: Vec<f64> = inner
                    .split(',')
                    .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
                    .collect::<std::result::Result<_, _>>()?;
                (&s[..i], args)
            }
            None => (s.as_str(), Vec::new()),
        };
        let spec = match (head, args.as_slice()) {
            ("normal" | "n", [mean, sd]) => MarginalSpec::Normal {
                mean: *mean,
                sd: *sd,
            },
            ("uniform01" | "uniform" | "u01", []) => MarginalSpec::Uniform01,
            ("poisson" | "pois", [lambda]) => MarginalSpec::Poisson { lambda: *lambda },
            ("negbinomial" | "nb", [r, p]) => MarginalSpec::NegBinomial { r: *r, p: *p },
            ("bernoulli" | "bern" | "b", [p]) => MarginalSpec::Bernoulli { p: *p },
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl std::fmt::Display for MarginalSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MarginalSpec::Normal { mean, sd } => write!(f, "normal({mean},{sd})"),
            MarginalSpec::Uniform01 => write!(f, "uniform01"),
            MarginalSpec::Poisson { lambda } => write!(f, "poisson({lambda})"),
            MarginalSpec::NegBinomial { r, p } => write!(f, "negbinomial({r},{p})"),
            MarginalSpec::Bernoulli { p } => write!(f, "bernoulli({p})"),
        }
    }
}

/// Splits on commas that are not nested inside parentheses.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

/// Parses a margin list: either `thirds:D` (the standard mixed panel) or a
/// comma list of margins, each optionally repeated as `spec*count`.
pub fn parse_margins(s: &str) -> Result<Vec<MarginalSpec>> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("thirds:") {
        let d: usize = rest
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad dimension in {s:?}")))?;
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        return Ok(margins_thirds(d));
    }
    let mut out = Vec::new();
    for part in split_top_level(s) {
        let part = part.trim();
        if part.is_empty() {
            return Err(Error::InvalidParameter("empty margin entry".into()));
        }
        let (spec_str, count) = match part.rsplit_once('*') {
            Some((head, tail)) if !tail.contains(')') => {
                let count: usize = tail.trim().parse().map_err(|_| {
                    Error::InvalidParameter(format!("bad repeat count in {part:?}"))
                })?;
                (head, count)
            }
            _ => (part, 1),
        };
        if count == 0 {
            return Err(Error::InvalidParameter(format!(
                "repeat count in {part:?} must be positive"
            )));
        }
        let spec = MarginalSpec::parse(spec_str)?;
        out.extend(std::iter::repeat_n(spec, count));
    }
    Ok(out)
}

/// The standard mixed panel: the first third of the columns Normal(0,1), the
/// next third NegBinomial(1,0.5), the last third Bernoulli(0.5). Remainders
/// go to the earlier thirds.
pub fn margins_thirds(d: usize) -> Vec<MarginalSpec> {
    let base = d / 3;
    let rem = d % 3;
    let counts = [
        base + usize::from(rem >= 1),
        base + usize::from(rem >= 2),
        base,
    ];
    let specs = [
        MarginalSpec::Normal { mean: 0.0, sd: 1.0 },
        MarginalSpec::NegBinomial { r: 1.0, p: 0.5 },
        MarginalSpec::Bernoulli { p: 0.5 },
    ];
    let mut out = Vec::with_capacity(d);
    for (count, spec) in counts.iter().zip(specs) {
        out.extend(std::iter::repeat_n(spec, *count));
    }
    out
}

/// Returns a seeded random permutation of the margin list.
pub fn permute_margins(specs: &[MarginalSpec], seed: u64) -> Vec<MarginalSpec> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = specs.to_vec();
    for i in (1..out.len()).rev() {
        let j = rng.random_range(0..=i);
        out.swap(i, j);
    }
    out
}

fn default_names(d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("V{i}")).collect()
}

/// Block-diagonal equicorrelation matrix: each `(size, value)` block has
/// unit diagonal and `value` everywhere else. Each block must be positive
/// definite, which for size m means value in (-1/(m-1), 1).
pub fn gen_sigma_blocks(blocks: &[(usize, f64)]) -> Result<CorrelationMatrix> {
    if blocks.is_empty() {
        return Err(Error::InvalidParameter("no blocks given".into()));
    }
    for &(size, value) in blocks {
        if size == 0 {
            return Err(Error::InvalidParameter(
                "block size must be positive".into(),
            ));
        }
        if !value.is_finite() || value.abs() > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "block value {value} is not a correlation"
            )));
        }
        if size >= 2 {
            let lower = -1.0 / (size as f64 - 1.0);
            if value <= lower || value >= 1.0 {
                return Err(Error::NotPositiveDefinite(format!(
                    "equicorrelation block of size {size} needs value in ({lower:.4}, 1), got {value}"
                )));
            }
        }
    }
    let d: usize = blocks.iter().map(|b| b.0).sum();
    let mut sigma = CorrelationMatrix::identity(default_names(d));
    let mut offset = 0;
    for &(size, value) in blocks {
        for i in offset..offset + size {
            for j in (i + 1)..offset + size {
                sigma.set(i, j, value);
            }
        }
        offset += size;
    }
    Ok(sigma)
}

/// Random sparse correlation matrix. Draws the strict upper triangle of a
/// unit-diagonal factor T from Uniform(0.3, 1), zeroes a proportion `gamma`
/// of those entries at random, forms T'T, and rescales to unit diagonal.
/// Returns the matrix and the realized fraction of zero off-diagonal
/// entries, which exceeds `gamma` because products of the surviving factor
/// entries fill some cells back in only when chains overlap.
pub fn gen_sigma_sparse(gamma: f64, dim: usize, seed: u64) -> Result<(CorrelationMatrix, f64)> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be in [0, 1], got {gamma}"
        )));
    }
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let m = dim * (dim - 1) / 2;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut coefs: Vec<f64> = (0..m).map(|_| 0.3 + 0.7 * rng.random::<f64>()).collect();
    let n_zero = (gamma * m as f64).round() as usize;
    let mut idx: Vec<usize> = (0..m).collect();
    for i in 0..n_zero.min(m) {
        let j = i + rng.random_range(0..m - i);
        idx.swap(i, j);
    }
    for &i in idx.iter().take(n_zero.min(m)) {
        coefs[i] = 0.0;
    }
    let mut t = DMatrix::<f64>::identity(dim, dim);
    let mut it = coefs.iter();
    for i in 0..dim {
        for j in (i + 1)..dim {
            t[(i, j)] = *it.next().expect("one coefficient per upper cell");
        }
    }
    let s = t.transpose() * &t;
    let mut sigma = CorrelationMatrix::identity(default_names(dim));
    let mut zeros = 0usize;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let v = s[(i, j)] / (s[(i, i)] * s[(j, j)]).sqrt();
            sigma.set(i, j, v);
            if v == 0.0 {
                zeros += 1;
            }
        }
    }
    let gamma_f = if m == 0 { 0.0 } else { zeros as f64 / m as f64 };
    Ok((sigma, gamma_f))
}

/// A named way of producing a truth correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum SigmaRecipe {
    /// Equicorrelation blocks, written `blocks:7x0.8,10x0.6`.
    Blocks(Vec<(usize, f64)>),
    /// Random sparse factor matrix, written `sparse:0.91:30`.
    Sparse { gamma: f64, dim: usize },
    /// A concrete matrix supplied directly, for example loaded from a file.
    Fixed(Box<CorrelationMatrix>),
}

impl SigmaRecipe {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |msg: String| Error::InvalidParameter(msg);
        if let Some(rest) = s.strip_prefix("blocks:") {
            let mut blocks = Vec::new();
            for part in rest.split(',') {
                let (size, value) = part
                    .trim()
                    .split_once('x')
                    .ok_or_else(|| bad(format!("block {part:?} is not SIZExVALUE")))?;
                let size: usize = size
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("bad block size in {part:?}")))?;
                let value: f64 = value
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("bad block value in {part:?}")))?;
                blocks.push((size, value));
            }
            gen_sigma_blocks(&blocks)?;
            return Ok(SigmaRecipe::Blocks(blocks));
        }
        if let Some(rest) = s.strip_prefix("sparse:") {
            let (gamma, dim) = rest
                .split_once(':')
                .ok_or_else(|| bad(format!("sparse recipe {s:?} is not sparse:GAMMA:DIM")))?;
            let gamma: f64 = gamma
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad gamma in {s:?}")))?;
            let dim: usize = dim
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad dimension in {s:?}")))?;
            if !(0.0..=1.0).contains(&gamma) || dim == 0 {
                return Err(bad(format!("sparse recipe {s:?} out of range")));
            }
            return Ok(SigmaRecipe::Sparse { gamma, dim });
        }
        Err(bad(format!(
            "recipe {s:?} must start with blocks: or sparse:"
        )))
    }

    pub fn dim(&self) -> usize {
        match self {
            SigmaRecipe::Blocks(blocks) => blocks.iter().map(|b| b.0).sum(),
            SigmaRecipe::Sparse { dim, .. } => *dim,
            SigmaRecipe::Fixed(matrix) => matrix.dim(),
        }
    }

    /// Produces the truth matrix. Block and fixed recipes are deterministic;
    /// sparse recipes consume the seed. The second value is the realized
    /// zero fraction for sparse recipes.
    pub fn generate(&self, seed: u64) -> Result<(CorrelationMatrix, Option<f64>)> {
        match self {
            SigmaRecipe::Blocks(blocks) => Ok((gen_sigma_blocks(blocks)?, None)),
            SigmaRecipe::Sparse { gamma, dim } => {
                let (sigma, gamma_f) = gen_sigma_sparse(*gamma, *dim, seed)?;
                Ok((sigma, Some(gamma_f)))
            }
            SigmaRecipe::Fixed(matrix) => {
                if !matrix.is_complete() {
                    return Err(Error::InvalidParameter(
                        "fixed truth matrix has missing entries".into(),
                    ));
                }
                Ok((matrix.as_ref().clone(), None))
            }
        }
    }
}

impl std::fmt::Display for SigmaRecipe {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SigmaRecipe::Blocks(blocks) => {
                write!(f, "blocks:")?;
                for (i, (size, value)) in blocks.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{size}x{value}")?;
                }
                Ok(())
            }
            SigmaRecipe::Sparse { gamma, dim } => write!(f, "sparse:{gamma}:{dim}"),
            SigmaRecipe::Fixed(matrix) => write!(f, "fixed:{}", matrix.dim()),
        }
    }
}

fn std_normal_draw(rng: &mut ChaCha12Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return std_normal_quantile(u).expect("u in (0,1)");
        }
    }
}

/// A square root of the correlation matrix for sampling: Cholesky when the
/// matrix is positive definite, otherwise an eigenvalue square root, which
/// tolerates exactly singular matrices. Eigenvalues below -1e-8 are an
/// error; small negative ones from rounding are clamped to zero.
fn latent_root(sigma: &CorrelationMatrix) -> Result<DMatrix<f64>> {
    if !sigma.is_complete() {
        return Err(Error::InvalidParameter(
            "cannot sample from a matrix with missing entries".into(),
        ));
    }
    let dense = sigma.to_dense_zero_filled();
    if let Some(chol) = nalgebra::linalg::Cholesky::new(dense.clone()) {
        return Ok(chol.l());
    }
    let eig = dense.symmetric_eigen();
    let min = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min < -1e-8 {
        return Err(Error::NotPositiveDefinite(format!(
            "smallest eigenvalue {min:.3e}"
        )));
    }
    let roots = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()),
    );
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots))
}

/// Draws `n` latent rows from N(0, Sigma) and returns them as one column per
/// variable. Row by row, `dim` standard normals are drawn by inverse CDF and
/// mixed through a fixed square root of Sigma.
pub fn sample_latent(sigma: &CorrelationMatrix, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let root = latent_root(sigma)?;
    let d = sigma.dim();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut columns = vec![Vec::with_capacity(n); d];
    let mut eps = DVector::zeros(d);
    for _ in 0..n {
        for j in 0..d {
            eps[j] = std_normal_draw(&mut rng);
        }
        let z = &root * &eps;
        for j in 0..d {
            columns[j].push(z[j]);
        }
    }
    Ok(columns)
}

/// Samples a dataset from the latent Gaussian model with the given truth
/// matrix and margins. Column names come from the matrix; kinds from the
/// margins.
pub fn sample_dataset(
    sigma: &CorrelationMatrix,
    margins: &[MarginalSpec],
    n: usize,
    seed: u64,
) -> Result<Dataset> {
    if margins.len() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} margins for a {}-dimensional matrix",
            margins.len(),
            sigma.dim()
        )));
    }
    for m in margins {
        m.validate()?;
    }
    let latent = sample_latent(sigma, n, seed)?;
    let columns: Vec<Vec<f64>> = latent
        .into_iter()
        .zip(margins)
        .map(|(col, m)| col.into_iter().map(|z| m.transform_z(z)).collect())
        .collect();
    let schema = sigma
        .names()
        .iter()
        .zip(margins)
        .map(|(name, m)| ColumnSchema {
            name: name.clone(),
            kind: m.kind(),
        })
        .collect();
    Dataset::new(schema, columns)
}

/// The exactly coupled two-variable fixtures: a latent value drives both
/// columns, so the deterministic pattern between them holds row by row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoupledCase {
    /// Bernoulli(p1) indicator with a Normal(0,1) partner, correlation +1.
    MixedPlus,
    /// Bernoulli(p1) indicator with a Normal(0,1) partner, correlation -1.
    MixedMinus,
    /// Two Bernoulli indicators (p1 <= p2), correlation +1.
    BinaryPlus,
    /// Two Bernoulli indicators (p1 + p2 >= 1), correlation -1.
    BinaryMinus,
}

/// Builds one exactly coupled fixture and counts rows violating the pattern
/// the coupling implies (always 0; returned so tests can assert it on the
/// data rather than trust the construction).
///
/// Patterns checked per row, with t(q) the standard normal quantile:
/// * `MixedPlus`: X1 = 1 exactly when X2 > t(1-p1);
/// * `MixedMinus`: X1 = 1 exactly when X2 < t(p1);
/// * `BinaryPlus`: X1 <= X2;
/// * `BinaryMinus`: X1 + X2 >= 1.
pub fn make_fixture_coupled(
    case: CoupledCase,
    p1: f64,
    p2: f64,
    n: usize,
    seed: u64,
) -> Result<(Dataset, usize)> {
    for (name, p) in [("p1", p1), ("p2", p2)] {
        if !(p.is_finite() && 0.0 < p && p < 1.0) {
            return Err(Error::InvalidParameter(format!("{name} must be in (0,1)")));
        }
    }
    match case {
        CoupledCase::BinaryPlus if p1 > p2 => {
            return Err(Error::InvalidParameter(
                "the +1 binary case needs p1 <= p2".into(),
            ));
        }
        CoupledCase::BinaryMinus if p1 + p2 < 1.0 => {
            return Err(Error::InvalidParameter(
                "the -1 binary case needs p1 + p2 >= 1".into(),
            ));
        }
        _ => {}
    }
    let t1 = std_normal_quantile(1.0 - p1)?;
    let t2 = std_normal_quantile(1.0 - p2)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut x1 = Vec::with_capacity(n);
    let mut x2 = Vec::with_capacity(n);
    let mut violations = 0usize;
    for _ in 0..n {
        let z = std_normal_draw(&mut rng);
        let ind1 = f64::from(u8::from(z > t1));
        match case {
            CoupledCase::MixedPlus => {
                x1.push(ind1);
                x2.push(z);
                if (ind1 == 1.0) != (z > t1) {
                    violations += 1;
                }
            }
            CoupledCase::MixedMinus => {
                x1.push(ind1);
                x2.push(-z);
                if (ind1 == 1.0) != (-z < -t1) {
                    violations += 1;
                }
            }
            CoupledCase::BinaryPlus => {
                let ind2 = f64::from(u8::from(z > t2));
                x1.push(ind1);
                x2.push(ind2);
                if ind1 > ind2 {
                    violations += 1;
                }
            }
            CoupledCase::BinaryMinus => {
                let ind2 = f64::from(u8::from(-z > t2));
                x1.push(ind1);
                x2.push(ind2);
                if ind1 + ind2 < 1.0 {
                    violations += 1;
                }
            }
        }
    }
    let second_kind = match case {
        CoupledCase::MixedPlus | CoupledCase::MixedMinus => MarginalKind::Continuous,
        _ => MarginalKind::Discrete,
    };
    let schema = vec![
        ColumnSchema {
            name: "X1".into(),
            kind: MarginalKind::Discrete,
        },
        ColumnSchema {
            name: "X2".into(),
            kind: second_kind,
        },
    ];
    Ok((Dataset::new(schema, vec![x1, x2])?, violations))
}

/// Fixture for threshold censoring: X1 ~ Normal(0, sd = sqrt(3)) and
/// X2 = 1 when X1 >= t, else 0.
pub fn make_fixture_threshold(t: f64, n: usize, seed: u64) -> Result<Dataset> {
    if !t.is_finite() {
        return Err(Error::InvalidParameter("threshold must be finite".into()));
    }
    let sd = 3.0_f64.sqrt();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut x1 = Vec::with_capacity(n);
    let mut x2 = Vec::with_capacity(n);
    for _ in 0..n {
        let x = sd * std_normal_draw(&mut rng);
        x1.push(x);
        x2.push(f64::from(u8::from(x >= t)));
    }
    let schema = vec![
        ColumnSchema {
            name: "X1".into(),
            kind: MarginalKind::Continuous,
        },
        ColumnSchema {
            name: "X2".into(),
            kind: MarginalKind::Discrete,
        },
    ];
    Dataset::new(schema, vec![x1, x2])
}
