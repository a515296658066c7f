//! Reference joint density for small models (up to three variables),
//! computed by direct conditioning in the latent Gaussian, plus a total-mass
//! integrator that checks the model puts probability one on its support.
//!
//! This module deliberately avoids the estimator's likelihood code: the
//! continuous block is handled through the multivariate normal density and
//! the discrete block through conditional normal rectangles, so agreement
//! between the two sides is a meaningful cross-check.

use crate::error::{Error, Result};
use crate::estimator::CorrelationMatrix;
use crate::gauss::{bvn_cdf, std_normal_cdf, std_normal_pdf, std_normal_quantile_extended, Rho};
use crate::marginals::MarginalKind;
use crate::quad::integrate;
use crate::sim::MarginalSpec;
use nalgebra::{DMatrix, DVector};

/// Discrete supports are truncated once their tail mass is below this.
const SUPPORT_TAIL: f64 = 1e-10;

/// Continuous normal coordinates are integrated this many standard
/// deviations out.
const RANGE_SDS: f64 = 8.5;

/// A fully specified model over at most three variables: a complete,
/// strictly positive definite correlation matrix and one margin per
/// coordinate.
#[derive(Debug, Clone)]
pub struct SmallModel {
    sigma: CorrelationMatrix,
    margins: Vec<MarginalSpec>,
    cont: Vec<usize>,
    disc: Vec<usize>,
    /// Cholesky factor of the continuous block, when it is non-empty.
    chol_cc: Option<nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>>,
    /// Regression of the discrete block on the continuous one.
    k: DMatrix<f64>,
    /// Covariance of the discrete block given the continuous one.
    cond_cov: DMatrix<f64>,
}

impl SmallModel {
    pub fn new(sigma: CorrelationMatrix, margins: Vec<MarginalSpec>) -> Result<Self> {
        let d = sigma.dim();
        if d == 0 || d > 3 {
            return Err(Error::TooManyVariables(d));
        }
        if margins.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "{} margins for a {d}-dimensional matrix",
                margins.len()
            )));
        }
        if !sigma.is_complete() {
            return Err(Error::InvalidParameter(
                "reference model needs a complete matrix".into(),
            ));
        }
        for m in &margins {
            m.validate()?;
        }
        let min_eig = sigma.smallest_eigenvalue();
        if min_eig <= 1e-10 {
            return Err(Error::NotPositiveDefinite(format!(
                "smallest eigenvalue {min_eig:.3e}"
            )));
        }
        let mut cont = Vec::new();
        let mut disc = Vec::new();
        for (j, m) in margins.iter().enumerate() {
            match m.kind() {
                MarginalKind::Continuous => cont.push(j),
                MarginalKind::Discrete => disc.push(j),
            }
        }
        let dense = sigma.to_dense_zero_filled();
        let pick = |rows: &[usize], cols: &[usize]| {
            DMatrix::from_fn(rows.len(), cols.len(), |i, j| dense[(rows[i], cols[j])])
        };
        let sigma_cc = pick(&cont, &cont);
        let sigma_dc = pick(&disc, &cont);
        let sigma_dd = pick(&disc, &disc);
        let (chol_cc, k, cond_cov) = if cont.is_empty() {
            (None, DMatrix::zeros(disc.len(), 0), sigma_dd)
        } else {
            let chol = nalgebra::linalg::Cholesky::new(sigma_cc.clone()).ok_or_else(|| {
                Error::NotPositiveDefinite("continuous block is not positive definite".into())
            })?;
            let cc_inv = chol.inverse();
            let k = &sigma_dc * &cc_inv;
            let cond_cov = &sigma_dd - &k * sigma_dc.transpose();
            (Some(chol), k, cond_cov)
        };
        Ok(SmallModel {
            sigma,
            margins,
            cont,
            disc,
            chol_cc,
            k,
            cond_cov,
        })
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    pub fn sigma(&self) -> &CorrelationMatrix {
        &self.sigma
    }

    pub fn margins(&self) -> &[MarginalSpec] {
        &self.margins
    }

    /// Joint density at `x`: a density in the continuous coordinates times a
    /// probability mass in the discrete ones. Points off the support give 0.
    pub fn joint_density(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates, model has {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(self.density_inner(x))
    }

    fn density_inner(&self, x: &[f64]) -> f64 {
        let nc = self.cont.len();
        let mut z_c = DVector::zeros(nc);
        let mut log_cont = 0.0;
        for (i, &j) in self.cont.iter().enumerate() {
            let m = &self.margins[j];
            let f = m.pdf(x[j]);
            if f <= 0.0 {
                return 0.0;
            }
            let u = m.cdf(x[j]);
            if u <= 0.0 || u >= 1.0 {
                return 0.0;
            }
            let z = crate::gauss::std_normal_quantile(u).expect("u strictly inside (0,1)");
            z_c[i] = z;
            // Collect log f - log phi(z); the phi terms cancel against the
            // joint normal density below.
            log_cont += f.ln() + 0.5 * z * z + 0.5 * (2.0 * std::f64::consts::PI).ln();
        }
        let dens_cont = match nc {
            0 => 1.0,
            1 => self.margins[self.cont[0]].pdf(x[self.cont[0]]),
            _ => {
                let chol = self.chol_cc.as_ref().expect("continuous block present");
                let sol = chol.solve(&z_c);
                let quad_form = z_c.dot(&sol);
                let log_det: f64 = chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>() * 2.0;
                let log_norm = -0.5 * quad_form
                    - 0.5 * log_det
                    - 0.5 * nc as f64 * (2.0 * std::f64::consts::PI).ln();
                (log_norm + log_cont).exp()
            }
        };
        if dens_cont == 0.0 {
            return 0.0;
        }
        let nd = self.disc.len();
        if nd == 0 {
            return dens_cont;
        }
        let mut lo = [f64::NEG_INFINITY; 3];
        let mut hi = [f64::INFINITY; 3];
        for (i, &j) in self.disc.iter().enumerate() {
            let m = &self.margins[j];
            if m.pmf(x[j]) <= 0.0 {
                return 0.0;
            }
            hi[i] = std_normal_quantile_extended(m.cdf(x[j]).clamp(0.0, 1.0))
                .expect("cdf value in [0, 1]");
            lo[i] = std_normal_quantile_extended(m.cdf_minus(x[j]).clamp(0.0, 1.0))
                .expect("cdf value in [0, 1]");
        }
        let mu = &self.k * &z_c;
        let p = rect_prob(&mu, &self.cond_cov, &lo[..nd], &hi[..nd]);
        dens_cont * p.max(0.0)
    }

    fn coord_range(&self, j: usize) -> (f64, f64) {
        match self.margins[j] {
            MarginalSpec::Normal { mean, sd } => (mean - RANGE_SDS * sd, mean + RANGE_SDS * sd),
            MarginalSpec::Uniform01 => (0.0, 1.0),
            _ => unreachable!("discrete coordinates are summed, not integrated"),
        }
    }

    fn mass_over_cont(&self, xbuf: [f64; 3], level: usize, tol: f64) -> f64 {
        if level == self.cont.len() {
            return self.density_inner(&xbuf[..self.dim()]);
        }
        let j = self.cont[level];
        let (a, b) = self.coord_range(j);
        integrate(
            |t| {
                let mut next = xbuf;
                next[j] = t;
                self.mass_over_cont(next, level + 1, tol * 0.1)
            },
            a,
            b,
            tol,
        )
    }

    /// Integrates the joint density over the whole space: continuous
    /// coordinates by adaptive quadrature, discrete ones by summing their
    /// support (truncated below 1e-10 tail mass). The result should be 1 up
    /// to quadrature error.
    pub fn total_mass(&self, tol: f64) -> Result<f64> {
        let supports: Vec<Vec<f64>> = self
            .disc
            .iter()
            .map(|&j| self.margins[j].discrete_support(SUPPORT_TAIL))
            .collect::<Result<_>>()?;
        let mut combos: Vec<[f64; 3]> = vec![[0.0; 3]];
        for (i, support) in supports.iter().enumerate() {
            let j = self.disc[i];
            let mut next = Vec::with_capacity(combos.len() * support.len());
            for combo in &combos {
                for &v in support {
                    let mut c = *combo;
                    c[j] = v;
                    next.push(c);
                }
            }
            combos = next;
        }
        let mut total = 0.0;
        for combo in combos {
            total += self.mass_over_cont(combo, 0, tol);
        }
        Ok(total)
    }
}

/// Probability that a normal vector with the given mean and covariance falls
/// in the axis-aligned box `[lo, hi]` (bounds may be infinite).
fn rect_prob(mu: &DVector<f64>, cov: &DMatrix<f64>, lo: &[f64], hi: &[f64]) -> f64 {
    match lo.len() {
        0 => 1.0,
        1 => {
            let sd = cov[(0, 0)].max(0.0).sqrt();
            if sd <= 0.0 {
                // Degenerate conditional: all mass at the mean.
                return f64::from(u8::from(lo[0] < mu[0] && mu[0] <= hi[0]));
            }
            let a = std_normal_cdf((hi[0] - mu[0]) / sd);
            let b = std_normal_cdf((lo[0] - mu[0]) / sd);
            (a - b).clamp(0.0, 1.0)
        }
        2 => {
            let s0 = cov[(0, 0)].max(0.0).sqrt();
            let s1 = cov[(1, 1)].max(0.0).sqrt();
            let r = (cov[(0, 1)] / (s0 * s1)).clamp(-0.999999999, 0.999999999);
            let rho = Rho::new(r).expect("conditional correlation inside (-1, 1)");
            let std = |v: f64, mu: f64, s: f64| {
                if v.is_infinite() {
                    v
                } else {
                    (v - mu) / s
                }
            };
            let a_hi = std(hi[0], mu[0], s0);
            let a_lo = std(lo[0], mu[0], s0);
            let b_hi = std(hi[1], mu[1], s1);
            let b_lo = std(lo[1], mu[1], s1);
            let p = bvn_cdf(a_hi, b_hi, rho) - bvn_cdf(a_lo, b_hi, rho) - bvn_cdf(a_hi, b_lo, rho)
                + bvn_cdf(a_lo, b_lo, rho);
            p.clamp(0.0, 1.0)
        }
        3 => {
            // Peel off the first coordinate and integrate the conditional
            // bivariate rectangle against its marginal density.
            let s0 = cov[(0, 0)].sqrt();
            let a = ((lo[0] - mu[0]) / s0).max(-RANGE_SDS);
            let b = ((hi[0] - mu[0]) / s0).min(RANGE_SDS);
            if a >= b {
                return 0.0;
            }
            let k1 = cov[(1, 0)] / cov[(0, 0)];
            let k2 = cov[(2, 0)] / cov[(0, 0)];
            let cc = DMatrix::from_row_slice(
                2,
                2,
                &[
                    cov[(1, 1)] - k1 * cov[(1, 0)],
                    cov[(1, 2)] - k1 * cov[(2, 0)],
                    cov[(2, 1)] - k2 * cov[(1, 0)],
                    cov[(2, 2)] - k2 * cov[(2, 0)],
                ],
            );
            let lo2 = [lo[1], lo[2]];
            let hi2 = [hi[1], hi[2]];
            integrate(
                |s| {
                    let t = mu[0] + s0 * s;
                    let m = DVector::from_row_slice(&[
                        mu[1] + k1 * (t - mu[0]),
                        mu[2] + k2 * (t - mu[0]),
                    ]);
                    std_normal_pdf(s) * rect_prob(&m, &cc, &lo2, &hi2)
                },
                a,
                b,
                1e-11,
            )
            .clamp(0.0, 1.0)
        }
        _ => unreachable!("reference models have at most three variables"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::gen_sigma_blocks;

    fn sigma2(r: f64) -> CorrelationMatrix {
        let mut s = CorrelationMatrix::identity(vec!["a".into(), "b".into()]);
        s.set(0, 1, r);
        s
    }

    fn sigma3(r01: f64, r02: f64, r12: f64) -> CorrelationMatrix {
        let mut s = CorrelationMatrix::identity(vec!["a".into(), "b".into(), "c".into()]);
        s.set(0, 1, r01);
        s.set(0, 2, r02);
        s.set(1, 2, r12);
        s
    }

    #[test]
    fn one_dimensional_mass_is_one() {
        let normal = SmallModel::new(
            CorrelationMatrix::identity(vec!["a".into()]),
            vec![MarginalSpec::Normal { mean: 2.0, sd: 3.0 }],
        )
        .unwrap();
        assert!((normal.total_mass(1e-9).unwrap() - 1.0).abs() < 1e-8);
        let poisson = SmallModel::new(
            CorrelationMatrix::identity(vec!["a".into()]),
            vec![MarginalSpec::Poisson { lambda: 1.0 }],
        )
        .unwrap();
        assert!((poisson.total_mass(1e-9).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn continuous_pair_mass_is_one() {
        let model = SmallModel::new(
            sigma2(0.6),
            vec![
                MarginalSpec::Normal { mean: 0.0, sd: 1.0 },
                MarginalSpec::Uniform01,
            ],
        )
        .unwrap();
        let mass = model.total_mass(1e-8).unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "mass = {mass}");
    }

    #[test]
    fn mixed_pair_density_matches_hand_formula() {
        let r = 0.7;
        let p = 0.4;
        let model = SmallModel::new(
            sigma2(r),
            vec![
                MarginalSpec::Normal { mean: 1.0, sd: 2.0 },
                MarginalSpec::Bernoulli { p },
            ],
        )
        .unwrap();
        let x = 1.8;
        let z = (x - 1.0) / 2.0;
        let w = (1.0 - r * r).sqrt();
        let b0 = crate::gauss::std_normal_quantile(1.0 - p).unwrap();
        let f = std_normal_pdf(z) / 2.0;
        let want0 = f * std_normal_cdf((b0 - r * z) / w);
        let want1 = f * (1.0 - std_normal_cdf((b0 - r * z) / w));
        let got0 = model.joint_density(&[x, 0.0]).unwrap();
        let got1 = model.joint_density(&[x, 1.0]).unwrap();
        assert!((got0 - want0).abs() < 1e-12, "{got0} vs {want0}");
        assert!((got1 - want1).abs() < 1e-12, "{got1} vs {want1}");
        let off = model.joint_density(&[x, 2.0]).unwrap();
        assert_eq!(off, 0.0);
    }

    #[test]
    fn binary_pair_density_matches_orthants() {
        let r = -0.35;
        let p1 = 0.3;
        let p2 = 0.6;
        let model = SmallModel::new(
            sigma2(r),
            vec![
                MarginalSpec::Bernoulli { p: p1 },
                MarginalSpec::Bernoulli { p: p2 },
            ],
        )
        .unwrap();
        let rho = Rho::new(r).unwrap();
        let b1 = crate::gauss::std_normal_quantile(1.0 - p1).unwrap();
        let b2 = crate::gauss::std_normal_quantile(1.0 - p2).unwrap();
        let p00 = bvn_cdf(b1, b2, rho);
        let got00 = model.joint_density(&[0.0, 0.0]).unwrap();
        assert!((got00 - p00).abs() < 1e-14);
        let mut total = 0.0;
        for a in [0.0, 1.0] {
            for b in [0.0, 1.0] {
                total += model.joint_density(&[a, b]).unwrap();
            }
        }
        assert!((total - 1.0).abs() < 1e-12, "total = {total}");
    }

    #[test]
    fn mixed_pair_mass_is_one() {
        let model = SmallModel::new(
            sigma2(0.7),
            vec![
                MarginalSpec::Normal { mean: 0.0, sd: 1.0 },
                MarginalSpec::NegBinomial { r: 1.0, p: 0.5 },
            ],
        )
        .unwrap();
        let mass = model.total_mass(1e-8).unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "mass = {mass}");
    }

    #[test]
    fn mixed_triple_mass_is_one() {
        let model = SmallModel::new(
            sigma3(0.5, -0.3, 0.2),
            vec![
                MarginalSpec::Normal { mean: 0.0, sd: 1.0 },
                MarginalSpec::Poisson { lambda: 1.0 },
                MarginalSpec::Bernoulli { p: 0.5 },
            ],
        )
        .unwrap();
        let mass = model.total_mass(1e-8).unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "mass = {mass}");
    }

    #[test]
    fn discrete_triple_mass_is_one() {
        let model = SmallModel::new(
            sigma3(0.4, 0.25, 0.55),
            vec![
                MarginalSpec::Poisson { lambda: 1.0 },
                MarginalSpec::Bernoulli { p: 0.35 },
                MarginalSpec::Bernoulli { p: 0.7 },
            ],
        )
        .unwrap();
        let mass = model.total_mass(1e-8).unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "mass = {mass}");
    }

    #[test]
    fn continuous_marginalization_recovers_margin() {
        let model = SmallModel::new(
            sigma2(0.6),
            vec![
                MarginalSpec::Normal { mean: 0.0, sd: 1.0 },
                MarginalSpec::Normal { mean: 1.0, sd: 0.5 },
            ],
        )
        .unwrap();
        for x1 in [-1.2, 0.0, 0.8] {
            let got = integrate(
                |x2| model.joint_density(&[x1, x2]).unwrap(),
                1.0 - 6.0,
                1.0 + 6.0,
                1e-10,
            );
            let want = std_normal_pdf(x1);
            assert!((got - want).abs() < 1e-8, "at {x1}: {got} vs {want}");
        }
    }

    #[test]
    fn construction_validates_input() {
        let sigma = gen_sigma_blocks(&[(4, 0.5)]).unwrap();
        let margins = vec![MarginalSpec::Uniform01; 4];
        assert!(matches!(
            SmallModel::new(sigma, margins),
            Err(Error::TooManyVariables(4))
        ));
        let mut singular = sigma2(0.0);
        singular.set(0, 1, 1.0);
        assert!(SmallModel::new(
            singular,
            vec![MarginalSpec::Uniform01, MarginalSpec::Uniform01]
        )
        .is_err());
        let model = SmallModel::new(sigma2(0.3), vec![MarginalSpec::Uniform01; 2]).unwrap();
        assert!(model.joint_density(&[0.5]).is_err());
    }
}
