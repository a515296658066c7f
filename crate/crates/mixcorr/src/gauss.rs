//! Gaussian kernels: univariate normal CDF/quantile, the bivariate normal
//! CDF, and the bivariate Gaussian copula functions built on top of them.
//!
//! Everything downstream (pair likelihoods, the joint-density oracle, the
//! closed-form coefficients) reduces to these few functions, so they are kept
//! scalar, allocation-free, and accurate to near machine precision.

use crate::error::{Error, Result};

/// Correlations are handled strictly inside the open interval (-1, 1); the
/// kernels additionally clamp to this magnitude so that `1 - rho^2` stays
/// bounded away from zero.
pub const RHO_MAX: f64 = 0.9999;

const TWO_PI: f64 = std::f64::consts::TAU;
const SQRT_2PI: f64 = 2.5066282746310002;
const FRAC_1_SQRT_2PI: f64 = 0.3989422804014327;

/// A correlation parameter, guaranteed finite with absolute value below 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rho(f64);

impl Rho {
    /// Validates `value`; anything non-finite or with `|value| >= 1` is rejected.
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value.abs() < 1.0 {
            Ok(Rho(value))
        } else {
            Err(Error::InvalidRho(value))
        }
    }

    /// The raw correlation value.
    pub fn value(self) -> f64 {
        self.0
    }

    /// The value clamped to `[-RHO_MAX, RHO_MAX]`, as used by the kernels.
    pub fn clamped(self) -> f64 {
        self.0.clamp(-RHO_MAX, RHO_MAX)
    }
}

/// Standard normal density.
pub fn std_normal_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal CDF, via the complementary error function.
///
/// Accepts the extended reals: `-inf` maps to 0 and `+inf` to 1.
pub fn std_normal_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z == f64::INFINITY {
        return 1.0;
    }
    if z == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * libm::erfc(-z * std::f64::consts::FRAC_1_SQRT_2)
}

// Rational approximation coefficients from Acklam's inverse-normal algorithm,
// kept at their published precision.
#[allow(clippy::excessive_precision)]
const ACK_A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const ACK_B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const ACK_C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const ACK_D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];
const ACK_P_LOW: f64 = 0.02425;

fn acklam(p: f64) -> f64 {
    if p < ACK_P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((ACK_C[0] * q + ACK_C[1]) * q + ACK_C[2]) * q + ACK_C[3]) * q + ACK_C[4]) * q
            + ACK_C[5])
            / ((((ACK_D[0] * q + ACK_D[1]) * q + ACK_D[2]) * q + ACK_D[3]) * q + 1.0)
    } else if p <= 1.0 - ACK_P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((ACK_A[0] * r + ACK_A[1]) * r + ACK_A[2]) * r + ACK_A[3]) * r + ACK_A[4]) * r
            + ACK_A[5])
            * q
            / (((((ACK_B[0] * r + ACK_B[1]) * r + ACK_B[2]) * r + ACK_B[3]) * r + ACK_B[4]) * r
                + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((ACK_C[0] * q + ACK_C[1]) * q + ACK_C[2]) * q + ACK_C[3]) * q + ACK_C[4]) * q
            + ACK_C[5])
            / ((((ACK_D[0] * q + ACK_D[1]) * q + ACK_D[2]) * q + ACK_D[3]) * q + 1.0)
    }
}

/// Standard normal quantile for `u` strictly inside (0, 1).
///
/// Uses Acklam's rational approximation polished by one Halley step against
/// [`std_normal_cdf`], which brings the round-trip error to the 1e-15 scale.
/// Values as small as 1e-300 still produce a finite quantile.
pub fn std_normal_quantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain {
            what: "quantile argument",
            range: "(0, 1)",
            value: u,
        });
    }
    Ok(quantile_interior(u))
}

fn quantile_interior(u: f64) -> f64 {
    let mut x = acklam(u);
    let pdf = std_normal_pdf(x);
    if pdf > 0.0 {
        let err = std_normal_cdf(x) - u;
        let step = err / pdf;
        x -= step / (1.0 + 0.5 * x * step);
    }
    x
}

// Gauss-Legendre half-range nodes and weights used by the bivariate CDF,
// paired as (weight, node) exactly as in Genz's published tables.
#[allow(clippy::excessive_precision)]
const GL06: [(f64, f64); 3] = [
    (0.1713244923791705, 0.9324695142031522),
    (0.3607615730481384, 0.6612093864662647),
    (0.4679139345726904, 0.2386191860831970),
];
#[allow(clippy::excessive_precision)]
const GL12: [(f64, f64); 6] = [
    (0.04717533638651177, 0.9815606342467191),
    (0.1069393259953183, 0.9041172563704750),
    (0.1600783285433464, 0.7699026741943050),
    (0.2031674267230659, 0.5873179542866171),
    (0.2334925365383547, 0.3678314989981802),
    (0.2491470458134029, 0.1252334085114692),
];
#[allow(clippy::excessive_precision)]
const GL20: [(f64, f64); 10] = [
    (0.01761400713915212, 0.9931285991850949),
    (0.04060142980038694, 0.9639719272779138),
    (0.06267204833410906, 0.9122344282513259),
    (0.08327674157670475, 0.8391169718222188),
    (0.1019301198172404, 0.7463319064601508),
    (0.1181945319615184, 0.6360536807265150),
    (0.1316886384491766, 0.5108670019508271),
    (0.1420961093183821, 0.3737060887154196),
    (0.1491729864726037, 0.2277858511416451),
    (0.1527533871307259, 0.07652652113349733),
];

/// Upper-orthant probability P(X > dh, Y > dk) for finite bounds, after
/// Drezner-Wesolowsky as refined by Genz: fixed-order Gauss-Legendre over a
/// transformed correlation parameter, with a separate expansion when the
/// correlation magnitude exceeds 0.925.
fn bvnu(dh: f64, dk: f64, r: f64) -> f64 {
    let rule: &[(f64, f64)] = if r.abs() < 0.3 {
        &GL06
    } else if r.abs() < 0.75 {
        &GL12
    } else {
        &GL20
    };
    let h = dh;
    let mut k = dk;
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        if r.abs() > 0.0 {
            let hs = (h * h + k * k) / 2.0;
            let asr = r.asin();
            for &(w, x) in rule {
                for is in [-1.0_f64, 1.0] {
                    let sn = (asr * (is * x + 1.0) / 2.0).sin();
                    bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
                }
            }
            bvn = bvn * asr / (2.0 * TWO_PI);
        }
        bvn += std_normal_cdf(-h) * std_normal_cdf(-k);
    } else {
        if r < 0.0 {
            k = -k;
            hk = -hk;
        }
        if r.abs() < 1.0 {
            let asq = (1.0 - r) * (1.0 + r);
            let mut a = asq.sqrt();
            let bs = (h - k) * (h - k);
            let c = (4.0 - hk) / 8.0;
            let d = (12.0 - hk) / 16.0;
            let mut asr = -(bs / asq + hk) / 2.0;
            if asr > -100.0 {
                bvn = a
                    * asr.exp()
                    * (1.0 - c * (bs - asq) * (1.0 - d * bs / 5.0) / 3.0 + c * d * asq * asq / 5.0);
            }
            if -hk < 100.0 {
                let b = bs.sqrt();
                bvn -= (-hk / 2.0).exp()
                    * SQRT_2PI
                    * std_normal_cdf(-b / a)
                    * b
                    * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
            }
            a /= 2.0;
            for &(w, x) in rule {
                for is in [-1.0_f64, 1.0] {
                    let xs = (a * (is * x + 1.0)) * (a * (is * x + 1.0));
                    let rs = (1.0 - xs).sqrt();
                    asr = -(bs / xs + hk) / 2.0;
                    if asr > -100.0 {
                        let sp = 1.0 + c * xs * (1.0 + d * xs);
                        let ep = (-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs;
                        bvn += a * w * asr.exp() * (ep - sp);
                    }
                }
            }
            bvn = -bvn / TWO_PI;
        }
        if r > 0.0 {
            bvn += std_normal_cdf(-h.max(k));
        } else {
            bvn = -bvn;
            if k > h {
                bvn += std_normal_cdf(k) - std_normal_cdf(h);
            }
        }
    }
    bvn.clamp(0.0, 1.0)
}

/// Bivariate standard normal CDF P(X <= a, Y <= b) with correlation `rho`.
///
/// The bounds are extended reals: `-inf` gives 0, `+inf` reduces to the
/// univariate CDF of the other bound.
pub fn bvn_cdf(a: f64, b: f64, rho: Rho) -> f64 {
    if a.is_nan() || b.is_nan() {
        return f64::NAN;
    }
    if a == f64::NEG_INFINITY || b == f64::NEG_INFINITY {
        return 0.0;
    }
    if a == f64::INFINITY {
        return std_normal_cdf(b);
    }
    if b == f64::INFINITY {
        return std_normal_cdf(a);
    }
    let r = rho.clamped();
    if r == 0.0 {
        return std_normal_cdf(a) * std_normal_cdf(b);
    }
    bvnu(-a, -b, r)
}

/// Standard normal quantile on the closed unit interval: 0 and 1 map to the
/// infinities.
pub fn std_normal_quantile_extended(u: f64) -> Result<f64> {
    quantile_extended(u, "u")
}

fn quantile_extended(u: f64, what: &'static str) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Domain {
            what,
            range: "[0, 1]",
            value: u,
        });
    }
    Ok(if u == 0.0 {
        f64::NEG_INFINITY
    } else if u == 1.0 {
        f64::INFINITY
    } else {
        quantile_interior(u)
    })
}

fn quantile_strict(u: f64, what: &'static str) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain {
            what,
            range: "(0, 1)",
            value: u,
        });
    }
    Ok(quantile_interior(u))
}

/// Bivariate Gaussian copula CDF C(u, v; rho) on `[0, 1]^2` (endpoints allowed).
pub fn copula_cdf(u: f64, v: f64, rho: Rho) -> Result<f64> {
    let a = quantile_extended(u, "copula argument u")?;
    let b = quantile_extended(v, "copula argument v")?;
    Ok(bvn_cdf(a, b, rho))
}

/// Partial derivative of the copula CDF in its first argument,
/// dC/du = Phi((Phi^-1(v) - rho Phi^-1(u)) / sqrt(1 - rho^2)).
///
/// `u` must be interior; `v` may touch the endpoints, where the value is
/// exactly 0 or 1.
pub fn copula_du(u: f64, v: f64, rho: Rho) -> Result<f64> {
    let x = quantile_strict(u, "copula argument u")?;
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Domain {
            what: "copula argument v",
            range: "[0, 1]",
            value: v,
        });
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    if v == 1.0 {
        return Ok(1.0);
    }
    let y = quantile_interior(v);
    let r = rho.clamped();
    Ok(std_normal_cdf((y - r * x) / (1.0 - r * r).sqrt()))
}

/// Bivariate Gaussian copula density
/// c(u, v; rho) = exp((2 rho x y - rho^2 (x^2 + y^2)) / (2 (1 - rho^2))) / sqrt(1 - rho^2)
/// with x = Phi^-1(u), y = Phi^-1(v). Both arguments must be interior.
pub fn copula_density(u: f64, v: f64, rho: Rho) -> Result<f64> {
    let x = quantile_strict(u, "copula argument u")?;
    let y = quantile_strict(v, "copula argument v")?;
    let r = rho.clamped();
    let omr2 = 1.0 - r * r;
    Ok(((2.0 * r * x * y - r * r * (x * x + y * y)) / (2.0 * omr2)).exp() / omr2.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rho(v: f64) -> Rho {
        Rho::new(v).unwrap()
    }

    #[test]
    fn rho_rejects_out_of_range() {
        assert!(Rho::new(1.0).is_err());
        assert!(Rho::new(-1.0).is_err());
        assert!(Rho::new(1.5).is_err());
        assert!(Rho::new(f64::NAN).is_err());
        assert!(Rho::new(f64::INFINITY).is_err());
        assert!(Rho::new(0.99995).is_ok());
    }

    #[test]
    fn rho_clamps_to_working_range() {
        assert_eq!(rho(0.99999).clamped(), RHO_MAX);
        assert_eq!(rho(-0.99999).clamped(), -RHO_MAX);
        assert_eq!(rho(0.5).clamped(), 0.5);
    }

    #[test]
    fn cdf_basic_values() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert_eq!(std_normal_cdf(f64::INFINITY), 1.0);
        assert_eq!(std_normal_cdf(f64::NEG_INFINITY), 0.0);
        assert!((std_normal_cdf(1.0) - 0.8413447460685429).abs() <= 1e-15);
        assert!((std_normal_cdf(-1.0) - 0.15865525393145705).abs() <= 1e-15);
        assert!((std_normal_cdf(2.5) - 0.9937903346742238).abs() <= 1e-15);
    }

    #[test]
    fn cdf_symmetry() {
        for z in [0.1, 0.7, 1.3, 2.9, 4.2, 6.5] {
            assert!((std_normal_cdf(z) + std_normal_cdf(-z) - 1.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn quantile_known_value() {
        let x = std_normal_quantile(0.975).unwrap();
        assert!((x - 1.959963984540054).abs() <= 1e-12);
        assert_eq!(std_normal_quantile(0.5).unwrap(), 0.0);
    }

    #[test]
    fn quantile_round_trip() {
        let mut u = 1e-12;
        while u < 1.0 {
            let x = std_normal_quantile(u).unwrap();
            assert!(
                (std_normal_cdf(x) - u).abs() <= 1e-12 * u.max(1e-3),
                "round trip failed at u={u}"
            );
            u *= 3.7;
        }
        for &u in &[0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 0.999999] {
            let x = std_normal_quantile(u).unwrap();
            assert!((std_normal_cdf(x) - u).abs() <= 1e-12);
        }
    }

    #[test]
    fn quantile_domain_errors() {
        assert!(std_normal_quantile(0.0).is_err());
        assert!(std_normal_quantile(1.0).is_err());
        assert!(std_normal_quantile(-0.5).is_err());
        assert!(std_normal_quantile(1.5).is_err());
        assert!(std_normal_quantile(f64::NAN).is_err());
    }

    #[test]
    fn quantile_extreme_tail_is_finite() {
        let x = std_normal_quantile(1e-300).unwrap();
        assert!(x.is_finite());
        assert!(x < -36.0 && x > -39.0);
        let y = std_normal_quantile(1.0 - 1e-16).unwrap();
        assert!(y.is_finite() && y > 8.0);
    }

    #[test]
    fn bvn_orthant_identity() {
        // P(X <= 0, Y <= 0) = 1/4 + asin(rho) / (2 pi).
        let mut r: f64 = -0.99;
        while r <= 0.99 {
            let expect = 0.25 + r.asin() / TWO_PI;
            let got = bvn_cdf(0.0, 0.0, rho(r));
            assert!(
                (got - expect).abs() <= 1e-10,
                "orthant identity failed at rho={r}: {got} vs {expect}"
            );
            r += 0.018;
        }
        assert!((bvn_cdf(0.0, 0.0, rho(0.5)) - 1.0 / 3.0).abs() <= 1e-15);
    }

    #[test]
    fn bvn_infinite_bounds() {
        let r = rho(0.6);
        assert_eq!(bvn_cdf(f64::INFINITY, f64::INFINITY, r), 1.0);
        assert_eq!(bvn_cdf(f64::NEG_INFINITY, 1.3, r), 0.0);
        assert_eq!(bvn_cdf(1.3, f64::NEG_INFINITY, r), 0.0);
        assert!((bvn_cdf(f64::INFINITY, 1.3, r) - std_normal_cdf(1.3)).abs() <= 1e-15);
        assert!((bvn_cdf(-0.4, f64::INFINITY, r) - std_normal_cdf(-0.4)).abs() <= 1e-15);
    }

    #[test]
    fn bvn_symmetry_in_bounds() {
        for &r in &[-0.95, -0.5, 0.0, 0.3, 0.8, 0.99] {
            for &(a, b) in &[(0.3, -1.2), (2.0, 1.0), (-0.7, -0.1), (1.5, -2.5)] {
                let d = (bvn_cdf(a, b, rho(r)) - bvn_cdf(b, a, rho(r))).abs();
                assert!(d <= 1e-14, "asymmetry {d} at a={a} b={b} r={r}");
            }
        }
    }

    #[test]
    fn bvn_independence_factorizes() {
        let r = rho(0.0);
        for &(a, b) in &[(0.0, 0.0), (1.0, -1.0), (2.5, 0.3)] {
            let expect = std_normal_cdf(a) * std_normal_cdf(b);
            assert!((bvn_cdf(a, b, r) - expect).abs() <= 1e-15);
        }
    }

    #[test]
    fn bvn_comonotone_limit() {
        // At the clamp boundary the mass concentrates on the diagonal, so for
        // well-separated bounds the smaller marginal takes over almost exactly.
        let r = rho(0.99995);
        for &(a, b) in &[(0.5_f64, 1.5_f64), (-1.0, 2.0), (-2.5, 0.0)] {
            let expect = std_normal_cdf(a.min(b));
            assert!((bvn_cdf(a, b, r) - expect).abs() <= 1e-9);
        }
        // Equal bounds converge slowest; the arcsine identity pins the gap.
        let gap = 0.25 - RHO_MAX.asin() / TWO_PI;
        assert!((bvn_cdf(0.0, 0.0, r) - (0.5 - gap)).abs() <= 1e-12);
        assert!((bvn_cdf(8.0, 8.0, r) - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn bvn_rectangle_nonnegative() {
        for &r in &[-0.9999, -0.93, -0.5, 0.2, 0.9, 0.97, 0.9999] {
            let rr = rho(r);
            for &(a1, a2, b1, b2) in &[
                (-1.0, 0.5, -0.3, 2.0),
                (-3.0, -2.5, 1.0, 1.2),
                (0.0, 0.1, 0.0, 0.1),
                (-6.0, 6.0, -6.0, 6.0),
            ] {
                let mass = bvn_cdf(a2, b2, rr) - bvn_cdf(a1, b2, rr) - bvn_cdf(a2, b1, rr)
                    + bvn_cdf(a1, b1, rr);
                assert!(mass >= -1e-12, "negative rectangle {mass} at r={r}");
            }
        }
    }

    #[test]
    fn copula_cdf_independence() {
        assert!((copula_cdf(0.5, 0.5, rho(0.0)).unwrap() - 0.25).abs() <= 1e-15);
        assert!((copula_cdf(0.3, 0.7, rho(0.0)).unwrap() - 0.21).abs() <= 1e-14);
    }

    #[test]
    fn copula_cdf_endpoints() {
        let r = rho(0.42);
        assert_eq!(copula_cdf(0.0, 0.7, r).unwrap(), 0.0);
        assert_eq!(copula_cdf(0.7, 0.0, r).unwrap(), 0.0);
        assert!((copula_cdf(1.0, 0.7, r).unwrap() - 0.7).abs() <= 1e-12);
        assert!((copula_cdf(0.7, 1.0, r).unwrap() - 0.7).abs() <= 1e-12);
        assert!(copula_cdf(-0.1, 0.5, r).is_err());
        assert!(copula_cdf(0.5, 1.1, r).is_err());
    }

    #[test]
    fn copula_du_reduces_to_v_when_independent() {
        for &v in &[0.05, 0.3, 0.7, 0.95] {
            let got = copula_du(0.37, v, rho(0.0)).unwrap();
            assert!((got - v).abs() <= 1e-12);
        }
    }

    #[test]
    fn copula_du_endpoints_and_domain() {
        let r = rho(0.8);
        assert_eq!(copula_du(0.4, 0.0, r).unwrap(), 0.0);
        assert_eq!(copula_du(0.4, 1.0, r).unwrap(), 1.0);
        assert!(copula_du(0.0, 0.5, r).is_err());
        assert!(copula_du(1.0, 0.5, r).is_err());
        assert!(copula_du(0.4, -0.1, r).is_err());
    }

    #[test]
    fn copula_du_monotone_in_v() {
        let r = rho(0.6);
        let mut last = 0.0;
        for i in 1..40 {
            let v = i as f64 / 40.0;
            let cur = copula_du(0.3, v, r).unwrap();
            assert!(cur >= last);
            last = cur;
        }
    }

    #[test]
    fn copula_density_values() {
        assert!((copula_density(0.5, 0.5, rho(0.0)).unwrap() - 1.0).abs() <= 1e-15);
        // At (0.5, 0.5) the quantiles vanish, leaving 1/sqrt(1 - rho^2).
        let got = copula_density(0.5, 0.5, rho(0.5)).unwrap();
        assert!((got - 1.1547005383792515).abs() <= 1e-14);
        assert!(copula_density(0.0, 0.5, rho(0.5)).is_err());
        assert!(copula_density(0.5, 1.0, rho(0.5)).is_err());
    }

    #[test]
    fn copula_density_symmetric() {
        let r = rho(-0.7);
        for &(u, v) in &[(0.1, 0.9), (0.25, 0.6), (0.8, 0.45)] {
            let a = copula_density(u, v, r).unwrap();
            let b = copula_density(v, u, r).unwrap();
            assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
        }
    }
}
