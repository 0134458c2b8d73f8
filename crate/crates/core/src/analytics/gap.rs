//! Subpacketization gap analysis: the exact per-term ratio sequence and the
//! two Stirling-style upper bounds for the symmetric setting.

use num::{BigInt, BigRational, One};

use super::counting;
use crate::placement::DerivedParams;

/// Gap diagnostics for one parameter point. The `lambdas` decompose
/// `delta_nma / delta_hcb` into one factor per receiver dimension index; the
/// float bounds only exist in the symmetric setting `tx_per_dim ==
/// rx_per_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapBoundReport {
    /// `f_hcb / f_nma`, exact.
    pub gap: BigRational,
    pub lambdas: Vec<BigRational>,
    pub lambda_min: BigRational,
    /// `delta_nma / delta_hcb`, exact.
    pub per_subfile_ratio: BigRational,
    /// The lambda product reproduces `per_subfile_ratio`.
    pub product_matches: bool,
    pub lambdas_strictly_decreasing: bool,
    pub lambda_min_at_least_one: bool,
    pub gap_at_most_one: bool,
    pub gap_strictly_below_one: bool,
    pub symmetric: Option<SymmetricBounds>,
}

/// Float evaluations of the two published upper-bound forms, reported side by
/// side (their constant algebra differs; neither is asserted as a test).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricBounds {
    pub d: u32,
    /// Bound with the `e^6` prefactor, from the theorem statement.
    pub theorem_bound: f64,
    /// Bound in the derived form `C0*e^2/C1 * (C4/t)^t / t^((delta-1)t-1)`.
    pub appendix_bound: f64,
    pub c4: f64,
    /// The derived bound is only claimed for `t >= C4`.
    pub t_at_least_c4: bool,
    pub theorem_bound_holds: bool,
    pub appendix_bound_holds: bool,
}

fn big(v: i64) -> BigInt {
    BigInt::from(v)
}

/// One ratio factor: products of `(d-1)t - i` over a `delta`-wide window,
/// normalized by `prod_{i<delta} (d-1-i)`.
fn lambda(d: i64, t: i64, delta: i64, k: i64) -> BigRational {
    let mut numerator = BigInt::one();
    for i in k * delta..(k + 1) * delta {
        numerator *= big((d - 1) * t - i);
    }
    let mut denominator = BigInt::one();
    for i in 0..delta {
        denominator *= big(d - 1 - i);
    }
    BigRational::new(numerator, denominator)
}

fn factorial_f64(n: u32) -> f64 {
    (2..=n).map(|k| k as f64).product()
}

/// `x^e` with the `e == 0` case pinned to 1 (avoids `inf^0` when a base
/// degenerates at `d == delta + 1`).
fn powf_or_one(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        x.powf(e)
    }
}

fn symmetric_bounds(d: u32, t: u32, delta: u32, gap: f64) -> SymmetricBounds {
    use std::f64::consts::{E, PI};
    let df = d as f64;
    let tf = t as f64;
    let deltaf = delta as f64;
    let falling = factorial_f64(d - 1) / factorial_f64(d - 1 - delta); // (d-1)!/(d-delta-1)!
    let shared = powf_or_one(tf, -((deltaf - 1.0) * tf - 1.0));

    // Theorem-statement constants.
    let c0_thm = factorial_f64(d - 2) * E.powi(6) / factorial_f64(d - 1 - delta)
        / ((df - 1.0) / deltaf).sqrt()
        / falling
        / (2.0 * PI / (df - 1.0)).powf(1.5);
    let c1_thm = falling
        * (E / (df - 1.0)).powf(deltaf)
        * powf_or_one(df / (df - 1.0), -(deltaf + 1.0) * (df - 1.0))
        * powf_or_one((df - 1.0) / (df - deltaf - 1.0), -(df - deltaf - 1.0));
    let theorem_bound = c0_thm * (c1_thm / tf).powf(tf) * shared;

    // Derived (appendix-style) constants.
    let c0_app = factorial_f64(d - 2) / factorial_f64(d - 1 - delta)
        / (((df - 1.0) / deltaf).sqrt() * (2.0 * PI / (df - 1.0)).powf(1.5) * E.powi(-4));
    let c1_app = falling;
    let c2 = powf_or_one(df / (df - 1.0), (df - 1.0) * (deltaf + 1.0));
    let c3 = powf_or_one((df - 1.0) / (df - deltaf - 1.0), df - deltaf - 1.0);
    let c4 = c1_app * E.powf(deltaf) / (c2 * c3 * (df - 1.0).powf(deltaf));
    let appendix_bound = c0_app * E.powi(2) / c1_app * (c4 / tf).powf(tf) * shared;

    SymmetricBounds {
        d,
        theorem_bound,
        appendix_bound,
        c4,
        t_at_least_c4: tf >= c4,
        theorem_bound_holds: gap <= theorem_bound,
        appendix_bound_holds: gap <= appendix_bound,
    }
}

/// Full gap analysis. The lambda decomposition only involves the receiver
/// side, so it applies to any valid parameters; the float bounds are attached
/// when `tx_per_dim == rx_per_dim`.
pub fn gap_analysis(p: &DerivedParams) -> GapBoundReport {
    let d = p.rx_per_dim as i64;
    let t = p.rx_dims as i64;
    let delta = p.dim_ratio as i64;

    let lambdas: Vec<BigRational> = (0..t).map(|k| lambda(d, t, delta, k)).collect();
    let product: BigRational = lambdas
        .iter()
        .fold(BigRational::one(), |acc, l| acc * l.clone());
    let per_subfile_ratio = BigRational::new(
        counting::packets_per_subfile_nma(p).into(),
        counting::packets_per_subfile_hcb(p).into(),
    );
    let gap = BigRational::new(
        counting::per_file_packets_hcb(p).into(),
        counting::per_file_packets_nma(p).into(),
    );
    let one = BigRational::one();
    let lambda_min = lambdas.last().expect("rx_dims >= 1").clone();
    let symmetric = if p.tx_per_dim == p.rx_per_dim {
        let gap_f = crate::analytics::sweep::rational_to_f64(&gap);
        Some(symmetric_bounds(p.rx_per_dim, p.rx_dims, p.dim_ratio, gap_f))
    } else {
        None
    };
    GapBoundReport {
        gap_at_most_one: gap <= one,
        gap_strictly_below_one: gap < one,
        product_matches: product == per_subfile_ratio,
        lambdas_strictly_decreasing: lambdas.windows(2).all(|w| w[0] > w[1]),
        lambda_min_at_least_one: lambda_min >= one,
        lambda_min,
        lambdas,
        per_subfile_ratio,
        gap,
        symmetric,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(d: u32, t: u32, delta: u32) -> Option<DerivedParams> {
        DerivedParams::from_dims(d, delta * t, d, t, d).ok()
    }

    #[test]
    fn square_network_lambdas() {
        let p = params(2, 2, 1).unwrap();
        let r = gap_analysis(&p);
        assert_eq!(
            r.lambdas,
            vec![
                BigRational::from_integer(BigInt::from(2)),
                BigRational::from_integer(BigInt::from(1)),
            ]
        );
        assert_eq!(
            r.per_subfile_ratio,
            BigRational::from_integer(BigInt::from(2))
        );
        assert!(r.product_matches);
        assert!(r.lambdas_strictly_decreasing);
        assert!(r.gap_strictly_below_one);
    }

    #[test]
    fn boundary_point_reaches_one() {
        // tx_dims = rx_dims = 1: every ratio factor degenerates to 1.
        let p = DerivedParams::from_dims(2, 1, 4, 1, 4).unwrap();
        let r = gap_analysis(&p);
        assert_eq!(r.gap, BigRational::one());
        assert!(r.gap_at_most_one);
        assert!(!r.gap_strictly_below_one);
        assert_eq!(r.lambda_min, BigRational::one());
    }

    #[test]
    fn grid_flags() {
        for d in 2..=6u32 {
            for delta in 1..=3u32 {
                for t in 1..=6u32 {
                    let Some(p) = params(d, t, delta) else { continue };
                    let r = gap_analysis(&p);
                    assert!(r.product_matches, "d={d} t={t} delta={delta}");
                    assert!(r.lambda_min_at_least_one, "d={d} t={t} delta={delta}");
                    assert!(r.lambdas_strictly_decreasing, "d={d} t={t} delta={delta}");
                    assert!(r.gap_at_most_one, "d={d} t={t} delta={delta}");
                    assert_eq!(
                        r.gap_strictly_below_one,
                        p.tx_dims >= 2,
                        "d={d} t={t} delta={delta}"
                    );
                }
            }
        }
    }

    #[test]
    fn symmetric_bounds_present_and_finite() {
        let p = params(4, 3, 1).unwrap();
        let r = gap_analysis(&p);
        let b = r.symmetric.unwrap();
        assert!(b.theorem_bound.is_finite() && b.theorem_bound > 0.0);
        assert!(b.appendix_bound.is_finite() && b.appendix_bound > 0.0);
        assert!(b.c4.is_finite() && b.c4 > 0.0);
        // Asymmetric parameters only get the exact parts.
        let asym = DerivedParams::from_dims(2, 2, 4, 2, 4).unwrap();
        assert!(gap_analysis(&asym).symmetric.is_none());
        assert!(gap_analysis(&asym).product_matches);
    }

    #[test]
    fn degenerate_base_has_no_nan() {
        // d = delta + 1 sends a bound base to a 0^0 form; it must stay finite.
        let p = params(2, 3, 1).unwrap();
        let b = gap_analysis(&p).symmetric.unwrap();
        assert!(b.theorem_bound.is_finite());
        assert!(b.appendix_bound.is_finite());
    }
}
