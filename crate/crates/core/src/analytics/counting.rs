//! Exact packet-counting formulas for the hypercube scheme and the NMA
//! baseline.

use num::{BigRational, BigUint, Integer};

use crate::combinatorics::{binomial, factorial};
use crate::placement::DerivedParams;

/// Packets each demanded subfile splits into under the hypercube scheme:
/// `C(D_R-2, delta-1) * C(D_R-1, delta)^(t_R-1) * (delta!)^t_R / delta * (t_R-1)!`,
/// with the division folded into `(delta-1)! * (delta!)^(t_R-1)`.
pub fn packets_per_subfile_hcb(p: &DerivedParams) -> BigUint {
    let d_rx = p.rx_per_dim as u64;
    let t_rx = p.rx_dims as u64;
    let delta = p.dim_ratio as u64;
    binomial(d_rx - 2, delta - 1)
        * binomial(d_rx - 1, delta).pow(t_rx as u32 - 1)
        * factorial(delta - 1)
        * factorial(delta).pow(t_rx as u32 - 1)
        * factorial(t_rx - 1)
}

/// Packets per subfile in the NMA baseline:
/// `C(K_R - t_R - 1, t_T - 1) * (t_T - 1)! * t_R!`.
pub fn packets_per_subfile_nma(p: &DerivedParams) -> BigUint {
    let k_rx = p.rx_count as u64;
    let t_rx = p.rx_dims as u64;
    let t_tx = p.tx_dims as u64;
    binomial(k_rx - t_rx - 1, t_tx - 1) * factorial(t_tx - 1) * factorial(t_rx)
}

/// Subfiles per file under hypercube placement: `D_T^t_T * D_R^t_R`.
pub fn subfiles_per_file_hcb(p: &DerivedParams) -> BigUint {
    BigUint::from(p.tx_per_dim).pow(p.tx_dims) * BigUint::from(p.rx_per_dim).pow(p.rx_dims)
}

/// Subfiles per file in the NMA baseline: `C(K_T, t_T) * C(K_R, t_R)`.
pub fn subfiles_per_file_nma(p: &DerivedParams) -> BigUint {
    binomial(p.tx_count as u64, p.tx_dims as u64) * binomial(p.rx_count as u64, p.rx_dims as u64)
}

/// Total packets per file, hypercube scheme.
pub fn per_file_packets_hcb(p: &DerivedParams) -> BigUint {
    subfiles_per_file_hcb(p) * packets_per_subfile_hcb(p)
}

/// Total packets per file, NMA baseline.
pub fn per_file_packets_nma(p: &DerivedParams) -> BigUint {
    subfiles_per_file_nma(p) * packets_per_subfile_nma(p)
}

/// Number of delivery steps:
/// `D_T^t_T * C(D_R, delta+1)^t_R * ((delta+1)!)^t_R * (t_R-1)! / (delta+1)`.
pub fn step_count(p: &DerivedParams) -> BigUint {
    let d_rx = p.rx_per_dim as u64;
    let t_rx = p.rx_dims as u64;
    let delta = p.dim_ratio as u64;
    BigUint::from(p.tx_per_dim).pow(p.tx_dims)
        * binomial(d_rx, delta + 1).pow(t_rx as u32)
        * factorial(delta)
        * factorial(delta + 1).pow(t_rx as u32 - 1)
        * factorial(t_rx - 1)
}

/// Packets each receiver needs: subfiles it misses times the per-subfile
/// split, `D_T^t_T * D_R^(t_R-1) * (D_R-1) * packets_per_subfile_hcb`.
pub fn per_receiver_need(p: &DerivedParams) -> BigUint {
    BigUint::from(p.tx_per_dim).pow(p.tx_dims)
        * BigUint::from(p.rx_per_dim).pow(p.rx_dims - 1)
        * BigUint::from(p.rx_per_dim - 1)
        * packets_per_subfile_hcb(p)
}

/// Packets each receiver is sent across the schedule, in factorial form:
/// `D_T^t_T * (D_R-1)! * (D_R!)^(t_R-1) * (t_R-1)! / ((D_R-delta-1)!)^t_R`.
pub fn per_receiver_delivered(p: &DerivedParams) -> BigUint {
    let d_rx = p.rx_per_dim as u64;
    let t_rx = p.rx_dims as u64;
    let delta = p.dim_ratio as u64;
    let numerator = BigUint::from(p.tx_per_dim).pow(p.tx_dims)
        * factorial(d_rx - 1)
        * factorial(d_rx).pow(t_rx as u32 - 1)
        * factorial(t_rx - 1);
    let denominator = factorial(d_rx - delta - 1).pow(t_rx as u32);
    let (q, r) = numerator.div_rem(&denominator);
    debug_assert!(r == BigUint::from(0u32), "factorial form divides exactly");
    q
}

/// Total packets delivered to all receivers, in factorial form (the
/// per-receiver count times `K_R`).
pub fn total_delivered_packets(p: &DerivedParams) -> BigUint {
    per_receiver_delivered(p) * p.rx_count
}

/// Closed-form subpacketization summary for one parameter point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubpacketizationReport {
    pub delta_hcb: BigUint,
    pub delta_nma: BigUint,
    pub f_hcb: BigUint,
    pub f_nma: BigUint,
    /// `f_hcb / f_nma` as an exact rational.
    pub gap: BigRational,
    pub steps: BigUint,
    pub packets_total: BigUint,
    /// Achieved sum of interference-free streams per step.
    pub dof: u32,
}

pub fn subpacketization(p: &DerivedParams) -> SubpacketizationReport {
    let f_hcb = per_file_packets_hcb(p);
    let f_nma = per_file_packets_nma(p);
    let gap = BigRational::new(f_hcb.clone().into(), f_nma.clone().into());
    SubpacketizationReport {
        delta_hcb: packets_per_subfile_hcb(p),
        delta_nma: packets_per_subfile_nma(p),
        f_hcb,
        f_nma,
        gap,
        steps: step_count(p),
        packets_total: total_delivered_packets(p),
        dof: p.step_size(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigInt;

    fn square() -> DerivedParams {
        DerivedParams::from_dims(2, 2, 2, 2, 4).unwrap()
    }

    fn thin() -> DerivedParams {
        DerivedParams::from_dims(2, 1, 4, 1, 4).unwrap()
    }

    #[test]
    fn square_network_counts() {
        let r = subpacketization(&square());
        assert_eq!(r.delta_hcb, BigUint::from(1u32));
        assert_eq!(r.f_hcb, BigUint::from(16u32));
        assert_eq!(r.steps, BigUint::from(8u32));
        assert_eq!(r.packets_total, BigUint::from(32u32));
        assert_eq!(r.dof, 4);
        assert_eq!(r.delta_nma, BigUint::from(2u32));
        assert_eq!(r.f_nma, BigUint::from(72u32));
        assert_eq!(
            r.gap,
            BigRational::new(BigInt::from(2), BigInt::from(9))
        );
    }

    #[test]
    fn thin_network_boundary() {
        let r = subpacketization(&thin());
        assert_eq!(r.f_hcb, BigUint::from(8u32));
        assert_eq!(r.f_nma, BigUint::from(8u32));
        assert_eq!(r.gap, BigRational::from_integer(BigInt::from(1)));
        assert_eq!(r.steps, BigUint::from(12u32));
        assert_eq!(r.packets_total, BigUint::from(24u32));
        assert_eq!(per_receiver_delivered(&thin()), BigUint::from(6u32));
    }

    #[test]
    fn counting_identities_line_up() {
        for p in [
            square(),
            thin(),
            DerivedParams::from_dims(3, 2, 3, 2, 3).unwrap(),
            DerivedParams::from_dims(2, 4, 3, 2, 6).unwrap(),
            DerivedParams::from_dims(1, 3, 4, 1, 4).unwrap(),
        ] {
            let per_rx = per_receiver_delivered(&p);
            assert_eq!(per_receiver_need(&p), per_rx, "{p:?}");
            assert_eq!(
                total_delivered_packets(&p),
                per_rx.clone() * p.rx_count,
                "{p:?}"
            );
            // Step grouping accounts for every packet.
            assert_eq!(
                step_count(&p) * p.step_size() as u64,
                total_delivered_packets(&p),
                "{p:?}"
            );
        }
    }

    #[test]
    fn delivered_matches_binomial_form() {
        // The delivered count also reads
        // `D_T^t_T * C(D_R-1, delta) * C(D_R, delta+1)^(t_R-1)
        //  * ((delta+1)!)^t_R * (t_R-1)! / (delta+1)`.
        for p in [square(), thin(), DerivedParams::from_dims(2, 2, 4, 1, 4).unwrap()] {
            let d_rx = p.rx_per_dim as u64;
            let t_rx = p.rx_dims;
            let delta = p.dim_ratio as u64;
            let binom_form = BigUint::from(p.tx_per_dim).pow(p.tx_dims)
                * binomial(d_rx - 1, delta)
                * binomial(d_rx, delta + 1).pow(t_rx - 1)
                * factorial(delta)
                * factorial(delta + 1).pow(t_rx - 1)
                * factorial(t_rx as u64 - 1);
            assert_eq!(binom_form, per_receiver_delivered(&p), "{p:?}");
        }
    }
}
