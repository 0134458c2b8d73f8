//! Parameter sweeps over the symmetric grid `tx_per_dim = rx_per_dim = d`,
//! `t_rx = t`, `t_tx = delta * t`, and their CSV export.

use std::fmt::Write as _;

use num::{BigRational, ToPrimitive};

use super::counting::{subpacketization, SubpacketizationReport};
use super::gap::{gap_analysis, GapBoundReport};
use crate::placement::{DerivedParams, Frac};

pub const SWEEP_CSV_HEADER: &str = "k_t,k_r,m_t,m_r,n,t_t,t_r,delta,d_t,d_r,delta_hcb,delta_nma,f_hcb,f_nma,g,steps,dof,lambda_min,bound_thm2,bound_appendix";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub params: DerivedParams,
    pub tx_cache: Frac,
    pub rx_cache: Frac,
    pub counts: SubpacketizationReport,
    pub gap: GapBoundReport,
}

/// Lossy rational-to-float conversion that survives numerators and
/// denominators far beyond `f64` range by shifting both down together.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    let numer = r.numer();
    let denom = r.denom();
    let shift = numer.bits().max(denom.bits()).saturating_sub(64);
    let n = (numer >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (denom >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// One symmetric grid point; `None` when the point violates the validity
/// constraints (`d >= delta + 1` foremost).
pub fn sweep_symmetric(d: u32, t: u32, delta: u32) -> Option<SweepRow> {
    let params = DerivedParams::from_dims(d, delta * t, d, t, d).ok()?;
    Some(SweepRow {
        params,
        tx_cache: Frac::new(d as i64, d as i64),
        rx_cache: Frac::new(d as i64, d as i64),
        counts: subpacketization(&params),
        gap: gap_analysis(&params),
    })
}

pub fn render_sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let p = &row.params;
        let (thm, app) = row
            .gap
            .symmetric
            .map(|b| (b.theorem_bound, b.appendix_bound))
            .map_or((String::new(), String::new()), |(a, b)| {
                (format!("{a:.6e}"), format!("{b:.6e}"))
            });
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:.6e},{},{},{:.6e},{},{}",
            p.tx_count,
            p.rx_count,
            row.tx_cache,
            row.rx_cache,
            p.library,
            p.tx_dims,
            p.rx_dims,
            p.dim_ratio,
            p.tx_per_dim,
            p.rx_per_dim,
            row.counts.delta_hcb,
            row.counts.delta_nma,
            row.counts.f_hcb,
            row.counts.f_nma,
            rational_to_f64(&row.counts.gap),
            row.counts.steps,
            row.counts.dof,
            rational_to_f64(&row.gap.lambda_min),
            thm,
            app,
        );
    }
    out
}
