//! Channel sampling, per-packet zero-forcing precoder solving, and numerical
//! decode verification of delivery steps.
//!
//! Each packet of a step is carried by the transmitters in its tuple with
//! complex coefficients chosen so the packet arrives with coefficient 1 at
//! its target and coefficient 0 at its zero-forced receivers. A receiver then
//! subtracts the interference it can reconstruct from its cache and should be
//! left with its own symbol. Packets stand in for unit-rate codewords as
//! single unit-modulus complex symbols, so decoding is verified structurally.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use num::complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::PhyError;
use crate::linalg::solve_with_condition;
use crate::placement::DerivedParams;
use crate::scheduler::{packet_role, DeliveryStep, ReceiverRole, Schedule};

/// Complex gains `h[rx][tx]`, flattened row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    rx_count: usize,
    tx_count: usize,
    gains: Vec<Complex64>,
}

impl ChannelMatrix {
    pub fn from_gains(rx_count: usize, tx_count: usize, gains: Vec<Complex64>) -> Self {
        assert_eq!(gains.len(), rx_count * tx_count);
        Self {
            rx_count,
            tx_count,
            gains,
        }
    }

    pub fn rx_count(&self) -> usize {
        self.rx_count
    }

    pub fn tx_count(&self) -> usize {
        self.tx_count
    }

    pub fn gain(&self, rx: u16, tx: u16) -> Complex64 {
        self.gains[rx as usize * self.tx_count + tx as usize]
    }
}

/// Draw i.i.d. unit-variance circularly-symmetric complex Gaussian gains,
/// deterministically from the seed.
pub fn sample_channel(p: &DerivedParams, seed: u64) -> ChannelMatrix {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let scale = 0.5f64.sqrt();
    let gains = (0..p.rx_count as usize * p.tx_count as usize)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * scale, im * scale)
        })
        .collect();
    ChannelMatrix::from_gains(p.rx_count as usize, p.tx_count as usize, gains)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Absolute bound on decode residuals and zero-forced coefficients.
    pub residual: f64,
    /// Solver rejection threshold on the 1-norm condition estimate.
    pub condition_limit: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-9,
            condition_limit: 1e8,
        }
    }
}

/// Transmit coefficients for one packet: `(transmitter, coefficient)` pairs
/// over the packet's transmitter tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketPrecoder {
    pub taps: Vec<(u16, Complex64)>,
}

/// Per-packet precoders for one step, with the condition number of each
/// solved system.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    pub packets: Vec<PacketPrecoder>,
    pub condition_numbers: Vec<f64>,
}

impl PrecoderSet {
    pub fn worst_condition(&self) -> f64 {
        self.condition_numbers.iter().copied().fold(1.0, f64::max)
    }
}

/// Solve the zero-forcing system of every packet independently: over the
/// packet's transmitter tuple, force coefficient 1 at the target receiver and
/// 0 at each zero-forced receiver. The system is square by construction.
pub fn solve_step_precoders(
    step: &DeliveryStep,
    h: &ChannelMatrix,
    tol: &Tolerances,
) -> Result<PrecoderSet, PhyError> {
    let mut packets = Vec::with_capacity(step.packets.len());
    let mut condition_numbers = Vec::with_capacity(step.packets.len());
    for (offset, packet) in step.packets.iter().enumerate() {
        let txs = &packet.subfile.tx_set;
        let n = txs.len();
        let mut rows = Vec::with_capacity(n);
        rows.push(packet.target);
        rows.extend(packet.zf_order.iter().copied());
        debug_assert_eq!(rows.len(), n);
        let mut a = Vec::with_capacity(n * n);
        for &rx in &rows {
            for &tx in txs {
                a.push(h.gain(rx, tx));
            }
        }
        let mut b = vec![Complex64::new(0.0, 0.0); n];
        b[0] = Complex64::new(1.0, 0.0);
        let outcome = solve_with_condition(&a, n, &b);
        let outcome = match outcome {
            Some(o) if o.condition <= tol.condition_limit => o,
            other => {
                return Err(PhyError::IllConditioned {
                    step: 0,
                    packet: offset,
                    condition: other.map_or(f64::INFINITY, |o| o.condition),
                })
            }
        };
        condition_numbers.push(outcome.condition);
        packets.push(PacketPrecoder {
            taps: txs.iter().copied().zip(outcome.solution).collect(),
        });
    }
    Ok(PrecoderSet {
        packets,
        condition_numbers,
    })
}

/// What one receiver saw in one simulated step.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverOutcome {
    pub rx: u16,
    /// Effective coefficient of every packet of the step at this receiver.
    pub effective: Vec<Complex64>,
    /// Magnitude of (post-cancellation remainder - desired symbol).
    pub residual: f64,
    pub decoded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepSimReport {
    pub receivers: Vec<ReceiverOutcome>,
    pub worst_residual: f64,
    /// Largest magnitude among zero-forced effective coefficients.
    pub max_zf_coeff: f64,
    pub all_decoded: bool,
    pub noise_variance: f64,
}

/// Simulate one step: every packet is one unit-modulus symbol, transmitters
/// send their precoded combinations, receivers subtract what their caches
/// cover and compare the remainder to the desired symbol. Decode flags are
/// meaningful against the noiseless tolerance only when `noise_variance` is
/// zero.
pub fn simulate_step(
    step: &DeliveryStep,
    h: &ChannelMatrix,
    precoders: &PrecoderSet,
    noise_variance: f64,
    seed: u64,
    tol: &Tolerances,
) -> Result<StepSimReport, PhyError> {
    let packet_count = step.packets.len();
    if precoders.packets.len() != packet_count {
        return Err(PhyError::PrecoderMismatch {
            got: precoders.packets.len(),
            want: packet_count,
        });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let symbols: Vec<Complex64> = (0..packet_count)
        .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..TAU)))
        .collect();

    // Transmit signals.
    let mut signals: std::collections::BTreeMap<u16, Complex64> = std::collections::BTreeMap::new();
    for (precoder, symbol) in precoders.packets.iter().zip(&symbols) {
        for &(tx, alpha) in &precoder.taps {
            *signals.entry(tx).or_insert(Complex64::new(0.0, 0.0)) += alpha * symbol;
        }
    }

    let noise_scale = (noise_variance / 2.0).sqrt();
    let mut receivers = Vec::with_capacity(step.receivers().len());
    let mut worst_residual: f64 = 0.0;
    let mut max_zf_coeff: f64 = 0.0;
    for &rx in step.receivers() {
        let mut received: Complex64 = signals
            .iter()
            .map(|(&tx, &s)| h.gain(rx, tx) * s)
            .sum();
        if noise_variance > 0.0 {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            received += Complex64::new(re * noise_scale, im * noise_scale);
        }
        let effective: Vec<Complex64> = precoders
            .packets
            .iter()
            .map(|precoder| {
                precoder
                    .taps
                    .iter()
                    .map(|&(tx, alpha)| h.gain(rx, tx) * alpha)
                    .sum()
            })
            .collect();
        let mut remainder = received;
        let mut desired_offset = None;
        for offset in 0..packet_count {
            match packet_role(step, offset, rx).expect("receiver is in the step") {
                ReceiverRole::CacheCancel => remainder -= effective[offset] * symbols[offset],
                ReceiverRole::Desired => desired_offset = Some(offset),
                ReceiverRole::ZeroForced => {
                    max_zf_coeff = max_zf_coeff.max(effective[offset].norm())
                }
            }
        }
        let desired = desired_offset.expect("one desired packet per step receiver");
        let residual = (remainder - symbols[desired]).norm();
        worst_residual = worst_residual.max(residual);
        receivers.push(ReceiverOutcome {
            rx,
            effective,
            residual,
            decoded: residual <= tol.residual,
        });
    }
    Ok(StepSimReport {
        all_decoded: receivers.iter().all(|r| r.decoded),
        receivers,
        worst_residual,
        max_zf_coeff,
        noise_variance,
    })
}

/// Aggregate verdict for one step inside a schedule run.
#[derive(Debug, Clone, PartialEq)]
pub struct StepVerdict {
    pub step: usize,
    pub worst_residual: f64,
    pub condition: f64,
    pub max_zf_coeff: f64,
    pub all_decoded: bool,
    pub decoded: Vec<(u16, bool)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleVerifyReport {
    pub all_decoded: bool,
    pub worst_residual: f64,
    pub worst_condition: f64,
    pub max_zf_coeff: f64,
    pub steps: Vec<StepVerdict>,
}

/// Solve and noiselessly simulate every step of the schedule. Solver errors
/// carry the failing step's index.
pub fn verify_schedule_decodable(
    schedule: &Schedule,
    h: &ChannelMatrix,
    tol: &Tolerances,
    symbol_seed: u64,
) -> Result<ScheduleVerifyReport, PhyError> {
    let p = &schedule.params;
    if h.rx_count() != p.rx_count as usize || h.tx_count() != p.tx_count as usize {
        return Err(PhyError::ChannelShapeMismatch {
            got_rx: h.rx_count(),
            got_tx: h.tx_count(),
            want_rx: p.rx_count as usize,
            want_tx: p.tx_count as usize,
        });
    }
    let mut steps = Vec::with_capacity(schedule.steps.len());
    let mut worst_residual: f64 = 0.0;
    let mut worst_condition: f64 = 1.0;
    let mut max_zf_coeff: f64 = 0.0;
    let mut all_decoded = true;
    for (i, step) in schedule.steps.iter().enumerate() {
        let precoders = solve_step_precoders(step, h, tol).map_err(|e| match e {
            PhyError::IllConditioned {
                packet, condition, ..
            } => PhyError::IllConditioned {
                step: i,
                packet,
                condition,
            },
            other => other,
        })?;
        let sim = simulate_step(
            step,
            h,
            &precoders,
            0.0,
            symbol_seed.wrapping_add(i as u64),
            tol,
        )?;
        worst_residual = worst_residual.max(sim.worst_residual);
        worst_condition = worst_condition.max(precoders.worst_condition());
        max_zf_coeff = max_zf_coeff.max(sim.max_zf_coeff);
        all_decoded &= sim.all_decoded;
        steps.push(StepVerdict {
            step: i,
            worst_residual: sim.worst_residual,
            condition: precoders.worst_condition(),
            max_zf_coeff: sim.max_zf_coeff,
            all_decoded: sim.all_decoded,
            decoded: sim.receivers.iter().map(|r| (r.rx, r.decoded)).collect(),
        });
    }
    Ok(ScheduleVerifyReport {
        all_decoded,
        worst_residual,
        worst_condition,
        max_zf_coeff,
        steps,
    })
}

/// CSV export of per-step verification records.
pub fn render_verify_csv(report: &ScheduleVerifyReport) -> String {
    let mut out = String::from("step,worst_residual,condition,max_zf_coeff,all_decoded,decoded\n");
    for s in &report.steps {
        let flags = s
            .decoded
            .iter()
            .map(|(rx, ok)| format!("{rx}:{}", u8::from(*ok)))
            .collect::<Vec<_>>()
            .join(";");
        let _ = writeln!(
            out,
            "{},{:.3e},{:.3e},{:.3e},{},{}",
            s.step,
            s.worst_residual,
            s.condition,
            s.max_zf_coeff,
            u8::from(s.all_decoded),
            flags
        );
    }
    out
}
