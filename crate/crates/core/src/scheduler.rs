//! Delivery-phase construction.
//!
//! For a demand vector, every receiver needs the subfiles of its file that it
//! does not cache. Each such subfile splits into packets labelled by an
//! ordered pair of receiver sequences drawn from a hypercube permutation, and
//! the packets group into steps of `tx_dims + rx_dims` that can be delivered
//! simultaneously: in a step the packet at offset `l` targets the receiver at
//! permutation position `l`, is cancelled from caches by the next `rx_dims`
//! receivers around the circle, and is zero-forced at the remaining
//! `tx_dims - 1`.

use std::collections::HashMap;
use std::fmt::Write as _;

use num::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::analytics::counting;
use crate::combinatorics::{
    enumerate_circular_hypercube_permutations_capped, enumerate_hypercube_permutations_from,
    k_subsets, unordered_product, DimensionPartition, Permutation, Point,
};
use crate::error::{DemandError, ScheduleError};
use crate::placement::{rx_dimensions, tx_dimensions, DerivedParams, SubfileId};

/// Permutation enumeration inside scheduling is bounded by the step size,
/// which stays tiny for every schedule that fits in memory anyway.
const SCHEDULE_ENUM_CAP: usize = 16;

/// One requested file index per receiver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandVector(Vec<u32>);

impl DemandVector {
    pub fn explicit(files: Vec<u32>, p: &DerivedParams) -> Result<Self, DemandError> {
        if files.len() != p.rx_count as usize {
            return Err(DemandError::WrongLength {
                got: files.len(),
                expected: p.rx_count,
            });
        }
        if let Some(&file) = files.iter().find(|&&f| f >= p.library) {
            return Err(DemandError::FileOutOfRange {
                file,
                library: p.library,
            });
        }
        Ok(Self(files))
    }

    /// Worst-case-style demands `d_j = j mod library`.
    pub fn distinct(p: &DerivedParams) -> Self {
        Self((0..p.rx_count).map(|j| j % p.library).collect())
    }

    pub fn uniform_random(p: &DerivedParams, seed: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        Self(
            (0..p.rx_count)
                .map(|_| rng.random_range(0..p.library))
                .collect(),
        )
    }

    pub fn files(&self) -> &[u32] {
        &self.0
    }

    pub fn file_for(&self, rx: Point) -> u32 {
        self.0[rx as usize]
    }
}

/// One delivery-phase packet. `cancel_order` lists the receivers that cancel
/// it from their caches (its set equals the subfile's receiver tuple);
/// `zf_order` lists the receivers it is zero-forced at. Packets are compared
/// as full ordered tuples.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PacketId {
    pub subfile: SubfileId,
    pub cancel_order: Vec<Point>,
    pub zf_order: Vec<Point>,
    pub target: Point,
}

/// How one receiver relates to one packet of a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverRole {
    Desired,
    CacheCancel,
    ZeroForced,
}

/// One communication block: a base transmitter tuple, the per-dimension
/// receiver subsets, their circular hypercube permutation and the
/// `tx_dims + rx_dims` packets delivered in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeliveryStep {
    pub base_tx: Vec<Point>,
    pub rx_family: Vec<Vec<Point>>,
    pub perm: Permutation,
    pub packets: Vec<PacketId>,
}

impl DeliveryStep {
    /// Receivers taking part, in permutation order.
    pub fn receivers(&self) -> &[Point] {
        self.perm.order()
    }

    /// Union of the per-packet transmitter tuples, sorted.
    pub fn active_tx(&self) -> Vec<Point> {
        let mut out: Vec<Point> = self
            .packets
            .iter()
            .flat_map(|p| p.subfile.tx_set.iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub params: DerivedParams,
    pub demand: DemandVector,
    pub steps: Vec<DeliveryStep>,
}

impl Schedule {
    pub fn packet_count(&self) -> u64 {
        self.steps.iter().map(|s| s.packets.len() as u64).sum()
    }
}

/// Receiver dimension index of `rx`.
pub fn rx_dim_of(p: &DerivedParams, rx: Point) -> usize {
    rx as usize / p.rx_per_dim as usize
}

/// Transmitter tuple used for the packet at `offset` within a step, derived
/// from the base tuple by incrementing a prefix (offsets `1..=tx_dims`) or a
/// suffix (offsets beyond) of the per-dimension indices, modulo the dimension
/// size.
pub fn shift_tx(
    base: &[Point],
    offset: usize,
    p: &DerivedParams,
) -> Result<Vec<Point>, ScheduleError> {
    let t_tx = p.tx_dims as usize;
    let step = p.step_size() as usize;
    if offset >= step {
        return Err(ScheduleError::OffsetOutOfRange {
            offset,
            step_size: p.step_size(),
        });
    }
    if base.len() != t_tx {
        return Err(ScheduleError::MalformedBaseTuple);
    }
    let d_tx = p.tx_per_dim as usize;
    let mut out = Vec::with_capacity(t_tx);
    for (dim, &tx) in base.iter().enumerate() {
        let lo = dim * d_tx;
        let within = tx as usize;
        if within < lo || within >= lo + d_tx {
            return Err(ScheduleError::MalformedBaseTuple);
        }
        let bump = if offset == 0 {
            false
        } else if offset <= t_tx {
            dim < offset
        } else {
            dim >= offset - t_tx
        };
        let within = if bump {
            lo + ((within - lo + 1) % d_tx)
        } else {
            within
        };
        out.push(within as Point);
    }
    Ok(out)
}

/// Subfiles of the receiver's demanded file that it has not cached: those
/// whose receiver tuple avoids `rx`.
pub fn demanded_subfiles(rx: Point, d: &DemandVector, p: &DerivedParams) -> Vec<SubfileId> {
    let file = d.file_for(rx);
    let tx_tuples = unordered_product(tx_dimensions(p).groups()).expect("disjoint dims");
    let mut rx_groups = rx_dimensions(p).groups().to_vec();
    let dim = rx_dim_of(p, rx);
    rx_groups[dim].retain(|&r| r != rx);
    let rx_tuples = unordered_product(&rx_groups).expect("disjoint dims");
    let mut out = Vec::with_capacity(tx_tuples.len() * rx_tuples.len());
    for tx_set in &tx_tuples {
        for rx_set in &rx_tuples {
            out.push(SubfileId {
                file,
                tx_set: tx_set.clone(),
                rx_set: rx_set.clone(),
            });
        }
    }
    out
}

/// The receiver sequences labelling one packet of a subfile split.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SplitOption {
    pub cancel_order: Vec<Point>,
    pub zf_order: Vec<Point>,
}

/// The per-subfile split labels for a target receiver. These depend only on
/// the target and the subfile's receiver tuple, which lets callers cache them
/// across files and transmitter tuples.
///
/// Packets are indexed by hypercube permutations of a receiver pool that
/// draws `dim_ratio + 1` receivers from each receiver dimension: position 0
/// is the target, position `rx_dims` is the subfile's receiver in the
/// target's dimension, and positions `1..rx_dims` carry the rest of the
/// subfile's receiver tuple.
pub fn subfile_split_options(
    rx: Point,
    rx_set: &[Point],
    p: &DerivedParams,
) -> Result<Vec<SplitOption>, ScheduleError> {
    if rx_set.contains(&rx) {
        return Err(ScheduleError::TargetInCacheSet { rx });
    }
    let t_rx = p.rx_dims as usize;
    let t_tx = p.tx_dims as usize;
    let delta = p.dim_ratio as usize;
    let target_dim = rx_dim_of(p, rx);
    let anchor = rx_set[target_dim];
    let mut others: Vec<Point> = rx_set.to_vec();
    others.retain(|&r| r != anchor);
    others.sort_unstable();

    // Per-dimension candidate pools: each pool must contain the subfile's
    // receiver of that dimension, plus the target in its own dimension.
    let rx_groups = rx_dimensions(p);
    let mut pool_choices: Vec<Vec<Vec<Point>>> = Vec::with_capacity(t_rx);
    for (dim, group) in rx_groups.groups().iter().enumerate() {
        let mut mandatory = vec![rx_set[dim]];
        if dim == target_dim {
            mandatory.push(rx);
        }
        let free: Vec<Point> = group
            .iter()
            .copied()
            .filter(|r| !mandatory.contains(r))
            .collect();
        let extra = delta + 1 - mandatory.len();
        let choices = if extra == 0 {
            vec![mandatory.clone()]
        } else {
            k_subsets(&free, extra)?
                .into_iter()
                .map(|mut s| {
                    s.extend_from_slice(&mandatory);
                    s.sort_unstable();
                    s
                })
                .collect()
        };
        pool_choices.push(choices);
    }

    let mut out = Vec::new();
    let mut indices = vec![0usize; t_rx];
    loop {
        let family: Vec<Vec<Point>> = indices
            .iter()
            .enumerate()
            .map(|(dim, &i)| pool_choices[dim][i].clone())
            .collect();
        let part = DimensionPartition::from_groups(family)?;
        for perm in enumerate_hypercube_permutations_from(&part, rx, SCHEDULE_ENUM_CAP)? {
            if perm.at(t_rx) != anchor {
                continue;
            }
            let mut middle: Vec<Point> = (1..t_rx).map(|k| perm.at(k)).collect();
            middle.sort_unstable();
            if middle != others {
                continue;
            }
            out.push(SplitOption {
                cancel_order: (1..=t_rx).map(|k| perm.at(k)).collect(),
                zf_order: (t_rx + 1..t_rx + t_tx).map(|k| perm.at(k)).collect(),
            });
        }
        // Odometer over the per-dimension pool choices.
        let mut dim = t_rx;
        loop {
            if dim == 0 {
                return Ok(out);
            }
            dim -= 1;
            indices[dim] += 1;
            if indices[dim] < pool_choices[dim].len() {
                break;
            }
            indices[dim] = 0;
        }
    }
}

/// Split one demanded subfile into its delivery packets.
pub fn enumerate_subfile_packets(
    rx: Point,
    subfile: &SubfileId,
    p: &DerivedParams,
) -> Result<Vec<PacketId>, ScheduleError> {
    Ok(subfile_split_options(rx, &subfile.rx_set, p)?
        .into_iter()
        .map(|option| PacketId {
            subfile: subfile.clone(),
            cancel_order: option.cancel_order,
            zf_order: option.zf_order,
            target: rx,
        })
        .collect())
}

/// Build the full delivery schedule: one step per (transmitter tuple,
/// receiver family, circular hypercube permutation), in lexicographic order.
pub fn build_schedule(d: &DemandVector, p: &DerivedParams) -> Result<Schedule, ScheduleError> {
    let t_rx = p.rx_dims as usize;
    let t_tx = p.tx_dims as usize;
    let delta = p.dim_ratio as usize;
    let step = p.step_size() as usize;

    let tx_tuples = unordered_product(tx_dimensions(p).groups()).expect("disjoint dims");

    // Receiver families: one (dim_ratio + 1)-subset per receiver dimension.
    let rx_groups = rx_dimensions(p);
    let subset_lists: Vec<Vec<Vec<Point>>> = rx_groups
        .groups()
        .iter()
        .map(|g| k_subsets(g, delta + 1))
        .collect::<Result<_, _>>()?;
    let mut families: Vec<(Vec<Vec<Point>>, Vec<Permutation>)> = Vec::new();
    let mut indices = vec![0usize; t_rx];
    'families: loop {
        let family: Vec<Vec<Point>> = indices
            .iter()
            .enumerate()
            .map(|(dim, &i)| subset_lists[dim][i].clone())
            .collect();
        let part = DimensionPartition::from_groups(family.clone())?;
        let perms = enumerate_circular_hypercube_permutations_capped(&part, SCHEDULE_ENUM_CAP)?;
        families.push((family, perms));
        let mut dim = t_rx;
        loop {
            if dim == 0 {
                break 'families;
            }
            dim -= 1;
            indices[dim] += 1;
            if indices[dim] < subset_lists[dim].len() {
                break;
            }
            indices[dim] = 0;
        }
    }

    let mut steps = Vec::new();
    for base in &tx_tuples {
        for (family, perms) in &families {
            for perm in perms {
                let mut packets = Vec::with_capacity(step);
                for offset in 0..step {
                    let target = perm.at(offset);
                    let cancel_order = perm.cyclic_slice(offset + 1, t_rx);
                    let zf_order = perm.cyclic_slice(offset + t_rx + 1, t_tx - 1);
                    let mut rx_set = cancel_order.clone();
                    rx_set.sort_unstable();
                    packets.push(PacketId {
                        subfile: SubfileId {
                            file: d.file_for(target),
                            tx_set: shift_tx(base, offset, p)?,
                            rx_set,
                        },
                        cancel_order,
                        zf_order,
                        target,
                    });
                }
                steps.push(DeliveryStep {
                    base_tx: base.clone(),
                    rx_family: family.clone(),
                    perm: perm.clone(),
                    packets,
                });
            }
        }
    }
    Ok(Schedule {
        params: *p,
        demand: d.clone(),
        steps,
    })
}

/// Role of `rx` for the packet at `offset`, read off the cyclic distance
/// between its permutation position and the offset.
pub fn packet_role(
    step: &DeliveryStep,
    offset: usize,
    rx: Point,
) -> Result<ReceiverRole, ScheduleError> {
    let pos = step
        .perm
        .position_of(rx)
        .ok_or(ScheduleError::ReceiverNotInStep { rx })?;
    let n = step.perm.len();
    if offset >= n {
        return Err(ScheduleError::OffsetOutOfRange {
            offset,
            step_size: n as u32,
        });
    }
    let diff = (pos + n - offset) % n;
    let t_rx = step.packets[offset].cancel_order.len();
    Ok(if diff == 0 {
        ReceiverRole::Desired
    } else if diff <= t_rx {
        ReceiverRole::CacheCancel
    } else {
        ReceiverRole::ZeroForced
    })
}

/// Outcome of checking a schedule against the demanded packet multiset and
/// the closed-form counting identities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageReport {
    pub pass: bool,
    pub scheduled_total: u64,
    pub expected_total: BigUint,
    pub per_receiver_delivered: Vec<u64>,
    pub expected_per_receiver: BigUint,
    pub need_identity_holds: bool,
    pub missing: Vec<PacketId>,
    pub duplicated: Vec<PacketId>,
    pub unexpected: Vec<PacketId>,
}

/// Fixed-layout packed packet key: target, file, then the three receiver and
/// transmitter sequences as single bytes. Field widths are constant within
/// one verification run, so the layout is unambiguous.
fn packed_key(
    target: Point,
    file: u32,
    tx_set: &[Point],
    cancel: &[Point],
    zf: &[Point],
) -> (u128, u128) {
    let mut bytes = [0u8; 32];
    bytes[0] = target as u8;
    bytes[1..5].copy_from_slice(&file.to_le_bytes());
    let mut i = 5;
    for part in [tx_set, cancel, zf] {
        for &v in part {
            bytes[i] = v as u8;
            i += 1;
        }
    }
    (
        u128::from_le_bytes(bytes[..16].try_into().expect("split")),
        u128::from_le_bytes(bytes[16..].try_into().expect("split")),
    )
}

/// Memoized split options per (target, receiver tuple); the options do not
/// depend on the file or the transmitter tuple.
struct SplitCache<'a> {
    p: &'a DerivedParams,
    by_key: HashMap<(Point, Vec<Point>), Vec<SplitOption>>,
}

impl<'a> SplitCache<'a> {
    fn new(p: &'a DerivedParams) -> Self {
        Self {
            p,
            by_key: HashMap::new(),
        }
    }

    fn get(&mut self, rx: Point, rx_set: &[Point]) -> Result<&[SplitOption], ScheduleError> {
        if !self.by_key.contains_key(&(rx, rx_set.to_vec())) {
            let options = subfile_split_options(rx, rx_set, self.p)?;
            self.by_key.insert((rx, rx_set.to_vec()), options);
        }
        Ok(&self.by_key[&(rx, rx_set.to_vec())])
    }
}

/// The detailed (and slower) diff used once a count mismatch is detected:
/// materializes full packet identities for the report lists.
fn detailed_diff(
    schedule: &Schedule,
    d: &DemandVector,
    p: &DerivedParams,
) -> Result<(Vec<PacketId>, Vec<PacketId>, Vec<PacketId>), ScheduleError> {
    let mut demanded: HashMap<PacketId, u32> = HashMap::new();
    for rx in 0..p.rx_count as Point {
        for subfile in demanded_subfiles(rx, d, p) {
            for packet in enumerate_subfile_packets(rx, &subfile, p)? {
                *demanded.entry(packet).or_insert(0) += 1;
            }
        }
    }
    let mut scheduled: HashMap<&PacketId, u32> = HashMap::new();
    for step in &schedule.steps {
        for packet in &step.packets {
            *scheduled.entry(packet).or_insert(0) += 1;
        }
    }
    let mut missing = Vec::new();
    let mut duplicated = Vec::new();
    let mut unexpected = Vec::new();
    for (packet, &want) in &demanded {
        let got = scheduled.get(packet).copied().unwrap_or(0);
        if got < want {
            missing.push(packet.clone());
        }
        if got > want {
            duplicated.push(packet.clone());
        }
    }
    for (&packet, _) in &scheduled {
        if !demanded.contains_key(packet) {
            unexpected.push(packet.clone());
        }
    }
    missing.sort_unstable();
    duplicated.sort_unstable();
    unexpected.sort_unstable();
    Ok((missing, duplicated, unexpected))
}

/// Verify that the schedule delivers every demanded packet exactly once and
/// that the totals match the closed-form counts (overall and per receiver).
pub fn verify_exact_cover(
    schedule: &Schedule,
    d: &DemandVector,
    p: &DerivedParams,
) -> Result<CoverageReport, ScheduleError> {
    let compact = p.rx_count <= 256
        && p.tx_count <= 256
        && 5 + 2 * p.tx_dims as usize + p.rx_dims as usize <= 33;
    let mut cache = SplitCache::new(p);

    let mut demanded: HashMap<(u128, u128), u32> = HashMap::new();
    let mut scheduled: HashMap<(u128, u128), u32> = HashMap::new();
    let mut exact = true;
    if compact {
        for rx in 0..p.rx_count as Point {
            for subfile in demanded_subfiles(rx, d, p) {
                for option in cache.get(rx, &subfile.rx_set)? {
                    let key = packed_key(
                        rx,
                        subfile.file,
                        &subfile.tx_set,
                        &option.cancel_order,
                        &option.zf_order,
                    );
                    *demanded.entry(key).or_insert(0) += 1;
                }
            }
        }
    }

    let mut per_receiver = vec![0u64; p.rx_count as usize];
    let mut scheduled_total = 0u64;
    for step in &schedule.steps {
        for packet in &step.packets {
            per_receiver[packet.target as usize] += 1;
            scheduled_total += 1;
            if compact {
                let key = packed_key(
                    packet.target,
                    packet.subfile.file,
                    &packet.subfile.tx_set,
                    &packet.cancel_order,
                    &packet.zf_order,
                );
                *scheduled.entry(key).or_insert(0) += 1;
            }
        }
    }
    if compact {
        exact = demanded.len() == scheduled.len()
            && demanded
                .iter()
                .all(|(k, want)| scheduled.get(k) == Some(want));
    }

    let (missing, duplicated, unexpected) = if !compact || !exact {
        detailed_diff(schedule, d, p)?
    } else {
        (Vec::new(), Vec::new(), Vec::new())
    };

    let expected_total = counting::total_delivered_packets(p);
    let expected_per_receiver = counting::per_receiver_delivered(p);
    let need_identity_holds = counting::per_receiver_need(p) == expected_per_receiver
        && expected_total.clone() == expected_per_receiver.clone() * p.rx_count;
    let totals_match = BigUint::from(scheduled_total) == expected_total
        && per_receiver
            .iter()
            .all(|&c| BigUint::from(c) == expected_per_receiver);
    let pass = missing.is_empty()
        && duplicated.is_empty()
        && unexpected.is_empty()
        && totals_match
        && need_identity_holds;

    Ok(CoverageReport {
        pass,
        scheduled_total,
        expected_total,
        per_receiver_delivered: per_receiver,
        expected_per_receiver,
        need_identity_holds,
        missing,
        duplicated,
        unexpected,
    })
}

fn write_set(out: &mut String, set: &[Point]) {
    out.push('{');
    for (k, p) in set.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        let _ = write!(out, "{p}");
    }
    out.push('}');
}

fn write_seq(out: &mut String, seq: &[Point]) {
    out.push('[');
    for (k, p) in seq.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        let _ = write!(out, "{p}");
    }
    out.push(']');
}

/// Structured-text schedule export, stable across runs for equal inputs.
pub fn render_schedule(schedule: &Schedule) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "demand: {:?}", schedule.demand.files());
    let _ = writeln!(out, "steps: {}", schedule.steps.len());
    for (i, step) in schedule.steps.iter().enumerate() {
        let _ = write!(out, "step={i} tx_base=");
        write_set(&mut out, &step.base_tx);
        out.push_str(" rx_family=[");
        for (k, g) in step.rx_family.iter().enumerate() {
            if k > 0 {
                out.push(';');
            }
            write_set(&mut out, g);
        }
        out.push_str("] perm=");
        write_seq(&mut out, step.perm.order());
        out.push('\n');
        for (l, packet) in step.packets.iter().enumerate() {
            let _ = write!(out, "  l={l} target={} file={} tx=", packet.target, packet.subfile.file);
            write_set(&mut out, &packet.subfile.tx_set);
            out.push_str(" cancel=");
            write_seq(&mut out, &packet.cancel_order);
            out.push_str(" zf=");
            write_seq(&mut out, &packet.zf_order);
            out.push('\n');
        }
    }
    out
}
