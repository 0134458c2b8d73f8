//! Subcommand implementations. Each returns a process exit code; hard I/O or
//! parse failures bubble up as errors and exit with 1.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use num::BigRational;

use hcnet_core::analytics::{
    cap_excess_memory, gap_analysis, plan_memory_sharing, render_sweep_csv, subpacketization,
    sweep_symmetric, CapOutcome, MemorySharePlan, PartitionScheme, SweepRow,
};
use hcnet_core::error::{ConfigError, ConfigViolation, PhyError};
use hcnet_core::phy::{
    render_verify_csv, sample_channel, verify_schedule_decodable, ScheduleVerifyReport, Tolerances,
};
use hcnet_core::placement::{
    cache_manifest, render_manifest, validate_config, DerivedParams, NetworkConfig, Node,
};
use hcnet_core::scheduler::{build_schedule, render_schedule, verify_exact_cover};

use crate::config::RunConfig;
use crate::grid::GridSpec;

pub mod exit_code {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const NON_POSITIVE: i32 = 2;
    pub const LIBRARY_NOT_COVERED: i32 = 3;
    pub const NON_INTEGER_TX_DIMS: i32 = 4;
    pub const NON_INTEGER_RX_DIMS: i32 = 5;
    pub const NON_INTEGER_TX_PER_DIM: i32 = 6;
    pub const NON_INTEGER_RX_PER_DIM: i32 = 7;
    pub const NON_INTEGER_DIM_RATIO: i32 = 8;
    pub const RX_PER_DIM_TOO_SMALL: i32 = 9;
    pub const STEP_SIZE_EXCEEDS_RECEIVERS: i32 = 10;
    pub const COVERAGE_FAILED: i32 = 11;
    pub const DECODE_FAILED: i32 = 12;
    pub const SOLVER_FAILED: i32 = 13;
}

fn violation_code(v: &ConfigViolation) -> i32 {
    match v {
        ConfigViolation::NonPositive { .. } => exit_code::NON_POSITIVE,
        ConfigViolation::LibraryNotCovered { .. } => exit_code::LIBRARY_NOT_COVERED,
        ConfigViolation::NonIntegerTxDims { .. } => exit_code::NON_INTEGER_TX_DIMS,
        ConfigViolation::NonIntegerRxDims { .. } => exit_code::NON_INTEGER_RX_DIMS,
        ConfigViolation::NonIntegerTxPerDim { .. } => exit_code::NON_INTEGER_TX_PER_DIM,
        ConfigViolation::NonIntegerRxPerDim { .. } => exit_code::NON_INTEGER_RX_PER_DIM,
        ConfigViolation::NonIntegerDimRatio { .. } => exit_code::NON_INTEGER_DIM_RATIO,
        ConfigViolation::RxPerDimTooSmall { .. } => exit_code::RX_PER_DIM_TOO_SMALL,
        ConfigViolation::StepSizeExceedsReceivers { .. } => exit_code::STEP_SIZE_EXCEEDS_RECEIVERS,
    }
}

fn error_code(err: &ConfigError) -> i32 {
    err.violations
        .iter()
        .map(violation_code)
        .min()
        .unwrap_or(exit_code::USAGE)
}

fn print_violations(err: &ConfigError) {
    eprintln!("invalid configuration ({} violations):", err.violations.len());
    for v in &err.violations {
        eprintln!("  - {v}");
    }
}

/// Write via a sibling temp file and a rename, so a crash never leaves a
/// half-written output behind.
fn write_atomic(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, content).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

fn rational_str(r: &BigRational) -> String {
    r.to_string()
}

fn print_analysis(cfg: &NetworkConfig, p: &DerivedParams) {
    let counts = subpacketization(p);
    let gap = gap_analysis(p);
    println!(
        "network: tx_count={} rx_count={} tx_cache={} rx_cache={} library={}",
        cfg.tx_count, cfg.rx_count, cfg.tx_cache, cfg.rx_cache, cfg.library
    );
    println!(
        "derived: t_tx={} t_rx={} d_tx={} d_rx={} dim_ratio={}",
        p.tx_dims, p.rx_dims, p.tx_per_dim, p.rx_per_dim, p.dim_ratio
    );
    println!(
        "subpacketization: delta_hcb={} f_hcb={} delta_nma={} f_nma={}",
        counts.delta_hcb, counts.f_hcb, counts.delta_nma, counts.f_nma
    );
    println!(
        "delivery: steps={} packets={} dof={}",
        counts.steps, counts.packets_total, counts.dof
    );
    println!(
        "gap: g={} (<=1: {}, <1: {})",
        rational_str(&counts.gap),
        gap.gap_at_most_one,
        gap.gap_strictly_below_one
    );
    let lambdas = gap
        .lambdas
        .iter()
        .map(rational_str)
        .collect::<Vec<_>>()
        .join(", ");
    println!(
        "lambda: [{}] (decreasing: {}, min>=1: {})",
        lambdas, gap.lambdas_strictly_decreasing, gap.lambda_min_at_least_one
    );
    if let Some(b) = gap.symmetric {
        println!(
            "bounds (symmetric d={}): thm={:.6e} appendix={:.6e} c4={:.3} t>=c4: {}",
            b.d, b.theorem_bound, b.appendix_bound, b.c4, b.t_at_least_c4
        );
    }
}

fn print_plan(plan: &MemorySharePlan) {
    println!(
        "memory-sharing plan for t_tx={} t_rx={} ({} partitions):",
        rational_str(&plan.t_tx),
        rational_str(&plan.t_rx),
        plan.partitions.len()
    );
    for (i, part) in plan.partitions.iter().enumerate() {
        let scheme = match part.scheme {
            PartitionScheme::Hypercube => "hypercube",
            PartitionScheme::SharedLink => "shared-link (external scheme)",
        };
        let f = part
            .subpacketization
            .as_ref()
            .map_or_else(|| "-".to_string(), |f| f.to_string());
        println!(
            "  partition {i}: scheme={scheme} weight={} tx_mem={} rx_mem={} t_tx={} t_rx={} dof={} f={f}",
            rational_str(&part.weight),
            rational_str(&part.tx_memory_fraction),
            rational_str(&part.rx_memory_fraction),
            rational_str(&part.t_tx),
            rational_str(&part.t_rx),
            rational_str(&part.dof),
        );
    }
    println!("combined: dof={}", rational_str(&plan.combined_dof));
    match &plan.combined_subpacketization {
        Some(f) => println!("combined: f={f}"),
        None => println!("combined: f unavailable (partition outside this scheme)"),
    }
}

fn analyze_csv(cfg: &NetworkConfig, p: &DerivedParams) -> String {
    let row = SweepRow {
        params: *p,
        tx_cache: cfg.tx_cache,
        rx_cache: cfg.rx_cache,
        counts: subpacketization(p),
        gap: gap_analysis(p),
    };
    render_sweep_csv(std::slice::from_ref(&row))
}

/// Violations the memory-sharing planner absorbs: non-integral caching
/// parameters or ratio (with their implied per-dimension counts).
fn planner_can_absorb(err: &ConfigError) -> bool {
    err.violations.iter().all(|v| {
        matches!(
            v,
            ConfigViolation::NonIntegerTxDims { .. }
                | ConfigViolation::NonIntegerRxDims { .. }
                | ConfigViolation::NonIntegerTxPerDim { .. }
                | ConfigViolation::NonIntegerRxPerDim { .. }
                | ConfigViolation::NonIntegerDimRatio { .. }
        )
    })
}

fn has_hard_violation(err: &ConfigError) -> bool {
    err.violations.iter().any(|v| {
        matches!(
            v,
            ConfigViolation::NonPositive { .. } | ConfigViolation::LibraryNotCovered { .. }
        )
    })
}

/// Step-size excess routes to the memory cap, which also clears any
/// secondary violations that stem from the oversized caching parameters.
fn cap_applies(err: &ConfigError) -> bool {
    !has_hard_violation(err)
        && err
            .violations
            .iter()
            .any(|v| matches!(v, ConfigViolation::StepSizeExceedsReceivers { .. }))
}

pub fn analyze(run: &RunConfig, out: Option<&Path>) -> Result<i32> {
    match validate_config(&run.network) {
        Ok(p) => {
            print_analysis(&run.network, &p);
            if let Some(dir) = out {
                let path = dir.join("analyze.csv");
                write_atomic(&path, &analyze_csv(&run.network, &p))?;
                println!("wrote {}", path.display());
            }
            Ok(exit_code::OK)
        }
        Err(err) if cap_applies(&err) => {
            print_violations(&err);
            match cap_excess_memory(&run.network)? {
                CapOutcome::Unchanged => unreachable!("violation implies excess"),
                CapOutcome::Capped { config, params } => {
                    println!(
                        "capped memories to tx_cache={} rx_cache={} (dof={})",
                        config.tx_cache,
                        config.rx_cache,
                        params.step_size()
                    );
                    print_analysis(&config, &params);
                    if let Some(dir) = out {
                        let path = dir.join("analyze.csv");
                        write_atomic(&path, &analyze_csv(&config, &params))?;
                        println!("wrote {}", path.display());
                    }
                    Ok(exit_code::OK)
                }
                CapOutcome::RoutedToSharing { config, plan } => {
                    println!(
                        "capped memories to tx_cache={} rx_cache={}, no integral reduction; planning",
                        config.tx_cache, config.rx_cache
                    );
                    print_plan(&plan);
                    Ok(exit_code::OK)
                }
            }
        }
        Err(err) if !has_hard_violation(&err) && planner_can_absorb(&err) => {
            print_violations(&err);
            let plan = plan_memory_sharing(&run.network)?;
            print_plan(&plan);
            Ok(exit_code::OK)
        }
        Err(err) => {
            print_violations(&err);
            Ok(error_code(&err))
        }
    }
}

pub fn schedule(run: &RunConfig, out: &Path, manifests: bool) -> Result<i32> {
    let p = match validate_config(&run.network) {
        Ok(p) => p,
        Err(err) => {
            print_violations(&err);
            return Ok(error_code(&err));
        }
    };
    let demand = run.demand_vector(&p)?;
    let schedule = build_schedule(&demand, &p)?;
    let report = verify_exact_cover(&schedule, &demand, &p)?;

    let schedule_path = out.join("schedule.txt");
    write_atomic(&schedule_path, &render_schedule(&schedule))?;
    let mut coverage = String::new();
    coverage.push_str(&format!(
        "pass: {}\nscheduled_total: {}\nexpected_total: {}\nexpected_per_receiver: {}\n",
        report.pass, report.scheduled_total, report.expected_total, report.expected_per_receiver
    ));
    coverage.push_str(&format!(
        "missing: {}\nduplicated: {}\nunexpected: {}\n",
        report.missing.len(),
        report.duplicated.len(),
        report.unexpected.len()
    ));
    let coverage_path = out.join("coverage.txt");
    write_atomic(&coverage_path, &coverage)?;
    if manifests {
        let mut text = String::new();
        for i in 0..p.tx_count as u16 {
            text.push_str(&render_manifest(&cache_manifest(&p, Node::Tx(i))?));
        }
        for j in 0..p.rx_count as u16 {
            text.push_str(&render_manifest(&cache_manifest(&p, Node::Rx(j))?));
        }
        write_atomic(&out.join("manifests.txt"), &text)?;
    }
    println!(
        "schedule: steps={} packets={} dof={}",
        schedule.steps.len(),
        schedule.packet_count(),
        schedule.packet_count() / schedule.steps.len().max(1) as u64
    );
    println!("coverage: pass={}", report.pass);
    println!("wrote {}", schedule_path.display());
    println!("wrote {}", coverage_path.display());
    Ok(if report.pass {
        exit_code::OK
    } else {
        exit_code::COVERAGE_FAILED
    })
}

pub fn simulate(run: &RunConfig, out: Option<&Path>) -> Result<i32> {
    let p = match validate_config(&run.network) {
        Ok(p) => p,
        Err(err) => {
            print_violations(&err);
            return Ok(error_code(&err));
        }
    };
    let demand = run.demand_vector(&p)?;
    let schedule = build_schedule(&demand, &p)?;
    let tol = Tolerances {
        residual: run.residual_tolerance,
        condition_limit: run.condition_limit,
    };

    let mut report: Option<ScheduleVerifyReport> = None;
    let mut last_error: Option<PhyError> = None;
    for attempt in 0..=run.resample_retries {
        let h = sample_channel(&p, run.channel_seed.wrapping_add(attempt as u64));
        match verify_schedule_decodable(&schedule, &h, &tol, run.symbol_seed) {
            Ok(r) => {
                if attempt > 0 {
                    println!("channel resampled {attempt} time(s)");
                }
                report = Some(r);
                break;
            }
            Err(e @ PhyError::IllConditioned { .. }) => {
                eprintln!("attempt {attempt}: {e}");
                last_error = Some(e);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let Some(report) = report else {
        eprintln!(
            "precoder solve failed after {} attempt(s): {}",
            run.resample_retries + 1,
            last_error.expect("at least one attempt ran")
        );
        return Ok(exit_code::SOLVER_FAILED);
    };

    println!(
        "simulate: steps={} all_decoded={} worst_residual={:.3e} worst_condition={:.3e} max_zf={:.3e}",
        report.steps.len(),
        report.all_decoded,
        report.worst_residual,
        report.worst_condition,
        report.max_zf_coeff
    );
    if run.noise_variance > 0.0 {
        // Noisy demo on top of the noiseless verification: re-run the
        // simulation per step with the configured noise and report the
        // residual floor. Decode verdicts stay tied to the noiseless run.
        let h = sample_channel(&p, run.channel_seed);
        let mut worst = 0.0f64;
        for (i, step) in schedule.steps.iter().enumerate() {
            let precoders = hcnet_core::phy::solve_step_precoders(step, &h, &tol)?;
            let sim = hcnet_core::phy::simulate_step(
                step,
                &h,
                &precoders,
                run.noise_variance,
                run.symbol_seed.wrapping_add(i as u64),
                &tol,
            )?;
            worst = worst.max(sim.worst_residual);
        }
        println!(
            "noisy demo: noise_variance={:e} worst_residual={:.3e}",
            run.noise_variance, worst
        );
    }
    if let Some(dir) = out {
        let path = dir.join("simulate.csv");
        write_atomic(&path, &render_verify_csv(&report))?;
        println!("wrote {}", path.display());
    }
    Ok(if report.all_decoded {
        exit_code::OK
    } else {
        exit_code::DECODE_FAILED
    })
}

pub fn sweep(grid: &GridSpec, explicit: &[NetworkConfig], out: &Path) -> Result<i32> {
    let mut rows = Vec::new();
    for (d, t, delta) in grid.points() {
        match sweep_symmetric(d, t, delta) {
            Some(row) => rows.push(row),
            None => eprintln!("skipping invalid grid point d={d} t={t} delta={delta}"),
        }
    }
    for cfg in explicit {
        match validate_config(cfg) {
            Ok(p) => rows.push(SweepRow {
                params: p,
                tx_cache: cfg.tx_cache,
                rx_cache: cfg.rx_cache,
                counts: subpacketization(&p),
                gap: gap_analysis(&p),
            }),
            Err(err) => eprintln!("skipping invalid explicit config: {err}"),
        }
    }
    let path = out.join("sweep.csv");
    write_atomic(&path, &render_sweep_csv(&rows))?;
    println!("sweep: {} rows", rows.len());
    println!("wrote {}", path.display());
    Ok(exit_code::OK)
}
