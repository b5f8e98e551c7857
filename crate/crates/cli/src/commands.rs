//! The six commands: estimate, explore, enumerate, compare, simulate, and
//! generate. Every artifact lands under the configured output directory; no
//! command mutates its inputs.

use std::collections::BTreeMap;
use std::path::Path;

use dcim_core::costmodel::{macro_cost, CostVector, DesignPoint};
use dcim_core::dse::{
    dominates, enumerate_bruteforce, hypervolume, nadir_reference, nsga2_evolve, ArchiveEntry,
    ParetoArchive, SplitMix64,
};
use dcim_core::funcsim::fp::{simulate_fp_dcim, FpFormat, FpOperands, FpValue};
use dcim_core::funcsim::{exact_int_mvm, simulate_int_dcim, IntOperands};
use dcim_core::rtlgen::{generate_structural_netlist, serialize_verilog, tally_cells, CELL_DEFINITIONS_V};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::evaluator::PooledEvaluator;
use crate::export::{
    entry_doc, export_frontier_csv, frontier_doc, json_text, write_plot_data, write_text,
    EntryDoc,
};
use crate::filter::apply_filters;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Estimate,
    Explore,
    Enumerate,
    Compare,
    Simulate,
    Generate,
}

impl Command {
    pub const fn name(self) -> &'static str {
        match self {
            Command::Estimate => "estimate",
            Command::Explore => "explore",
            Command::Enumerate => "enumerate",
            Command::Compare => "compare",
            Command::Simulate => "simulate",
            Command::Generate => "generate",
        }
    }
}

/// Runs one command against a resolved configuration, writing artifacts
/// under `cfg.out_dir` and a one-line summary to stdout.
pub fn run_command(cfg: &RunConfig, cmd: Command) -> Result<(), CliError> {
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| CliError::io("create output directory", &cfg.out_dir, &e))?;
    match cmd {
        Command::Estimate => cmd_estimate(cfg),
        Command::Explore => cmd_explore(cfg),
        Command::Enumerate => cmd_enumerate(cfg),
        Command::Compare => cmd_compare(cfg),
        Command::Simulate => cmd_simulate(cfg),
        Command::Generate => cmd_generate(cfg),
    }
}

fn explicit_point(cfg: &RunConfig, cmd: Command) -> Result<DesignPoint, CliError> {
    cfg.point.ok_or_else(|| {
        CliError::validation(format!(
            "{} needs an explicit design point: set point.N, point.H, point.L, and point.k",
            cmd.name()
        ))
    })
}

/// Rebuilds an archive holding only the distilled (filtered/selected)
/// entries. A subset of a mutually non-dominated set stays non-dominated,
/// so every retained entry survives reinsertion.
fn distill(cfg: &RunConfig, archive: &ParetoArchive) -> ParetoArchive {
    if cfg.filters.is_empty() && cfg.select.is_empty() {
        return archive.clone();
    }
    let mut distilled = ParetoArchive::default();
    distilled.meta = archive.meta;
    for entry in apply_filters(archive.entries(), &cfg.filters, &cfg.select) {
        distilled.insert(entry.dp, entry.cost);
    }
    distilled
}

// ---------------------------------------------------------------------------
// estimate

#[derive(Serialize)]
struct StageDelaysDoc {
    pre_array: f64,
    array_to_accu: f64,
    fusion_out: f64,
}

#[derive(Serialize)]
struct ComponentDoc {
    component: &'static str,
    area_gates: f64,
    delay_gates: f64,
    energy_gates: f64,
}

#[derive(Serialize)]
struct EstimateDoc {
    command: &'static str,
    #[serde(flatten)]
    entry: EntryDoc,
    activity: f64,
    /// Unscaled per-cycle energy (activity factor 1), in gate units.
    energy_gates_raw: f64,
    stage_delays_gates: StageDelaysDoc,
    components: Vec<ComponentDoc>,
}

fn cmd_estimate(cfg: &RunConfig) -> Result<(), CliError> {
    let dp = explicit_point(cfg, Command::Estimate)?;
    let cost = macro_cost(&cfg.lib, &dp)?;
    let objectives = cost.objectives(cfg.spec.activity);
    let entry = ArchiveEntry { dp, cost: objectives };
    let calib = cfg.lib.calibration();
    let doc = EstimateDoc {
        command: "estimate",
        entry: entry_doc(&entry, cfg.precision(), calib.as_ref()),
        activity: cfg.spec.activity,
        energy_gates_raw: cost.energy.as_f64(),
        stage_delays_gates: StageDelaysDoc {
            pre_array: cost.stage_pre_array.as_f64(),
            array_to_accu: cost.stage_array_to_accu.as_f64(),
            fusion_out: cost.stage_fusion_out.as_f64(),
        },
        components: cost
            .components
            .iter()
            .map(|c| ComponentDoc {
                component: c.kind.name(),
                area_gates: c.area.as_f64(),
                delay_gates: c.delay.as_f64(),
                energy_gates: c.energy.as_f64(),
            })
            .collect(),
    };
    let path = cfg.out_dir.join("estimate.json");
    write_text(&path, &json_text(&doc))?;
    println!(
        "{}: area {} gates, cycle {} gate-delays, energy {} gate-units/cycle, \
         throughput {} ops/gate-delay -> {}",
        dp.tag(),
        objectives.area,
        objectives.delay,
        objectives.energy,
        objectives.throughput,
        path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// explore / enumerate

fn export_frontier(
    cfg: &RunConfig,
    command: &'static str,
    archive: &ParetoArchive,
    stem: &str,
) -> Result<(), CliError> {
    let calib = cfg.lib.calibration();
    let csv_path = cfg.out_dir.join(format!("{stem}.csv"));
    export_frontier_csv(archive, cfg.precision(), calib.as_ref(), &csv_path)?;
    let doc = frontier_doc(
        command,
        archive,
        cfg.spec.weight_capacity,
        cfg.precision(),
        cfg.spec.activity,
        calib.as_ref(),
    );
    write_text(&cfg.out_dir.join(format!("{stem}.json")), &json_text(&doc))?;
    if cfg.emit_plot_data {
        write_plot_data(archive, &cfg.out_dir, stem)?;
    }
    println!(
        "{command}: {} frontier entr{} -> {}",
        archive.entries().len(),
        if archive.entries().len() == 1 { "y" } else { "ies" },
        csv_path.display()
    );
    Ok(())
}

fn cmd_explore(cfg: &RunConfig) -> Result<(), CliError> {
    let eval = PooledEvaluator::new(&cfg.lib, cfg.spec.activity, cfg.jobs)?;
    let archive = nsga2_evolve(&cfg.spec, &cfg.ga, &eval)?;
    export_frontier(cfg, "explore", &distill(cfg, &archive), "frontier")
}

fn cmd_enumerate(cfg: &RunConfig) -> Result<(), CliError> {
    let eval = PooledEvaluator::new(&cfg.lib, cfg.spec.activity, cfg.jobs)?;
    let archive = enumerate_bruteforce(&cfg.spec, cfg.grid_cap, &eval)?;
    export_frontier(cfg, "enumerate", &distill(cfg, &archive), "exhaustive")
}

// ---------------------------------------------------------------------------
// compare

#[derive(Serialize)]
struct FrontierStatsDoc {
    entry_count: usize,
    hypervolume: f64,
}

#[derive(Serialize)]
struct ReferenceDoc {
    area: f64,
    delay: f64,
    energy: f64,
    throughput: f64,
}

#[derive(Serialize)]
struct CompareDoc {
    command: &'static str,
    w_store: u64,
    precision: &'static str,
    activity: f64,
    seed: u64,
    population: u32,
    generations: u32,
    grid_cap: u64,
    search: FrontierStatsDoc,
    exhaustive: FrontierStatsDoc,
    /// Search entries dominated by some exhaustive entry (0 when the search
    /// found only true frontier members).
    search_dominated: usize,
    reference: ReferenceDoc,
    hypervolume_ratio: f64,
}

fn cmd_compare(cfg: &RunConfig) -> Result<(), CliError> {
    let eval = PooledEvaluator::new(&cfg.lib, cfg.spec.activity, cfg.jobs)?;
    let search = nsga2_evolve(&cfg.spec, &cfg.ga, &eval)?;
    let exhaustive = enumerate_bruteforce(&cfg.spec, cfg.grid_cap, &eval)?;

    let mut union: Vec<CostVector> = search.costs();
    union.extend(exhaustive.costs());
    let reference = nadir_reference(&union);
    let hv_search = hypervolume(&search.costs(), &reference);
    let hv_exhaustive = hypervolume(&exhaustive.costs(), &reference);
    let ratio = if hv_exhaustive > 0.0 { hv_search / hv_exhaustive } else { 1.0 };
    let search_dominated = search
        .entries()
        .iter()
        .filter(|s| exhaustive.entries().iter().any(|e| dominates(&e.cost, &s.cost)))
        .count();

    let doc = CompareDoc {
        command: "compare",
        w_store: cfg.spec.weight_capacity,
        precision: cfg.precision().name(),
        activity: cfg.spec.activity,
        seed: cfg.ga.seed,
        population: cfg.ga.population,
        generations: cfg.ga.generations,
        grid_cap: cfg.grid_cap,
        search: FrontierStatsDoc {
            entry_count: search.entries().len(),
            hypervolume: hv_search,
        },
        exhaustive: FrontierStatsDoc {
            entry_count: exhaustive.entries().len(),
            hypervolume: hv_exhaustive,
        },
        search_dominated,
        reference: ReferenceDoc {
            area: reference.area,
            delay: reference.delay,
            energy: reference.energy,
            throughput: reference.throughput,
        },
        hypervolume_ratio: ratio,
    };
    let path = cfg.out_dir.join("compare.json");
    write_text(&path, &json_text(&doc))?;
    println!(
        "hypervolume ratio {ratio} (search {} vs exhaustive {} entries) -> {}",
        search.entries().len(),
        exhaustive.entries().len(),
        path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate

#[derive(Serialize)]
struct IntSimDoc {
    cases: u32,
    matches: u32,
    mismatches: u32,
}

#[derive(Serialize)]
struct FpSimDoc {
    cases: u32,
    outputs_checked: u64,
    /// Outputs where no stage discarded information.
    exact_outputs: u64,
    /// Exact outputs that equal the independently computed dot product.
    exact_matches: u64,
    mismatches: u64,
    overflow_events: u64,
    underflow_events: u64,
    convert_inexact_events: u64,
    weight_truncated_outputs: u64,
    input_truncated_cases: u64,
    /// Largest |simulated − float64 dot product| over all finite outputs.
    max_abs_error_vs_f64: f64,
}

#[derive(Serialize)]
struct SimulateDoc {
    command: &'static str,
    tag: String,
    precision: &'static str,
    arch: &'static str,
    seed: u64,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    int: Option<IntSimDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fp: Option<FpSimDoc>,
}

fn random_int_operands(rng: &mut SplitMix64, dp: &DesignPoint) -> IntOperands {
    let height = dp.column_height as usize;
    let weights = (0..dp.outputs())
        .map(|_| {
            (0..dp.weights_per_unit)
                .map(|_| (0..height).map(|_| rng.below(1u64 << dp.weight_bits)).collect())
                .collect()
        })
        .collect();
    let inputs = (0..height).map(|_| rng.below(1u64 << dp.input_bits)).collect();
    let row = rng.below(u64::from(dp.weights_per_unit)) as u32;
    IntOperands { weights, inputs, row }
}

fn random_fp_value(rng: &mut SplitMix64, fmt: &FpFormat) -> FpValue {
    // One case in eight is exact zero; otherwise a uniform normalized value.
    if rng.below(8) == 0 {
        return FpValue::ZERO;
    }
    let exponent = 1 + rng.below(u64::from(fmt.max_exponent())) as u32;
    let hidden = 1u64 << (fmt.mantissa_bits - 1);
    let mantissa = hidden | rng.below(hidden);
    FpValue::new(fmt, rng.coin(), exponent, mantissa).expect("fields sampled in range")
}

fn random_fp_operands(rng: &mut SplitMix64, dp: &DesignPoint, fmt: &FpFormat) -> FpOperands {
    let height = dp.column_height as usize;
    let weights = (0..dp.outputs())
        .map(|_| {
            (0..dp.weights_per_unit)
                .map(|_| (0..height).map(|_| random_fp_value(rng, fmt)).collect())
                .collect()
        })
        .collect();
    let inputs = (0..height).map(|_| random_fp_value(rng, fmt)).collect();
    let row = rng.below(u64::from(dp.weights_per_unit)) as u32;
    FpOperands { weights, inputs, row }
}

/// Exact dot product of two float vectors as `(sum, scale)` with value
/// `sum · 2^scale` in field units (scale relative to `2^(−2·bias−2·(BM−1))`);
/// `None` when the spread cannot be aligned inside an `i128`.
fn exact_fp_dot(ws: &[FpValue], xs: &[FpValue]) -> Option<(i128, i64)> {
    let products: Vec<(i128, i64)> = ws
        .iter()
        .zip(xs)
        .filter(|(w, x)| !w.is_zero() && !x.is_zero())
        .map(|(w, x)| {
            let sm = i128::from(w.signed_mantissa()) * i128::from(x.signed_mantissa());
            let pe = i64::from(w.exponent) + i64::from(x.exponent);
            (sm, pe)
        })
        .collect();
    let Some(min_pe) = products.iter().map(|&(_, pe)| pe).min() else {
        return Some((0, 0));
    };
    let mut sum: i128 = 0;
    for (sm, pe) in products {
        let shift = pe - min_pe;
        if shift > 120 {
            return None;
        }
        // checked_mul detects magnitude overflow, which a shift would lose.
        sum = sum.checked_add(sm.checked_mul(1i128 << shift)?)?;
    }
    Some((sum, min_pe))
}

/// Checks a simulated value against the exact dot product `(sum, scale)`.
/// The simulated value is `±m · 2^(e)` in field units where the mantissa
/// sits at scale `e − (BM − 1)` relative to the same base.
fn fp_value_equals_exact(fmt: &FpFormat, value: &FpValue, sum: i128, scale: i64) -> bool {
    if sum == 0 {
        return value.is_zero();
    }
    if value.is_zero() {
        return false;
    }
    let m = i128::from(value.signed_mantissa());
    // Both sides are integers on the product grid 2^(−2·bias − 2·(BM−1)):
    // the exact side is sum · 2^scale, the simulated value
    // ±m · 2^(exponent − bias − (BM−1)) becomes m · 2^e with
    // e = exponent + bias + (BM−1). Align the two grid exponents and
    // compare the integers.
    let e = i64::from(value.exponent) + fmt.bias() + i64::from(fmt.mantissa_bits - 1);
    let (mut a, mut b) = (m, sum);
    let diff = e - scale;
    let shift = diff.unsigned_abs();
    if shift > 120 {
        return false;
    }
    let factor = 1i128 << shift;
    if diff >= 0 {
        a = match a.checked_mul(factor) {
            Some(v) => v,
            None => return false,
        };
    } else {
        b = match b.checked_mul(factor) {
            Some(v) => v,
            None => return false,
        };
    }
    a == b
}

fn cmd_simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let dp = explicit_point(cfg, Command::Simulate)?;
    let mut rng = SplitMix64::new(cfg.sim_seed);
    let mut doc = SimulateDoc {
        command: "simulate",
        tag: dp.tag(),
        precision: cfg.precision().name(),
        arch: dp.arch.tag(),
        seed: cfg.sim_seed,
        status: "ok",
        int: None,
        fp: None,
    };

    match cfg.precision().float_widths() {
        None => {
            let mut matches = 0u32;
            for _ in 0..cfg.sim_cases {
                let ops = random_int_operands(&mut rng, &dp);
                let expect = exact_int_mvm(&ops)?;
                let (fused, _) = simulate_int_dcim(&dp, &ops)?;
                if fused == expect {
                    matches += 1;
                }
            }
            let mismatches = cfg.sim_cases - matches;
            doc.int = Some(IntSimDoc { cases: cfg.sim_cases, matches, mismatches });
        }
        Some(_) => {
            let fmt = FpFormat::of(&dp)?;
            let mut fp = FpSimDoc {
                cases: cfg.sim_cases,
                outputs_checked: 0,
                exact_outputs: 0,
                exact_matches: 0,
                mismatches: 0,
                overflow_events: 0,
                underflow_events: 0,
                convert_inexact_events: 0,
                weight_truncated_outputs: 0,
                input_truncated_cases: 0,
                max_abs_error_vs_f64: 0.0,
            };
            for _ in 0..cfg.sim_cases {
                let ops = random_fp_operands(&mut rng, &dp, &fmt);
                let result = simulate_fp_dcim(&dp, &ops)?;
                if result.input_truncated.iter().any(|&t| t) {
                    fp.input_truncated_cases += 1;
                }
                for (o, out) in result.outputs.iter().enumerate() {
                    fp.outputs_checked += 1;
                    fp.overflow_events += u64::from(out.overflow);
                    fp.underflow_events += u64::from(out.underflow);
                    fp.convert_inexact_events += u64::from(out.convert_inexact);
                    fp.weight_truncated_outputs += u64::from(out.weight_truncated);
                    let ws = &ops.weights[o][ops.row as usize];
                    let reference: f64 = ws
                        .iter()
                        .zip(&ops.inputs)
                        .map(|(w, x)| w.to_f64(&fmt) * x.to_f64(&fmt))
                        .sum();
                    if !out.overflow && !out.underflow {
                        let err = (out.value.to_f64(&fmt) - reference).abs();
                        fp.max_abs_error_vs_f64 = fp.max_abs_error_vs_f64.max(err);
                    }
                    if result.is_exact(o) {
                        fp.exact_outputs += 1;
                        let ok = exact_fp_dot(ws, &ops.inputs)
                            .map(|(sum, scale)| fp_value_equals_exact(&fmt, &out.value, sum, scale))
                            .unwrap_or(false);
                        if ok {
                            fp.exact_matches += 1;
                        } else {
                            fp.mismatches += 1;
                        }
                    }
                }
            }
            doc.fp = Some(fp);
        }
    }

    let failed = doc.int.as_ref().is_some_and(|i| i.mismatches > 0)
        || doc.fp.as_ref().is_some_and(|f| f.mismatches > 0);
    if failed {
        doc.status = "mismatch";
    }
    let path = cfg.out_dir.join("simulate.json");
    write_text(&path, &json_text(&doc))?;
    println!(
        "simulate {}: {} cases, status {} -> {}",
        doc.tag, cfg.sim_cases, doc.status, path.display()
    );
    if failed {
        return Err(CliError::internal(
            "simulation disagrees with the direct product-sum reference; see simulate.json",
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// generate

#[derive(Serialize)]
struct ManifestDoc {
    #[serde(flatten)]
    entry: EntryDoc,
    module_count: usize,
    cell_counts: BTreeMap<&'static str, u64>,
    files: [&'static str; 2],
}

#[derive(Serialize)]
struct GenerateDoc {
    command: &'static str,
    w_store: u64,
    precision: &'static str,
    seed: u64,
    filters: Vec<String>,
    select: Vec<String>,
    entry_count: usize,
    tags: Vec<String>,
}

fn write_netlist_dir(
    cfg: &RunConfig,
    entry: &ArchiveEntry,
    dir: &Path,
) -> Result<(), CliError> {
    let nl = generate_structural_netlist(&entry.dp)?;
    let tally = tally_cells(&nl)?;
    write_text(&dir.join("top.v"), &serialize_verilog(&nl))?;
    write_text(&dir.join("cells.v"), CELL_DEFINITIONS_V)?;
    let calib = cfg.lib.calibration();
    let manifest = ManifestDoc {
        entry: entry_doc(entry, cfg.precision(), calib.as_ref()),
        module_count: nl.modules.len(),
        cell_counts: tally.iter().map(|(kind, count)| (kind.tag(), *count)).collect(),
        files: ["top.v", "cells.v"],
    };
    write_text(&dir.join("manifest.json"), &json_text(&manifest))
}

fn cmd_generate(cfg: &RunConfig) -> Result<(), CliError> {
    let eval = PooledEvaluator::new(&cfg.lib, cfg.spec.activity, cfg.jobs)?;
    let archive = nsga2_evolve(&cfg.spec, &cfg.ga, &eval)?;
    let selected = apply_filters(archive.entries(), &cfg.filters, &cfg.select);
    let mut tags = Vec::new();
    for entry in &selected {
        let tag = entry.dp.tag();
        write_netlist_dir(cfg, entry, &cfg.out_dir.join(&tag))?;
        tags.push(tag);
    }
    let doc = GenerateDoc {
        command: "generate",
        w_store: cfg.spec.weight_capacity,
        precision: cfg.precision().name(),
        seed: cfg.ga.seed,
        filters: cfg.filters.iter().map(|f| f.to_string()).collect(),
        select: cfg.select.clone(),
        entry_count: selected.len(),
        tags: tags.clone(),
    };
    write_text(&cfg.out_dir.join("generate.json"), &json_text(&doc))?;
    println!(
        "generate: {} of {} frontier entr{} written under {}",
        selected.len(),
        archive.entries().len(),
        if archive.entries().len() == 1 { "y" } else { "ies" },
        cfg.out_dir.display()
    );
    Ok(())
}
