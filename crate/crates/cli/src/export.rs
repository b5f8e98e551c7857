//! Frontier artifacts: CSV, JSON, and plot-data exports.
//!
//! All floating-point fields are written in Rust's shortest round-trip
//! `f64` form, so re-reading a file reproduces the exact values and repeated
//! runs produce byte-identical artifacts.
//!
//! ## Unit algebra
//!
//! Objectives are gate-normalized: area and energy in gate units, delay in
//! gate delays, throughput in operations per gate-delay. With calibration
//! scalars (µm² per gate unit, ps per gate delay, fJ per gate energy unit):
//!
//! - `area_um2   = area_gates · area_um2_per_gate`
//! - `delay_ps   = delay_gates · delay_ps_per_gate`
//! - `energy_fj  = energy_gates · energy_fj_per_gate` (activity included)
//! - `tops_per_w = ops_per_cycle / energy_fj · 1000` — one op per picojoule
//!   is one TOPS per watt, and 1000 fJ make a pJ
//! - `tops_per_mm2 = (ops_per_cycle / delay_ps) / (area_um2 / 10^6)` — ops
//!   per picosecond are TOPS, and 10^6 µm² make a mm²

use std::path::{Path, PathBuf};

use dcim_core::costmodel::{CostVector, DesignPoint, Precision};
use dcim_core::dse::{ArchiveEntry, ParetoArchive};
use dcim_core::techlib::Calibration;
use serde::Serialize;

use crate::error::CliError;
use crate::filter::Objective;

/// Column order of every frontier CSV.
pub const FRONTIER_CSV_HEADER: [&str; 19] = [
    "arch",
    "precision",
    "N",
    "H",
    "L",
    "k",
    "Bw",
    "Bx",
    "BE",
    "BM",
    "area_gates",
    "delay_gates",
    "energy_gates",
    "throughput_ops_per_gd",
    "area_um2",
    "delay_ps",
    "energy_fj",
    "tops_per_w",
    "tops_per_mm2",
];

/// Absolute-unit view of one costed design under a calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbsoluteUnits {
    pub area_um2: f64,
    pub delay_ps: f64,
    pub energy_fj: f64,
    pub tops_per_w: f64,
    pub tops_per_mm2: f64,
}

/// Operations per cycle as a scalar (the design reports an exact ratio).
pub fn ops_per_cycle(dp: &DesignPoint) -> f64 {
    let (num, den) = dp.ops_per_cycle();
    num as f64 / den as f64
}

/// Applies the documented unit algebra to one design's objectives.
pub fn absolute_units(dp: &DesignPoint, cost: &CostVector, calib: &Calibration) -> AbsoluteUnits {
    let ops = ops_per_cycle(dp);
    let area_um2 = cost.area * calib.area_um2;
    let delay_ps = cost.delay * calib.delay_ps;
    let energy_fj = cost.energy * calib.energy_fj;
    AbsoluteUnits {
        area_um2,
        delay_ps,
        energy_fj,
        tops_per_w: ops / energy_fj * 1000.0,
        tops_per_mm2: (ops / delay_ps) / (area_um2 / 1e6),
    }
}

/// Shortest round-trip decimal form of an `f64`.
fn num(v: f64) -> String {
    format!("{v}")
}

fn csv_row(entry: &ArchiveEntry, precision: Precision, calib: Option<&Calibration>) -> [String; 19] {
    let dp = &entry.dp;
    let cost = &entry.cost;
    let (be, bm) = match (dp.exponent_bits, dp.mantissa_bits) {
        (Some(be), Some(bm)) => (be.to_string(), bm.to_string()),
        _ => (String::new(), String::new()),
    };
    let [area_um2, delay_ps, energy_fj, tops_per_w, tops_per_mm2] = match calib {
        None => [const { String::new() }; 5],
        Some(calib) => {
            let abs = absolute_units(dp, cost, calib);
            [
                num(abs.area_um2),
                num(abs.delay_ps),
                num(abs.energy_fj),
                num(abs.tops_per_w),
                num(abs.tops_per_mm2),
            ]
        }
    };
    [
        dp.arch.tag().to_string(),
        precision.name().to_string(),
        dp.columns.to_string(),
        dp.column_height.to_string(),
        dp.weights_per_unit.to_string(),
        dp.bits_per_cycle.to_string(),
        dp.weight_bits.to_string(),
        dp.input_bits.to_string(),
        be,
        bm,
        num(cost.area),
        num(cost.delay),
        num(cost.energy),
        num(cost.throughput),
        area_um2,
        delay_ps,
        energy_fj,
        tops_per_w,
        tops_per_mm2,
    ]
}

/// Renders the frontier as CSV text (RFC 4180, `\n` terminators), rows in
/// the archive's canonical order.
pub fn frontier_csv_text(
    archive: &ParetoArchive,
    precision: Precision,
    calib: Option<&Calibration>,
) -> String {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer.write_record(FRONTIER_CSV_HEADER).expect("in-memory write");
    for entry in archive.entries() {
        writer.write_record(csv_row(entry, precision, calib)).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("ASCII output")
}

/// Writes the frontier CSV to `path`.
pub fn export_frontier_csv(
    archive: &ParetoArchive,
    precision: Precision,
    calib: Option<&Calibration>,
    path: &Path,
) -> Result<(), CliError> {
    write_text(path, &frontier_csv_text(archive, precision, calib))
}

/// One re-read frontier CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierRecord {
    pub precision: Precision,
    pub dp: DesignPoint,
    pub cost: CostVector,
    pub absolute: Option<AbsoluteUnits>,
}

/// Reads frontier CSV text back into records (the round-trip counterpart of
/// [`frontier_csv_text`]).
pub fn parse_frontier_csv(text: &str) -> Result<Vec<FrontierRecord>, CliError> {
    let bad = |what: String| CliError::validation(format!("frontier CSV: {what}"));
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header: Vec<String> =
        reader.headers().map_err(|e| bad(e.to_string()))?.iter().map(String::from).collect();
    if header != FRONTIER_CSV_HEADER {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| record.get(i).unwrap_or_default();
        let int = |i: usize| -> Result<u32, CliError> {
            field(i).parse().map_err(|_| bad(format!("`{}` is not an integer", field(i))))
        };
        let float = |i: usize| -> Result<f64, CliError> {
            field(i).parse().map_err(|_| bad(format!("`{}` is not a number", field(i))))
        };
        let precision = Precision::parse(field(1))
            .ok_or_else(|| bad(format!("unknown precision `{}`", field(1))))?;
        let (n, h, l, k) = (int(2)?, int(3)?, int(4)?, int(5)?);
        let dp = match field(0) {
            "int" => DesignPoint::int(n, h, l, k, int(6)?, int(7)?),
            "fp" => DesignPoint::fp(n, h, l, k, int(8)?, int(9)?),
            other => return Err(bad(format!("unknown architecture `{other}`"))),
        };
        let cost = CostVector {
            area: float(10)?,
            delay: float(11)?,
            energy: float(12)?,
            throughput: float(13)?,
        };
        let absolute = if field(14).is_empty() {
            None
        } else {
            Some(AbsoluteUnits {
                area_um2: float(14)?,
                delay_ps: float(15)?,
                energy_fj: float(16)?,
                tops_per_w: float(17)?,
                tops_per_mm2: float(18)?,
            })
        };
        out.push(FrontierRecord { precision, dp, cost, absolute });
    }
    Ok(out)
}

/// JSON view of one archived design.
#[derive(Debug, Clone, Serialize)]
pub struct EntryDoc {
    pub tag: String,
    pub arch: &'static str,
    pub precision: &'static str,
    #[serde(rename = "N")]
    pub columns: u32,
    #[serde(rename = "H")]
    pub height: u32,
    #[serde(rename = "L")]
    pub share: u32,
    #[serde(rename = "k")]
    pub slice: u32,
    #[serde(rename = "Bw")]
    pub weight_bits: u32,
    #[serde(rename = "Bx")]
    pub input_bits: u32,
    #[serde(rename = "BE", skip_serializing_if = "Option::is_none")]
    pub exponent_bits: Option<u32>,
    #[serde(rename = "BM", skip_serializing_if = "Option::is_none")]
    pub mantissa_bits: Option<u32>,
    pub cycles: u32,
    pub ops_per_cycle: f64,
    pub area_gates: f64,
    pub delay_gates: f64,
    pub energy_gates: f64,
    pub throughput_ops_per_gd: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub absolute: Option<AbsoluteUnits>,
}

pub fn entry_doc(
    entry: &ArchiveEntry,
    precision: Precision,
    calib: Option<&Calibration>,
) -> EntryDoc {
    let dp = &entry.dp;
    EntryDoc {
        tag: dp.tag(),
        arch: dp.arch.tag(),
        precision: precision.name(),
        columns: dp.columns,
        height: dp.column_height,
        share: dp.weights_per_unit,
        slice: dp.bits_per_cycle,
        weight_bits: dp.weight_bits,
        input_bits: dp.input_bits,
        exponent_bits: dp.exponent_bits,
        mantissa_bits: dp.mantissa_bits,
        cycles: dp.cycles(),
        ops_per_cycle: ops_per_cycle(dp),
        area_gates: entry.cost.area,
        delay_gates: entry.cost.delay,
        energy_gates: entry.cost.energy,
        throughput_ops_per_gd: entry.cost.throughput,
        absolute: calib.map(|c| absolute_units(dp, &entry.cost, c)),
    }
}

/// JSON view of a whole frontier with its provenance metadata.
#[derive(Debug, Clone, Serialize)]
pub struct FrontierDoc {
    pub command: &'static str,
    pub w_store: u64,
    pub precision: &'static str,
    pub activity: f64,
    pub seed: u64,
    pub generations: u32,
    pub spec_hash: String,
    pub entry_count: usize,
    pub entries: Vec<EntryDoc>,
}

pub fn frontier_doc(
    command: &'static str,
    archive: &ParetoArchive,
    w_store: u64,
    precision: Precision,
    activity: f64,
    calib: Option<&Calibration>,
) -> FrontierDoc {
    FrontierDoc {
        command,
        w_store,
        precision: precision.name(),
        activity,
        seed: archive.meta.seed,
        generations: archive.meta.generations,
        spec_hash: format!("{:016x}", archive.meta.spec_hash),
        entry_count: archive.entries().len(),
        entries: archive
            .entries()
            .iter()
            .map(|e| entry_doc(e, precision, calib))
            .collect(),
    }
}

/// Serializes any document as pretty JSON with a trailing newline.
pub fn json_text<T: Serialize>(doc: &T) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("document serialization");
    text.push('\n');
    text
}

/// Writes per-objective scatter data: one tab-separated file per objective,
/// rows in the archive's canonical order. Returns the paths written.
pub fn write_plot_data(
    archive: &ParetoArchive,
    out_dir: &Path,
    stem: &str,
) -> Result<Vec<PathBuf>, CliError> {
    let mut paths = Vec::new();
    for objective in Objective::ALL {
        let mut text = format!("index\ttag\t{}\n", objective.name());
        for (i, entry) in archive.entries().iter().enumerate() {
            text.push_str(&format!(
                "{i}\t{}\t{}\n",
                entry.dp.tag(),
                num(objective.of(&entry.cost))
            ));
        }
        let path = out_dir.join(format!("{stem}_{}.tsv", objective.name()));
        write_text(&path, &text)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Writes text to `path`, creating parent directories as needed.
pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::io("create directory", parent, &e))?;
        }
    }
    std::fs::write(path, text).map_err(|e| CliError::io("write", path, &e))
}
