//! Cell-library override files.
//!
//! The engine ships a built-in gate-normalized cell table. An override file
//! adjusts individual cell entries and optionally adds absolute-unit
//! calibration scalars, using the same flat `key = value` grammar as the run
//! configuration:
//!
//! ```text
//! cell.FA.area = 5.9        # tenths resolution: at most one fractional digit
//! cell.FA.delay = 3.5
//! cell.NOR.energy = 1.2
//! calib.area_um2 = 0.18     # all three calib.* scalars go together
//! calib.delay_ps = 14.0
//! calib.energy_fj = 0.35
//! ```
//!
//! Cell tags: NOR, OR, MUX2, HA, FA, DFF, SRAM. The flip-flop is a register
//! boundary and carries no combinational delay entry, so `cell.DFF.delay` is
//! rejected; the storage cell must keep zero delay and zero energy.
//!
//! The default file is taken from the `DCIM_TECH` environment variable when
//! no path is configured; with neither, the built-in table is used as is.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use dcim_core::techlib::{Calibration, CellKind, Gates, TechLibrary};

use crate::error::CliError;
use crate::kv::parse_kv;

/// Environment variable naming the default override file.
pub const TECH_PATH_ENV: &str = "DCIM_TECH";

/// Parses a decimal with at most one fractional digit into exact tenths.
/// The cell table is tracked in integer tenths of a gate unit, so finer
/// values cannot be represented and are rejected rather than rounded.
pub fn parse_tenths(text: &str) -> Result<Gates, String> {
    let (whole, frac) = match text.split_once('.') {
        Some((w, f)) => (w, f),
        None => (text, "0"),
    };
    if whole.is_empty() || whole.starts_with('-') || whole.starts_with('+') {
        return Err(format!("`{text}` is not a plain non-negative decimal"));
    }
    let units: u64 = whole
        .parse()
        .map_err(|_| format!("`{text}` is not a plain non-negative decimal"))?;
    if frac.len() != 1 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(format!(
            "`{text}` has more than one fractional digit; costs are tracked in tenths"
        ));
    }
    let tenth = u64::from(frac.as_bytes()[0] - b'0');
    units
        .checked_mul(10)
        .and_then(|t| t.checked_add(tenth))
        .map(Gates::from_tenths)
        .ok_or_else(|| format!("`{text}` is out of range"))
}

fn parse_calib_value(value: &str) -> Result<f64, String> {
    let v: f64 = value
        .parse()
        .map_err(|_| format!("`{value}` is not a number"))?;
    if !v.is_finite() || v <= 0.0 {
        return Err(format!("`{value}` must be strictly positive and finite"));
    }
    Ok(v)
}

/// Parses override text into a library built on the default cell table.
pub fn parse_tech_overrides(text: &str, source: &str) -> Result<TechLibrary, CliError> {
    let entries = parse_kv(text, source)?;
    let mut lib = TechLibrary::default();
    let mut calib: BTreeMap<&'static str, f64> = BTreeMap::new();
    let mut calib_line = None;

    for entry in &entries {
        let fail = |msg: String| CliError::Validation {
            message: format!("{source} line {}: key `{}`: {msg}", entry.line, entry.key),
            key: Some(entry.key.clone()),
            line: Some(entry.line),
        };
        let segments: Vec<&str> = entry.key.split('.').collect();
        match segments.as_slice() {
            ["cell", tag, field] => {
                let kind = CellKind::from_tag(tag).ok_or_else(|| {
                    fail(format!(
                        "unknown cell tag `{tag}` (expected NOR, OR, MUX2, HA, FA, DFF, or SRAM)"
                    ))
                })?;
                let amount = parse_tenths(&entry.value).map_err(fail)?;
                let mut cost = lib.cell(kind);
                match *field {
                    "area" => cost.area = amount,
                    "energy" => cost.energy = amount,
                    "delay" if kind == CellKind::Dff => {
                        return Err(fail(
                            "the flip-flop is a register boundary and carries no \
                             combinational delay entry"
                                .to_string(),
                        ));
                    }
                    "delay" => cost.delay = Some(amount),
                    other => {
                        return Err(fail(format!(
                            "unknown cell field `{other}` (expected area, delay, or energy)"
                        )));
                    }
                }
                lib = lib.with_cell(kind, cost).map_err(|e| fail(e.to_string()))?;
            }
            ["calib", field] => {
                let name = match *field {
                    "area_um2" => "area_um2",
                    "delay_ps" => "delay_ps",
                    "energy_fj" => "energy_fj",
                    other => {
                        return Err(fail(format!(
                            "unknown calibration field `{other}` \
                             (expected area_um2, delay_ps, or energy_fj)"
                        )));
                    }
                };
                calib.insert(name, parse_calib_value(&entry.value).map_err(fail)?);
                calib_line = Some(entry.line);
            }
            _ => {
                return Err(fail(
                    "unknown key (expected cell.<TAG>.<field> or calib.<field>)".to_string(),
                ));
            }
        }
    }

    if !calib.is_empty() {
        let missing: Vec<&str> = ["area_um2", "delay_ps", "energy_fj"]
            .into_iter()
            .filter(|f| !calib.contains_key(f))
            .collect();
        if !missing.is_empty() {
            return Err(CliError::Validation {
                message: format!(
                    "{source}: calibration needs all three scalars; missing calib.{}",
                    missing.join(", calib.")
                ),
                key: Some(format!("calib.{}", missing[0])),
                line: calib_line,
            });
        }
        lib = lib.with_calibration(Calibration {
            area_um2: calib["area_um2"],
            delay_ps: calib["delay_ps"],
            energy_fj: calib["energy_fj"],
        })?;
    }
    Ok(lib)
}

/// Loads the cell library: an explicit path wins, then the `DCIM_TECH`
/// environment variable, then the built-in table. Returns the library and
/// the file it came from, if any.
pub fn load_tech_library(
    explicit: Option<&Path>,
) -> Result<(TechLibrary, Option<PathBuf>), CliError> {
    let path = match explicit {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os(TECH_PATH_ENV).map(PathBuf::from),
    };
    match path {
        None => Ok((TechLibrary::default(), None)),
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::io("read cell library", &path, &e))?;
            let lib = parse_tech_overrides(&text, &path.display().to_string())?;
            Ok((lib, Some(path)))
        }
    }
}
