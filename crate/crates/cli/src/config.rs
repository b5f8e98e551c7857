//! Run configuration: the flat key-value file, command-line overrides, and
//! their resolution into validated domain objects.
//!
//! ## Recognized keys
//!
//! | key                     | type    | default                 | meaning |
//! |-------------------------|---------|-------------------------|---------|
//! | `w_store`               | integer | required                | weight words the macro must hold |
//! | `precision`             | name    | required                | INT2/INT4/INT8/INT16/FP8/FP16/BF16/FP32 |
//! | `height_max`            | integer | 2048                    | column-height bound (power of two) |
//! | `share_max`             | integer | 64                      | weight-sharing bound (power of two) |
//! | `columns_min_exclusive` | integer | 4 × weight bits         | exclusive lower bound on columns |
//! | `activity`              | number  | 1.0                     | switching-activity factor in (0, 1] |
//! | `ga.population`         | integer | 100                     | even, at least 4 |
//! | `ga.generations`        | integer | 100                     | at least 1 |
//! | `ga.crossover`          | number  | 0.9                     | probability in [0, 1] |
//! | `ga.mutation`           | number  | 0.2                     | probability in [0, 1] |
//! | `ga.seed`               | integer | 0                       | search seed |
//! | `grid_cap`              | integer | 1000000                 | exhaustive-enumeration size cap |
//! | `output_dir`            | path    | `out`                   | all artifacts go under this directory |
//! | `tech.path`             | path    | `DCIM_TECH` env, if set | cell-library override file |
//! | `jobs`                  | integer | 1                       | cost-evaluation worker threads |
//! | `emit_plot_data`        | bool    | false                   | write per-objective scatter files |
//! | `filter`                | list    | none                    | comma-separated objective predicates |
//! | `select`                | list    | none                    | comma-separated design tags |
//! | `point.N`               | integer | none                    | explicit design: columns |
//! | `point.H`               | integer | none                    | explicit design: column height |
//! | `point.L`               | integer | none                    | explicit design: weights per unit |
//! | `point.k`               | integer | none                    | explicit design: input bits per cycle |
//! | `sim.cases`             | integer | 100                     | randomized simulation cases |
//! | `sim.seed`              | integer | 0                       | simulation seed |
//!
//! Unknown keys are rejected, naming the key and its line. Later sources
//! override earlier ones: file, then `--set` pairs, then dedicated flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use dcim_core::costmodel::{DesignPoint, Precision};
use dcim_core::dse::{DcimSpec, GaParams, DEFAULT_GRID_CAP};
use dcim_core::techlib::TechLibrary;

use crate::error::CliError;
use crate::filter::Filter;
use crate::kv::parse_kv;
use crate::techfile::load_tech_library;

/// Every key the configuration accepts.
pub const KNOWN_KEYS: [&str; 24] = [
    "w_store",
    "precision",
    "height_max",
    "share_max",
    "columns_min_exclusive",
    "activity",
    "ga.population",
    "ga.generations",
    "ga.crossover",
    "ga.mutation",
    "ga.seed",
    "grid_cap",
    "output_dir",
    "tech.path",
    "jobs",
    "emit_plot_data",
    "filter",
    "select",
    "point.N",
    "point.H",
    "point.L",
    "point.k",
    "sim.cases",
    "sim.seed",
];

/// One configured value with the source that set it, for error reporting.
#[derive(Debug, Clone)]
struct Setting {
    value: String,
    source: String,
    line: Option<usize>,
}

/// Accumulated key-value settings from all sources, later sources winning.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    settings: BTreeMap<String, Setting>,
}

impl RawConfig {
    pub fn new() -> RawConfig {
        RawConfig::default()
    }

    fn check_known(key: &str, source: &str, line: Option<usize>) -> Result<(), CliError> {
        if KNOWN_KEYS.contains(&key) {
            return Ok(());
        }
        let at = match line {
            Some(n) => format!("{source} line {n}"),
            None => source.to_string(),
        };
        Err(CliError::Validation {
            message: format!("{at}: unknown key `{key}`"),
            key: Some(key.to_string()),
            line,
        })
    }

    /// Loads one configuration file on top of the current settings.
    pub fn load_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io("read configuration", path, &e))?;
        let source = path.display().to_string();
        for entry in parse_kv(&text, &source)? {
            Self::check_known(&entry.key, &source, Some(entry.line))?;
            self.settings.insert(
                entry.key,
                Setting { value: entry.value, source: source.clone(), line: Some(entry.line) },
            );
        }
        Ok(())
    }

    /// Applies `--set key=value` pairs in order.
    pub fn apply_set_pairs(&mut self, pairs: &[String]) -> Result<(), CliError> {
        for pair in pairs {
            let entries = parse_kv(pair, "command line")?;
            for entry in entries {
                self.set(&entry.key, &entry.value)?;
            }
        }
        Ok(())
    }

    /// Sets one key from the command line, overriding any file value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        Self::check_known(key, "command line", None)?;
        self.settings.insert(
            key.to_string(),
            Setting { value: value.to_string(), source: "command line".into(), line: None },
        );
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&Setting> {
        self.settings.get(key)
    }

    fn fail(&self, key: &str, message: String) -> CliError {
        match self.get(key) {
            Some(s) => {
                let at = match s.line {
                    Some(n) => format!("{} line {n}", s.source),
                    None => s.source.clone(),
                };
                CliError::Validation {
                    message: format!("key `{key}` ({at}): {message}"),
                    key: Some(key.to_string()),
                    line: s.line,
                }
            }
            None => CliError::for_key(key, None, message),
        }
    }

    fn required(&self, key: &str) -> Result<&str, CliError> {
        match self.get(key) {
            Some(s) => Ok(&s.value),
            None => Err(self.fail(key, "required key is missing".into())),
        }
    }

    fn parse_with<T>(
        &self,
        key: &str,
        value: &str,
        what: &str,
        parse: impl Fn(&str) -> Option<T>,
    ) -> Result<T, CliError> {
        parse(value).ok_or_else(|| self.fail(key, format!("`{value}` is not {what}")))
    }

    fn u64_or(&self, key: &str, default: u64) -> Result<u64, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => {
                self.parse_with(key, &s.value, "an unsigned integer", |v| v.parse().ok())
            }
        }
    }

    fn u32_or(&self, key: &str, default: u32) -> Result<u32, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => {
                self.parse_with(key, &s.value, "an unsigned integer", |v| v.parse().ok())
            }
        }
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => self.parse_with(key, &s.value, "a finite number", |v| {
                v.parse().ok().filter(|x: &f64| x.is_finite())
            }),
        }
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => self.parse_with(key, &s.value, "`true` or `false`", |v| match v {
                "true" => Some(true),
                "false" => Some(false),
                _ => None,
            }),
        }
    }

    fn list(&self, key: &str) -> Vec<String> {
        match self.get(key) {
            None => Vec::new(),
            Some(s) => s
                .value
                .split(',')
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .map(str::to_string)
                .collect(),
        }
    }

    /// Resolves every setting into validated domain objects.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let w_store_text = self.required("w_store")?;
        let w_store: u64 =
            self.parse_with("w_store", w_store_text, "an unsigned integer", |v| v.parse().ok())?;
        if w_store == 0 {
            return Err(self.fail("w_store", "must be at least 1".into()));
        }

        let precision_text = self.required("precision")?;
        let precision = self.parse_with("precision", precision_text, "a known precision", |v| {
            Precision::parse(v)
        })
        .map_err(|_| {
            self.fail(
                "precision",
                format!(
                    "`{precision_text}` is not a known precision (expected one of {})",
                    Precision::ALL.map(Precision::name).join(", ")
                ),
            )
        })?;

        let mut spec = DcimSpec::new(w_store, precision);
        spec.height_max = self.u32_or("height_max", DcimSpec::DEFAULT_HEIGHT_MAX)?;
        if spec.height_max < 2 || !spec.height_max.is_power_of_two() {
            return Err(self.fail("height_max", "must be a power of two, at least 2".into()));
        }
        spec.share_max = self.u32_or("share_max", DcimSpec::DEFAULT_SHARE_MAX)?;
        if spec.share_max == 0 || !spec.share_max.is_power_of_two() {
            return Err(self.fail("share_max", "must be a power of two, at least 1".into()));
        }
        spec.columns_min_exclusive =
            self.u32_or("columns_min_exclusive", 4 * precision.weight_bits())?;
        spec.activity = self.f64_or("activity", 1.0)?;
        if !(spec.activity > 0.0 && spec.activity <= 1.0) {
            return Err(self.fail("activity", "must lie in (0, 1]".into()));
        }
        spec.validate()?;

        let ga = GaParams {
            population: self.u32_or("ga.population", 100)?,
            generations: self.u32_or("ga.generations", 100)?,
            crossover_prob: self.f64_or("ga.crossover", 0.9)?,
            mutation_prob: self.f64_or("ga.mutation", 0.2)?,
            seed: self.u64_or("ga.seed", 0)?,
        };
        ga.validate()?;

        let grid_cap = self.u64_or("grid_cap", DEFAULT_GRID_CAP)?;
        if grid_cap == 0 {
            return Err(self.fail("grid_cap", "must be at least 1".into()));
        }
        let jobs = self.u64_or("jobs", 1)? as usize;
        if jobs == 0 {
            return Err(self.fail("jobs", "must be at least 1".into()));
        }
        let out_dir =
            PathBuf::from(self.get("output_dir").map_or("out", |s| s.value.as_str()));
        let emit_plot_data = self.bool_or("emit_plot_data", false)?;

        let tech_path = self.get("tech.path").map(|s| PathBuf::from(&s.value));
        let (lib, tech_source) = load_tech_library(tech_path.as_deref())?;

        let mut filters = Vec::new();
        for text in self.list("filter") {
            filters.push(
                Filter::parse(&text).map_err(|msg| self.fail("filter", msg))?,
            );
        }
        let select = self.list("select");

        let point = self.resolve_point(precision)?;

        let sim_cases = self.u32_or("sim.cases", 100)?;
        if sim_cases == 0 {
            return Err(self.fail("sim.cases", "must be at least 1".into()));
        }
        let sim_seed = self.u64_or("sim.seed", 0)?;

        Ok(RunConfig {
            spec,
            ga,
            lib,
            tech_source,
            out_dir,
            jobs,
            grid_cap,
            emit_plot_data,
            filters,
            select,
            point,
            sim_cases,
            sim_seed,
        })
    }

    /// Builds the explicit design point when `point.*` keys are present.
    /// The four shape keys go together; the precision preset supplies the
    /// bit widths.
    fn resolve_point(&self, precision: Precision) -> Result<Option<DesignPoint>, CliError> {
        const SHAPE_KEYS: [&str; 4] = ["point.N", "point.H", "point.L", "point.k"];
        let given: Vec<&str> =
            SHAPE_KEYS.iter().copied().filter(|k| self.get(k).is_some()).collect();
        if given.is_empty() {
            return Ok(None);
        }
        if let Some(missing) = SHAPE_KEYS.iter().find(|k| self.get(k).is_none()) {
            return Err(self.fail(
                given[0],
                format!("an explicit design needs all of point.N/H/L/k; `{missing}` is missing"),
            ));
        }
        let shape = |key: &str| -> Result<u32, CliError> {
            let s = self.get(key).expect("presence checked above");
            self.parse_with(key, &s.value, "an unsigned integer", |v| v.parse().ok())
        };
        let dp = DesignPoint::with_precision(
            precision,
            shape("point.N")?,
            shape("point.H")?,
            shape("point.L")?,
            shape("point.k")?,
        );
        dp.validate().map_err(|e| {
            CliError::for_key("point.N", None, format!("invalid design point: {e}"))
        })?;
        Ok(Some(dp))
    }
}

/// Fully resolved run configuration: validated domain objects only.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec: DcimSpec,
    pub ga: GaParams,
    pub lib: TechLibrary,
    /// Cell-library file the overrides came from, if any.
    pub tech_source: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub jobs: usize,
    pub grid_cap: u64,
    pub emit_plot_data: bool,
    pub filters: Vec<Filter>,
    pub select: Vec<String>,
    /// Explicit design point for estimate/simulate, from `point.*` keys.
    pub point: Option<DesignPoint>,
    pub sim_cases: u32,
    pub sim_seed: u64,
}

impl RunConfig {
    pub fn precision(&self) -> Precision {
        self.spec.precision
    }
}

/// Loads and resolves one configuration file with no overrides.
pub fn load_spec_config(path: &Path) -> Result<RunConfig, CliError> {
    let mut raw = RawConfig::new();
    raw.load_file(path)?;
    raw.resolve()
}

#[cfg(test)]
mod tests {
    use super::*;
    use dcim_core::costmodel::Arch;
    use std::io::Write as _;

    fn resolve_text(text: &str) -> Result<RunConfig, CliError> {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(text.as_bytes()).unwrap();
        load_spec_config(file.path())
    }

    #[test]
    fn minimal_file_fills_documented_defaults() {
        let cfg = resolve_text("w_store = 65536\nprecision = \"INT8\"\n").unwrap();
        assert_eq!(cfg.spec.weight_capacity, 65536);
        assert_eq!(cfg.spec.precision, Precision::Int8);
        assert_eq!(cfg.spec.height_max, 2048);
        assert_eq!(cfg.spec.share_max, 64);
        assert_eq!(cfg.spec.columns_min_exclusive, 32);
        assert_eq!(cfg.spec.activity, 1.0);
        assert_eq!(
            cfg.ga,
            GaParams {
                population: 100,
                generations: 100,
                crossover_prob: 0.9,
                mutation_prob: 0.2,
                seed: 0
            }
        );
        assert_eq!(cfg.grid_cap, 1_000_000);
        assert_eq!(cfg.jobs, 1);
        assert_eq!(cfg.out_dir, PathBuf::from("out"));
        assert!(!cfg.emit_plot_data);
        assert!(cfg.filters.is_empty() && cfg.select.is_empty());
        assert!(cfg.point.is_none());
        assert_eq!((cfg.sim_cases, cfg.sim_seed), (100, 0));
        assert!(cfg.lib.calibration().is_none());
    }

    #[test]
    fn preset_resolves_wide_float_to_its_bit_widths() {
        // Frozen preset expectation: the wide-exponent 16-bit float carries
        // an 8-bit exponent and an 8-bit mantissa (hidden bit included) on
        // the pre-aligned float datapath.
        let cfg = resolve_text("w_store = 4096\nprecision = BF16\n").unwrap();
        assert_eq!(cfg.spec.precision.float_widths(), Some((8, 8)));
        assert_eq!(cfg.spec.precision.arch(), Arch::FpPrealigned);
        assert_eq!(cfg.spec.effective_archs(), vec![Arch::FpPrealigned]);
    }

    #[test]
    fn zero_capacity_is_rejected_naming_the_key() {
        let err = resolve_text("w_store = 0\nprecision = INT8\n").unwrap_err();
        assert!(err.message().contains("w_store"), "{err}");
        assert!(err.message().contains("at least 1"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_keys_are_rejected_naming_key_and_line() {
        let err = resolve_text("w_store = 1\nprecision = INT8\nw_max = 9\n").unwrap_err();
        assert!(err.message().contains("unknown key `w_max`"), "{err}");
        assert!(err.message().contains("line 3"), "{err}");
    }

    #[test]
    fn missing_required_keys_are_named() {
        let err = resolve_text("precision = INT8\n").unwrap_err();
        assert!(err.to_string().contains("w_store"), "{err}");
        let err = resolve_text("w_store = 16\n").unwrap_err();
        assert!(err.to_string().contains("precision"), "{err}");
    }

    #[test]
    fn bad_values_name_key_and_line() {
        let err = resolve_text("w_store = many\nprecision = INT8\n").unwrap_err();
        assert!(err.message().contains("`w_store`"), "{err}");
        assert!(err.message().contains("line 1"), "{err}");
        let err = resolve_text("w_store = 16\nprecision = INT7\n").unwrap_err();
        assert!(err.message().contains("INT7"), "{err}");
        assert!(err.message().contains("INT16"), "listed valid names: {err}");
    }

    #[test]
    fn command_line_overrides_file_values() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(b"w_store = 4096\nprecision = INT8\nga.seed = 1\n").unwrap();
        let mut raw = RawConfig::new();
        raw.load_file(file.path()).unwrap();
        raw.apply_set_pairs(&["ga.seed=9".to_string()]).unwrap();
        raw.set("jobs", "4").unwrap();
        let cfg = raw.resolve().unwrap();
        assert_eq!(cfg.ga.seed, 9);
        assert_eq!(cfg.jobs, 4);
    }

    #[test]
    fn explicit_point_needs_all_four_shape_keys() {
        let err = resolve_text("w_store = 512\nprecision = INT4\npoint.N = 16\n").unwrap_err();
        assert!(err.message().contains("point.H"), "{err}");
        let cfg = resolve_text(
            "w_store = 512\nprecision = INT4\n\
             point.N = 16\npoint.H = 32\npoint.L = 4\npoint.k = 2\n",
        )
        .unwrap();
        let dp = cfg.point.unwrap();
        assert_eq!((dp.columns, dp.column_height), (16, 32));
        assert_eq!(dp.weight_capacity(), 512);
    }

    #[test]
    fn filters_and_selection_parse_from_lists() {
        let cfg = resolve_text(
            "w_store = 4096\nprecision = INT8\nfilter = area<=12000, energy<=5e6\n\
             select = int_N64_H64_L8_k1_Bw8_Bx8\n",
        )
        .unwrap();
        assert_eq!(cfg.filters.len(), 2);
        assert_eq!(cfg.select.len(), 1);
        let err = resolve_text("w_store = 1\nprecision = INT8\nfilter = area?5\n").unwrap_err();
        assert!(err.message().contains("filter"), "{err}");
    }

    #[test]
    fn spec_bound_shapes_are_validated_with_key_names() {
        let err = resolve_text("w_store = 16\nprecision = INT8\nheight_max = 100\n").unwrap_err();
        assert!(err.message().contains("height_max"), "{err}");
        let err = resolve_text("w_store = 16\nprecision = INT8\nactivity = 1.5\n").unwrap_err();
        assert!(err.message().contains("activity"), "{err}");
        let err = resolve_text("w_store = 16\nprecision = INT8\njobs = 0\n").unwrap_err();
        assert!(err.message().contains("jobs"), "{err}");
    }
}
