//! Frontier distillation: objective predicates and tag selection applied to
//! an explored archive before reporting or netlist generation.
//!
//! A filter only ever removes entries, so the filtered set can never contain
//! a point the archive itself excluded as dominated.

use dcim_core::costmodel::CostVector;
use dcim_core::dse::ArchiveEntry;

/// The four reported objectives, in their gate-normalized units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Area,
    Delay,
    Energy,
    Throughput,
}

impl Objective {
    pub const ALL: [Objective; 4] = [
        Objective::Area,
        Objective::Delay,
        Objective::Energy,
        Objective::Throughput,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            Objective::Area => "area",
            Objective::Delay => "delay",
            Objective::Energy => "energy",
            Objective::Throughput => "throughput",
        }
    }

    pub fn parse(name: &str) -> Option<Objective> {
        Objective::ALL.iter().copied().find(|o| o.name() == name)
    }

    pub fn of(self, cost: &CostVector) -> f64 {
        match self {
            Objective::Area => cost.area,
            Objective::Delay => cost.delay,
            Objective::Energy => cost.energy,
            Objective::Throughput => cost.throughput,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Le,
    Ge,
    Lt,
    Gt,
    Eq,
}

impl CmpOp {
    pub const fn symbol(self) -> &'static str {
        match self {
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Eq => "=",
        }
    }
}

/// One predicate over a single objective, e.g. `area<=12000`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Filter {
    pub objective: Objective,
    pub op: CmpOp,
    pub value: f64,
}

impl Filter {
    /// Parses `<objective><op><number>` with op one of `<=`, `>=`, `<`, `>`,
    /// `=`. Whitespace around the parts is accepted.
    pub fn parse(text: &str) -> Result<Filter, String> {
        let trimmed = text.trim();
        // Two-character operators must be tried before their one-character
        // prefixes, or `<=` would parse as `<` with a value of `=…`.
        const OPS: [(&str, CmpOp); 5] = [
            ("<=", CmpOp::Le),
            (">=", CmpOp::Ge),
            ("<", CmpOp::Lt),
            (">", CmpOp::Gt),
            ("=", CmpOp::Eq),
        ];
        for (sym, op) in OPS {
            if let Some((lhs, rhs)) = trimmed.split_once(sym) {
                let objective = Objective::parse(lhs.trim()).ok_or_else(|| {
                    format!(
                        "unknown objective `{}` (expected area, delay, energy, or throughput)",
                        lhs.trim()
                    )
                })?;
                let value: f64 = rhs
                    .trim()
                    .parse()
                    .map_err(|_| format!("`{}` is not a number", rhs.trim()))?;
                if !value.is_finite() {
                    return Err(format!("`{}` is not a finite number", rhs.trim()));
                }
                return Ok(Filter { objective, op, value });
            }
        }
        Err(format!(
            "`{trimmed}` has no comparison operator (expected <=, >=, <, >, or =)"
        ))
    }

    pub fn admits(&self, cost: &CostVector) -> bool {
        let v = self.objective.of(cost);
        match self.op {
            CmpOp::Le => v <= self.value,
            CmpOp::Ge => v >= self.value,
            CmpOp::Lt => v < self.value,
            CmpOp::Gt => v > self.value,
            CmpOp::Eq => v == self.value,
        }
    }
}

impl std::fmt::Display for Filter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}{}", self.objective.name(), self.op.symbol(), self.value)
    }
}

/// Keeps the entries admitted by every filter and, when `select` is
/// non-empty, whose design tag is listed. Order is preserved, so the result
/// stays in the archive's canonical order.
pub fn apply_filters(
    entries: &[ArchiveEntry],
    filters: &[Filter],
    select: &[String],
) -> Vec<ArchiveEntry> {
    entries
        .iter()
        .filter(|e| filters.iter().all(|f| f.admits(&e.cost)))
        .filter(|e| select.is_empty() || select.iter().any(|tag| *tag == e.dp.tag()))
        .cloned()
        .collect()
}
