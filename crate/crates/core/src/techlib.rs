//! Gate-normalized technology library.
//!
//! Every cost in the engine is expressed as a multiple of a reference NOR
//! gate: areas in gate-areas, delays in gate-delays, energies in
//! gate-energies. The default cell table has one fractional decimal digit,
//! so costs are stored as exact integer tenths ([`Gates`]) and all
//! accumulation is integer arithmetic; conversion to `f64` happens once at
//! the edges. This is what makes netlist-vs-model reconciliation an exact
//! equality rather than a tolerance check.

use core::fmt;

/// Exact gate-normalized quantity, stored as integer tenths of a gate unit.
///
/// Addition and integer scaling never round; `as_f64` divides by ten once.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Gates(u64);

impl Gates {
    pub const ZERO: Gates = Gates(0);

    /// Builds a value from integer tenths (e.g. `from_tenths(57)` is 5.7).
    pub const fn from_tenths(tenths: u64) -> Self {
        Gates(tenths)
    }

    /// Builds a value from whole gate units.
    pub const fn from_units(units: u64) -> Self {
        Gates(units * 10)
    }

    pub const fn tenths(self) -> u64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 10.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn max(self, other: Gates) -> Gates {
        if self.0 >= other.0 {
            self
        } else {
            other
        }
    }
}

impl core::ops::Add for Gates {
    type Output = Gates;
    fn add(self, rhs: Gates) -> Gates {
        Gates(self.0 + rhs.0)
    }
}

impl core::ops::AddAssign for Gates {
    fn add_assign(&mut self, rhs: Gates) {
        self.0 += rhs.0;
    }
}

impl core::ops::Mul<u64> for Gates {
    type Output = Gates;
    fn mul(self, rhs: u64) -> Gates {
        Gates(self.0 * rhs)
    }
}

impl core::iter::Sum for Gates {
    fn sum<I: Iterator<Item = Gates>>(iter: I) -> Gates {
        iter.fold(Gates::ZERO, |a, b| a + b)
    }
}

impl fmt::Debug for Gates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.0 / 10, self.0 % 10)
    }
}

impl fmt::Display for Gates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.0 / 10, self.0 % 10)
    }
}

/// The closed set of primitive cells the engine knows about.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum CellKind {
    Nor,
    Or,
    Mux2,
    HalfAdder,
    FullAdder,
    Dff,
    SramBit,
}

impl CellKind {
    pub const ALL: [CellKind; 7] = [
        CellKind::Nor,
        CellKind::Or,
        CellKind::Mux2,
        CellKind::HalfAdder,
        CellKind::FullAdder,
        CellKind::Dff,
        CellKind::SramBit,
    ];

    pub const fn index(self) -> usize {
        match self {
            CellKind::Nor => 0,
            CellKind::Or => 1,
            CellKind::Mux2 => 2,
            CellKind::HalfAdder => 3,
            CellKind::FullAdder => 4,
            CellKind::Dff => 5,
            CellKind::SramBit => 6,
        }
    }

    /// Short uppercase tag used in override files and reports.
    pub const fn tag(self) -> &'static str {
        match self {
            CellKind::Nor => "NOR",
            CellKind::Or => "OR",
            CellKind::Mux2 => "MUX2",
            CellKind::HalfAdder => "HA",
            CellKind::FullAdder => "FA",
            CellKind::Dff => "DFF",
            CellKind::SramBit => "SRAM",
        }
    }

    pub fn from_tag(tag: &str) -> Option<CellKind> {
        CellKind::ALL.iter().copied().find(|k| k.tag() == tag)
    }
}

/// Per-cell cost record. Delay is absent for sequential cells (the flip-flop
/// launches and captures at register boundaries; its propagation is absorbed
/// into stage slack).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct CellCost {
    pub area: Gates,
    pub delay: Option<Gates>,
    pub energy: Gates,
}

/// Optional scalars mapping gate units to absolute physical units.
/// All three must be strictly positive.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Calibration {
    /// Area of one gate unit in square micrometers.
    pub area_um2: f64,
    /// Delay of one gate unit in picoseconds.
    pub delay_ps: f64,
    /// Energy of one gate unit in femtojoules.
    pub energy_fj: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TechError {
    /// A logic module was requested with width zero.
    InvalidWidth,
    /// The storage cell must keep zero delay and zero energy.
    StorageCellNotFree,
    /// Calibration scalars must be strictly positive and finite.
    InvalidCalibration,
}

impl fmt::Display for TechError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TechError::InvalidWidth => write!(f, "logic module width must be at least 1"),
            TechError::StorageCellNotFree => {
                write!(f, "storage cell delay and energy must both be zero")
            }
            TechError::InvalidCalibration => {
                write!(f, "calibration scalars must be strictly positive and finite")
            }
        }
    }
}

impl core::error::Error for TechError {}

/// Cell cost table plus optional absolute-unit calibration.
#[derive(Clone, PartialEq, Debug)]
pub struct TechLibrary {
    cells: [CellCost; 7],
    calibration: Option<Calibration>,
}

// Default table, in tenths of a gate unit: (area, delay, energy).
const DEFAULT_CELLS: [(u64, Option<u64>, u64); 7] = [
    (10, Some(10), 10), // NOR
    (13, Some(10), 23), // OR
    (22, Some(22), 30), // MUX2
    (43, Some(25), 69), // HA
    (57, Some(33), 84), // FA
    (66, None, 96),     // DFF
    (22, Some(0), 0),   // SRAM bit
];

impl Default for TechLibrary {
    fn default() -> Self {
        let mut cells = [CellCost {
            area: Gates::ZERO,
            delay: None,
            energy: Gates::ZERO,
        }; 7];
        for (i, (a, d, e)) in DEFAULT_CELLS.iter().enumerate() {
            cells[i] = CellCost {
                area: Gates::from_tenths(*a),
                delay: d.map(Gates::from_tenths),
                energy: Gates::from_tenths(*e),
            };
        }
        TechLibrary {
            cells,
            calibration: None,
        }
    }
}

impl TechLibrary {
    pub fn cell(&self, kind: CellKind) -> CellCost {
        self.cells[kind.index()]
    }

    /// Replaces one cell record. The storage cell keeps the invariant that
    /// reads are free (delay and energy zero); everything else is accepted
    /// as given.
    pub fn with_cell(mut self, kind: CellKind, cost: CellCost) -> Result<Self, TechError> {
        if kind == CellKind::SramBit
            && (cost.delay != Some(Gates::ZERO) || !cost.energy.is_zero())
        {
            return Err(TechError::StorageCellNotFree);
        }
        self.cells[kind.index()] = cost;
        Ok(self)
    }

    pub fn with_calibration(mut self, calib: Calibration) -> Result<Self, TechError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(calib.area_um2) && ok(calib.delay_ps) && ok(calib.energy_fj)) {
            return Err(TechError::InvalidCalibration);
        }
        self.calibration = Some(calib);
        Ok(self)
    }

    pub fn calibration(&self) -> Option<Calibration> {
        self.calibration
    }

    fn area(&self, kind: CellKind) -> Gates {
        self.cell(kind).area
    }

    fn energy(&self, kind: CellKind) -> Gates {
        self.cell(kind).energy
    }

    // Combinational cells always carry a delay; the table guarantees it.
    fn delay(&self, kind: CellKind) -> Gates {
        self.cell(kind).delay.unwrap_or(Gates::ZERO)
    }
}

/// Area/delay/energy triple for one logic module instance.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct ModuleCost {
    pub area: Gates,
    pub delay: Gates,
    pub energy: Gates,
}

impl ModuleCost {
    pub const ZERO: ModuleCost = ModuleCost {
        area: Gates::ZERO,
        delay: Gates::ZERO,
        energy: Gates::ZERO,
    };

    pub fn scaled(self, count: u64) -> ModuleCost {
        ModuleCost {
            area: self.area * count,
            delay: self.delay,
            energy: self.energy * count,
        }
    }

    pub fn plus(self, other: ModuleCost) -> ModuleCost {
        ModuleCost {
            area: self.area + other.area,
            delay: self.delay + other.delay,
            energy: self.energy + other.energy,
        }
    }
}

/// Parameterized logic modules with closed-form costs.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ModuleKind {
    /// One-bit by N-bit multiplier: N product gates in parallel.
    Multiplier1xN,
    /// N-bit ripple-carry adder: a half adder plus N-1 full adders.
    AdderN,
    /// N-to-1 single-bit selector: N-1 two-way muxes in a balanced tree.
    MuxN,
    /// N-bit barrel shifter: one N-to-1 selector per output bit.
    ShifterN,
    /// N-bit comparator; structurally a subtractor, costed as the adder.
    ComparatorN,
}

/// Number of selection levels for a width-`n` selector tree. Non-power-of-two
/// widths keep their exact mux count but are padded to the next power of two
/// for depth.
pub(crate) fn select_levels(n: u64) -> u64 {
    debug_assert!(n >= 1);
    if n <= 1 {
        0
    } else {
        (n - 1).ilog2() as u64 + 1
    }
}

/// Closed-form cost of one logic module of the given operand width.
///
/// Width 0 is rejected. A width-1 selector or shifter selects nothing and
/// costs zero.
pub fn module_cost(lib: &TechLibrary, kind: ModuleKind, width: u64) -> Result<ModuleCost, TechError> {
    if width == 0 {
        return Err(TechError::InvalidWidth);
    }
    let n = width;
    let cost = match kind {
        ModuleKind::Multiplier1xN => ModuleCost {
            area: lib.area(CellKind::Nor) * n,
            delay: lib.delay(CellKind::Nor),
            energy: lib.energy(CellKind::Nor) * n,
        },
        ModuleKind::AdderN | ModuleKind::ComparatorN => ModuleCost {
            area: lib.area(CellKind::FullAdder) * (n - 1) + lib.area(CellKind::HalfAdder),
            delay: lib.delay(CellKind::FullAdder) * (n - 1) + lib.delay(CellKind::HalfAdder),
            energy: lib.energy(CellKind::FullAdder) * (n - 1) + lib.energy(CellKind::HalfAdder),
        },
        ModuleKind::MuxN => ModuleCost {
            area: lib.area(CellKind::Mux2) * (n - 1),
            delay: lib.delay(CellKind::Mux2) * select_levels(n),
            energy: lib.energy(CellKind::Mux2) * (n - 1),
        },
        ModuleKind::ShifterN => {
            let sel = module_cost(lib, ModuleKind::MuxN, n)?;
            ModuleCost {
                area: sel.area * n,
                delay: sel.delay * select_levels(n),
                energy: sel.energy * n,
            }
        }
    };
    Ok(cost)
}
