//! Resistance and voltage-drop estimates for routed traces.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::layout::Layout;
use crate::schematic::{EdgeId, NetId, Schematic};

/// Copper tape as laid in a channel (Ω/m).
pub const COPPER_TAPE_OHM_PER_M: f64 = 0.5;
/// Conductive filament volume resistivity (Ω·cm).
pub const CONDUCTIVE_FILAMENT_OHM_CM: f64 = 0.6;

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Length(f64);

impl Length {
    pub fn from_mm(mm: f64) -> Self {
        Length(mm)
    }

    pub fn from_cm(cm: f64) -> Self {
        Length(cm * 10.0)
    }

    pub fn from_m(m: f64) -> Self {
        Length(m * 1000.0)
    }

    pub fn mm(self) -> f64 {
        self.0
    }

    pub fn cm(self) -> f64 {
        self.0 / 10.0
    }

    pub fn m(self) -> f64 {
        self.0 / 1000.0
    }
}

macro_rules! quantity {
    ($name:ident) => {
        #[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub f64);

        impl $name {
            pub fn value(self) -> f64 {
                self.0
            }
        }
    };
}

quantity!(Ohms);
quantity!(Amperes);
quantity!(Volts);

impl Amperes {
    pub fn from_milliamps(ma: f64) -> Self {
        Amperes(ma / 1000.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConductorSpec {
    /// Resistance per unit length, stored as Ω/m.
    Linear { ohm_per_m: f64 },
    /// Bulk material: volume resistivity (Ω·cm) over a cross-section (cm²).
    Volumetric { resistivity_ohm_cm: f64, cross_section_cm2: f64 },
}

impl ConductorSpec {
    pub fn copper_tape() -> Self {
        ConductorSpec::Linear {
            ohm_per_m: COPPER_TAPE_OHM_PER_M,
        }
    }

    pub fn linear_per_cm(ohm_per_cm: f64) -> Self {
        ConductorSpec::Linear {
            ohm_per_m: ohm_per_cm * 100.0,
        }
    }

    pub fn validate(&self) -> Result<(), ElectricalError> {
        let ok = match *self {
            ConductorSpec::Linear { ohm_per_m } => positive(ohm_per_m),
            ConductorSpec::Volumetric {
                resistivity_ohm_cm,
                cross_section_cm2,
            } => positive(resistivity_ohm_cm) && positive(cross_section_cm2),
        };
        if ok {
            Ok(())
        } else {
            Err(ElectricalError::NonPositive)
        }
    }

    /// Resistance per cm of conductor.
    pub fn ohm_per_cm(&self) -> f64 {
        match *self {
            ConductorSpec::Linear { ohm_per_m } => ohm_per_m / 100.0,
            ConductorSpec::Volumetric {
                resistivity_ohm_cm,
                cross_section_cm2,
            } => resistivity_ohm_cm / cross_section_cm2,
        }
    }
}

fn positive(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElectricalError {
    #[error("inputs must be positive and finite")]
    NonPositive,
    #[error("inputs must be non-negative and finite")]
    Negative,
}

/// `R = r·L` for linear specs, `R = ρ·L/A` for volumetric ones.
pub fn trace_resistance(length: Length, spec: &ConductorSpec) -> Result<Ohms, ElectricalError> {
    spec.validate()?;
    if !positive(length.mm()) {
        return Err(ElectricalError::NonPositive);
    }
    Ok(Ohms(match *spec {
        ConductorSpec::Linear { ohm_per_m } => ohm_per_m * length.m(),
        ConductorSpec::Volumetric {
            resistivity_ohm_cm,
            cross_section_cm2,
        } => resistivity_ohm_cm * length.cm() / cross_section_cm2,
    }))
}

/// Cross-section (cm²) a bulk conductor of resistivity `resistivity_ohm_cm` needs to match
/// `target_ohm_per_m`.
pub fn equivalent_cross_section(resistivity_ohm_cm: f64, target_ohm_per_m: f64) -> Result<f64, ElectricalError> {
    if !positive(resistivity_ohm_cm) || !positive(target_ohm_per_m) {
        return Err(ElectricalError::NonPositive);
    }
    Ok(resistivity_ohm_cm / (target_ohm_per_m / 100.0))
}

pub fn voltage_drop(resistance: Ohms, current: Amperes) -> Result<Volts, ElectricalError> {
    let ok = |x: f64| x >= 0.0 && x.is_finite();
    if !ok(resistance.0) || !ok(current.0) {
        return Err(ElectricalError::Negative);
    }
    Ok(Volts(resistance.0 * current.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub edge: EdgeId,
    pub net: NetId,
    pub net_name: String,
    pub length_mm: f64,
    pub resistance: Ohms,
    pub drop: Volts,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub current: Amperes,
    pub rows: Vec<ReportRow>,
    /// Edges whose trace is missing or failed; excluded from rows and totals.
    pub failed: Vec<EdgeId>,
    pub total_length_mm: f64,
    pub total_resistance: Ohms,
    pub total_drop: Volts,
}

/// Per-edge length, resistance and drop at `current`, in schematic edge order.
pub fn design_report(
    sch: &Schematic,
    layout: &Layout,
    spec: &ConductorSpec,
    current: Amperes,
) -> Result<DesignReport, ElectricalError> {
    spec.validate()?;
    voltage_drop(Ohms(0.0), current)?;
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for (net, edge) in sch.edges() {
        let trace = layout.traces.get(&edge.id).filter(|t| t.is_routed());
        let Some(trace) = trace else {
            failed.push(edge.id);
            continue;
        };
        let length = Length::from_mm(trace.length());
        let resistance = Ohms(spec.ohm_per_cm() * length.cm());
        rows.push(ReportRow {
            edge: edge.id,
            net,
            net_name: sch.net(net).map(|n| n.name.clone()).unwrap_or_default(),
            length_mm: length.mm(),
            resistance,
            drop: voltage_drop(resistance, current)?,
        });
    }
    let total_length_mm = rows.iter().map(|r| r.length_mm).sum();
    let total_resistance = Ohms(rows.iter().map(|r| r.resistance.0).sum());
    let total_drop = Volts(rows.iter().map(|r| r.drop.0).sum());
    Ok(DesignReport {
        current,
        rows,
        failed,
        total_length_mm,
        total_resistance,
        total_drop,
    })
}
