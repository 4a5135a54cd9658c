//! Through-hole footprints used by the bundled fixtures.

use super::{Footprint, PartDef, PinDef, PinRole};

/// Standard through-hole pin pitch (0.1 inch) in mm.
pub const PITCH: f64 = 2.54;

fn two_pin(name: &str, spacing: f64, drill: f64, roles: [(&str, PinRole); 2]) -> PartDef {
    PartDef {
        name: name.to_string(),
        pins: roles
            .iter()
            .map(|(n, r)| PinDef {
                name: n.to_string(),
                role: *r,
            })
            .collect(),
        footprint: Footprint {
            pads: vec![[-spacing / 2.0, 0.0], [spacing / 2.0, 0.0]],
            drill,
        },
    }
}

/// Single pad, for probe points and flying leads.
pub fn test_point() -> PartDef {
    PartDef {
        name: "TP".to_string(),
        pins: vec![PinDef {
            name: "1".to_string(),
            role: PinRole::Passive,
        }],
        footprint: Footprint {
            pads: vec![[0.0, 0.0]],
            drill: 1.0,
        },
    }
}

/// Dual in-line package with `pins` pins in two rows 7.62 mm apart, numbered
/// counter-clockwise from the top-left pad.
pub fn dip(pins: usize) -> PartDef {
    assert!(pins >= 2 && pins % 2 == 0, "DIP pin count must be even");
    let per_row = pins / 2;
    let half_len = (per_row - 1) as f64 * PITCH / 2.0;
    let mut pads = Vec::with_capacity(pins);
    for i in 0..per_row {
        pads.push([-3.81, half_len - i as f64 * PITCH]);
    }
    for i in 0..per_row {
        pads.push([3.81, -half_len + i as f64 * PITCH]);
    }
    PartDef {
        name: format!("DIP-{pins}"),
        pins: (1..=pins)
            .map(|i| PinDef {
                name: i.to_string(),
                role: PinRole::Signal,
            })
            .collect(),
        footprint: Footprint { pads, drill: 0.8 },
    }
}

pub fn led() -> PartDef {
    two_pin("LED", PITCH, 0.8, [("A", PinRole::Anode), ("K", PinRole::Cathode)])
}

pub fn resistor() -> PartDef {
    two_pin("RES", 4.0 * PITCH, 0.8, [("1", PinRole::Passive), ("2", PinRole::Passive)])
}

pub fn capacitor() -> PartDef {
    two_pin("CAP", PITCH, 0.8, [("1", PinRole::Passive), ("2", PinRole::Passive)])
}

/// TO-92 transistor, pins E-B-C in line.
pub fn to92() -> PartDef {
    PartDef {
        name: "TO-92".to_string(),
        pins: [("E", PinRole::Signal), ("B", PinRole::Signal), ("C", PinRole::Signal)]
            .iter()
            .map(|(n, r)| PinDef {
                name: n.to_string(),
                role: *r,
            })
            .collect(),
        footprint: Footprint {
            pads: vec![[-PITCH, 0.0], [0.0, 0.0], [PITCH, 0.0]],
            drill: 0.8,
        },
    }
}

/// 9 V battery snap, two leads.
pub fn battery_clip() -> PartDef {
    two_pin("BATTERY", 2.0 * PITCH, 1.0, [("+", PinRole::Power), ("-", PinRole::Ground)])
}

/// Looks up a bundled part by name.
pub fn by_name(name: &str) -> Option<PartDef> {
    match name {
        "LED" => Some(led()),
        "RES" => Some(resistor()),
        "CAP" => Some(capacitor()),
        "TO-92" => Some(to92()),
        "BATTERY" => Some(battery_clip()),
        "TP" => Some(test_point()),
        _ => {
            let n: usize = name.strip_prefix("DIP-")?.parse().ok()?;
            (n >= 2 && n % 2 == 0).then(|| dip(n))
        }
    }
}

/// Names accepted by [`by_name`].
pub const NAMES: &[&str] = &["DIP-8", "DIP-16", "LED", "RES", "CAP", "TO-92", "BATTERY", "TP"];
