//! Built-in movement definitions and segment endpoint specifications.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landmark::{LandmarkId, Side, Source, Topology};

/// Camera stance prescribed for a movement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    LateralSagittal,
    AnteriorCoronal,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::LateralSagittal => "lateral-sagittal",
            Orientation::AnteriorCoronal => "anterior-coronal",
        }
    }

    /// Operator guidance shown when a recording is opened.
    pub fn hint(self) -> &'static str {
        match self {
            Orientation::LateralSagittal => "Stand side-on to the camera so the moving segment is seen from the side.",
            Orientation::AnteriorCoronal => "Face the camera squarely so the moving segment is seen from the front.",
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One end of a measured segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Endpoint {
    Single(LandmarkId),
    /// Component-wise mean of two landmarks.
    Midpoint(LandmarkId, LandmarkId),
}

impl Endpoint {
    /// Parses `NAME` or `mid(NAME,NAME)`.
    pub fn parse(topology: Topology, text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some(inner) = text.strip_prefix("mid(").and_then(|s| s.strip_suffix(')')) {
            let (a, b) = inner
                .split_once(',')
                .ok_or_else(|| Error::Config(format!("malformed midpoint `{text}`")))?;
            Ok(Endpoint::Midpoint(
                LandmarkId::parse(topology, a.trim())?,
                LandmarkId::parse(topology, b.trim())?,
            ))
        } else {
            Ok(Endpoint::Single(LandmarkId::parse(topology, text)?))
        }
    }

    pub fn landmarks(&self) -> Vec<LandmarkId> {
        match *self {
            Endpoint::Single(id) => vec![id],
            Endpoint::Midpoint(a, b) => vec![a, b],
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Single(id) => write!(f, "{id}"),
            Endpoint::Midpoint(a, b) => write!(f, "mid({a},{b})"),
        }
    }
}

/// The two endpoints whose difference vector defines a measured segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SegmentSpec {
    pub endpoint1: Endpoint,
    pub endpoint2: Endpoint,
}

impl SegmentSpec {
    pub fn new(endpoint1: Endpoint, endpoint2: Endpoint) -> Self {
        SegmentSpec { endpoint1, endpoint2 }
    }

    /// Parses `ENDPOINT -> ENDPOINT`, e.g. `mid(LSHO,RSHO) -> NOSE`.
    pub fn parse(topology: Topology, text: &str) -> Result<Self> {
        let (a, b) = text
            .split_once("->")
            .ok_or_else(|| Error::Config(format!("segment `{text}` must look like `A -> B`")))?;
        Ok(SegmentSpec::new(
            Endpoint::parse(topology, a)?,
            Endpoint::parse(topology, b)?,
        ))
    }

    /// Every landmark the segment reads.
    pub fn landmarks(&self) -> BTreeSet<LandmarkId> {
        self.endpoint1
            .landmarks()
            .into_iter()
            .chain(self.endpoint2.landmarks())
            .collect()
    }

    pub fn topology(&self) -> Topology {
        match self.endpoint1 {
            Endpoint::Single(id) | Endpoint::Midpoint(id, _) => id.topology(),
        }
    }
}

impl fmt::Display for SegmentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.endpoint1, self.endpoint2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MovementDefinition {
    pub name: String,
    pub orientation: Orientation,
    pub side: Option<Side>,
    pub webcam_segment: SegmentSpec,
    pub mocap_segment: SegmentSpec,
}

impl MovementDefinition {
    pub fn segment_for(&self, source: Source) -> &SegmentSpec {
        match source {
            Source::WebcamPose => &self.webcam_segment,
            Source::Mocap => &self.mocap_segment,
        }
    }
}

/// A registry row with landmark names written for the left side; right-side variants
/// swap the leading `L` for `R` on lateralised markers.
struct Row {
    name: &'static str,
    orientation: Orientation,
    limb: bool,
    webcam: [&'static str; 2],
    mocap: [&'static str; 2],
}

const ROWS: [Row; 11] = [
    Row {
        name: "Back Flexion and Extension",
        orientation: Orientation::LateralSagittal,
        limb: false,
        webcam: ["LHIP", "LSHO"],
        mocap: ["LPSI", "C7"],
    },
    Row {
        name: "Back Lateral Flexion",
        orientation: Orientation::AnteriorCoronal,
        limb: false,
        webcam: ["LHIP", "LSHO"],
        mocap: ["LPSI", "C7"],
    },
    Row {
        name: "Trunk Rotation",
        orientation: Orientation::AnteriorCoronal,
        limb: false,
        webcam: ["LSHO", "RSHO"],
        mocap: ["LSHO", "RSHO"],
    },
    Row {
        name: "Neck Flexion and Extension",
        orientation: Orientation::LateralSagittal,
        limb: false,
        webcam: ["mid(LSHO,RSHO)", "NOSE"],
        mocap: ["mid(LSHO,RSHO)", "mid(LFHD,LBHD)"],
    },
    Row {
        name: "Neck Lateral Bending",
        orientation: Orientation::LateralSagittal,
        limb: false,
        webcam: ["mid(LSHO,RSHO)", "NOSE"],
        mocap: ["mid(LSHO,RSHO)", "mid(LFHD,LBHD)"],
    },
    Row {
        name: "Neck Rotation",
        orientation: Orientation::AnteriorCoronal,
        limb: false,
        webcam: ["LEAR", "REAR"],
        mocap: ["mid(LFHD,LBHD)", "mid(RFHD,RBHD)"],
    },
    Row {
        name: "Shoulder Adduction and Abduction",
        orientation: Orientation::AnteriorCoronal,
        limb: true,
        webcam: ["LSHO", "LELB"],
        mocap: ["LSHO", "LELB"],
    },
    Row {
        name: "Shoulder Flexion and Extension",
        orientation: Orientation::AnteriorCoronal,
        limb: true,
        webcam: ["LSHO", "LELB"],
        mocap: ["LSHO", "LELB"],
    },
    Row {
        name: "Elbow Flexion",
        orientation: Orientation::LateralSagittal,
        limb: true,
        webcam: ["LELB", "LWRI"],
        mocap: ["LELB", "mid(LWRA,LWRB)"],
    },
    Row {
        name: "Hip Flexion and Extension",
        orientation: Orientation::LateralSagittal,
        limb: true,
        webcam: ["LHIP", "LKNE"],
        mocap: ["LASI", "LKNE"],
    },
    Row {
        name: "Hip Adduction and Abduction",
        orientation: Orientation::AnteriorCoronal,
        limb: true,
        webcam: ["LHIP", "LKNE"],
        mocap: ["LASI", "LKNE"],
    },
];

/// Phase labels reported separately in reliability tables, mapped to the row that
/// records them.
const PHASES: [(&str, &str); 13] = [
    ("Back Flexion", "Back Flexion and Extension"),
    ("Back Extension", "Back Flexion and Extension"),
    ("Neck Flexion", "Neck Flexion and Extension"),
    ("Neck Extension", "Neck Flexion and Extension"),
    ("Shoulder Adduction", "Shoulder Adduction and Abduction"),
    ("Shoulder Abduction", "Shoulder Adduction and Abduction"),
    ("Shoulder Flexion", "Shoulder Flexion and Extension"),
    ("Shoulder Extension", "Shoulder Flexion and Extension"),
    ("Hip Flexion", "Hip Flexion and Extension"),
    ("Hip Extension", "Hip Flexion and Extension"),
    ("Hip Flexion (Knee Flexed)", "Hip Flexion and Extension"),
    ("Hip Adduction", "Hip Adduction and Abduction"),
    ("Hip Abduction", "Hip Adduction and Abduction"),
];

fn mirror(name: &str, side: Side) -> String {
    match (side, name.strip_prefix('L')) {
        (Side::Right, Some(rest)) => format!("R{rest}"),
        _ => name.to_string(),
    }
}

fn sided_endpoint(topology: Topology, text: &str, side: Option<Side>) -> Endpoint {
    let side = side.unwrap_or(Side::Left);
    let parsed = Endpoint::parse(topology, text).expect("built-in registry names are valid");
    let flip = |id: LandmarkId| LandmarkId::parse(topology, &mirror(id.name(), side)).expect("mirrored name is valid");
    match parsed {
        Endpoint::Single(id) => Endpoint::Single(flip(id)),
        Endpoint::Midpoint(a, b) => Endpoint::Midpoint(flip(a), flip(b)),
    }
}

impl Row {
    fn build(&self, side: Option<Side>) -> MovementDefinition {
        let side = if self.limb { side } else { None };
        let spec = |topology, names: [&str; 2]| {
            SegmentSpec::new(
                sided_endpoint(topology, names[0], side),
                sided_endpoint(topology, names[1], side),
            )
        };
        MovementDefinition {
            name: self.name.to_string(),
            orientation: self.orientation,
            side,
            webcam_segment: spec(Topology::Webcam33, self.webcam),
            mocap_segment: spec(Topology::Mocap39, self.mocap),
        }
    }
}

/// Replacement fields for one registry entry, typically loaded from a config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegistryOverride {
    pub name: String,
    #[serde(default)]
    pub side: Option<Side>,
    #[serde(default)]
    pub orientation: Option<Orientation>,
    /// Segment in `A -> B` form over webcam landmark names.
    #[serde(default)]
    pub webcam_segment: Option<String>,
    #[serde(default)]
    pub mocap_segment: Option<String>,
}

/// Movement lookup over the built-in table plus optional overrides.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    overrides: Vec<RegistryOverride>,
}

impl Registry {
    pub fn builtin() -> Self {
        Registry::default()
    }

    /// Validates every override eagerly so bad config fails at load time.
    pub fn with_overrides(overrides: Vec<RegistryOverride>) -> Result<Self> {
        let registry = Registry { overrides };
        for o in &registry.overrides {
            let row = find_row(&o.name)?;
            if row.limb && o.side.is_none() {
                return Err(Error::Config(format!("override for {} must name a side", row.name)));
            }
            registry.lookup(row.name, o.side)?;
        }
        Ok(registry)
    }

    /// The names of every registered movement, in table order.
    pub fn movement_names() -> Vec<&'static str> {
        ROWS.iter().map(|r| r.name).collect()
    }

    /// Table names plus the phase labels that resolve to them.
    pub fn accepted_names() -> Vec<&'static str> {
        ROWS.iter()
            .map(|r| r.name)
            .chain(PHASES.iter().map(|(p, _)| *p))
            .collect()
    }

    pub fn requires_side(name: &str) -> Result<bool> {
        Ok(find_row(name)?.limb)
    }

    /// Looks up a movement by table name or phase label.
    ///
    /// Limb movements require a side; axial movements ignore it.
    pub fn lookup(&self, name: &str, side: Option<Side>) -> Result<MovementDefinition> {
        let row = find_row(name)?;
        if row.limb && side.is_none() {
            return Err(Error::Registry(format!(
                "movement `{}` needs a side (left or right)",
                row.name
            )));
        }
        let mut def = row.build(side);
        if let Some(o) = self
            .overrides
            .iter()
            .find(|o| o.name == row.name && (o.side == def.side || !row.limb))
        {
            if let Some(orientation) = o.orientation {
                def.orientation = orientation;
            }
            if let Some(seg) = &o.webcam_segment {
                def.webcam_segment = SegmentSpec::parse(Topology::Webcam33, seg)?;
            }
            if let Some(seg) = &o.mocap_segment {
                def.mocap_segment = SegmentSpec::parse(Topology::Mocap39, seg)?;
            }
        }
        Ok(def)
    }
}

/// Resolves a movement or phase name to its canonical table name.
pub fn canonical_name(name: &str) -> Result<&'static str> {
    find_row(name).map(|r| r.name)
}

fn find_row(name: &str) -> Result<&'static Row> {
    let wanted = name.trim();
    let table_name = PHASES
        .iter()
        .find(|(phase, _)| phase.eq_ignore_ascii_case(wanted))
        .map_or(wanted, |(_, row)| *row);
    ROWS.iter()
        .find(|r| r.name.eq_ignore_ascii_case(table_name))
        .ok_or_else(|| {
            Error::Registry(format!(
                "`{wanted}` is not a registered movement; valid movements: {}",
                Registry::movement_names().join(", ")
            ))
        })
}

/// Lookup against the built-in table.
pub fn registry_lookup(name: &str, side: Option<Side>) -> Result<MovementDefinition> {
    Registry::builtin().lookup(name, side)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trunk_rotation_uses_shoulders_facing_camera() {
        let def = registry_lookup("Trunk Rotation", None).unwrap();
        assert_eq!(def.orientation, Orientation::AnteriorCoronal);
        assert_eq!(def.webcam_segment.to_string(), "LSHO -> RSHO");
        assert_eq!(def.side, None);
    }

    #[test]
    fn elbow_flexion_mocap_uses_wrist_marker_midpoint() {
        let left = registry_lookup("Elbow Flexion", Some(Side::Left)).unwrap();
        assert_eq!(left.mocap_segment.to_string(), "LELB -> mid(LWRA,LWRB)");
        assert_eq!(left.webcam_segment.to_string(), "LELB -> LWRI");
        let right = registry_lookup("Elbow Flexion", Some(Side::Right)).unwrap();
        assert_eq!(right.mocap_segment.to_string(), "RELB -> mid(RWRA,RWRB)");
    }

    #[test]
    fn distal_joints_are_not_registered() {
        let err = registry_lookup("Wrist Flexion", Some(Side::Left)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("Wrist Flexion"));
        assert!(msg.contains("Trunk Rotation"), "error should list valid names: {msg}");
    }

    #[test]
    fn limb_movement_without_side_is_rejected() {
        assert!(registry_lookup("Hip Adduction and Abduction", None).is_err());
        assert!(registry_lookup("Neck Rotation", Some(Side::Right)).is_ok());
    }

    #[test]
    fn phase_labels_resolve_to_rows() {
        let def = registry_lookup("Back Extension", None).unwrap();
        assert_eq!(def.name, "Back Flexion and Extension");
        let def = registry_lookup("hip flexion (knee flexed)", Some(Side::Right)).unwrap();
        assert_eq!(def.name, "Hip Flexion and Extension");
        assert_eq!(def.webcam_segment.to_string(), "RHIP -> RKNE");
        assert_eq!(
            canonical_name("Shoulder Abduction").unwrap(),
            "Shoulder Adduction and Abduction"
        );
    }

    #[test]
    fn segment_spec_parse_round_trips() {
        let spec = SegmentSpec::parse(Topology::Mocap39, "mid(LFHD, LBHD) -> mid(RFHD,RBHD)").unwrap();
        assert_eq!(spec.to_string(), "mid(LFHD,LBHD) -> mid(RFHD,RBHD)");
        assert_eq!(spec.landmarks().len(), 4);
        assert!(SegmentSpec::parse(Topology::Webcam33, "LSHO RSHO").is_err());
        assert!(SegmentSpec::parse(Topology::Webcam33, "LSHO -> LPSI").is_err());
    }

    #[test]
    fn overrides_replace_fields() {
        let registry = Registry::with_overrides(vec![RegistryOverride {
            name: "Shoulder Flexion and Extension".into(),
            side: Some(Side::Left),
            orientation: Some(Orientation::LateralSagittal),
            webcam_segment: None,
            mocap_segment: Some("LSHO -> LFRM".into()),
        }])
        .unwrap();
        let left = registry.lookup("Shoulder Flexion", Some(Side::Left)).unwrap();
        assert_eq!(left.orientation, Orientation::LateralSagittal);
        assert_eq!(left.mocap_segment.to_string(), "LSHO -> LFRM");
        let right = registry.lookup("Shoulder Flexion", Some(Side::Right)).unwrap();
        assert_eq!(right.orientation, Orientation::AnteriorCoronal);

        let bad = Registry::with_overrides(vec![RegistryOverride {
            name: "Trunk Rotation".into(),
            webcam_segment: Some("LSHO -> NOPE".into()),
            ..Default::default()
        }]);
        assert!(bad.is_err());
    }
}
