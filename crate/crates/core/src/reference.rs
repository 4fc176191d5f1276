//! The shipped two-storey reference house.
//!
//! Twenty rooms on an L-shaped plan of 95 m² per storey, brick walls with
//! 5 cm of EPS, a weakly insulated ground floor and an attic ceiling. Its
//! aggregate areas match the target house; the room layout is a
//! reconstruction.

use crate::error::Result;
use crate::model::{load_building, BuildingModel, PanelSystemKind};

/// Configuration document of the reference house.
pub const REFERENCE_HOUSE: &str = include_str!("../data/reference_house.json");

/// The reference house with `kind` panels installed.
pub fn reference_house(kind: PanelSystemKind) -> Result<BuildingModel> {
    load_building(REFERENCE_HOUSE)?.with_panel_system(kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_and_passes_aggregate_checks() {
        for kind in PanelSystemKind::ALL {
            let m = reference_house(kind).unwrap();
            assert_eq!(m.zones.len(), 20);
            assert_eq!(m.panel_system.kind, kind);
        }
    }
}
