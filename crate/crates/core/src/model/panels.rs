use std::collections::BTreeMap;

use super::{Boundary, BuildingModel, Orientation, PanelSystemKind};
use crate::error::{Error, Result};

/// Pipes embedded in one surface.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub surface: usize,
    /// Layer whose outside-facing boundary carries the pipes.
    pub layer: usize,
    /// m
    pub pipe_length: f64,
}

/// A group of branches fed in parallel and switched by one thermostat.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub id: String,
    pub branches: Vec<Branch>,
    /// Zones whose mean air temperature drives the circuit thermostat.
    pub served_zones: Vec<usize>,
}

impl Circuit {
    pub fn pipe_length(&self) -> f64 {
        self.branches.iter().map(|b| b.pipe_length).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelSystem {
    pub kind: PanelSystemKind,
    /// m²
    pub total_panel_area: f64,
    /// m
    pub total_pipe_length: f64,
    pub circuits: Vec<Circuit>,
}

impl PanelSystem {
    pub(crate) fn empty(kind: PanelSystemKind) -> Self {
        Self {
            kind,
            total_panel_area: 0.0,
            total_pipe_length: 0.0,
            circuits: Vec::new(),
        }
    }

    pub fn branches(&self) -> impl Iterator<Item = &Branch> {
        self.circuits.iter().flat_map(|c| c.branches.iter())
    }
}

/// Place the panels of `kind` on every eligible surface and split
/// `total_pipe_length` over them in proportion to area.
///
/// Eligible surfaces declare a host layer for `kind` in their construction and
/// play the matching role: floors for floor heating, ceilings (roof ceilings
/// and the underside of intermediate slabs) for ceiling heating, exterior
/// walls for wall heating, intermediate slabs for floor-ceiling heating.
pub fn resolve_panels(
    model: &BuildingModel,
    kind: PanelSystemKind,
    total_pipe_length: f64,
) -> Result<PanelSystem> {
    // (surface, layer, served zones)
    let mut hosts: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    for (i, s) in model.surfaces.iter().enumerate() {
        let Some(&layer) = model.constructions[s.construction].panel_layers.get(&kind) else {
            continue;
        };
        let served = match (kind, s.orientation, s.boundary) {
            (PanelSystemKind::Floor, Orientation::Floor, _) => vec![s.zone],
            (PanelSystemKind::Ceiling, Orientation::Ceiling, _) => vec![s.zone],
            (PanelSystemKind::Ceiling, Orientation::Floor, Boundary::AdjacentZone(below)) => {
                vec![below]
            }
            (PanelSystemKind::FloorCeiling, Orientation::Floor, Boundary::AdjacentZone(below)) => {
                vec![below, s.zone]
            }
            (PanelSystemKind::Wall, o, Boundary::Outdoor) if o.is_wall() => vec![s.zone],
            _ => continue,
        };
        hosts.push((i, layer, served));
    }
    if hosts.is_empty() {
        return Err(Error::Configuration(format!(
            "no surface can host {kind} panels"
        )));
    }

    let areas: Vec<f64> = hosts.iter().map(|h| model.surfaces[h.0].area).collect();
    let lengths = split_pipe_length(total_pipe_length, &areas);

    let mut grouped: BTreeMap<Vec<usize>, Vec<Branch>> = BTreeMap::new();
    for ((surface, layer, served), pipe_length) in hosts.into_iter().zip(lengths) {
        grouped.entry(served).or_default().push(Branch {
            surface,
            layer,
            pipe_length,
        });
    }
    let circuits = grouped
        .into_iter()
        .map(|(served, branches)| Circuit {
            id: served
                .iter()
                .map(|&z| model.zones[z].id.as_str())
                .collect::<Vec<_>>()
                .join("+"),
            branches,
            served_zones: served,
        })
        .collect();

    Ok(PanelSystem {
        kind,
        total_panel_area: areas.iter().sum(),
        total_pipe_length,
        circuits,
    })
}

/// Proportional split. Whole-metre totals are split into whole metres by
/// largest remainder so the parts add up exactly.
fn split_pipe_length(total: f64, weights: &[f64]) -> Vec<f64> {
    let wsum: f64 = weights.iter().sum();
    if total.fract() != 0.0 || total > 1e12 {
        let mut out: Vec<f64> = weights.iter().map(|w| total * w / wsum).collect();
        if let Some(last) = out.len().checked_sub(1) {
            let rest: f64 = out[..last].iter().sum();
            out[last] = total - rest;
        }
        return out;
    }
    let metres = total as i64;
    let exact: Vec<f64> = weights.iter().map(|w| metres as f64 * w / wsum).collect();
    let mut whole: Vec<i64> = exact.iter().map(|x| x.floor() as i64).collect();
    let mut short = metres - whole.iter().sum::<i64>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if short <= 0 {
            break;
        }
        whole[i] += 1;
        short -= 1;
    }
    whole.into_iter().map(|m| m as f64).collect()
}
