use super::{
    compute_u_value, resolve_panels, Boundary, BuildingModel, Orientation, PanelSystemKind,
    GLAZING_INSIDE_FILM, GLAZING_OUTSIDE_FILM,
};
use crate::error::Diagnostic;

/// Target totals of the reference house.
pub(crate) mod reference {
    pub const HEATED_ZONES: usize = 20;
    pub const STOREYS: usize = 2;
    pub const LIVING_AREA: f64 = 190.0;
    pub const EXTERIOR_WALL_AREA: f64 = 264.0;
    pub const WINDOW_AREA: f64 = 19.0;
    /// Percent of gross exterior wall area.
    pub const GLAZING_RATIO: f64 = 7.32;
    /// Tolerance on areas given as whole square metres.
    pub const AREA_TOLERANCE: f64 = 0.5;
    pub const RATIO_TOLERANCE: f64 = 0.1;

    pub fn pipe_length(kind: super::PanelSystemKind) -> f64 {
        super::super::PipeLengths::default().get(kind)
    }

    pub fn panel_area(kind: super::PanelSystemKind) -> f64 {
        use super::PanelSystemKind::*;
        match kind {
            Floor => 190.0,
            Wall => 210.0,
            Ceiling => 190.0,
            FloorCeiling => 95.0,
        }
    }
}

/// Check every type invariant and, when the reference flag is set, the
/// target aggregates. Returns one diagnostic per breach.
pub fn validate(m: &BuildingModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    for c in &m.constructions {
        let subject = format!("construction '{}'", c.name);
        match c.glazing {
            Some(g) => {
                if !(g.u_value > 0.0) {
                    out.push(Diagnostic::new(&subject, "glazing U-value must be positive"));
                } else if 1.0 / g.u_value <= GLAZING_INSIDE_FILM + GLAZING_OUTSIDE_FILM {
                    out.push(Diagnostic::new(
                        &subject,
                        format!("glazing U-value {} leaves no pane resistance after films", g.u_value),
                    ));
                }
                if !(0.0..=1.0).contains(&g.solar_heat_gain_coefficient) {
                    out.push(Diagnostic::new(&subject, "solar heat gain coefficient outside [0, 1]"));
                }
            }
            None if c.layers.is_empty() => {
                out.push(Diagnostic::new(&subject, "needs at least one layer"));
            }
            None => {}
        }
        for (i, l) in c.layers.iter().enumerate() {
            for (what, v) in [
                ("thickness", l.thickness),
                ("conductivity", l.conductivity),
                ("density", l.density),
                ("specific heat", l.specific_heat),
            ] {
                if !(v > 0.0) {
                    out.push(Diagnostic::new(
                        &subject,
                        format!("layer {i} ({}) {what} must be positive, got {v}", l.name),
                    ));
                }
            }
        }
        if !(c.inside_film_resistance >= 0.0) || !(c.outside_film_resistance >= 0.0) {
            out.push(Diagnostic::new(&subject, "film resistances must be non-negative"));
        }
        for (kind, &idx) in &c.panel_layers {
            if idx >= c.layers.len() {
                out.push(Diagnostic::new(
                    &subject,
                    format!("{kind} panel layer index {idx} out of range"),
                ));
            }
        }
    }

    for s in &m.surfaces {
        let subject = format!("surface '{}'", s.id);
        if !(s.area > 0.0) {
            out.push(Diagnostic::new(&subject, format!("area must be positive, got {}", s.area)));
        }
        if !(s.emissivity > 0.0 && s.emissivity <= 1.0) {
            out.push(Diagnostic::new(
                &subject,
                format!("emissivity {} outside (0, 1]", s.emissivity),
            ));
        }
        if s.zone >= m.zones.len() {
            out.push(Diagnostic::new(&subject, "zone does not exist"));
        }
        if s.construction >= m.constructions.len() {
            out.push(Diagnostic::new(&subject, "construction does not exist"));
            continue;
        }
        let c = &m.constructions[s.construction];
        if let Some(idx) = s.panel_layer_index {
            if idx >= c.layers.len() {
                out.push(Diagnostic::new(
                    &subject,
                    format!("panel layer index {idx} out of range"),
                ));
            }
        }
        match s.boundary {
            Boundary::AdjacentZone(z) if z >= m.zones.len() => {
                out.push(Diagnostic::new(&subject, "adjacent zone does not exist"));
            }
            Boundary::AdjacentZone(z) if z == s.zone => {
                out.push(Diagnostic::new(&subject, "adjacent zone is its own zone"));
            }
            _ => {}
        }
        if c.is_glazing() && s.boundary != Boundary::Outdoor {
            out.push(Diagnostic::new(&subject, "windows must face outdoors"));
        }
        if s.orientation == Orientation::Internal && s.boundary == Boundary::Outdoor {
            out.push(Diagnostic::new(&subject, "internal surfaces cannot face outdoors"));
        }
    }

    for (zi, z) in m.zones.iter().enumerate() {
        let subject = format!("zone '{}'", z.id);
        if !(z.air_volume > 0.0) {
            out.push(Diagnostic::new(&subject, "air volume must be positive"));
        }
        if !(z.floor_area >= 0.0) {
            out.push(Diagnostic::new(&subject, "floor area must be non-negative"));
        }
        if !(0.0..=5.0).contains(&z.infiltration_ach) {
            out.push(Diagnostic::new(
                &subject,
                format!("infiltration {} ach outside [0, 5]", z.infiltration_ach),
            ));
        }
        if !z.setpoint.is_finite() || !z.internal_gains.is_finite() {
            out.push(Diagnostic::new(&subject, "setpoint and gains must be finite"));
        }
        if m.surfaces.iter().all(|s| s.zone < m.zones.len())
            && m.enclosure(zi).len() < 2
        {
            out.push(Diagnostic::new(&subject, "enclosure needs at least two surfaces"));
        }
    }

    let p = &m.plant;
    let plant_checks = [
        (p.boiler_efficiency > 0.0 && p.boiler_efficiency <= 1.0, "boiler efficiency outside (0, 1]"),
        (p.pipe_conductance > 0.0, "pipe conductance must be positive"),
        (p.design_delta_t > 0.0, "design temperature difference must be positive"),
        (p.water_specific_heat > 0.0, "water specific heat must be positive"),
        (p.water_density > 0.0, "water density must be positive"),
        (p.pump_head > 0.0, "pump head must be positive"),
        (p.pump_efficiency > 0.0 && p.pump_efficiency <= 1.0, "pump efficiency outside (0, 1]"),
        (p.nominal_power_kw.is_none_or(|k| k >= 0.0), "nominal power must be non-negative"),
        (p.inlet_temperature.is_finite(), "inlet temperature must be finite"),
    ];
    for (ok, msg) in plant_checks {
        if !ok {
            out.push(Diagnostic::new("plant", msg));
        }
    }

    let sim = &m.simulation;
    if !(sim.timestep > 0.0) {
        out.push(Diagnostic::new("simulation", "timestep must be positive"));
    }
    if !(sim.node_size > 0.0) {
        out.push(Diagnostic::new("simulation", "node size must be positive"));
    }
    if !(sim.deadband >= 0.0) {
        out.push(Diagnostic::new("simulation", "deadband must be non-negative"));
    }
    for msg in m.tariffs.check() {
        out.push(Diagnostic::new("tariffs", msg));
    }
    for msg in m.factors.check() {
        out.push(Diagnostic::new("factors", msg));
    }

    if sim.check_reference_aggregates && out.is_empty() {
        reference_aggregates(m, &mut out);
    }
    out
}

fn reference_aggregates(m: &BuildingModel, out: &mut Vec<Diagnostic>) {
    use reference::*;
    let subject = "reference house";
    if m.zones.len() != HEATED_ZONES {
        out.push(Diagnostic::new(
            subject,
            format!("expected {HEATED_ZONES} heated zones, found {}", m.zones.len()),
        ));
    }
    let storeys = storey_count(m);
    if storeys != Some(STOREYS) {
        out.push(Diagnostic::new(
            subject,
            format!("expected {STOREYS} storeys, found {storeys:?}"),
        ));
    }
    let mut area_check = |what: &str, actual: f64, expected: f64, tol: f64| {
        if (actual - expected).abs() > tol {
            out.push(Diagnostic::new(
                subject,
                format!("{what} is {actual:.2}, expected {expected} ± {tol}"),
            ));
        }
    };
    let walls = m.gross_exterior_wall_area();
    let windows = m.window_area();
    area_check("living area", m.living_area(), LIVING_AREA, AREA_TOLERANCE);
    area_check("gross exterior wall area", walls, EXTERIOR_WALL_AREA, AREA_TOLERANCE);
    area_check("window area", windows, WINDOW_AREA, AREA_TOLERANCE);
    area_check(
        "glazing ratio (%)",
        100.0 * windows / walls,
        GLAZING_RATIO,
        RATIO_TOLERANCE,
    );

    for kind in PanelSystemKind::ALL {
        let expected_length = pipe_length(kind);
        if m.pipe_lengths.get(kind) != expected_length {
            out.push(Diagnostic::new(
                subject,
                format!(
                    "{kind} pipe length {} differs from {expected_length}",
                    m.pipe_lengths.get(kind)
                ),
            ));
        }
        match resolve_panels(m, kind, m.pipe_lengths.get(kind)) {
            Ok(system) => {
                let placed: f64 = system.branches().map(|b| b.pipe_length).sum();
                if placed != system.total_pipe_length {
                    out.push(Diagnostic::new(
                        subject,
                        format!("{kind} branch pipe lengths sum to {placed}"),
                    ));
                }
                let area = system.total_panel_area;
                if (area - panel_area(kind)).abs() > AREA_TOLERANCE {
                    out.push(Diagnostic::new(
                        subject,
                        format!("{kind} panel area {area:.2}, expected {}", panel_area(kind)),
                    ));
                }
            }
            Err(e) => out.push(Diagnostic::new(subject, e.to_string())),
        }
    }

    for c in &m.constructions {
        if c.name.starts_with("exterior_wall") {
            let u = compute_u_value(c);
            if (u - 0.57).abs() > 0.01 {
                out.push(Diagnostic::new(
                    format!("construction '{}'", c.name),
                    format!("U-value {u:.3} differs from 0.57"),
                ));
            }
        }
    }
}

/// Number of storeys, following floor adjacency down to ground floors.
/// `None` when some zone has no floor chain to the ground.
pub fn storey_count(m: &BuildingModel) -> Option<usize> {
    let mut level: Vec<Option<usize>> = vec![None; m.zones.len()];
    for _ in 0..=m.zones.len() {
        for s in &m.surfaces {
            if s.orientation != Orientation::Floor {
                continue;
            }
            let l = match s.boundary {
                Boundary::Ground => Some(0),
                Boundary::AdjacentZone(below) => level.get(below).copied().flatten().map(|l| l + 1),
                _ => None,
            };
            if let Some(l) = l {
                level[s.zone] = Some(l);
            }
        }
    }
    let levels: Option<Vec<usize>> = level.into_iter().collect();
    levels.map(|l| l.into_iter().max().map_or(0, |x| x + 1))
}
