//! Coupled implicit time step of every surface, air node and water circuit.
//!
//! Each surface is a tridiagonal conduction problem whose solution is affine
//! in a handful of zone-level unknowns: the air and mean radiant (star)
//! temperatures of the zones its faces see, and the supply temperature of its
//! circuit when that is being solved for. Surfaces are solved once per
//! right-hand side, the small dense zone system is solved for the unknowns,
//! and the surface fields are then recovered. Energy is conserved to
//! round-off because every exchange appears with equal and opposite sign.

use nalgebra::{DMatrix, DVector};

use super::conduction::{discretize, FaceCondition, NodeGrid, StepSystem, Tridiagonal};
use super::panel::effectiveness;
use super::radiation::{star_coefficients, RadiantFace};
use crate::error::{Error, Result};
use crate::model::{
    Boundary, BuildingModel, Face, Orientation, AIR_DENSITY, AIR_SPECIFIC_HEAT,
};

/// Convection regime of a face, fixed by its tilt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tilt {
    /// Faces up into the zone.
    Floor,
    /// Faces down into the zone.
    Ceiling,
    Wall,
    Window,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Outside {
    /// Film conductance to the outdoor air, W/(m²K).
    Outdoor(f64),
    /// Film conductance to the ground; `None` holds the face at the ground
    /// temperature.
    Ground(Option<f64>),
    Adiabatic,
    Zone(usize),
}

/// How a circuit is driven during one solve.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    Off,
    Fixed(f64),
    /// Supply temperature is unknown number `slot`.
    Free(usize),
}

#[derive(Debug, Clone)]
struct SurfaceSim {
    area: f64,
    emissivity: f64,
    zone: usize,
    inside_tilt: Tilt,
    outside: Outside,
    outside_tilt: Tilt,
    /// (circuit, slab conductance ṁ·cp·ε in W/K)
    branch: Option<(usize, f64)>,
    grid: NodeGrid,
    temps: Vec<f64>,
    // per-step coefficients, W/(m²K)
    hc_in: f64,
    hr_in: f64,
    hc_out: f64,
    hr_out: f64,
    /// Absorbed solar on the inside face, W/m².
    solar: f64,
    mode: Mode,
    // per-step solution pieces
    sys: StepSystem,
    lu: Tridiagonal,
    x0: Vec<f64>,
    r_in: Vec<f64>,
    r_out: Vec<f64>,
    r_panel: Vec<f64>,
}

#[derive(Debug, Clone)]
struct ZoneSim {
    air: f64,
    capacity: f64,
    infiltration: f64,
    gains: f64,
    faces: Vec<(usize, Face)>,
    /// Own floor surfaces and their total area, for solar deposition.
    floors: Vec<usize>,
    floor_area: f64,
    /// Window area × SHGC × orientation factor, m².
    solar_aperture: f64,
}

#[derive(Debug, Clone)]
pub struct CircuitSim {
    pub id: String,
    pub served: Vec<usize>,
    /// kg/s
    pub mass_flow: f64,
    pub branches: Vec<usize>,
    /// Mean setpoint of the served zones, °C.
    pub setpoint: f64,
    pub on: bool,
    /// Results of the last step.
    pub supply: f64,
    pub ret: f64,
    /// W
    pub heat: f64,
    conductance: f64,
}

/// Boundary conditions for one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInputs {
    /// °C
    pub outdoor: f64,
    /// W/m²
    pub global_horizontal: f64,
    /// s; `None` solves for the steady state.
    pub dt: Option<f64>,
}

/// Plant control for one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Control {
    /// Circuits switched by their `on` flags at a fixed supply temperature.
    /// With a capacity (W) the common supply is lowered whenever the circuits
    /// would draw more than the boiler can give.
    Thermostat { supply: f64, capacity: Option<f64> },
    /// Supply temperature of every circuit modulated so the mean air
    /// temperature of its zones sits at the setpoint, within [slab, max].
    Ideal { max_supply: f64 },
}

/// Heat flows of one step, W, and the change of stored heat, J.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepFlows {
    pub delivered: f64,
    pub solar: f64,
    pub gains: f64,
    pub envelope_loss: f64,
    pub infiltration_loss: f64,
    pub storage_change: f64,
}

#[derive(Debug, Clone)]
pub struct Engine {
    surfaces: Vec<SurfaceSim>,
    zones: Vec<ZoneSim>,
    circuits: Vec<CircuitSim>,
    ground: f64,
    upward: f64,
    downward: f64,
    wall: f64,
    window: f64,
    water_cp: f64,
}

const MAX_ACTIVE_SET_PASSES: usize = 60;
const MAX_SETTLE_PASSES: usize = 20;

impl Engine {
    pub fn new(model: &BuildingModel) -> Result<Self> {
        let sim = &model.simulation;
        let plant = &model.plant;
        let factors = sim.solar_orientation_factors;

        let mut surfaces = Vec::with_capacity(model.surfaces.len());
        for s in &model.surfaces {
            let c = model.construction_of(s);
            let grid = discretize(c, sim.node_size, s.panel_layer_index)?;
            let film = |r: f64| (r > 0.0).then(|| 1.0 / r);
            let outside = match s.boundary {
                Boundary::Outdoor => Outside::Outdoor(
                    film(c.outside_film_resistance).unwrap_or(sim.convection.exterior),
                ),
                Boundary::Ground => Outside::Ground(film(c.outside_film_resistance)),
                Boundary::Adiabatic => Outside::Adiabatic,
                Boundary::AdjacentZone(z) => Outside::Zone(z),
            };
            let (inside_tilt, outside_tilt) = if c.is_glazing() {
                (Tilt::Window, Tilt::Window)
            } else {
                match s.orientation {
                    Orientation::Floor => (Tilt::Floor, Tilt::Ceiling),
                    Orientation::Ceiling => (Tilt::Ceiling, Tilt::Floor),
                    _ => (Tilt::Wall, Tilt::Wall),
                }
            };
            let n = grid.len();
            let temps = vec![model.zones[s.zone].setpoint; n];
            let sys = StepSystem::new(&grid, &temps, 0.0);
            surfaces.push(SurfaceSim {
                area: s.area,
                emissivity: s.emissivity,
                zone: s.zone,
                inside_tilt,
                outside,
                outside_tilt,
                branch: None,
                grid,
                temps,
                hc_in: 0.0,
                hr_in: 0.0,
                hc_out: 0.0,
                hr_out: 0.0,
                solar: 0.0,
                mode: Mode::Off,
                sys,
                lu: Tridiagonal::default(),
                x0: vec![0.0; n],
                r_in: vec![0.0; n],
                r_out: vec![0.0; n],
                r_panel: vec![0.0; n],
            });
        }

        let mut zones = Vec::with_capacity(model.zones.len());
        for (zi, z) in model.zones.iter().enumerate() {
            let faces = model.enclosure(zi);
            if faces.len() < 2 {
                return Err(Error::Configuration(format!(
                    "zone '{}' needs at least two faces for radiant exchange",
                    z.id
                )));
            }
            let floors: Vec<usize> = z
                .surfaces
                .iter()
                .copied()
                .filter(|&s| {
                    model.surfaces[s].orientation == Orientation::Floor
                        && !model.construction_of(&model.surfaces[s]).is_glazing()
                })
                .collect();
            let floor_area = floors.iter().map(|&s| model.surfaces[s].area).sum();
            let solar_aperture = z
                .surfaces
                .iter()
                .map(|&s| &model.surfaces[s])
                .filter_map(|s| {
                    let g = model.construction_of(s).glazing?;
                    let f = match s.orientation {
                        Orientation::WallNorth => factors.north,
                        Orientation::WallEast => factors.east,
                        Orientation::WallSouth => factors.south,
                        Orientation::WallWest => factors.west,
                        _ => 1.0,
                    };
                    Some(s.area * g.solar_heat_gain_coefficient * f)
                })
                .sum();
            zones.push(ZoneSim {
                air: z.setpoint,
                capacity: AIR_DENSITY * AIR_SPECIFIC_HEAT * z.air_volume,
                infiltration: model.infiltration_conductance(zi),
                gains: z.internal_gains,
                faces,
                floors,
                floor_area,
                solar_aperture,
            });
        }

        let cp = plant.water_specific_heat;
        let mut circuits = Vec::with_capacity(model.panel_system.circuits.len());
        for (ci, c) in model.panel_system.circuits.iter().enumerate() {
            let load: f64 = c.served_zones.iter().map(|&z| model.static_design_load(z)).sum();
            // at least 1 W so that every circuit can move heat
            let mass_flow = load.max(1.0) / (cp * plant.design_delta_t);
            let length = c.pipe_length();
            let mut conductance = 0.0;
            for b in &c.branches {
                if length <= 0.0 || b.pipe_length <= 0.0 {
                    continue;
                }
                let rate = mass_flow * b.pipe_length / length * cp;
                let k = rate * effectiveness(plant.pipe_conductance * b.pipe_length, rate);
                surfaces[b.surface].branch = Some((ci, k));
                conductance += k;
            }
            let setpoint = c.served_zones.iter().map(|&z| model.zones[z].setpoint).sum::<f64>()
                / c.served_zones.len() as f64;
            circuits.push(CircuitSim {
                id: c.id.clone(),
                served: c.served_zones.clone(),
                mass_flow,
                branches: c.branches.iter().map(|b| b.surface).collect(),
                setpoint,
                on: false,
                supply: plant.inlet_temperature,
                ret: plant.inlet_temperature,
                heat: 0.0,
                conductance,
            });
        }

        let conv = sim.convection;
        let mut engine = Engine {
            surfaces,
            zones,
            circuits,
            ground: plant.ground_temperature,
            upward: conv.upward,
            downward: conv.downward,
            wall: conv.wall,
            window: conv.window,
            water_cp: cp,
        };
        for s in &mut engine.surfaces {
            if let Outside::Ground(None) = s.outside {
                s.temps[0] = engine.ground;
            }
        }
        Ok(engine)
    }

    pub fn circuits(&self) -> &[CircuitSim] {
        &self.circuits
    }

    pub fn zone_count(&self) -> usize {
        self.zones.len()
    }

    pub fn air_temperature(&self, zone: usize) -> f64 {
        self.zones[zone].air
    }

    pub fn face_temperature(&self, surface: usize, face: Face) -> f64 {
        let s = &self.surfaces[surface];
        match face {
            Face::Inside => s.temps[s.grid.inside()],
            Face::Outside => s.temps[0],
        }
    }

    pub fn panel_temperature(&self, surface: usize) -> Option<f64> {
        let s = &self.surfaces[surface];
        s.grid.panel_node.map(|p| s.temps[p])
    }

    /// Heat stored in surfaces and air relative to 0 °C, J.
    pub fn stored_energy(&self) -> f64 {
        let walls: f64 = self
            .surfaces
            .iter()
            .map(|s| s.area * s.grid.stored_energy(&s.temps))
            .sum();
        let air: f64 = self.zones.iter().map(|z| z.capacity * z.air).sum();
        walls + air
    }

    /// Sum of circuit design flows, kg/s.
    pub fn design_flow(&self) -> f64 {
        self.circuits.iter().map(|c| c.mass_flow).sum()
    }

    fn mean_air(&self, c: &CircuitSim) -> f64 {
        c.served.iter().map(|&z| self.zones[z].air).sum::<f64>() / c.served.len() as f64
    }

    /// Update every circuit's on flag from the mean air temperature of the
    /// zones it serves.
    pub fn update_thermostats(&mut self, deadband: f64) {
        for i in 0..self.circuits.len() {
            let air = self.mean_air(&self.circuits[i]);
            let c = &mut self.circuits[i];
            c.on = super::zone::thermostat(air, c.setpoint, deadband, c.on);
        }
    }

    /// Set every circuit off.
    pub fn reset_thermostats(&mut self) {
        for c in &mut self.circuits {
            c.on = false;
        }
    }

    fn convection(&self, tilt: Tilt, face: f64, air: f64) -> f64 {
        match tilt {
            Tilt::Wall => self.wall,
            Tilt::Window => self.window,
            Tilt::Floor if face > air => self.upward,
            Tilt::Floor => self.downward,
            Tilt::Ceiling if face > air => self.downward,
            Tilt::Ceiling => self.upward,
        }
    }

    /// Film coefficients from the current state and solar absorbed per face.
    fn prepare_coefficients(&mut self, ghi: f64) -> Result<()> {
        for s in 0..self.surfaces.len() {
            let (zone, tilt) = (self.surfaces[s].zone, self.surfaces[s].inside_tilt);
            let face = self.face_temperature(s, Face::Inside);
            self.surfaces[s].hc_in = self.convection(tilt, face, self.zones[zone].air);
            self.surfaces[s].solar = 0.0;
            if let Outside::Zone(z) = self.surfaces[s].outside {
                let face = self.face_temperature(s, Face::Outside);
                let tilt = self.surfaces[s].outside_tilt;
                self.surfaces[s].hc_out = self.convection(tilt, face, self.zones[z].air);
            }
        }
        for z in 0..self.zones.len() {
            let faces: Vec<RadiantFace> = self.zones[z]
                .faces
                .iter()
                .map(|&(s, f)| RadiantFace {
                    area: self.surfaces[s].area,
                    emissivity: self.surfaces[s].emissivity,
                    temperature: self.face_temperature(s, f),
                })
                .collect();
            let h = star_coefficients(&faces)?;
            for (&(s, f), h) in self.zones[z].faces.iter().zip(h) {
                match f {
                    Face::Inside => self.surfaces[s].hr_in = h,
                    Face::Outside => self.surfaces[s].hr_out = h,
                }
            }
            let zone = &self.zones[z];
            if zone.floor_area > 0.0 {
                let flux = zone.solar_aperture * ghi / zone.floor_area;
                for &s in &zone.floors {
                    self.surfaces[s].solar = flux;
                }
            }
        }
        Ok(())
    }

    /// Build, factor and solve one surface for its current mode.
    fn solve_surface(&mut self, s: usize, inputs: &StepInputs) -> Result<()> {
        let inv_dt = inputs.dt.map_or(0.0, |dt| 1.0 / dt);
        let ground = self.ground;
        let sf = &mut self.surfaces[s];
        let n = sf.grid.len();
        let inside = n - 1;
        sf.sys.reset(&sf.grid, &sf.temps, inv_dt);
        sf.sys.apply(
            inside,
            FaceCondition::Film {
                coefficient: sf.hc_in + sf.hr_in,
                temperature: 0.0,
            },
        );
        sf.sys.rhs[inside] += sf.solar;
        match sf.outside {
            Outside::Outdoor(g) => sf.sys.apply(
                0,
                FaceCondition::Film {
                    coefficient: g,
                    temperature: inputs.outdoor,
                },
            ),
            Outside::Ground(Some(g)) => sf.sys.apply(
                0,
                FaceCondition::Film {
                    coefficient: g,
                    temperature: ground,
                },
            ),
            Outside::Ground(None) => sf.sys.apply(0, FaceCondition::Fixed(ground)),
            Outside::Adiabatic => {}
            Outside::Zone(_) => sf.sys.apply(
                0,
                FaceCondition::Film {
                    coefficient: sf.hc_out + sf.hr_out,
                    temperature: 0.0,
                },
            ),
        }
        let panel = match (sf.grid.panel_node, sf.branch) {
            (Some(p), Some((_, k))) if k > 0.0 => Some((p, k / sf.area)),
            _ => None,
        };
        if let Some((p, k)) = panel {
            match sf.mode {
                Mode::Off => {}
                Mode::Fixed(t) => {
                    sf.sys.b[p] += k;
                    sf.sys.rhs[p] += k * t;
                }
                Mode::Free(_) => sf.sys.b[p] += k,
            }
        }
        sf.lu.factor(&sf.sys.a, &sf.sys.b, &sf.sys.c)?;
        sf.x0.copy_from_slice(&sf.sys.rhs);
        sf.lu.solve(&mut sf.x0);

        unit_response(&sf.lu, &mut sf.r_in, inside);
        if let Outside::Zone(_) = sf.outside {
            unit_response(&sf.lu, &mut sf.r_out, 0);
        }
        if let (Some((p, _)), Mode::Free(_)) = (panel, sf.mode) {
            unit_response(&sf.lu, &mut sf.r_panel, p);
        }
        Ok(())
    }

    /// Calls `f(unknown, coefficient)` for every unknown node `i` of surface
    /// `s` depends on, and returns the constant part.
    fn node_terms(&self, s: usize, i: usize, mut f: impl FnMut(usize, f64)) -> f64 {
        let nz = self.zones.len();
        let sf = &self.surfaces[s];
        f(sf.zone, sf.r_in[i] * sf.hc_in);
        f(nz + sf.zone, sf.r_in[i] * sf.hr_in);
        if let Outside::Zone(z) = sf.outside {
            f(z, sf.r_out[i] * sf.hc_out);
            f(nz + z, sf.r_out[i] * sf.hr_out);
        }
        if let (Mode::Free(slot), Some((_, k))) = (sf.mode, sf.branch) {
            f(2 * nz + slot, sf.r_panel[i] * k / sf.area);
        }
        sf.x0[i]
    }

    fn node_value(&self, s: usize, i: usize, u: &DVector<f64>) -> f64 {
        let mut v = 0.0;
        let c = self.node_terms(s, i, |j, a| v += a * u[j]);
        c + v
    }

    fn face_node(&self, s: usize, f: Face) -> usize {
        match f {
            Face::Inside => self.surfaces[s].grid.inside(),
            Face::Outside => 0,
        }
    }

    fn assemble_and_solve(
        &self,
        inputs: &StepInputs,
        modes: &[Mode],
        slots: usize,
        capacity: Option<f64>,
    ) -> Result<DVector<f64>> {
        let nz = self.zones.len();
        let n = 2 * nz + slots;
        let mut a = DMatrix::<f64>::zeros(n, n);
        let mut rhs = DVector::<f64>::zeros(n);
        let inv_dt = inputs.dt.map_or(0.0, |dt| 1.0 / dt);

        for (z, zone) in self.zones.iter().enumerate() {
            let store = zone.capacity * inv_dt;
            a[(z, z)] += store + zone.infiltration;
            rhs[z] += store * zone.air + zone.infiltration * inputs.outdoor + zone.gains;
            if zone.floor_area <= 0.0 {
                rhs[z] += zone.solar_aperture * inputs.global_horizontal;
            }
            let m = nz + z;
            for &(s, f) in &zone.faces {
                let sf = &self.surfaces[s];
                let (hc, hr) = match f {
                    Face::Inside => (sf.hc_in, sf.hr_in),
                    Face::Outside => (sf.hc_out, sf.hr_out),
                };
                let (ha, g) = (hc * sf.area, hr * sf.area);
                let node = self.face_node(s, f);
                a[(z, z)] += ha;
                a[(m, m)] -= g;
                let c = self.node_terms(s, node, |j, coef| {
                    a[(z, j)] -= ha * coef;
                    a[(m, j)] += g * coef;
                });
                rhs[z] += ha * c;
                rhs[m] -= g * c;
            }
        }

        if let (Some(cap), true) = (capacity, slots > 0) {
            rhs[2 * nz] = cap;
        }
        for (ci, c) in self.circuits.iter().enumerate() {
            let Mode::Free(slot) = modes[ci] else { continue };
            let row = 2 * nz + slot;
            match capacity {
                None => {
                    let w = 1.0 / c.served.len() as f64;
                    for &z in &c.served {
                        a[(row, z)] += w;
                    }
                    rhs[row] = c.setpoint;
                }
                Some(_) => {
                    for &s in &c.branches {
                        let Some((_, k)) = self.surfaces[s].branch else { continue };
                        let Some(p) = self.surfaces[s].grid.panel_node else { continue };
                        a[(row, row)] += k;
                        let konst = self.node_terms(s, p, |j, coef| a[(row, j)] -= k * coef);
                        rhs[row] += k * konst;
                    }
                }
            }
        }

        a.lu()
            .solve(&rhs)
            .filter(|u| u.iter().all(|x| x.is_finite()))
            .ok_or_else(|| Error::Numerical("zone heat balance is singular".into()))
    }

    /// Supply temperature and heat of circuit `ci` for solution `u`.
    fn circuit_heat(&self, ci: usize, mode: Mode, u: &DVector<f64>) -> (f64, f64) {
        let nz = self.zones.len();
        let supply = match mode {
            Mode::Off => return (f64::NAN, 0.0),
            Mode::Fixed(t) => t,
            Mode::Free(slot) => u[2 * nz + slot],
        };
        let mut q = 0.0;
        for &s in &self.circuits[ci].branches {
            let (Some((_, k)), Some(p)) = (self.surfaces[s].branch, self.surfaces[s].grid.panel_node) else {
                continue;
            };
            q += k * (supply - self.node_value(s, p, u));
        }
        (supply, q)
    }

    fn set_modes(&mut self, modes: &[Mode], inputs: &StepInputs, first: bool) -> Result<()> {
        for (ci, &mode) in modes.iter().enumerate() {
            for b in 0..self.circuits[ci].branches.len() {
                let s = self.circuits[ci].branches[b];
                if first || self.surfaces[s].mode != mode {
                    self.surfaces[s].mode = mode;
                    if !first {
                        self.solve_surface(s, inputs)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Steady state for constant conditions. Film coefficients depend on the
    /// face temperatures, so the steady solve is repeated until the air
    /// temperatures stop moving.
    pub fn settle(&mut self, outdoor: f64, global_horizontal: f64, control: Control) -> Result<StepFlows> {
        let inputs = StepInputs {
            outdoor,
            global_horizontal,
            dt: None,
        };
        let mut flows = self.step(&inputs, control)?;
        for _ in 0..MAX_SETTLE_PASSES {
            let before: Vec<f64> = self.zones.iter().map(|z| z.air).collect();
            flows = self.step(&inputs, control)?;
            let moved = self
                .zones
                .iter()
                .zip(&before)
                .map(|(z, b)| (z.air - b).abs())
                .fold(0.0, f64::max);
            if moved < 1e-9 {
                break;
            }
        }
        Ok(flows)
    }

    /// Advance the whole building by one step.
    pub fn step(&mut self, inputs: &StepInputs, control: Control) -> Result<StepFlows> {
        if let Some(dt) = inputs.dt {
            if !(dt > 0.0) {
                return Err(Error::Numerical(format!("time step must be positive, got {dt}")));
            }
        }
        self.prepare_coefficients(inputs.global_horizontal)?;
        let nc = self.circuits.len();
        let usable: Vec<bool> = self.circuits.iter().map(|c| c.conductance > 0.0).collect();

        let mut modes: Vec<Mode> = match control {
            Control::Thermostat { supply, .. } => (0..nc)
                .map(|i| if usable[i] && self.circuits[i].on { Mode::Fixed(supply) } else { Mode::Off })
                .collect(),
            Control::Ideal { .. } => {
                let mut slot = 0;
                (0..nc)
                    .map(|i| {
                        if usable[i] {
                            slot += 1;
                            Mode::Free(slot - 1)
                        } else {
                            Mode::Off
                        }
                    })
                    .collect()
            }
        };
        self.set_modes(&modes, inputs, true)?;
        for s in 0..self.surfaces.len() {
            self.solve_surface(s, inputs)?;
        }

        let mut capacity_row = None;
        let mut u = DVector::zeros(0);
        for pass in 0.. {
            let slots = modes.iter().filter(|m| matches!(m, Mode::Free(_))).count();
            let slots = if capacity_row.is_some() { slots.min(1) } else { slots };
            u = self.assemble_and_solve(inputs, &modes, slots, capacity_row)?;
            if pass >= MAX_ACTIVE_SET_PASSES {
                break;
            }
            let mut changed = false;
            match control {
                Control::Thermostat { supply, capacity } => {
                    let mut total = 0.0;
                    for ci in 0..nc {
                        let (_, q) = self.circuit_heat(ci, modes[ci], &u);
                        if modes[ci] != Mode::Off && q < 0.0 {
                            modes[ci] = Mode::Off;
                            changed = true;
                        }
                        total += q.max(0.0);
                    }
                    if !changed && capacity_row.is_none() {
                        if let Some(cap) = capacity {
                            if total > cap * (1.0 + 1e-12) {
                                capacity_row = Some(cap);
                                for m in modes.iter_mut() {
                                    if *m == Mode::Fixed(supply) {
                                        *m = Mode::Free(0);
                                    }
                                }
                                changed = true;
                            }
                        }
                    }
                }
                Control::Ideal { max_supply } => {
                    let mut next_slot = 0;
                    let mut next = modes.clone();
                    for ci in 0..nc {
                        if !usable[ci] {
                            continue;
                        }
                        let air = self.circuits[ci]
                            .served
                            .iter()
                            .map(|&z| u[z])
                            .sum::<f64>()
                            / self.circuits[ci].served.len() as f64;
                        let setpoint = self.circuits[ci].setpoint;
                        let (supply, q) = self.circuit_heat(ci, modes[ci], &u);
                        let free = match modes[ci] {
                            Mode::Free(_) => supply <= max_supply && q >= 0.0,
                            Mode::Fixed(_) => air > setpoint + 1e-9,
                            Mode::Off => air < setpoint - 1e-9,
                        };
                        next[ci] = if free {
                            next_slot += 1;
                            Mode::Free(next_slot - 1)
                        } else {
                            match modes[ci] {
                                Mode::Free(_) if supply > max_supply => Mode::Fixed(max_supply),
                                Mode::Free(_) => Mode::Off,
                                m => m,
                            }
                        };
                    }
                    let same_shape = next
                        .iter()
                        .zip(&modes)
                        .all(|(a, b)| std::mem::discriminant(a) == std::mem::discriminant(b));
                    changed = !same_shape;
                    modes = next;
                }
            }
            if !changed {
                break;
            }
            self.set_modes(&modes, inputs, false)?;
        }

        self.finish(inputs, &modes, &u)
    }

    /// Recover surface fields, update state and report heat flows.
    fn finish(&mut self, inputs: &StepInputs, modes: &[Mode], u: &DVector<f64>) -> Result<StepFlows> {
        let nz = self.zones.len();
        let before = self.stored_energy();
        let mut flows = StepFlows::default();

        for ci in 0..self.circuits.len() {
            let (supply, q) = self.circuit_heat(ci, modes[ci], u);
            let rate = self.circuits[ci].mass_flow * self.water_cp;
            let c = &mut self.circuits[ci];
            if modes[ci] == Mode::Off || q <= 0.0 {
                c.heat = 0.0;
                c.supply = if supply.is_nan() { c.supply } else { supply };
                c.ret = c.supply;
            } else {
                c.heat = q;
                c.supply = supply;
                c.ret = supply - q / rate;
            }
            flows.delivered += q;
        }

        let mut next: Vec<Vec<f64>> = Vec::with_capacity(self.surfaces.len());
        for s in 0..self.surfaces.len() {
            let n = self.surfaces[s].grid.len();
            next.push((0..n).map(|i| self.node_value(s, i, u)).collect());
        }
        for (s, temps) in next.into_iter().enumerate() {
            let sf = &mut self.surfaces[s];
            let outer = match sf.outside {
                Outside::Outdoor(g) => g * (temps[0] - inputs.outdoor),
                Outside::Ground(Some(g)) => g * (temps[0] - self.ground),
                Outside::Ground(None) => {
                    sf.grid.conductance[0] * (temps[1] - temps[0])
                }
                Outside::Adiabatic | Outside::Zone(_) => 0.0,
            };
            flows.envelope_loss += outer * sf.area;
            flows.solar += sf.solar * sf.area;
            sf.temps = temps;
        }
        for z in 0..nz {
            let zone = &mut self.zones[z];
            zone.air = u[z];
            flows.infiltration_loss += zone.infiltration * (zone.air - inputs.outdoor);
            flows.gains += zone.gains;
            if zone.floor_area <= 0.0 {
                flows.solar += zone.solar_aperture * inputs.global_horizontal;
            }
        }
        flows.storage_change = self.stored_energy() - before;
        if !flows.delivered.is_finite() || !flows.storage_change.is_finite() {
            return Err(Error::Numerical("non-finite temperatures".into()));
        }
        Ok(flows)
    }
}

/// Response of the factored system to a unit load at `node`.
fn unit_response(lu: &Tridiagonal, out: &mut [f64], node: usize) {
    out.fill(0.0);
    out[node] = 1.0;
    lu.solve(out);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::load_building;

    const BOX_ROOM: &str = include_str!("../../tests/fixtures/box_room.json");

    fn room() -> BuildingModel {
        load_building(BOX_ROOM).unwrap()
    }

    fn at(outdoor: f64, dt: Option<f64>) -> StepInputs {
        StepInputs {
            outdoor,
            global_horizontal: 0.0,
            dt,
        }
    }

    fn balance(f: &StepFlows, dt: f64) -> f64 {
        (f.delivered + f.solar + f.gains - f.envelope_loss - f.infiltration_loss) * dt - f.storage_change
    }

    #[test]
    fn sealed_room_stays_put() {
        let mut m = room();
        m.zones[0].infiltration_ach = 0.0;
        let mut e = Engine::new(&m).unwrap();
        let off = Control::Thermostat { supply: 37.0, capacity: None };
        e.settle(-10.0, 0.0, Control::Ideal { max_supply: 37.0 }).unwrap();
        let t0 = e.air_temperature(0);
        for _ in 0..10 {
            let f = e.step(&at(-10.0, Some(600.0)), off).unwrap();
            assert_eq!(f.delivered, 0.0);
        }
        assert!((e.air_temperature(0) - t0).abs() < 1e-9);
    }

    #[test]
    fn ideal_control_holds_setpoint_against_known_loss() {
        let mut e = Engine::new(&room()).unwrap();
        let f = e.settle(-15.0, 0.0, Control::Ideal { max_supply: 37.0 }).unwrap();
        assert!((e.air_temperature(0) - 20.0).abs() < 1e-6);
        // infiltration conductance 100 W/K, 35 K
        assert!((f.delivered - 3500.0).abs() < 1e-3, "{}", f.delivered);
        let c = &e.circuits()[0];
        assert!(c.ret < c.supply && c.supply <= 37.0);
        assert!(c.ret >= e.panel_temperature(0).unwrap() - 1e-9);
    }

    #[test]
    fn transient_steps_conserve_energy() {
        let mut m = room();
        m.surfaces[2].boundary = Boundary::Outdoor;
        let mut e = Engine::new(&m).unwrap();
        e.settle(5.0, 0.0, Control::Ideal { max_supply: 37.0 }).unwrap();
        e.reset_thermostats();
        let control = Control::Thermostat { supply: 37.0, capacity: None };
        for k in 0..200 {
            e.update_thermostats(0.5);
            let outdoor = -5.0 + 5.0 * (k as f64 / 20.0).sin();
            let f = e.step(&at(outdoor, Some(900.0)), control).unwrap();
            let scale = (f.delivered.abs() + f.envelope_loss.abs() + f.infiltration_loss.abs()) * 900.0;
            assert!(balance(&f, 900.0).abs() <= 1e-9 * scale.max(1.0), "step {k}");
        }
    }

    #[test]
    fn thermostat_follows_the_band() {
        let mut e = Engine::new(&room()).unwrap();
        e.settle(0.0, 0.0, Control::Ideal { max_supply: 37.0 }).unwrap();
        e.reset_thermostats();
        let control = Control::Thermostat { supply: 37.0, capacity: None };
        let mut saw_on = false;
        for _ in 0..500 {
            e.update_thermostats(0.5);
            let air = e.air_temperature(0);
            let on = e.circuits()[0].on;
            if air < 19.5 {
                assert!(on);
            }
            if air > 20.5 {
                assert!(!on);
            }
            saw_on |= on;
            e.step(&at(-10.0, Some(600.0)), control).unwrap();
        }
        assert!(saw_on);
    }

    #[test]
    fn capacity_limits_delivered_heat() {
        let mut e = Engine::new(&room()).unwrap();
        e.settle(-15.0, 0.0, Control::Ideal { max_supply: 37.0 }).unwrap();
        let cap = 1500.0;
        let control = Control::Thermostat { supply: 37.0, capacity: Some(cap) };
        for _ in 0..50 {
            e.update_thermostats(0.5);
            let f = e.step(&at(-15.0, Some(600.0)), control).unwrap();
            assert!(f.delivered <= cap * (1.0 + 1e-9), "{}", f.delivered);
        }
        assert!(e.air_temperature(0) < 20.0);
    }

    #[test]
    fn bad_step_is_rejected() {
        let mut e = Engine::new(&room()).unwrap();
        let control = Control::Ideal { max_supply: 37.0 };
        assert!(matches!(e.step(&at(0.0, Some(0.0)), control), Err(Error::Numerical(_))));
    }
}
