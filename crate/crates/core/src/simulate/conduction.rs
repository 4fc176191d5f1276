//! One-dimensional finite-volume conduction through a construction.
//!
//! Grids are per square metre of construction. Node 0 is the outside face,
//! the last node the inside face; both faces are massless. A massless panel
//! node sits at the outside boundary of the layer that hosts the pipes.

use crate::error::{Error, Result};
use crate::model::{Construction, GLAZING_INSIDE_FILM, GLAZING_OUTSIDE_FILM};

#[derive(Debug, Clone, PartialEq)]
pub struct NodeGrid {
    /// J/(m²K) per node; zero for the face and panel nodes.
    pub capacity: Vec<f64>,
    /// W/(m²K) between node i and i + 1.
    pub conductance: Vec<f64>,
    pub panel_node: Option<usize>,
    /// Capacitive nodes per layer.
    pub layer_nodes: Vec<usize>,
}

impl NodeGrid {
    pub fn len(&self) -> usize {
        self.capacity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.capacity.is_empty()
    }

    pub fn inside(&self) -> usize {
        self.capacity.len() - 1
    }

    /// Heat stored relative to 0 °C, J/m².
    pub fn stored_energy(&self, temps: &[f64]) -> f64 {
        self.capacity.iter().zip(temps).map(|(c, t)| c * t).sum()
    }
}

/// Number of control volumes for a layer: the smallest count whose volumes
/// are no thicker than `target`, and at least one.
fn volumes(thickness: f64, target: f64) -> usize {
    ((thickness / target) - 1e-9).ceil().max(1.0) as usize
}

/// Split every layer of `c` into control volumes no thicker than
/// `target_node_size`. Glazing becomes two massless face nodes.
pub fn discretize(c: &Construction, target_node_size: f64, panel_layer: Option<usize>) -> Result<NodeGrid> {
    if !(target_node_size > 0.0) {
        return Err(Error::Numerical(format!(
            "node size must be positive, got {target_node_size}"
        )));
    }
    if let Some(g) = c.glazing {
        let pane = 1.0 / g.u_value - GLAZING_INSIDE_FILM - GLAZING_OUTSIDE_FILM;
        if !(pane > 0.0) {
            return Err(Error::Numerical(format!(
                "glazing '{}' has no resistance left between its films",
                c.name
            )));
        }
        return Ok(NodeGrid {
            capacity: vec![0.0, 0.0],
            conductance: vec![1.0 / pane],
            panel_node: None,
            layer_nodes: Vec::new(),
        });
    }

    if c.layers.is_empty() {
        return Err(Error::Numerical(format!("construction '{}' has no layers", c.name)));
    }
    let mut capacity = vec![0.0];
    let mut conductance = Vec::new();
    let mut layer_nodes = Vec::with_capacity(c.layers.len());
    let mut panel_node = None;
    // resistance from the last node placed to the current position
    let mut pending = 0.0;
    for (i, layer) in c.layers.iter().enumerate() {
        if panel_layer == Some(i) {
            if i == 0 {
                panel_node = Some(0);
            } else {
                conductance.push(1.0 / pending);
                capacity.push(0.0);
                panel_node = Some(capacity.len() - 1);
                pending = 0.0;
            }
        }
        let n = volumes(layer.thickness, target_node_size);
        let dx = layer.thickness / n as f64;
        let half = 0.5 * dx / layer.conductivity;
        for _ in 0..n {
            pending += half;
            conductance.push(1.0 / pending);
            capacity.push(layer.density * layer.specific_heat * dx);
            pending = half;
        }
        layer_nodes.push(n);
    }
    conductance.push(1.0 / pending);
    capacity.push(0.0);
    Ok(NodeGrid {
        capacity,
        conductance,
        panel_node,
        layer_nodes,
    })
}

/// LU factors of a tridiagonal matrix (Thomas algorithm), reusable for
/// several right-hand sides.
#[derive(Debug, Clone, Default)]
pub struct Tridiagonal {
    sub: Vec<f64>,
    /// Modified super-diagonal.
    sup: Vec<f64>,
    /// Pivots.
    pivot: Vec<f64>,
}

impl Tridiagonal {
    /// Factor the matrix with sub-diagonal `a` (a[0] unused), diagonal `b` and
    /// super-diagonal `c` (c[n-1] unused).
    pub fn factor(&mut self, a: &[f64], b: &[f64], c: &[f64]) -> Result<()> {
        let n = b.len();
        self.sub.clear();
        self.sub.extend_from_slice(a);
        self.sup.resize(n, 0.0);
        self.pivot.resize(n, 0.0);
        let mut prev_sup = 0.0;
        for i in 0..n {
            let p = b[i] - if i > 0 { a[i] * prev_sup } else { 0.0 };
            let scale = b[i].abs() + a[i].abs() + c[i].abs();
            if !(p.abs() > 1e-12 * scale) || !p.is_finite() {
                return Err(Error::Numerical(format!(
                    "singular conduction matrix at node {i} (no conductance or capacity)"
                )));
            }
            self.pivot[i] = p;
            prev_sup = if i + 1 < n { c[i] / p } else { 0.0 };
            self.sup[i] = prev_sup;
        }
        Ok(())
    }

    /// Solve in place.
    pub fn solve(&self, d: &mut [f64]) {
        let n = d.len();
        d[0] /= self.pivot[0];
        for i in 1..n {
            d[i] = (d[i] - self.sub[i] * d[i - 1]) / self.pivot[i];
        }
        for i in (0..n - 1).rev() {
            d[i] -= self.sup[i] * d[i + 1];
        }
    }
}

/// Condition on one face of a stand-alone conduction step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaceCondition {
    Adiabatic,
    /// Film of `coefficient` W/(m²K) to a fluid at `temperature` °C.
    Film { coefficient: f64, temperature: f64 },
    /// Face held at a temperature, °C.
    Fixed(f64),
    /// Heat flux into the face, W/m².
    Flux(f64),
}

/// Matrix rows of one implicit step before boundary terms are added.
#[derive(Debug, Clone)]
pub(crate) struct StepSystem {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl StepSystem {
    /// Conduction and storage terms. `inv_dt` is zero for a steady solve.
    pub fn new(grid: &NodeGrid, temps: &[f64], inv_dt: f64) -> Self {
        let n = grid.len();
        let mut s = StepSystem {
            a: vec![0.0; n],
            b: vec![0.0; n],
            c: vec![0.0; n],
            rhs: vec![0.0; n],
        };
        s.reset(grid, temps, inv_dt);
        s
    }

    pub fn reset(&mut self, grid: &NodeGrid, temps: &[f64], inv_dt: f64) {
        let n = grid.len();
        for i in 0..n {
            let store = grid.capacity[i] * inv_dt;
            let left = if i > 0 { grid.conductance[i - 1] } else { 0.0 };
            let right = if i + 1 < n { grid.conductance[i] } else { 0.0 };
            self.a[i] = -left;
            self.c[i] = -right;
            self.b[i] = store + left + right;
            self.rhs[i] = store * temps[i];
        }
    }

    pub fn apply(&mut self, node: usize, cond: FaceCondition) {
        match cond {
            FaceCondition::Adiabatic => {}
            FaceCondition::Film {
                coefficient,
                temperature,
            } => {
                self.b[node] += coefficient;
                self.rhs[node] += coefficient * temperature;
            }
            FaceCondition::Fixed(t) => {
                self.a[node] = 0.0;
                self.c[node] = 0.0;
                self.b[node] = 1.0;
                self.rhs[node] = t;
            }
            FaceCondition::Flux(q) => self.rhs[node] += q,
        }
    }
}

/// Advance `temps` by one backward-Euler step of `dt` seconds.
///
/// `source` is the heat injected at the panel node in W per m² of
/// construction; it is ignored when the grid has no panel node.
pub fn conduction_step(
    grid: &NodeGrid,
    temps: &mut [f64],
    outside: FaceCondition,
    inside: FaceCondition,
    source: f64,
    dt: f64,
) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::Numerical(format!("time step must be positive, got {dt}")));
    }
    let mut sys = StepSystem::new(grid, temps, 1.0 / dt);
    sys.apply(0, outside);
    sys.apply(grid.inside(), inside);
    if let Some(p) = grid.panel_node {
        sys.rhs[p] += source;
    }
    let mut lu = Tridiagonal::default();
    lu.factor(&sys.a, &sys.b, &sys.c)?;
    lu.solve(&mut sys.rhs);
    temps.copy_from_slice(&sys.rhs);
    Ok(())
}
