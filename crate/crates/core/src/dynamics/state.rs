use crate::curve::VesicleCurve;
use crate::error::{Error, Result};

/// Vesicle positions, tensions and wall density at one instant.
#[derive(Debug, Clone)]
pub struct SuspensionState {
    pub vesicles: Vec<VesicleCurve>,
    pub tensions: Vec<Vec<f64>>,
    pub wall_density: Option<Vec<f64>>,
    pub time: f64,
}

impl SuspensionState {
    /// Zero tensions, no wall density, `t = 0`.
    pub fn new(vesicles: Vec<VesicleCurve>) -> Self {
        let tensions = vesicles.iter().map(|v| vec![0.0; v.n()]).collect();
        Self {
            vesicles,
            tensions,
            wall_density: None,
            time: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.vesicles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vesicles.is_empty()
    }

    /// Signed areas and lengths of every vesicle.
    pub fn areas_lengths(&self) -> Result<Vec<(f64, f64)>> {
        self.vesicles
            .iter()
            .map(|v| v.geometry().map(|g| (g.area, g.length)))
            .collect()
    }

    /// Checks that vesicles are simple, positively oriented, mutually
    /// disjoint, and (if given) inside the walls.
    pub fn check_admissible(&self, walls: Option<&crate::potentials::WallGeometry>) -> Result<()> {
        for (j, v) in self.vesicles.iter().enumerate() {
            v.validate()
                .map_err(|e| Error::Overlap(format!("vesicle {j}: {e}")))?;
            for (k, w) in self.vesicles.iter().enumerate().take(j) {
                if v.overlaps(w) {
                    return Err(Error::Overlap(format!("vesicles {k} and {j}")));
                }
            }
            if let Some(walls) = walls {
                if !walls.encloses(v) {
                    return Err(Error::Overlap(format!("vesicle {j} crosses a wall")));
                }
            }
        }
        Ok(())
    }

    /// Linear combination `Σ c_i s_i` of positions (unchecked curves); tensions
    /// and wall density are taken from `states[0]`.
    pub fn combine(states: &[&SuspensionState], coeffs: &[f64]) -> Result<Self> {
        let first = states[0];
        let mut vesicles = Vec::with_capacity(first.len());
        for j in 0..first.len() {
            let n = first.vesicles[j].n();
            let mut x = vec![0.0; n];
            let mut y = vec![0.0; n];
            for (s, &c) in states.iter().zip(coeffs) {
                let v = &s.vesicles[j];
                if v.n() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: v.n(),
                    });
                }
                for i in 0..n {
                    x[i] += c * v.x()[i];
                    y[i] += c * v.y()[i];
                }
            }
            vesicles.push(VesicleCurve::from_raw(x, y)?);
        }
        Ok(Self {
            vesicles,
            tensions: first.tensions.clone(),
            wall_density: first.wall_density.clone(),
            time: first.time,
        })
    }
}
