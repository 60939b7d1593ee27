//! Deployment region, channel and scenario parameters.

use crate::error::{Error, Result};
use crate::special::integer_shape;

/// Cylinder of base radius `radius` and height `height` in which nodes are
/// deployed uniformly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderGeometry {
    radius: f64,
    height: f64,
}

impl CylinderGeometry {
    pub fn new(radius: f64, height: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::domain("cylinder radius", format!("R = {radius} must be > 0")));
        }
        if !(height.is_finite() && height > 0.0) {
            return Err(Error::domain("cylinder height", format!("H = {height} must be > 0")));
        }
        Ok(CylinderGeometry { radius, height })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    /// Largest possible distance between two points, `√(4R² + H²)`.
    pub fn max_distance(&self) -> f64 {
        (2.0 * self.radius).hypot(self.height)
    }

    pub fn volume(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius * self.height
    }

    /// Interior points where the distance density changes analytic form
    /// (`l = 2R` and `l = H`), sorted, restricted to `(0, d_max)`.
    pub fn regime_breaks(&self) -> Vec<f64> {
        let mut v: Vec<f64> = [2.0 * self.radius, self.height]
            .into_iter()
            .filter(|&x| x < self.max_distance())
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}

/// Path loss `d^{-alpha}` and Nakagami-m power fading `G ~ Gamma(m, 1/m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    alpha: f64,
    m: f64,
}

impl ChannelModel {
    /// `alpha > 2`; `m ≥ 0.5` (the analytic engine additionally needs an
    /// integer `m`, checked where it is used).
    pub fn new(alpha: f64, m: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 2.0) {
            return Err(Error::domain("path-loss exponent", format!("alpha = {alpha} must be > 2")));
        }
        if !(m.is_finite() && m >= 0.5) {
            return Err(Error::domain("Nakagami parameter", format!("m = {m} must be >= 0.5")));
        }
        Ok(ChannelModel { alpha, m })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// `m` as an integer, when the analytic path applies.
    pub fn integer_m(&self) -> Option<u32> {
        integer_shape(self.m)
    }
}

/// Full parameter tuple `(N, R, H, alpha, m, beta)` of a finite network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkScenario {
    nodes: u32,
    geometry: CylinderGeometry,
    channel: ChannelModel,
    beta: f64,
}

impl NetworkScenario {
    pub fn new(nodes: u32, geometry: CylinderGeometry, channel: ChannelModel, beta: f64) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::domain("node count", format!("N = {nodes} must be >= 2")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::domain("SIR threshold", format!("beta = {beta} must be > 0")));
        }
        Ok(NetworkScenario {
            nodes,
            geometry,
            channel,
            beta,
        })
    }

    pub fn nodes(&self) -> u32 {
        self.nodes
    }

    pub fn geometry(&self) -> &CylinderGeometry {
        &self.geometry
    }

    pub fn channel(&self) -> &ChannelModel {
        &self.channel
    }

    /// Linear SIR threshold.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Number of interferers seen by a receiver once its server is removed.
    pub fn interferers(&self) -> u32 {
        self.nodes - 2
    }
}

/// `10 log10(beta)`.
pub fn linear_to_db(beta: f64) -> f64 {
    10.0 * beta.log10()
}

pub fn db_to_linear(beta_db: f64) -> f64 {
    10f64.powf(beta_db / 10.0)
}
