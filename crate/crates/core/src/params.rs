//! Geometry-tagged flow parameters.

use serde::{Deserialize, Serialize};

use crate::coeffs::{CoefficientPair, Geometry};
use crate::error::Result;
use crate::euclid_cov::{distance_coeffs_rd, EuclidParams};
use crate::sphere_cov::{distance_coeffs, SphereParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "geometry", rename_all = "lowercase")]
pub enum FlowParams {
    Sphere(SphereParams),
    Euclid(EuclidParams),
}

impl FlowParams {
    pub fn geometry(&self) -> Geometry {
        match self {
            FlowParams::Sphere(_) => Geometry::Sphere,
            FlowParams::Euclid(_) => Geometry::Euclid,
        }
    }

    pub fn d(&self) -> u32 {
        match self {
            FlowParams::Sphere(p) => p.d,
            FlowParams::Euclid(p) => p.d,
        }
    }

    pub fn alpha(&self) -> f64 {
        match self {
            FlowParams::Sphere(p) => p.alpha,
            FlowParams::Euclid(p) => p.alpha,
        }
    }

    pub fn eta(&self) -> f64 {
        match self {
            FlowParams::Sphere(p) => p.eta(),
            FlowParams::Euclid(p) => p.eta(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FlowParams::Sphere(p) => p.validate(),
            FlowParams::Euclid(p) => p.validate(),
        }
    }

    /// Upper end of the distance interval: `π` or `+∞`.
    pub fn upper(&self) -> f64 {
        match self {
            FlowParams::Sphere(_) => std::f64::consts::PI,
            FlowParams::Euclid(_) => f64::INFINITY,
        }
    }

    /// Default anchor for scale and speed: `π/2` on the sphere, `1/m` in ℝ^d.
    pub fn default_anchor(&self) -> f64 {
        match self {
            FlowParams::Sphere(_) => std::f64::consts::FRAC_PI_2,
            FlowParams::Euclid(p) => 1.0 / p.mass,
        }
    }

    /// Distance-diffusion coefficients.
    pub fn coefficients(&self) -> Result<Box<dyn CoefficientPair>> {
        Ok(match self {
            FlowParams::Sphere(p) => Box::new(distance_coeffs(p)?),
            FlowParams::Euclid(p) => Box::new(distance_coeffs_rd(p)?),
        })
    }
}
