//! Radial half-line grids.
//!
//! Nodes always start at `r = 0`. A grid is either uniform or a "stretched"
//! grid that is uniform near the origin and grows geometrically outward, so
//! that windows of a few interaction ranges can be resolved finely while the
//! box still extends to several multiples of the macroscopic length.

use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid {
    nodes: Arc<[f64]>,
    step: Option<f64>,
}

/// Layout of a grid that is uniform on `[0, fine_extent]` and then grows
/// by `growth` per cell until `max_step`, continuing uniformly to `r_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StretchedLayout {
    pub fine_step: f64,
    pub fine_extent: f64,
    pub growth: f64,
    pub max_step: f64,
    pub r_max: f64,
}

impl RadialGrid {
    pub fn uniform(step: f64, r_max: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::validation("grid.dr", format!("{step} must be positive")));
        }
        if !(r_max > step) || !r_max.is_finite() {
            return Err(Error::validation(
                "grid.r_max",
                format!("{r_max} must exceed the spacing {step}"),
            ));
        }
        let cells = (r_max / step - 1e-9).ceil() as usize;
        let nodes: Vec<f64> = (0..=cells).map(|i| i as f64 * step).collect();
        Ok(Self {
            nodes: nodes.into(),
            step: Some(step),
        })
    }

    /// Uniform grid with spacing at most `max_step`, adjusted so that
    /// `feature` (typically the support radius of a potential) is a node.
    pub fn aligned(max_step: f64, r_max: f64, feature: f64) -> Result<Self> {
        if !(feature > 0.0) {
            return Err(Error::validation("grid.feature", "must be positive"));
        }
        let per_feature = (feature / max_step - 1e-9).ceil().max(1.0);
        Self::uniform(feature / per_feature, r_max)
    }

    pub fn stretched(layout: StretchedLayout) -> Result<Self> {
        let StretchedLayout {
            fine_step,
            fine_extent,
            growth,
            max_step,
            r_max,
        } = layout;
        if !(fine_step > 0.0) || !(max_step >= fine_step) || !(growth >= 1.0) {
            return Err(Error::validation(
                "grid.layout",
                "need 0 < fine_step <= max_step and growth >= 1",
            ));
        }
        if !(r_max > fine_extent) || !(fine_extent >= fine_step) {
            return Err(Error::validation(
                "grid.layout",
                "need fine_step <= fine_extent < r_max",
            ));
        }
        let fine_cells = (fine_extent / fine_step).round() as usize;
        let mut nodes: Vec<f64> = (0..=fine_cells).map(|i| i as f64 * fine_step).collect();
        let mut h = fine_step;
        let mut r = *nodes.last().unwrap();
        while r < r_max {
            h = (h * growth).min(max_step);
            let remaining = r_max - r;
            if remaining < 1.5 * h {
                if remaining > 0.5 * h || nodes.len() < 2 {
                    nodes.push(r_max);
                } else {
                    *nodes.last_mut().unwrap() = r_max;
                }
                break;
            }
            r += h;
            nodes.push(r);
        }
        let step = if growth == 1.0 && max_step == fine_step {
            Some(fine_step)
        } else {
            None
        };
        Self::build(nodes, step)
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        Self::build(nodes, None)
    }

    fn build(nodes: Vec<f64>, step: Option<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::validation("grid", "need at least three nodes"));
        }
        if nodes[0] != 0.0 {
            return Err(Error::validation("grid", "first node must be r = 0"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("grid", "nodes must be strictly increasing"));
        }
        Ok(Self {
            nodes: nodes.into(),
            step,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn uniform_step(&self) -> Option<f64> {
        self.step
    }

    /// Largest cell width among cells that start below `r`.
    pub fn max_spacing_below(&self, r: f64) -> f64 {
        self.nodes
            .windows(2)
            .take_while(|w| w[0] < r)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Index `i` with `nodes[i] <= r < nodes[i + 1]`, clamped to the last cell.
    pub fn locate(&self, r: f64) -> usize {
        let last_cell = self.nodes.len() - 2;
        if let Some(h) = self.step {
            return ((r / h).floor().max(0.0) as usize).min(last_cell);
        }
        self.nodes
            .partition_point(|&x| x <= r)
            .saturating_sub(1)
            .min(last_cell)
    }

    /// Trapezoid weights, also the inner-product weights of the discrete
    /// radial Laplacian (which is symmetric with respect to them).
    pub fn weights(&self) -> Vec<f64> {
        let n = self.nodes.len();
        let mut w = vec![0.0; n];
        for i in 0..n - 1 {
            let h = self.nodes[i + 1] - self.nodes[i];
            w[i] += 0.5 * h;
            w[i + 1] += 0.5 * h;
        }
        w
    }

    /// `∫₀^{r_max} f(r) dr` by the trapezoid rule.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        self.weights().iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// `4π ∫ f(r) r² dr`: integral over ℝ³ of a radial function.
    pub fn integrate_3d(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        4.0 * std::f64::consts::PI
            * self
                .weights()
                .iter()
                .zip(values)
                .zip(self.nodes.iter())
                .map(|((w, v), r)| w * v * r * r)
                .sum::<f64>()
    }

    /// First derivative of an even radial function (zero at the origin),
    /// three-point centered in the interior and one-sided at `r_max`.
    pub fn radial_derivative<T>(&self, values: &[T]) -> Vec<T>
    where
        T: Copy + Default + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    {
        let n = self.nodes.len();
        debug_assert_eq!(values.len(), n);
        let r = &self.nodes;
        let mut out = vec![T::default(); n];
        for i in 1..n - 1 {
            let h1 = r[i] - r[i - 1];
            let h2 = r[i + 1] - r[i];
            out[i] = values[i - 1] * (-h2 / (h1 * (h1 + h2)))
                + values[i] * ((h2 - h1) / (h1 * h2))
                + values[i + 1] * (h1 / (h2 * (h1 + h2)));
        }
        let h0 = r[n - 2] - r[n - 3];
        let h1 = r[n - 1] - r[n - 2];
        out[n - 1] = values[n - 3] * (h1 / (h0 * (h0 + h1)))
            + values[n - 2] * (-(h0 + h1) / (h0 * h1))
            + values[n - 1] * ((h0 + 2.0 * h1) / (h1 * (h0 + h1)));
        out
    }

    /// Three-point second difference at interior node `i`.
    pub fn second_difference<T>(&self, values: &[T], i: usize) -> T
    where
        T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    {
        let r = &self.nodes;
        let h1 = r[i] - r[i - 1];
        let h2 = r[i + 1] - r[i];
        ((values[i + 1] - values[i]) * (1.0 / h2) - (values[i] - values[i - 1]) * (1.0 / h1))
            * (2.0 / (h1 + h2))
    }
}
