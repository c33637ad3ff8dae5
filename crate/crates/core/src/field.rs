//! Grid functions on interior nodes. Boundary values are implicitly zero.

use std::ops::{Deref, DerefMut};

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(transparent)]
pub struct Field {
    values: Vec<f64>,
}

impl Field {
    pub fn new(values: Vec<f64>) -> Self {
        Field { values }
    }

    pub fn zeros(n: usize) -> Self {
        Field {
            values: vec![0.0; n],
        }
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.values
    }

    /// Σ |u_i| vol_i
    pub fn l1(&self, volumes: &[f64]) -> f64 {
        self.values
            .iter()
            .zip(volumes)
            .map(|(u, w)| u.abs() * w)
            .sum()
    }

    /// Σ u_i g_i vol_i
    pub fn dot(&self, other: &[f64], volumes: &[f64]) -> f64 {
        self.values
            .iter()
            .zip(other)
            .zip(volumes)
            .map(|((u, g), w)| u * g * w)
            .sum()
    }

    /// Σ |u_i − g_i| vol_i
    pub fn l1_distance(&self, other: &[f64], volumes: &[f64]) -> f64 {
        self.values
            .iter()
            .zip(other)
            .zip(volumes)
            .map(|((u, g), w)| (u - g).abs() * w)
            .sum()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, s: f64) -> Field {
        Field::new(self.values.iter().map(|v| v * s).collect())
    }

    /// self + s * other
    pub fn axpy(&self, s: f64, other: &[f64]) -> Field {
        Field::new(
            self.values
                .iter()
                .zip(other)
                .map(|(a, b)| a + s * b)
                .collect(),
        )
    }
}

impl Deref for Field {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

impl From<Vec<f64>> for Field {
    fn from(values: Vec<f64>) -> Self {
        Field { values }
    }
}
