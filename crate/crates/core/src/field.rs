//! Scalar fields over graph vertices with a domain mask.

use crate::error::{Error, Result};
use crate::space::GraphSpace;

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl Field {
    pub fn new(values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        if values.len() != mask.len() {
            return Err(Error::Malformed("field values and mask differ in length".into()));
        }
        if let Some(x) = (0..values.len()).find(|&x| mask[x] && !values[x].is_finite()) {
            return Err(Error::Malformed(format!("field not finite at vertex {x}")));
        }
        Ok(Field { values, mask })
    }

    /// Field defined everywhere.
    pub fn full(values: Vec<f64>) -> Self {
        let mask = vec![true; values.len()];
        Field { values, mask }
    }

    pub fn from_fn(space: &GraphSpace, f: impl Fn(usize) -> f64) -> Self {
        Field::full((0..space.len()).map(f).collect())
    }

    /// Field from a function of vertex positions.
    pub fn from_positions(space: &GraphSpace, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        if space.position_dim() == 0 {
            return Err(Error::param("space has no vertex positions"));
        }
        Ok(Field::from_fn(space, |x| f(space.position(x).unwrap())))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, x: usize) -> Option<f64> {
        self.mask[x].then_some(self.values[x])
    }

    /// Raw value, meaningful only on the mask.
    #[inline]
    pub fn value(&self, x: usize) -> f64 {
        self.values[x]
    }

    #[inline]
    pub fn defined(&self, x: usize) -> bool {
        self.mask[x]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            values: self.values.iter().map(|&v| f(v)).collect(),
            mask: self.mask.clone(),
        }
    }

    /// Same values on a smaller mask.
    pub fn restrict(&self, keep: impl Fn(usize) -> bool) -> Field {
        Field {
            values: self.values.clone(),
            mask: (0..self.len()).map(|x| self.mask[x] && keep(x)).collect(),
        }
    }

    /// Extrema over the mask.
    pub fn range(&self) -> Option<(f64, f64)> {
        self.iter().fold(None, |acc, (_, v)| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }

    /// `(vertex, value)` over the mask.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.len()).filter(|&x| self.mask[x]).map(|x| (x, self.values[x]))
    }

    /// Supremum distance to another field over the common mask.
    pub fn sup_distance(&self, other: &Field) -> f64 {
        self.iter()
            .filter(|&(x, _)| other.defined(x))
            .map(|(x, v)| (v - other.value(x)).abs())
            .fold(0.0, f64::max)
    }
}

/// Membership vector from a vertex list.
pub fn indicator(n: usize, set: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &x in set {
        m[x] = true;
    }
    m
}

/// Vertex list from a membership vector.
pub fn members(mask: &[bool]) -> Vec<usize> {
    (0..mask.len()).filter(|&x| mask[x]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_on_mask_is_rejected() {
        assert!(Field::new(vec![1.0, f64::NAN], vec![true, true]).is_err());
        let f = Field::new(vec![1.0, f64::NAN], vec![true, false]).unwrap();
        assert_eq!(f.get(1), None);
        assert_eq!(f.range(), Some((1.0, 1.0)));
    }

    #[test]
    fn restrict_and_sup_distance_use_common_mask() {
        let a = Field::full(vec![0.0, 1.0, 5.0]);
        let b = Field::full(vec![0.5, 1.0, 0.0]).restrict(|x| x < 2);
        assert_eq!(a.sup_distance(&b), 0.5);
        assert_eq!(b.iter().count(), 2);
        assert_eq!(members(&indicator(4, &[3, 1])), vec![1, 3]);
    }
}
