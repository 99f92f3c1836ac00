//! Regular evaluation grids and the relative error metric used to compare
//! fitted fields against reference data.

use serde::Serialize;

use crate::{Error, Result};

/// Uniform grid `t_l = l/L` per axis, `l = 0..=L` (so `L = 150` means 151
/// nodes per axis).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridSpec {
    pub dim: usize,
    pub l: usize,
}

impl GridSpec {
    pub fn new(dim: usize, l: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidArgument("dim must be 1 or 2".into()));
        }
        if l == 0 {
            return Err(Error::InvalidArgument("grid resolution must be >= 1".into()));
        }
        Ok(Self { dim, l })
    }

    pub fn node_count(&self) -> usize {
        let n = self.l + 1;
        if self.dim == 1 {
            n
        } else {
            n * n
        }
    }
}

/// Field values on a [`GridSpec`]; 2D values are stored x-outer, so the
/// node `(i/L, j/L)` lives at index `i*(L+1) + j`.
#[derive(Debug, Clone)]
pub struct GridField {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.node_count() {
            return Err(Error::LengthMismatch {
                expected: spec.node_count(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid values"));
        }
        Ok(Self { spec, values })
    }

    pub fn at_2d(&self, i: usize, j: usize) -> f64 {
        self.values[i * (self.spec.l + 1) + j]
    }
}

/// Relative l2 error `||fit - reference|| / ||reference||` over all nodes.
pub fn relative_l2_error(fit: &GridField, reference: &GridField) -> Result<f64> {
    if fit.spec != reference.spec {
        return Err(Error::GridMismatch(
            fit.spec.node_count(),
            reference.spec.node_count(),
        ));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (f, r) in fit.values.iter().zip(&reference.values) {
        num += (f - r) * (f - r);
        den += r * r;
    }
    if den == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((num / den).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_counts() {
        assert_eq!(GridSpec::new(1, 150).unwrap().node_count(), 151);
        assert_eq!(GridSpec::new(2, 150).unwrap().node_count(), 151 * 151);
        assert!(GridSpec::new(3, 10).is_err());
        assert!(GridSpec::new(1, 0).is_err());
    }

    #[test]
    fn identical_fields_have_zero_error() {
        let spec = GridSpec::new(1, 3).unwrap();
        let f = GridField::new(spec, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(relative_l2_error(&f, &f).unwrap(), 0.0);
    }

    #[test]
    fn zero_fit_gives_error_one() {
        let spec = GridSpec::new(1, 2).unwrap();
        let r = GridField::new(spec, vec![1.0, -2.0, 2.0]).unwrap();
        let z = GridField::new(spec, vec![0.0; 3]).unwrap();
        assert!((relative_l2_error(&z, &r).unwrap() - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn hand_checked_two_node_case() {
        let spec = GridSpec::new(1, 1).unwrap();
        let r = GridField::new(spec, vec![3.0, 4.0]).unwrap();
        let f = GridField::new(spec, vec![3.0, 0.0]).unwrap();
        assert!((relative_l2_error(&f, &r).unwrap() - 0.8).abs() <= 1e-15);
    }

    #[test]
    fn mismatch_and_zero_reference_rejected() {
        let a = GridField::new(GridSpec::new(1, 1).unwrap(), vec![1.0, 1.0]).unwrap();
        let b = GridField::new(GridSpec::new(1, 2).unwrap(), vec![1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            relative_l2_error(&a, &b),
            Err(Error::GridMismatch(..))
        ));
        let z = GridField::new(GridSpec::new(1, 1).unwrap(), vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            relative_l2_error(&a, &z),
            Err(Error::ZeroReference)
        ));
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(GridField::new(GridSpec::new(2, 2).unwrap(), vec![0.0; 8]).is_err());
    }
}
