//! Dense real vectors, Euclidean norms, and projection-defined feasible
//! domains (ball, box, unbounded).

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum VectorSpaceError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("non-finite coordinate at index {index}")]
    NonFinite { index: usize },
    #[error("ball radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("box bounds violate lower <= upper at index {index}")]
    InvertedBounds { index: usize },
    #[error("zero-dimensional vectors are not supported")]
    ZeroDimension,
}

/// Dense coordinate vector in R^d. All coordinates are finite by
/// construction; the dimension is fixed for the life of the value.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    coords: Vec<f64>,
}

impl Vector {
    /// Builds a vector, rejecting NaN/Inf coordinates and zero dimension.
    pub fn new(coords: Vec<f64>) -> Result<Self, VectorSpaceError> {
        if coords.is_empty() {
            return Err(VectorSpaceError::ZeroDimension);
        }
        for (index, c) in coords.iter().enumerate() {
            if !c.is_finite() {
                return Err(VectorSpaceError::NonFinite { index });
            }
        }
        Ok(Self { coords })
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "zero-dimensional vector");
        Self {
            coords: vec![0.0; dim],
        }
    }

    /// All-ones vector.
    pub fn ones(dim: usize) -> Self {
        assert!(dim > 0, "zero-dimensional vector");
        Self {
            coords: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn norm_l1(&self) -> f64 {
        self.coords.iter().map(|c| c.abs()).sum()
    }

    pub fn dot(&self, other: &Vector) -> Result<f64, VectorSpaceError> {
        check_dims(self.dim(), other.dim())?;
        Ok(self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn add(&self, other: &Vector) -> Result<Vector, VectorSpaceError> {
        check_dims(self.dim(), other.dim())?;
        Ok(Vector {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector, VectorSpaceError> {
        check_dims(self.dim(), other.dim())?;
        Ok(Vector {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, factor: f64) -> Vector {
        Vector {
            coords: self.coords.iter().map(|c| c * factor).collect(),
        }
    }

    /// self + factor * other, the SGD update kernel.
    pub fn add_scaled(&self, factor: f64, other: &Vector) -> Result<Vector, VectorSpaceError> {
        check_dims(self.dim(), other.dim())?;
        Ok(Vector {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + factor * b)
                .collect(),
        })
    }
}

/// Euclidean distance between two points of equal dimension.
pub fn distance(x: &Vector, y: &Vector) -> Result<f64, VectorSpaceError> {
    check_dims(x.dim(), y.dim())?;
    Ok(x
        .as_slice()
        .iter()
        .zip(y.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

fn check_dims(left: usize, right: usize) -> Result<(), VectorSpaceError> {
    if left == right {
        Ok(())
    } else {
        Err(VectorSpaceError::DimensionMismatch { left, right })
    }
}

/// Relative slack on domain-membership inequalities.
const MEMBERSHIP_TOL: f64 = 1e-12;

/// Feasible set defined by its Euclidean projection. Ball and box are
/// compact and convex; the unbounded variant is all of R^d and projects to
/// the identity.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Ball { center: Vector, radius: f64 },
    Box { lower: Vector, upper: Vector },
    Unbounded { dim: usize },
}

impl Domain {
    pub fn ball(center: Vector, radius: f64) -> Result<Self, VectorSpaceError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(VectorSpaceError::NonPositiveRadius(radius));
        }
        Ok(Domain::Ball { center, radius })
    }

    /// Ball centered at the origin.
    pub fn origin_ball(dim: usize, radius: f64) -> Result<Self, VectorSpaceError> {
        Self::ball(Vector::zeros(dim), radius)
    }

    pub fn bounded_box(lower: Vector, upper: Vector) -> Result<Self, VectorSpaceError> {
        check_dims(lower.dim(), upper.dim())?;
        for (index, (lo, hi)) in lower.as_slice().iter().zip(upper.as_slice()).enumerate() {
            if lo > hi {
                return Err(VectorSpaceError::InvertedBounds { index });
            }
        }
        Ok(Domain::Box { lower, upper })
    }

    pub fn unbounded(dim: usize) -> Self {
        assert!(dim > 0, "zero-dimensional domain");
        Domain::Unbounded { dim }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Ball { center, .. } => center.dim(),
            Domain::Box { lower, .. } => lower.dim(),
            Domain::Unbounded { dim } => *dim,
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, Domain::Unbounded { .. })
    }

    /// Euclidean projection onto the domain. Points already inside
    /// (boundary included) are returned unchanged; the inside test carries
    /// the same 1e-12 relative tolerance as [`Domain::contains`], which
    /// makes the projection exactly idempotent even when rescaling onto
    /// the boundary lands an ulp outside.
    pub fn project(&self, x: &Vector) -> Result<Vector, VectorSpaceError> {
        check_dims(self.dim(), x.dim())?;
        match self {
            Domain::Ball { center, radius } => {
                let offset = x.sub(center)?;
                let dist = offset.norm();
                if dist <= radius * (1.0 + MEMBERSHIP_TOL) {
                    Ok(x.clone())
                } else {
                    center.add_scaled(*radius / dist, &offset)
                }
            }
            Domain::Box { lower, upper } => {
                let coords = x
                    .as_slice()
                    .iter()
                    .zip(lower.as_slice())
                    .zip(upper.as_slice())
                    .map(|((&c, &lo), &hi)| c.clamp(lo, hi))
                    .collect();
                Ok(Vector { coords })
            }
            Domain::Unbounded { .. } => Ok(x.clone()),
        }
    }

    /// Diameter max ||x - y|| over the domain; infinity for the unbounded
    /// variant.
    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Ball { radius, .. } => 2.0 * radius,
            Domain::Box { lower, upper } => upper
                .sub(lower)
                .expect("box bounds share a dimension")
                .norm(),
            Domain::Unbounded { .. } => f64::INFINITY,
        }
    }

    /// Membership within relative tolerance `tol` on the defining
    /// inequality.
    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        if x.dim() != self.dim() {
            return false;
        }
        match self {
            Domain::Ball { center, radius } => {
                let dist = distance(x, center).expect("dims checked");
                dist <= radius * (1.0 + tol)
            }
            Domain::Box { lower, upper } => x
                .as_slice()
                .iter()
                .zip(lower.as_slice())
                .zip(upper.as_slice())
                .all(|((&c, &lo), &hi)| {
                    let slack = tol * (hi - lo).abs().max(1.0);
                    c >= lo - slack && c <= hi + slack
                }),
            Domain::Unbounded { .. } => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(coords: &[f64]) -> Vector {
        Vector::new(coords.to_vec()).unwrap()
    }

    #[test]
    fn rejects_non_finite_coordinates() {
        assert_eq!(
            Vector::new(vec![1.0, f64::NAN]),
            Err(VectorSpaceError::NonFinite { index: 1 })
        );
        assert_eq!(
            Vector::new(vec![f64::INFINITY]),
            Err(VectorSpaceError::NonFinite { index: 0 })
        );
        assert_eq!(Vector::new(vec![]), Err(VectorSpaceError::ZeroDimension));
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(&v(&[0.0, 0.0]), &v(&[3.0, 4.0])).unwrap(), 5.0);
        let x = v(&[1.25, -7.5]);
        assert_eq!(distance(&x, &x).unwrap(), 0.0);
        assert_eq!(distance(&v(&[1.0]), &v(&[-1.0])).unwrap(), 2.0);
        assert!(matches!(
            distance(&v(&[1.0]), &v(&[1.0, 2.0])),
            Err(VectorSpaceError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn ball_projection_scales_radially() {
        let ball = Domain::origin_ball(2, 1.0).unwrap();
        // ||x|| = 2 -> x/2
        let x = v(&[1.2, 1.6]);
        let p = ball.project(&x).unwrap();
        assert!((p.as_slice()[0] - 0.6).abs() < 1e-15);
        assert!((p.as_slice()[1] - 0.8).abs() < 1e-15);
        // interior point fixed
        let inside = v(&[0.3, 0.4]);
        assert_eq!(ball.project(&inside).unwrap(), inside);
        // boundary point fixed exactly
        let boundary = v(&[0.6, 0.8]);
        assert_eq!(ball.project(&boundary).unwrap(), boundary);
    }

    #[test]
    fn box_projection_clamps_componentwise() {
        let cube = Domain::bounded_box(v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap();
        let p = cube.project(&v(&[-1.0, 0.5])).unwrap();
        assert_eq!(p, v(&[0.0, 0.5]));
    }

    #[test]
    fn diameters() {
        assert_eq!(Domain::origin_ball(3, 1.0).unwrap().diameter(), 2.0);
        let b = Domain::bounded_box(v(&[0.0, 0.0]), v(&[3.0, 4.0])).unwrap();
        assert_eq!(b.diameter(), 5.0);
        assert!(Domain::unbounded(7).diameter().is_infinite());
    }

    #[test]
    fn unbounded_projection_is_identity() {
        let dom = Domain::unbounded(3);
        let x = v(&[5.0, -2.0, 0.25]);
        assert_eq!(dom.project(&x).unwrap(), x);
    }

    #[test]
    fn constructor_validation() {
        assert!(matches!(
            Domain::origin_ball(2, 0.0),
            Err(VectorSpaceError::NonPositiveRadius(_))
        ));
        assert!(matches!(
            Domain::bounded_box(v(&[1.0]), v(&[0.0])),
            Err(VectorSpaceError::InvertedBounds { index: 0 })
        ));
    }

    #[test]
    fn projection_dimension_mismatch() {
        let ball = Domain::origin_ball(2, 1.0).unwrap();
        assert!(matches!(
            ball.project(&v(&[1.0, 2.0, 3.0])),
            Err(VectorSpaceError::DimensionMismatch { .. })
        ));
    }
}
