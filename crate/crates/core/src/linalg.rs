//! Dense vectors and the Euclidean ball domain.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Slack used for membership and idempotence checks.
pub const DOMAIN_TOLERANCE: f64 = 1e-12;

/// A dense real vector whose entries are all finite.
#[derive(Clone, PartialEq, Default)]
pub struct Vector(Vec<f64>);

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("vector entries"));
        }
        Ok(Vector(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    /// The `index`-th standard basis vector of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[index] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: self.dim(),
            });
        }
        Ok(())
    }

    pub fn dot(&self, other: &Vector) -> Result<f64> {
        other.check_dim(self.dim())?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        other.check_dim(self.dim())?;
        Ok(Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        other.check_dim(self.dim())?;
        Ok(Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn scale(&self, factor: f64) -> Vector {
        Vector(self.0.iter().map(|x| x * factor).collect())
    }

    /// `self += alpha * other`
    pub fn add_scaled(&mut self, alpha: f64, other: &Vector) -> Result<()> {
        other.check_dim(self.dim())?;
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += alpha * b;
        }
        Ok(())
    }

    /// Draws a point uniformly on the unit sphere in `dim` dimensions.
    pub fn random_unit<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vector {
        loop {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-300 {
                return Vector(v.into_iter().map(|x| x / n).collect());
            }
        }
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// `Σᵢ (aᵢ − bᵢ)²`
pub fn squared_distance(a: &Vector, b: &Vector) -> Result<f64> {
    b.check_dim(a.dim())?;
    Ok(a.0.iter().zip(&b.0).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Incremental mean, `m ← m + (w − m)/t`, using O(d) memory.
#[derive(Clone, Debug)]
pub struct RunningAverage {
    mean: Vector,
    count: usize,
}

impl RunningAverage {
    pub fn new(dim: usize) -> Self {
        RunningAverage {
            mean: Vector::zeros(dim),
            count: 0,
        }
    }

    pub fn push(&mut self, w: &Vector) -> Result<()> {
        w.check_dim(self.mean.dim())?;
        self.count += 1;
        let inv = 1.0 / self.count as f64;
        for (m, x) in self.mean.0.iter_mut().zip(&w.0) {
            *m += (x - *m) * inv;
        }
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> Result<Vector> {
        if self.count == 0 {
            return Err(Error::EmptyAverage);
        }
        Ok(self.mean.clone())
    }

    pub fn into_mean(self) -> Result<Vector> {
        if self.count == 0 {
            return Err(Error::EmptyAverage);
        }
        Ok(self.mean)
    }
}

/// Arithmetic mean of the first `count` vectors of `stream`.
pub fn running_average<'a, I>(stream: I, count: usize) -> Result<Vector>
where
    I: IntoIterator<Item = &'a Vector>,
{
    if count == 0 {
        return Err(Error::EmptyAverage);
    }
    let mut iter = stream.into_iter().take(count).peekable();
    let dim = iter.peek().ok_or(Error::EmptyAverage)?.dim();
    let mut avg = RunningAverage::new(dim);
    for w in iter {
        avg.push(w)?;
    }
    if avg.count() != count {
        return Err(Error::InsufficientData(format!(
            "stream yielded {} of {} vectors",
            avg.count(),
            count
        )));
    }
    avg.into_mean()
}

/// Closed Euclidean ball `{w : ‖w − center‖ ≤ radius}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallDomain {
    center: Vector,
    radius: f64,
}

impl BallDomain {
    pub fn new(center: Vector, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid("radius", format!("must be positive and finite, got {radius}")));
        }
        Ok(BallDomain { center, radius })
    }

    pub fn centered(dim: usize, radius: f64) -> Result<Self> {
        Self::new(Vector::zeros(dim), radius)
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// Largest norm of any point in the ball.
    pub fn max_norm(&self) -> f64 {
        self.center.norm() + self.radius
    }

    pub fn distance_from_center(&self, w: &Vector) -> Result<f64> {
        Ok(squared_distance(w, &self.center)?.sqrt())
    }

    pub fn contains(&self, w: &Vector) -> Result<bool> {
        Ok(self.distance_from_center(w)? <= self.radius + DOMAIN_TOLERANCE)
    }

    /// Errors unless `w` lies in the ball.
    pub fn ensure_contains(&self, w: &Vector) -> Result<()> {
        let distance = self.distance_from_center(w)?;
        if distance > self.radius + DOMAIN_TOLERANCE {
            return Err(Error::OutsideDomain {
                distance,
                radius: self.radius,
            });
        }
        Ok(())
    }

    /// Nearest point of the ball to `w`.
    pub fn project(&self, w: &Vector) -> Result<Vector> {
        w.check_dim(self.dim())?;
        if !w.is_finite() {
            return Err(Error::NonFinite("projection input"));
        }
        let offset = w.sub(&self.center)?;
        let distance = offset.norm();
        if distance <= self.radius {
            return Ok(w.clone());
        }
        let mut out = self.center.clone();
        out.add_scaled(self.radius / distance, &offset)?;
        Ok(out)
    }

    /// Point on the sphere `center + radius·direction/‖direction‖`.
    pub fn boundary_point(&self, direction: &Vector) -> Result<Vector> {
        let n = direction.norm();
        if !(n > 0.0) {
            return Err(Error::invalid("direction", "must be nonzero"));
        }
        let mut out = self.center.clone();
        out.add_scaled(self.radius / n, direction)?;
        Ok(out)
    }

    /// Uniform draw from the ball.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        let dir = Vector::random_unit(self.dim(), rng);
        let u: f64 = rng.random();
        let r = self.radius * u.powf(1.0 / self.dim() as f64);
        let mut out = self.center.clone();
        out.add_scaled(r, &dir).expect("matching dimensions");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn interior_point_is_unchanged() {
        let d = BallDomain::centered(2, 1.0).unwrap();
        assert_eq!(d.project(&v(&[0.5, 0.0])).unwrap(), v(&[0.5, 0.0]));
    }

    #[test]
    fn exterior_point_is_scaled_radially() {
        let d = BallDomain::centered(2, 1.0).unwrap();
        assert_eq!(d.project(&v(&[2.0, 0.0])).unwrap(), v(&[1.0, 0.0]));
    }

    #[test]
    fn projection_about_shifted_center() {
        let d = BallDomain::new(v(&[1.0, 0.0]), 1.0).unwrap();
        let p = d.project(&v(&[3.0, 0.0])).unwrap();
        assert!(squared_distance(&p, &v(&[2.0, 0.0])).unwrap() < 1e-24);

        // grid minimisation of ‖w − u‖ over the ball
        let target = v(&[3.0, 0.0]);
        let mut best = (f64::INFINITY, Vector::zeros(2));
        let n = 400;
        for i in 0..=n {
            for j in 0..=n {
                let u = v(&[2.0 * i as f64 / n as f64, -1.0 + 2.0 * j as f64 / n as f64]);
                if d.contains(&u).unwrap() {
                    let dist = squared_distance(&u, &target).unwrap();
                    if dist < best.0 {
                        best = (dist, u);
                    }
                }
            }
        }
        assert!(squared_distance(&best.1, &p).unwrap() < 1e-4);
    }

    #[test]
    fn projection_rejects_bad_input() {
        let d = BallDomain::centered(2, 1.0).unwrap();
        assert!(matches!(
            d.project(&v(&[1.0, 2.0, 3.0])),
            Err(Error::DimensionMismatch { .. })
        ));
        let bad = Vector(vec![f64::NAN, 0.0]);
        assert_eq!(d.project(&bad), Err(Error::NonFinite("projection input")));
        assert!(Vector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn nonpositive_radius_is_rejected() {
        assert!(BallDomain::centered(2, 0.0).is_err());
        assert!(BallDomain::centered(2, -1.0).is_err());
    }

    #[test]
    fn squared_distance_examples() {
        assert_eq!(squared_distance(&v(&[0.0, 0.0]), &v(&[0.0, 0.0])).unwrap(), 0.0);
        assert_eq!(squared_distance(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 2.0);
        assert_eq!(squared_distance(&v(&[3.0, 4.0]), &v(&[0.0, 0.0])).unwrap(), 25.0);
        assert!(squared_distance(&v(&[1.0]), &v(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn running_average_examples() {
        assert_eq!(running_average(&[v(&[2.0, 0.0])], 1).unwrap(), v(&[2.0, 0.0]));
        assert_eq!(
            running_average(&[v(&[1.0, 0.0]), v(&[0.0, 1.0])], 2).unwrap(),
            v(&[0.5, 0.5])
        );
        assert_eq!(
            running_average(&[v(&[1.0, 1.0]), v(&[2.0, 2.0]), v(&[3.0, 3.0])], 3).unwrap(),
            v(&[2.0, 2.0])
        );
        assert_eq!(running_average(&[v(&[1.0])], 0), Err(Error::EmptyAverage));
        assert!(running_average(&[v(&[1.0])], 2).is_err());
    }

    fn point(dim: usize) -> impl Strategy<Value = Vector> {
        prop::collection::vec(-5.0f64..5.0, dim).prop_map(Vector)
    }

    proptest! {
        #[test]
        fn projection_is_idempotent(w in point(3), r in 0.1f64..3.0) {
            let d = BallDomain::new(v(&[0.5, -0.25, 1.0]), r).unwrap();
            let p = d.project(&w).unwrap();
            let pp = d.project(&p).unwrap();
            prop_assert!(squared_distance(&p, &pp).unwrap().sqrt() <= DOMAIN_TOLERANCE);
            prop_assert!(d.contains(&p).unwrap());
        }

        #[test]
        fn projection_is_nonexpansive(a in point(3), b in point(3)) {
            let d = BallDomain::new(v(&[0.5, -0.25, 1.0]), 1.5).unwrap();
            let pa = d.project(&a).unwrap();
            let pb = d.project(&b).unwrap();
            let lhs = squared_distance(&pa, &pb).unwrap().sqrt();
            let rhs = squared_distance(&a, &b).unwrap().sqrt();
            prop_assert!(lhs <= rhs + DOMAIN_TOLERANCE);
        }

        #[test]
        fn average_of_feasible_points_is_feasible(
            raw in prop::collection::vec(point(3), 1..20),
        ) {
            let d = BallDomain::centered(3, 1.0).unwrap();
            let pts: Vec<Vector> = raw.iter().map(|w| d.project(w).unwrap()).collect();
            let avg = running_average(&pts, pts.len()).unwrap();
            prop_assert!(d.contains(&avg).unwrap());
            for i in 0..3 {
                let lo = pts.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min);
                let hi = pts.iter().map(|p| p[i]).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(avg[i] >= lo - 1e-12 && avg[i] <= hi + 1e-12);
            }
        }
    }
}
