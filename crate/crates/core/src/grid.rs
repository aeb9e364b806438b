//! Box domains with homogeneous Dirichlet data and the real two-component
//! fields living on them.
//!
//! A complex field `u = u1 + i u2` is stored as the pair `(u1, u2)` over the
//! interior mesh points only; boundary values are identically zero and never
//! materialized. Points are stored row-major: in 2D the flat index of
//! `(i0, i1)` is `i0 * n[1] + i1`.

use crate::error::{Error, Result};

/// Uniform rectangular mesh on `[0, L_0] x ... x [0, L_{d-1}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    lengths: Vec<f64>,
    n: Vec<usize>,
    h: Vec<f64>,
}

impl Grid {
    pub fn new(dim: usize, lengths: &[f64], n: &[usize]) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dim must be 1 or 2, got {dim}")));
        }
        if lengths.len() != dim || n.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "expected {dim} lengths and point counts, got {} and {}",
                lengths.len(),
                n.len()
            )));
        }
        if let Some(l) = lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::InvalidGrid(format!("lengths must be positive, got {l}")));
        }
        if let Some(k) = n.iter().find(|k| **k < 3) {
            return Err(Error::InvalidGrid(format!(
                "at least 3 interior points per axis are required, got {k}"
            )));
        }
        let h = lengths.iter().zip(n).map(|(l, k)| l / (*k as f64 + 1.0)).collect();
        Ok(Self {
            lengths: lengths.to_vec(),
            n: n.to_vec(),
            h,
        })
    }

    pub fn line(length: f64, n: usize) -> Result<Self> {
        Self::new(1, &[length], &[n])
    }

    pub fn rect(lengths: [f64; 2], n: [usize; 2]) -> Result<Self> {
        Self::new(2, &lengths, &n)
    }

    pub fn dim(&self) -> usize {
        self.n.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn n(&self) -> &[usize] {
        &self.n
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    /// Total number of interior points.
    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight of one interior point.
    pub fn cell_volume(&self) -> f64 {
        self.h.iter().product()
    }

    /// Measure of the box.
    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// Distance between consecutive points along `axis` in the flat layout.
    pub(crate) fn stride(&self, axis: usize) -> usize {
        self.n[axis + 1..].iter().product()
    }

    /// Physical coordinates of the flat point `idx`.
    pub fn coords(&self, idx: usize) -> Vec<f64> {
        let mut rest = idx;
        let mut out = vec![0.0; self.dim()];
        for axis in (0..self.dim()).rev() {
            let j = rest % self.n[axis];
            rest /= self.n[axis];
            out[axis] = (j as f64 + 1.0) * self.h[axis];
        }
        out
    }

    pub fn zeros(&self) -> Field {
        Field::zeros(self.len())
    }

    /// Builds a field by evaluating `f` at every interior point.
    pub fn sample<F>(&self, mut f: F) -> Field
    where
        F: FnMut(&[f64]) -> (f64, f64),
    {
        let (u1, u2) = (0..self.len()).map(|i| f(&self.coords(i))).unzip();
        Field { u1, u2 }
    }

    pub(crate) fn check(&self, u: &Field) -> Result<()> {
        if u.len() != self.len() {
            return Err(Error::GridMismatch {
                expected: self.len(),
                found: u.len(),
            });
        }
        Ok(())
    }
}

/// Two real arrays, the real-pair realization of a complex field.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Field {
    pub(crate) u1: Vec<f64>,
    pub(crate) u2: Vec<f64>,
}

impl Field {
    /// Validating constructor: equal lengths, finite entries.
    pub fn new(u1: Vec<f64>, u2: Vec<f64>) -> Result<Self> {
        if u1.len() != u2.len() {
            return Err(Error::InvalidField(format!(
                "component lengths differ: {} vs {}",
                u1.len(),
                u2.len()
            )));
        }
        let out = Self { u1, u2 };
        if !out.is_finite() {
            return Err(Error::InvalidField("non-finite entry".into()));
        }
        Ok(out)
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            u1: vec![0.0; len],
            u2: vec![0.0; len],
        }
    }

    pub(crate) fn from_parts(u1: Vec<f64>, u2: Vec<f64>) -> Self {
        debug_assert_eq!(u1.len(), u2.len());
        Self { u1, u2 }
    }

    /// Builds a field from a per-point map of point values.
    pub(crate) fn from_points<I>(points: I) -> Self
    where
        I: IntoIterator<Item = [f64; 2]>,
    {
        let (u1, u2) = points.into_iter().map(|[a, b]| (a, b)).unzip();
        Self { u1, u2 }
    }

    pub fn len(&self) -> usize {
        self.u1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u1.is_empty()
    }

    pub fn u1(&self) -> &[f64] {
        &self.u1
    }

    pub fn u2(&self) -> &[f64] {
        &self.u2
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.u1, self.u2)
    }

    pub fn point(&self, i: usize) -> [f64; 2] {
        [self.u1[i], self.u2[i]]
    }

    pub fn points(&self) -> impl Iterator<Item = [f64; 2]> + Clone + '_ {
        self.u1.iter().zip(&self.u2).map(|(a, b)| [*a, *b])
    }

    /// Pointwise Euclidean magnitudes `|U(x)|`.
    pub fn magnitudes(&self) -> impl Iterator<Item = f64> + Clone + '_ {
        self.points().map(|[a, b]| a.hypot(b))
    }

    pub fn is_finite(&self) -> bool {
        self.u1.iter().chain(&self.u2).all(|v| v.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.u1.iter().chain(&self.u2).all(|v| *v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map_points(|[a, b]| [c * a, c * b])
    }

    pub(crate) fn map_points<F>(&self, mut f: F) -> Self
    where
        F: FnMut([f64; 2]) -> [f64; 2],
    {
        Self::from_points(self.points().map(&mut f))
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &Field) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self::from_parts(
            self.u1.iter().zip(&other.u1).map(|(a, b)| a + c * b).collect(),
            self.u2.iter().zip(&other.u2).map(|(a, b)| a + c * b).collect(),
        )
    }

    pub fn sub(&self, other: &Field) -> Self {
        self.axpy(-1.0, other)
    }

    pub fn add(&self, other: &Field) -> Self {
        self.axpy(1.0, other)
    }

    /// Unweighted Euclidean dot product over all entries.
    pub(crate) fn dot_raw(&self, other: &Field) -> f64 {
        // per-point accumulation keeps (IU . U) = 0 exact
        self.points()
            .zip(other.points())
            .map(|(a, b)| a[0] * b[0] + a[1] * b[1])
            .sum()
    }

    /// Maximum pointwise magnitude.
    pub fn max_magnitude(&self) -> f64 {
        self.magnitudes().fold(0.0, f64::max)
    }
}

/// Piecewise-constant-in-time forcing: `values[k]` holds on
/// `[times[k], times[k+1])`, the last value holds up to `horizon`, and the
/// series is zero outside `[times[0], horizon)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesField {
    times: Vec<f64>,
    values: Vec<Field>,
    horizon: f64,
}

impl TimeSeriesField {
    pub fn new(times: Vec<f64>, values: Vec<Field>, horizon: f64) -> Result<Self> {
        if times.len() != values.len() || times.is_empty() {
            return Err(Error::InvalidField(
                "time series needs one field per time and at least one time".into(),
            ));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidField("times must be strictly increasing".into()));
        }
        if !(times[0] >= 0.0) || !(horizon > *times.last().unwrap()) {
            return Err(Error::InvalidField(format!(
                "need 0 <= times[0] and horizon > last time, got horizon {horizon}"
            )));
        }
        let len = values[0].len();
        if values.iter().any(|v| v.len() != len) {
            return Err(Error::InvalidField(
                "fields in a time series must share one grid".into(),
            ));
        }
        Ok(Self { times, values, horizon })
    }

    /// Identically zero forcing on `[0, horizon)`.
    pub fn zero(grid: &Grid, horizon: f64) -> Self {
        Self::constant(grid.zeros(), horizon)
    }

    pub fn constant(value: Field, horizon: f64) -> Self {
        Self {
            times: vec![0.0],
            values: vec![value],
            horizon: horizon.max(f64::MIN_POSITIVE),
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Field] {
        &self.values
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn field_len(&self) -> usize {
        self.values[0].len()
    }

    /// Index of the piece active at `t`, or `None` where the series is zero.
    pub fn piece_at(&self, t: f64) -> Option<usize> {
        if t < self.times[0] || t >= self.horizon {
            return None;
        }
        Some(self.times.partition_point(|s| *s <= t) - 1)
    }

    pub fn sample(&self, t: f64) -> Option<&Field> {
        self.piece_at(t).map(|k| &self.values[k])
    }

    /// Breakpoints `times[0], ..., times[K-1], horizon`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.times.clone();
        b.push(self.horizon);
        b
    }

    /// Copy restricted to `[times[0], min(horizon, end))`.
    pub fn truncated(&self, end: f64) -> Self {
        let keep = self.times.partition_point(|s| *s < end).max(1);
        Self {
            times: self.times[..keep].to_vec(),
            values: self.values[..keep].to_vec(),
            horizon: self.horizon.min(end).max(self.times[keep - 1] + f64::MIN_POSITIVE),
        }
    }
}

pub fn build_grid(dim: usize, lengths: &[f64], n: &[usize]) -> Result<Grid> {
    Grid::new(dim, lengths, n)
}

/// Discrete `L^2` inner product `sum_x (u1 v1 + u2 v2)(x) * cell volume`.
pub fn l2_inner(u: &Field, v: &Field, g: &Grid) -> Result<f64> {
    g.check(u)?;
    g.check(v)?;
    Ok(u.dot_raw(v) * g.cell_volume())
}

pub fn l2_norm(u: &Field, g: &Grid) -> Result<f64> {
    Ok(l2_inner(u, u, g)?.sqrt())
}

pub(crate) fn l2_norm_unchecked(u: &Field, g: &Grid) -> f64 {
    (u.dot_raw(u) * g.cell_volume()).sqrt()
}

/// `(sum_x w * a(x)^r)^(1/r)` for nonnegative samples `a`, scaled by the
/// largest sample so large fields do not overflow.
pub(crate) fn power_mean<I>(samples: I, r: f64, weight: f64) -> f64
where
    I: Iterator<Item = f64> + Clone,
{
    let peak = samples.clone().fold(0.0, f64::max);
    if peak == 0.0 || !peak.is_finite() {
        return peak;
    }
    let sum: f64 = samples
        .filter(|a| *a > 0.0)
        .map(|a| crate::convex::real_pow(a / peak, r))
        .sum();
    peak * (sum * weight).powf(1.0 / r)
}

fn check_exponent(r: f64) -> Result<()> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("norm exponent must be >= 1, got {r}")));
    }
    Ok(())
}

/// `(int |U(x)|^r dx)^(1/r)` with `|.|` the Euclidean magnitude in R^2.
pub fn lr_norm_pointwise(u: &Field, r: f64, g: &Grid) -> Result<f64> {
    check_exponent(r)?;
    g.check(u)?;
    Ok(power_mean(u.magnitudes(), r, g.cell_volume()))
}

/// `(|u1|_r^r + |u2|_r^r)^(1/r)`, the componentwise product-space norm.
pub fn lr_norm_component(u: &Field, r: f64, g: &Grid) -> Result<f64> {
    check_exponent(r)?;
    g.check(u)?;
    let abs = u.u1.iter().chain(&u.u2).map(|v| v.abs());
    Ok(power_mean(abs, r, g.cell_volume()))
}

/// Rotation by a right angle, `I(u1, u2) = (-u2, u1)`: multiplication by `i`.
#[allow(non_snake_case)]
pub fn apply_I(u: &Field) -> Field {
    Field::from_parts(u.u2.iter().map(|v| -v).collect(), u.u1.clone())
}

/// `(kappa + beta I) V = kappa V + beta I V`.
pub(crate) fn rotate_scale(v: &Field, kappa: f64, beta: f64) -> Field {
    v.map_points(|[a, b]| [kappa * a - beta * b, kappa * b + beta * a])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(g: &Grid) -> Field {
        g.sample(|x| (x[0].sin() + 0.3, (3.0 * x[0]).cos() - x.last().unwrap()))
    }

    #[test]
    fn spacing_follows_interior_count() {
        let g = build_grid(1, &[1.0], &[3]).unwrap();
        assert_eq!(g.h(), &[0.25]);
        assert_eq!(g.len(), 3);

        let g = build_grid(2, &[1.0, 2.0], &[9, 19]).unwrap();
        assert!((g.h()[0] - 0.1).abs() < 1e-15);
        assert!((g.h()[1] - 0.1).abs() < 1e-15);
        assert_eq!(g.len(), 171);
    }

    #[test]
    fn invalid_grids_are_rejected() {
        assert!(build_grid(3, &[1.0; 3], &[4; 3]).is_err());
        assert!(build_grid(0, &[], &[]).is_err());
        assert!(build_grid(1, &[0.0], &[4]).is_err());
        assert!(build_grid(1, &[-1.0], &[4]).is_err());
        assert!(build_grid(1, &[1.0], &[2]).is_err());
        assert!(build_grid(2, &[1.0], &[4, 4]).is_err());
    }

    #[test]
    fn coords_are_row_major() {
        let g = Grid::rect([1.0, 2.0], [3, 4]).unwrap();
        assert_eq!(g.stride(0), 4);
        assert_eq!(g.stride(1), 1);
        let c = g.coords(4 + 2);
        assert!((c[0] - 0.5).abs() < 1e-15);
        assert!((c[1] - 1.2).abs() < 1e-15);
    }

    #[test]
    fn inner_product_basics() {
        let g = Grid::line(1.0, 3).unwrap();
        let z = g.zeros();
        assert_eq!(l2_inner(&z, &z, &g).unwrap(), 0.0);

        let one = Field::new(vec![1.0; 3], vec![0.0; 3]).unwrap();
        assert!((l2_inner(&one, &one, &g).unwrap() - 0.75).abs() < 1e-15);

        let g = Grid::rect([1.0, 1.5], [5, 6]).unwrap();
        let u = ramp(&g);
        let v = apply_I(&u).axpy(0.5, &u);
        let a = l2_inner(&u, &v, &g).unwrap();
        let b = l2_inner(&v, &u, &g).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let g = Grid::line(1.0, 5).unwrap();
        let u = Field::zeros(4);
        assert!(matches!(
            l2_inner(&u, &u, &g),
            Err(Error::GridMismatch { expected: 5, found: 4 })
        ));
    }

    #[test]
    fn field_constructor_validates() {
        assert!(Field::new(vec![1.0], vec![]).is_err());
        assert!(Field::new(vec![f64::NAN], vec![0.0]).is_err());
        assert!(Field::new(vec![1.0], vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn pointwise_norm_single_point() {
        // length 4 with 3 points gives unit cell weight
        let g = Grid::line(4.0, 3).unwrap();
        let u = Field::new(vec![0.0, 3.0, 0.0], vec![0.0, 4.0, 0.0]).unwrap();
        assert!((lr_norm_pointwise(&u, 2.0, &g).unwrap() - 5.0).abs() < 1e-14);
        assert_eq!(lr_norm_pointwise(&g.zeros(), 3.0, &g).unwrap(), 0.0);
        assert!(lr_norm_pointwise(&u, 0.5, &g).is_err());
        assert!(lr_norm_component(&u, 0.99, &g).is_err());
    }

    #[test]
    fn norms_are_homogeneous_and_agree_at_two() {
        let g = Grid::rect([1.0, 1.0], [7, 5]).unwrap();
        let u = ramp(&g);
        for r in [1.0, 2.0, 3.5, 6.0] {
            let base = lr_norm_pointwise(&u, r, &g).unwrap();
            let scaled = lr_norm_pointwise(&u.scaled(-2.5), r, &g).unwrap();
            assert!((scaled - 2.5 * base).abs() <= 1e-13 * scaled);
        }
        let p = lr_norm_pointwise(&u, 2.0, &g).unwrap();
        let c = lr_norm_component(&u, 2.0, &g).unwrap();
        assert!((p - c).abs() <= 1e-12 * p);
        assert!((p - l2_norm(&u, &g).unwrap()).abs() <= 1e-12 * p);
    }

    #[test]
    fn component_norm_with_vanishing_second_component() {
        let g = Grid::line(2.0, 9).unwrap();
        let u = g.sample(|x| (x[0] - 1.0, 0.0));
        let r = 3.0;
        let scalar: f64 = u.u1().iter().map(|v| v.abs().powf(r)).sum::<f64>() * g.cell_volume();
        let got = lr_norm_component(&u, r, &g).unwrap();
        assert!((got - scalar.powf(1.0 / r)).abs() < 1e-14);
    }

    #[test]
    fn rotation_properties() {
        let one = Field::new(vec![1.0], vec![0.0]).unwrap();
        assert_eq!(apply_I(&one), Field::new(vec![0.0], vec![1.0]).unwrap());

        let g = Grid::rect([1.0, 2.0], [6, 8]).unwrap();
        let u = ramp(&g);
        assert_eq!(apply_I(&apply_I(&u)), u.scaled(-1.0));
        assert_eq!(l2_inner(&apply_I(&u), &u, &g).unwrap().abs(), 0.0);
        let n0 = l2_norm(&u, &g).unwrap();
        let n1 = l2_norm(&apply_I(&u), &g).unwrap();
        assert!((n0 - n1).abs() <= 1e-14 * n0);
    }

    #[test]
    fn time_series_piecewise_constant_lookup() {
        let g = Grid::line(1.0, 3).unwrap();
        let a = g.zeros();
        let b = Field::new(vec![1.0; 3], vec![0.0; 3]).unwrap();
        let f = TimeSeriesField::new(vec![0.0, 0.5], vec![a.clone(), b.clone()], 1.0).unwrap();
        assert_eq!(f.sample(0.2), Some(&a));
        assert_eq!(f.sample(0.5), Some(&b));
        assert_eq!(f.sample(0.99), Some(&b));
        assert_eq!(f.sample(1.0), None);
        assert_eq!(f.sample(-0.1), None);

        assert!(TimeSeriesField::new(vec![0.5, 0.5], vec![a.clone(), b.clone()], 1.0).is_err());
        assert!(TimeSeriesField::new(vec![0.0], vec![a.clone()], 0.0).is_err());
        assert!(TimeSeriesField::new(vec![0.0, 0.1], vec![a, Field::zeros(4)], 1.0).is_err());
    }
}
