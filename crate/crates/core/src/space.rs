//! State spaces: circle, interval, square and flat torus, with their
//! geodesic metrics, the reference measure `λ` and the sampling
//! probability `μ`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::polygon::{clip_to_rect, signed_area, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Circle,
    Interval,
    Square,
    Torus,
}

impl SpaceKind {
    pub fn dim(self) -> usize {
        match self {
            SpaceKind::Circle | SpaceKind::Interval => 1,
            SpaceKind::Square | SpaceKind::Torus => 2,
        }
    }

    pub fn is_periodic(self) -> bool {
        matches!(self, SpaceKind::Circle | SpaceKind::Torus)
    }

    pub fn name(self) -> &'static str {
        match self {
            SpaceKind::Circle => "circle",
            SpaceKind::Interval => "interval",
            SpaceKind::Square => "square",
            SpaceKind::Torus => "torus",
        }
    }
}

/// A point in the canonical chart. One-dimensional spaces leave `y` at zero.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub const fn on_line(x: f64) -> Self {
        Point { x, y: 0.0 }
    }

    pub fn xy(self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub(crate) fn bits(self) -> (u64, u64) {
        // -0.0 and 0.0 are the same location.
        ((self.x + 0.0).to_bits(), (self.y + 0.0).to_bits())
    }
}

/// Piecewise-constant density on a regular `rows x cols` grid covering the
/// chart. Row `r` spans `y ∈ [r·L/rows, (r+1)·L/rows)`; one-dimensional
/// spaces use a single row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DensityGrid {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || values.len() != rows * cols {
            return Err(Error::InvalidSpace(format!(
                "density grid {rows}x{cols} needs {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidSpace("density values must be finite and non-negative".into()));
        }
        if values.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidSpace("density grid has zero total mass".into()));
        }
        Ok(DensityGrid { rows, cols, values })
    }

    pub fn uniform(value: f64) -> Result<Self> {
        Self::new(1, 1, vec![value])
    }

    /// Builds a grid from nested rows (`rows[r][c]`).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidSpace("density rows have unequal lengths".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn scaled(&self, c: f64) -> Self {
        DensityGrid { rows: self.rows, cols: self.cols, values: self.values.iter().map(|v| v * c).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Space {
    kind: SpaceKind,
    size: f64,
    lambda_density: Option<DensityGrid>,
    mu_density: Option<DensityGrid>,
}

impl Space {
    pub fn new(kind: SpaceKind, size: f64) -> Result<Self> {
        if !(size.is_finite() && size > 0.0) {
            return Err(Error::InvalidSpace(format!("size must be positive and finite, got {size}")));
        }
        Ok(Space { kind, size, lambda_density: None, mu_density: None })
    }

    pub fn circle(size: f64) -> Self {
        Self::new(SpaceKind::Circle, size).expect("invalid circle")
    }

    pub fn interval(size: f64) -> Self {
        Self::new(SpaceKind::Interval, size).expect("invalid interval")
    }

    pub fn square(size: f64) -> Self {
        Self::new(SpaceKind::Square, size).expect("invalid square")
    }

    pub fn torus(size: f64) -> Self {
        Self::new(SpaceKind::Torus, size).expect("invalid torus")
    }

    /// Uses `grid` as the density of both `λ` and `μ`.
    pub fn with_density(self, grid: DensityGrid) -> Result<Self> {
        self.with_lambda_density(grid.clone())?.with_mu_density(grid)
    }

    /// Density of the reference measure `λ`; must be strictly positive.
    pub fn with_lambda_density(mut self, grid: DensityGrid) -> Result<Self> {
        self.check_grid(&grid)?;
        if grid.min() <= 0.0 {
            return Err(Error::InvalidSpace("λ density must be bounded away from zero".into()));
        }
        self.lambda_density = Some(grid);
        Ok(self)
    }

    /// Density of the sampling measure `μ` (normalised internally). Zero
    /// cells are allowed and are simply never sampled.
    pub fn with_mu_density(mut self, grid: DensityGrid) -> Result<Self> {
        self.check_grid(&grid)?;
        self.mu_density = Some(grid);
        Ok(self)
    }

    fn check_grid(&self, grid: &DensityGrid) -> Result<()> {
        if self.kind.dim() == 1 && grid.rows != 1 {
            return Err(Error::InvalidSpace("one-dimensional spaces take a single density row".into()));
        }
        Ok(())
    }

    /// Copy with the `λ` density multiplied by `c` (μ is unchanged).
    pub fn scale_lambda(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.lambda_density = Some(match &self.lambda_density {
            Some(g) => g.scaled(c),
            None => DensityGrid::uniform(c).expect("positive scale"),
        });
        out
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn size(&self) -> f64 {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn lambda_density(&self) -> Option<&DensityGrid> {
        self.lambda_density.as_ref()
    }

    pub fn mu_density(&self) -> Option<&DensityGrid> {
        self.mu_density.as_ref()
    }

    pub fn has_uniform_lambda(&self) -> bool {
        self.lambda_density.is_none()
    }

    /// Whether `p` lies in the canonical chart: `[0, L)` on periodic axes,
    /// `[0, L]` on bounded ones.
    pub fn contains(&self, p: Point) -> bool {
        let l = self.size;
        let ok = |v: f64| {
            if self.kind.is_periodic() {
                (0.0..l).contains(&v)
            } else {
                (0.0..=l).contains(&v)
            }
        };
        ok(p.x) && (self.dim() == 1 && p.y == 0.0 || self.dim() == 2 && ok(p.y))
    }

    /// Maps a point into the chart; periodic axes wrap, bounded axes clamp.
    pub fn canonicalize(&self, p: Point) -> Point {
        let l = self.size;
        let fix = |v: f64| {
            if self.kind.is_periodic() {
                let w = v.rem_euclid(l);
                if w >= l {
                    0.0
                } else {
                    w
                }
            } else {
                v.clamp(0.0, l)
            }
        };
        match self.dim() {
            1 => Point::on_line(fix(p.x)),
            _ => Point::new(fix(p.x), fix(p.y)),
        }
    }

    #[inline]
    fn axis_delta(&self, d: f64) -> f64 {
        let d = d.abs();
        if self.kind.is_periodic() {
            d.min(self.size - d)
        } else {
            d
        }
    }

    /// Geodesic distance between two chart points.
    pub fn distance(&self, a: Point, b: Point) -> f64 {
        let dx = self.axis_delta(a.x - b.x);
        if self.dim() == 1 {
            return dx;
        }
        let dy = self.axis_delta(a.y - b.y);
        dx.hypot(dy)
    }

    /// Squared geodesic distance (2D) or squared distance (1D); cheaper for comparisons.
    #[inline]
    pub fn distance_sq(&self, a: Point, b: Point) -> f64 {
        let dx = self.axis_delta(a.x - b.x);
        if self.dim() == 1 {
            return dx * dx;
        }
        let dy = self.axis_delta(a.y - b.y);
        dx * dx + dy * dy
    }

    /// Density of `λ` at a chart point.
    pub fn lambda_at(&self, p: Point) -> f64 {
        match &self.lambda_density {
            None => 1.0,
            Some(g) => self.grid_value(g, p),
        }
    }

    fn grid_value(&self, g: &DensityGrid, p: Point) -> f64 {
        let l = self.size;
        let col = ((p.x / l * g.cols as f64) as usize).min(g.cols - 1);
        let row = if self.dim() == 1 { 0 } else { ((p.y / l * g.rows as f64) as usize).min(g.rows - 1) };
        g.value(row, col)
    }

    /// `λ(M)`.
    pub fn total_measure(&self) -> f64 {
        let l = self.size;
        let cell_volume = |g: &DensityGrid| match self.dim() {
            1 => l / g.cols as f64,
            _ => (l / g.cols as f64) * (l / g.rows as f64),
        };
        match &self.lambda_density {
            None => l.powi(self.dim() as i32),
            Some(g) => g.values.iter().sum::<f64>() * cell_volume(g),
        }
    }

    /// Draws a point from `μ` (uniform unless a μ density is set, in which
    /// case candidates are accepted with probability `ρ(p) / max ρ`).
    pub fn sample_mu<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let l = self.size;
        let draw = |rng: &mut R| match self.dim() {
            1 => Point::on_line(rng.gen::<f64>() * l),
            _ => Point::new(rng.gen::<f64>() * l, rng.gen::<f64>() * l),
        };
        match &self.mu_density {
            None => self.canonicalize(draw(rng)),
            Some(g) => {
                let top = g.max();
                loop {
                    let p = self.canonicalize(draw(rng));
                    if rng.gen::<f64>() * top < self.grid_value(g, p) {
                        return p;
                    }
                }
            }
        }
    }

    /// `λ([lo, hi])` for an interval on a one-dimensional space. On the
    /// circle `lo`/`hi` may leave `[0, L)` and the integral wraps.
    pub fn lambda_of_interval(&self, lo: f64, hi: f64) -> f64 {
        match &self.lambda_density {
            None => hi - lo,
            Some(g) => integrate_line(g, self.size, lo, hi),
        }
    }

    /// `μ([lo, hi])` as a probability.
    pub fn mu_of_interval(&self, lo: f64, hi: f64) -> f64 {
        match &self.mu_density {
            None => (hi - lo) / self.size,
            Some(g) => integrate_line(g, self.size, lo, hi) / integrate_line(g, self.size, 0.0, self.size),
        }
    }

    /// `λ` of a polygon given in (possibly unwrapped) plane coordinates.
    /// For the torus the density is extended periodically.
    pub fn lambda_of_polygon(&self, ring: &[[f64; 2]]) -> f64 {
        match &self.lambda_density {
            None => signed_area(ring).abs(),
            Some(g) => integrate_plane(g, self.size, ring),
        }
    }

    /// `μ` of a polygon as a probability.
    pub fn mu_of_polygon(&self, ring: &[[f64; 2]]) -> f64 {
        let l = self.size;
        match &self.mu_density {
            None => signed_area(ring).abs() / (l * l),
            Some(g) => {
                let whole = [[0.0, 0.0], [l, 0.0], [l, l], [0.0, l]];
                integrate_plane(g, l, ring) / integrate_plane(g, l, &whole)
            }
        }
    }
}

fn integrate_line(g: &DensityGrid, l: f64, lo: f64, hi: f64) -> f64 {
    let h = l / g.cols as f64;
    let first = (lo / h).floor() as i64;
    let last = (hi / h).ceil() as i64;
    let mut acc = 0.0;
    for k in first..last {
        let a = (k as f64 * h).max(lo);
        let b = ((k + 1) as f64 * h).min(hi);
        if b > a {
            let col = k.rem_euclid(g.cols as i64) as usize;
            acc += (b - a) * g.value(0, col);
        }
    }
    acc
}

fn integrate_plane(g: &DensityGrid, l: f64, ring: &[[f64; 2]]) -> f64 {
    if ring.len() < 3 {
        return 0.0;
    }
    let (hx, hy) = (l / g.cols as f64, l / g.rows as f64);
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in ring {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let mut acc = 0.0;
    for r in (y0 / hy).floor() as i64..(y1 / hy).ceil() as i64 {
        for c in (x0 / hx).floor() as i64..(x1 / hx).ceil() as i64 {
            let cell = Rect::new(c as f64 * hx, r as f64 * hy, (c + 1) as f64 * hx, (r + 1) as f64 * hy);
            let piece = clip_to_rect(ring, &cell);
            if piece.len() >= 3 {
                let v = g.value(r.rem_euclid(g.rows as i64) as usize, c.rem_euclid(g.cols as i64) as usize);
                acc += v * signed_area(&piece).abs();
            }
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn distances() {
        let c = Space::circle(1.0);
        assert!((c.distance(Point::on_line(0.1), Point::on_line(0.9)) - 0.2).abs() < 1e-15);
        let s = Space::square(1.0);
        assert_eq!(s.distance(Point::new(0.0, 0.0), Point::new(1.0, 1.0)), 2f64.sqrt());
    }

    #[test]
    fn torus_distance_matches_lattice_minimum() {
        let t = Space::torus(1.0);
        let (a, b) = (Point::new(0.1, 0.1), Point::new(0.9, 0.9));
        // Brute-force minimum over the 9 lattice translates of b.
        let mut best = f64::INFINITY;
        for i in -1..=1 {
            for j in -1..=1 {
                let dx = a.x - (b.x + i as f64);
                let dy = a.y - (b.y + j as f64);
                best = best.min(dx.hypot(dy));
            }
        }
        assert!((best - 0.08f64.sqrt()).abs() < 1e-15);
        assert!((t.distance(a, b) - best).abs() < 1e-15);
    }

    #[test]
    fn total_measures() {
        assert_eq!(Space::circle(1.0).total_measure(), 1.0);
        assert_eq!(Space::square(2.0).total_measure(), 4.0);
        let dense = Space::square(1.0).with_density(DensityGrid::uniform(2.0).unwrap()).unwrap();
        assert_eq!(dense.total_measure(), 2.0);
        let g = DensityGrid::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let s = Space::square(2.0).with_density(g).unwrap();
        // Each grid cell has area 1.
        assert!((s.total_measure() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_reproducible() {
        let s = Space::square(1.0);
        let a: Vec<Point> = {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            (0..10).map(|_| s.sample_mu(&mut rng)).collect()
        };
        let b: Vec<Point> = {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            (0..10).map(|_| s.sample_mu(&mut rng)).collect()
        };
        assert_eq!(a, b);
        assert!(a.iter().all(|p| s.contains(*p)));
    }

    #[test]
    fn circle_sample_mean() {
        let c = Space::circle(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 100_000;
        let mean = (0..n).map(|_| c.sample_mu(&mut rng).x).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn zero_weight_cell_is_never_sampled() {
        let g = DensityGrid::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let s = Space::square(1.0).with_mu_density(g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10_000 {
            let p = s.sample_mu(&mut rng);
            assert!(!(p.x >= 0.5 && p.y < 0.5), "sampled {p:?} in the empty cell");
        }
    }

    #[test]
    fn shared_grid_must_be_positive() {
        let g = DensityGrid::from_rows(&[vec![1.0, 0.0]]).unwrap();
        assert!(Space::circle(1.0).with_density(g).is_err());
    }

    #[test]
    fn wrapped_line_integral() {
        let g = DensityGrid::from_rows(&[vec![1.0, 3.0]]).unwrap();
        let c = Space::circle(1.0).with_density(g).unwrap();
        // [-0.25, 0.25] covers 0.25 of the second cell and 0.25 of the first.
        assert!((c.lambda_of_interval(-0.25, 0.25) - 1.0).abs() < 1e-15);
        assert!((c.lambda_of_interval(0.0, 1.0) - c.total_measure()).abs() < 1e-15);
    }

    #[test]
    fn periodic_polygon_integral() {
        let g = DensityGrid::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let t = Space::torus(1.0).with_density(g).unwrap();
        // Unit square shifted by half a period still covers every cell once.
        let ring = [[0.5, 0.5], [1.5, 0.5], [1.5, 1.5], [0.5, 1.5]];
        assert!((t.lambda_of_polygon(&ring) - t.total_measure()).abs() < 1e-12);
    }
}
