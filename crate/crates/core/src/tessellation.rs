//! Voronoi tessellation of a configuration: per-generator cell measure
//! `λ(C_x)` and Voronoi-neighbour sets, maintained incrementally under
//! single-point replacement.
//!
//! One-dimensional spaces keep the generators in sorted (circular) order.
//! Two-dimensional spaces keep a Delaunay triangulation; the flat torus is
//! handled by triangulating the generators together with their lattice
//! translates (3x3 block, or 5x5 when the 3x3 block cannot certify every
//! central cell), and the square by clipping planar cells to the chart.

use std::collections::{BTreeSet, HashMap};
use std::io::{self, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::delaunay::{Triangulation, UpdateError, SUPER_VERTICES};
use crate::geometry::polygon::{clip_segment, clip_to_rect, Rect};
use crate::geometry::predicates::incircle;
use crate::space::{Point, Space, SpaceKind};

/// Ordered tuple of distinct generators in a space.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    space: Arc<Space>,
    points: Vec<Point>,
}

impl Configuration {
    pub fn new(space: Arc<Space>, points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter { key: "points", reason: "configuration is empty".into() });
        }
        for p in &points {
            if !space.contains(*p) {
                return Err(Error::PointOutOfChart(p.xy()));
            }
        }
        let mut seen = HashMap::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if let Some(&first) = seen.get(&p.bits()) {
                return Err(Error::DuplicatePoints { first, second: i });
            }
            seen.insert(p.bits(), i);
        }
        Ok(Configuration { space, points })
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Point {
        self.points[i]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }
}

/// What an update did, for callers that cache per-cell quantities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateStats {
    /// `false` when the update fell back to a full rebuild.
    pub incremental: bool,
    /// Indices whose cell volume or neighbour set may have changed.
    /// Empty after a rebuild (everything may have changed).
    pub affected: Vec<usize>,
}

#[derive(Debug, Clone)]
struct LineIndex {
    order: Vec<usize>,
    pos: Vec<usize>,
}

#[derive(Debug, Clone)]
struct PlaneIndex {
    tri: Triangulation,
    n: usize,
    offsets: Vec<[f64; 2]>,
    /// Region in which every lattice translate is present (torus only).
    certified: Option<Rect>,
    /// Chart rectangle cells are clipped to (square only).
    clip: Option<Rect>,
}

/// Cell ring, neighbour indices and `(neighbour, shared edge length)` pairs.
type CellParts = (Vec<[f64; 2]>, Vec<usize>, Vec<(usize, f64)>);

#[derive(Debug, Clone)]
enum Index {
    Line(LineIndex),
    Plane(Box<PlaneIndex>),
}

#[derive(Debug, Clone)]
pub struct Tessellation {
    space: Arc<Space>,
    volumes: Vec<f64>,
    neighbors: Vec<Vec<usize>>,
    occupied: HashMap<(u64, u64), usize>,
    index: Index,
}

/// Smallest cavity (in triangles) that forces a rebuild for `n` generators.
pub fn cavity_limit(n: usize) -> usize {
    ((n as f64).sqrt().ceil() as usize).max(16)
}

impl Tessellation {
    pub fn build(config: &Configuration) -> Result<Self> {
        let space = config.space().clone();
        let mut occupied = HashMap::with_capacity(config.len());
        for (i, p) in config.points().iter().enumerate() {
            if let Some(&first) = occupied.get(&p.bits()) {
                return Err(Error::DuplicatePoints { first, second: i });
            }
            occupied.insert(p.bits(), i);
        }
        let n = config.len();
        let mut tess = Tessellation {
            space: space.clone(),
            volumes: vec![0.0; n],
            neighbors: vec![Vec::new(); n],
            occupied,
            index: Index::Line(LineIndex { order: Vec::new(), pos: Vec::new() }),
        };
        match space.kind() {
            SpaceKind::Circle | SpaceKind::Interval => {
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| config.point(a).x.total_cmp(&config.point(b).x));
                let mut pos = vec![0; n];
                for (k, &i) in order.iter().enumerate() {
                    pos[i] = k;
                }
                tess.index = Index::Line(LineIndex { order, pos });
            }
            SpaceKind::Square => {
                tess.index = Index::Plane(Box::new(PlaneIndex::build(config, 0)?));
            }
            SpaceKind::Torus => {
                let mut plane = PlaneIndex::build(config, 1)?;
                if !plane.certify_all() {
                    plane = PlaneIndex::build(config, 2)?;
                }
                tess.index = Index::Plane(Box::new(plane));
            }
        }
        for i in 0..n {
            tess.refresh_cell(config, i);
        }
        Ok(tess)
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.volumes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.volumes.is_empty()
    }

    /// `λ(C_i)` for every generator.
    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn volume(&self, i: usize) -> f64 {
        self.volumes[i]
    }

    /// Sorted Voronoi-neighbour indices of generator `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    /// Number of lattice translates used for the flat torus (9 or 25), 1 otherwise.
    pub fn replication(&self) -> usize {
        match &self.index {
            Index::Plane(p) => p.offsets.len(),
            Index::Line(_) => 1,
        }
    }

    /// Voronoi cell of generator `i` as a counter-clockwise ring in plane
    /// coordinates (unwrapped around the generator on the torus, clipped to
    /// the chart on the square). Empty for one-dimensional spaces.
    pub fn cell_polygon(&self, i: usize) -> Vec<[f64; 2]> {
        match &self.index {
            Index::Plane(p) => p.cell(i).0,
            Index::Line(_) => Vec::new(),
        }
    }

    /// For one-dimensional spaces, the cell of generator `i` as `[lo, hi]`
    /// in unwrapped coordinates.
    pub fn cell_interval(&self, config: &Configuration, i: usize) -> Option<(f64, f64)> {
        match &self.index {
            Index::Line(line) => Some(line.cell(config, i).0),
            Index::Plane(_) => None,
        }
    }

    /// Every neighbour pair `i < j` with the extent of the shared boundary:
    /// the clipped Voronoi edge length in 2D, the shorter of the two cell
    /// lengths in 1D.
    pub fn neighbor_extents(&self, config: &Configuration) -> Vec<(usize, usize, f64)> {
        let mut out: HashMap<(usize, usize), f64> = HashMap::new();
        match &self.index {
            Index::Line(line) => {
                for i in 0..self.len() {
                    for &j in &self.neighbors[i] {
                        if i < j {
                            let (a, b) = line.cell(config, i).0;
                            let (c, d) = line.cell(config, j).0;
                            out.insert((i, j), (b - a).min(d - c));
                        }
                    }
                }
            }
            Index::Plane(plane) => {
                for i in 0..self.len() {
                    for (j, len) in plane.cell(i).2 {
                        let key = (i.min(j), i.max(j));
                        let e = out.entry(key).or_insert(0.0);
                        // Each edge is seen from both sides; keep the longest piece.
                        *e = e.max(len);
                    }
                }
            }
        }
        let mut v: Vec<_> = out.into_iter().map(|((i, j), l)| (i, j, l)).collect();
        v.sort_by_key(|a| (a.0, a.1));
        v
    }

    fn refresh_cell(&mut self, config: &Configuration, i: usize) {
        let (volume, mut nbrs) = match &self.index {
            Index::Line(line) => {
                let ((lo, hi), nbrs) = line.cell(config, i);
                (self.space.lambda_of_interval(lo, hi), nbrs)
            }
            Index::Plane(plane) => {
                let (ring, nbrs, _) = plane.cell(i);
                (self.space.lambda_of_polygon(&ring), nbrs)
            }
        };
        nbrs.sort_unstable();
        nbrs.dedup();
        self.volumes[i] = volume;
        self.neighbors[i] = nbrs;
    }

    /// Moves generator `j` of `config` to `p`, updating both in place.
    ///
    /// The result matches [`Tessellation::build`] on the updated
    /// configuration. Large cavities and uncertified torus cells fall back
    /// to a full rebuild.
    pub fn replace_point(&mut self, config: &mut Configuration, j: usize, p: Point) -> Result<UpdateStats> {
        if !self.space.contains(p) {
            return Err(Error::PointOutOfChart(p.xy()));
        }
        let old = config.point(j);
        if old.bits() == p.bits() {
            return Ok(UpdateStats { incremental: true, affected: Vec::new() });
        }
        if let Some(&other) = self.occupied.get(&p.bits()) {
            return Err(Error::DuplicatePoints { first: j, second: other });
        }
        self.occupied.remove(&old.bits());
        self.occupied.insert(p.bits(), j);
        config.points[j] = p;

        let affected = match &mut self.index {
            Index::Line(line) => Some(line.replace(config, j)),
            Index::Plane(plane) => plane.replace(j, p).ok(),
        };
        match affected {
            Some(mut affected) => {
                affected.push(j);
                affected.sort_unstable();
                affected.dedup();
                for &i in &affected {
                    self.refresh_cell(config, i);
                }
                Ok(UpdateStats { incremental: true, affected })
            }
            None => {
                *self = Tessellation::build(config)?;
                Ok(UpdateStats { incremental: false, affected: Vec::new() })
            }
        }
    }

    /// Removes generator `j` (indices above `j` shift down by one) and
    /// rebuilds the tessellation.
    pub fn remove_point(&mut self, config: &mut Configuration, j: usize) -> Result<Point> {
        if config.len() < 2 {
            return Err(Error::InvalidParameter { key: "points", reason: "cannot remove the last generator".into() });
        }
        let removed = config.points.remove(j);
        *self = Tessellation::build(config)?;
        Ok(removed)
    }

    /// Re-checks the underlying triangulation with the exact predicates.
    pub fn validate(&self) -> std::result::Result<(), String> {
        match &self.index {
            Index::Plane(p) => p.tri.validate(),
            Index::Line(l) => {
                if l.order.len() == l.pos.len() && l.order.iter().enumerate().all(|(k, &i)| l.pos[i] == k) {
                    Ok(())
                } else {
                    Err("sorted order and positions disagree".into())
                }
            }
        }
    }

    /// Writes the cell table (see [`write_cell_table`]).
    pub fn write_snapshot<W: Write>(&self, config: &Configuration, w: W) -> io::Result<()> {
        write_cell_table(self.space.dim(), config.points(), &self.volumes, &self.neighbors, w)
    }
}

/// Writes one line per generator:
/// `index,x[,y],cell_volume,degree,neighbors` with neighbours separated by `;`.
pub fn write_cell_table<W: Write>(
    dim: usize,
    points: &[Point],
    volumes: &[f64],
    neighbors: &[Vec<usize>],
    mut w: W,
) -> io::Result<()> {
    if dim == 2 {
        writeln!(w, "index,x,y,cell_volume,degree,neighbors")?;
    } else {
        writeln!(w, "index,x,cell_volume,degree,neighbors")?;
    }
    for (i, p) in points.iter().enumerate() {
        let nb = neighbors[i].iter().map(|j| j.to_string()).collect::<Vec<_>>().join(";");
        if dim == 2 {
            writeln!(w, "{i},{},{},{},{},{nb}", p.x, p.y, volumes[i], neighbors[i].len())?;
        } else {
            writeln!(w, "{i},{},{},{},{nb}", p.x, volumes[i], neighbors[i].len())?;
        }
    }
    Ok(())
}

impl LineIndex {
    /// Cell `[lo, hi]` of generator `i` and its neighbours.
    fn cell(&self, config: &Configuration, i: usize) -> ((f64, f64), Vec<usize>) {
        let space = config.space();
        let l = space.size();
        let k = self.order.len();
        let x = config.point(i).x;
        if k == 1 {
            return ((0.0, l), Vec::new());
        }
        let p = self.pos[i];
        let prev = self.order[(p + k - 1) % k];
        let next = self.order[(p + 1) % k];
        match space.kind() {
            SpaceKind::Circle => {
                let xp = config.point(prev).x - if p == 0 { l } else { 0.0 };
                let xn = config.point(next).x + if p == k - 1 { l } else { 0.0 };
                let nb = if prev == next { vec![prev] } else { vec![prev, next] };
                ((0.5 * (xp + x), 0.5 * (x + xn)), nb)
            }
            _ => {
                let mut nb = Vec::with_capacity(2);
                let lo = if p == 0 {
                    0.0
                } else {
                    nb.push(prev);
                    0.5 * (config.point(prev).x + x)
                };
                let hi = if p == k - 1 {
                    l
                } else {
                    nb.push(next);
                    0.5 * (x + config.point(next).x)
                };
                ((lo, hi), nb)
            }
        }
    }

    /// Re-sorts after generator `j` moved; returns the generators whose
    /// cells changed besides `j`.
    fn replace(&mut self, config: &Configuration, j: usize) -> Vec<usize> {
        let k = self.order.len();
        let mut affected = Vec::with_capacity(4);
        if k == 1 {
            return affected;
        }
        let old = self.pos[j];
        affected.push(self.order[(old + k - 1) % k]);
        affected.push(self.order[(old + 1) % k]);
        self.order.remove(old);
        let x = config.point(j).x;
        let new = self.order.partition_point(|&i| config.point(i).x < x);
        self.order.insert(new, j);
        affected.push(self.order[(new + k - 1) % k]);
        affected.push(self.order[(new + 1) % k]);
        for q in old.min(new)..=old.max(new) {
            self.pos[self.order[q]] = q;
        }
        affected.retain(|&i| i != j);
        affected
    }
}

/// Visiting order that keeps consecutive points close (row snake over a
/// coarse grid), so each point-location walk is short.
fn spatial_order(pts: &[[f64; 2]], bounds: [f64; 4]) -> Vec<usize> {
    let g = ((pts.len() as f64 / 4.0).sqrt().ceil() as usize).max(1);
    let w = (bounds[2] - bounds[0]).max(f64::MIN_POSITIVE);
    let h = (bounds[3] - bounds[1]).max(f64::MIN_POSITIVE);
    let key = |p: [f64; 2]| {
        let r = (((p[1] - bounds[1]) / h * g as f64) as usize).min(g - 1);
        let c = (((p[0] - bounds[0]) / w * g as f64) as usize).min(g - 1);
        let c = if r.is_multiple_of(2) { c } else { g - 1 - c };
        (r, c)
    };
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| key(pts[a]).cmp(&key(pts[b])).then(pts[a][0].total_cmp(&pts[b][0])).then(a.cmp(&b)));
    idx
}

impl PlaneIndex {
    /// `reach` = 0 for the square (no translates), 1 for a 3x3 torus block,
    /// 2 for 5x5.
    fn build(config: &Configuration, reach: i32) -> Result<Self> {
        let space = config.space();
        let l = space.size();
        let n = config.len();
        let mut offsets = vec![[0.0, 0.0]];
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                if dx != 0 || dy != 0 {
                    offsets.push([dx as f64 * l, dy as f64 * l]);
                }
            }
        }
        let lo = -(reach as f64) * l;
        let hi = (reach as f64 + 1.0) * l;
        let bounds = [lo, lo, hi, hi];
        let mut tri = Triangulation::new(bounds, n * offsets.len());
        let mut all = Vec::with_capacity(n * offsets.len());
        for off in &offsets {
            for p in config.points() {
                all.push([p.x + off[0], p.y + off[1]]);
            }
        }
        for k in spatial_order(&all, bounds) {
            match tri.insert((k + SUPER_VERTICES) as u32, all[k]) {
                Ok(_) => {}
                Err(UpdateError::Duplicate(v)) => {
                    let first = (v as usize - SUPER_VERTICES) % n;
                    return Err(Error::DuplicatePoints { first, second: k % n });
                }
                Err(e) => panic!("triangulation failed while building: {e:?}"),
            }
        }
        tri.set_cavity_limit(cavity_limit(n));
        let (certified, clip) = match space.kind() {
            SpaceKind::Torus => (Some(Rect::new(lo, lo, hi, hi)), None),
            _ => (None, Some(Rect::new(0.0, 0.0, l, l))),
        };
        Ok(PlaneIndex { tri, n, offsets, certified, clip })
    }

    #[inline]
    fn vid(&self, copy: usize, i: usize) -> u32 {
        (SUPER_VERTICES + copy * self.n + i) as u32
    }

    #[inline]
    fn generator(&self, vid: u32) -> Option<usize> {
        (vid as usize).checked_sub(SUPER_VERTICES).map(|k| k % self.n)
    }

    fn is_central(&self, vid: u32) -> bool {
        (SUPER_VERTICES..SUPER_VERTICES + self.n).contains(&(vid as usize))
    }

    /// Whether the circumdisk of `t` lies inside the block where every
    /// translate is present, so `t` is a triangle of the periodic Delaunay
    /// triangulation.
    fn certified(&self, t: u32) -> bool {
        let Some(rect) = self.certified else { return true };
        let c = self.tri.center(t);
        let v = self.tri.point(self.tri.triangle(t)[0]);
        let r = (c[0] - v[0]).hypot(c[1] - v[1]);
        let slack = 1e-9 * (rect.x1 - rect.x0);
        c[0] - r >= rect.x0 + slack
            && c[0] + r <= rect.x1 - slack
            && c[1] - r >= rect.y0 + slack
            && c[1] + r <= rect.y1 - slack
    }

    fn certify_all(&self) -> bool {
        let mut star = Vec::new();
        (0..self.n).all(|i| {
            self.tri.star(self.vid(0, i), &mut star);
            star.iter().all(|&(t, _, _)| self.certified(t))
        })
    }

    /// Parts of the cell of generator `i`.
    fn cell(&self, i: usize) -> CellParts {
        let mut star = Vec::new();
        let vid = self.vid(0, i);
        self.tri.star(vid, &mut star);
        let m = star.len();
        let mut ring: Vec<[f64; 2]> = star.iter().map(|&(t, _, _)| self.tri.center(t)).collect();
        let mut nbrs = Vec::with_capacity(m);
        let mut edges = Vec::with_capacity(m);
        for k in 0..m {
            let (t, _, c) = star[k];
            let (t_next, _, c_next) = star[(k + 1) % m];
            let Some(j) = self.generator(c) else { continue };
            if j == i {
                continue;
            }
            let [a, b, d] = self.tri.triangle(t).map(|v| self.tri.point(v));
            // Cocircular quadrilateral: the dual Voronoi edge has zero length.
            if incircle(a, b, d, self.tri.point(c_next)) == 0.0 {
                continue;
            }
            let (p, q) = (self.tri.center(t), self.tri.center(t_next));
            let len = match &self.clip {
                None => (q[0] - p[0]).hypot(q[1] - p[1]),
                Some(rect) => match clip_segment(p, q, rect) {
                    Some((p, q)) => (q[0] - p[0]).hypot(q[1] - p[1]),
                    None => 0.0,
                },
            };
            if len > 0.0 {
                nbrs.push(j);
                edges.push((j, len));
            }
        }
        if let Some(rect) = &self.clip {
            ring = clip_to_rect(&ring, rect);
        }
        (ring, nbrs, edges)
    }

    /// Moves every copy of generator `j` to `p` (plus lattice offsets).
    /// Returns the other generators whose stars changed, or `Err` when the
    /// caller must rebuild.
    fn replace(&mut self, j: usize, p: Point) -> std::result::Result<Vec<usize>, UpdateError> {
        let mut touched: Vec<u32> = Vec::new();
        let mut created: Vec<u32> = Vec::new();
        for copy in 0..self.offsets.len() {
            let ch = self.tri.remove(self.vid(copy, j))?;
            touched.extend(ch.touched);
        }
        let mut hint = None;
        for copy in 0..self.offsets.len() {
            let off = self.offsets[copy];
            let q = [p.x + off[0], p.y + off[1]];
            let vid = self.vid(copy, j);
            let ch = match hint {
                Some(u) => self.tri.insert_near(vid, q, self.vid(copy, u))?,
                None => self.tri.insert(vid, q)?,
            };
            if hint.is_none() {
                hint = ch.touched.iter().find_map(|&v| self.generator(v)).filter(|&u| u != j);
            }
            touched.extend(ch.touched);
            created.extend(ch.created);
        }
        if self.certified.is_some() {
            for &t in &created {
                if self.tri.is_alive(t)
                    && self.tri.triangle(t).iter().any(|&v| self.is_central(v))
                    && !self.certified(t)
                {
                    return Err(UpdateError::CavityTooLarge(0));
                }
            }
        }
        let mut out: Vec<usize> = touched.into_iter().filter_map(|v| self.generator(v)).collect();
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

/// Approximate cell measures and adjacency from exhaustive nearest-generator
/// assignment of a stratified sample grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleStats {
    pub volumes: Vec<f64>,
    pub neighbors: Vec<BTreeSet<usize>>,
    /// Spacing of the sample grid.
    pub spacing: f64,
}

/// Brute-force verification oracle: `resolution` stratified samples (a
/// `⌈√resolution⌉²` grid in 2D) are assigned to their nearest generator.
pub fn oracle_cell_stats(config: &Configuration, resolution: usize) -> OracleStats {
    let space = config.space();
    let l = space.size();
    let pts = config.points();
    let n = pts.len();
    let nearest = |q: Point| {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, p) in pts.iter().enumerate() {
            let d = space.distance_sq(q, *p);
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        best as u32
    };
    let periodic = space.kind().is_periodic();
    let mut volumes = vec![0.0; n];
    let mut neighbors = vec![BTreeSet::new(); n];
    let link = |a: u32, b: u32, neighbors: &mut Vec<BTreeSet<usize>>| {
        if a != b {
            neighbors[a as usize].insert(b as usize);
            neighbors[b as usize].insert(a as usize);
        }
    };
    if space.dim() == 1 {
        let m = resolution.max(1);
        let h = l / m as f64;
        let owner: Vec<u32> = crate::par_map(m, |s| nearest(Point::on_line((s as f64 + 0.5) * h)));
        for (s, &o) in owner.iter().enumerate() {
            volumes[o as usize] += h * space.lambda_at(Point::on_line((s as f64 + 0.5) * h));
            if s + 1 < m {
                link(o, owner[s + 1], &mut neighbors);
            } else if periodic {
                link(o, owner[0], &mut neighbors);
            }
        }
        return OracleStats { volumes, neighbors, spacing: h };
    }
    let m = ((resolution as f64).sqrt().ceil() as usize).max(1);
    let h = l / m as f64;
    let rows: Vec<Vec<u32>> = crate::par_map(m, |r| {
        let y = (r as f64 + 0.5) * h;
        (0..m).map(|c| nearest(Point::new((c as f64 + 0.5) * h, y))).collect()
    });
    for r in 0..m {
        let y = (r as f64 + 0.5) * h;
        for c in 0..m {
            let o = rows[r][c];
            volumes[o as usize] += h * h * space.lambda_at(Point::new((c as f64 + 0.5) * h, y));
            if c + 1 < m {
                link(o, rows[r][c + 1], &mut neighbors);
            } else if periodic {
                link(o, rows[r][0], &mut neighbors);
            }
            if r + 1 < m {
                link(o, rows[r + 1][c], &mut neighbors);
            } else if periodic {
                link(o, rows[0][c], &mut neighbors);
            }
        }
    }
    OracleStats { volumes, neighbors, spacing: h }
}

/// Disagreement between a tessellation and the sampling oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    /// Largest cell-measure error relative to `λ(M)`.
    pub max_volume_error: f64,
    /// Neighbour pairs whose shared boundary exceeds two sample spacings
    /// but which the oracle does not see as adjacent.
    pub missed_by_oracle: Vec<(usize, usize)>,
    /// Oracle adjacencies between generators that are not neighbours.
    pub extra_in_oracle: Vec<(usize, usize)>,
}

impl OracleComparison {
    pub fn agrees(&self, volume_tol: f64) -> bool {
        self.max_volume_error <= volume_tol && self.missed_by_oracle.is_empty()
    }
}

/// Compares [`Tessellation::build`] with [`oracle_cell_stats`]. Oracle-only
/// adjacencies are reported but not judged, since grid samples can touch
/// across a Voronoi vertex.
pub fn compare_with_oracle(config: &Configuration, resolution: usize) -> Result<OracleComparison> {
    let tess = Tessellation::build(config)?;
    let oracle = oracle_cell_stats(config, resolution);
    let total = config.space().total_measure();
    let max_volume_error =
        (0..config.len()).map(|i| (tess.volume(i) - oracle.volumes[i]).abs() / total).fold(0.0, f64::max);
    let mut missed_by_oracle = Vec::new();
    for (i, j, extent) in tess.neighbor_extents(config) {
        if extent > 2.0 * oracle.spacing && !oracle.neighbors[i].contains(&j) {
            missed_by_oracle.push((i, j));
        }
    }
    let mut extra_in_oracle = Vec::new();
    for (i, set) in oracle.neighbors.iter().enumerate() {
        for &j in set.range(i + 1..) {
            if !tess.neighbors(i).contains(&j) {
                extra_in_oracle.push((i, j));
            }
        }
    }
    Ok(OracleComparison { max_volume_error, missed_by_oracle, extra_in_oracle })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(space: Space, pts: &[Point]) -> Configuration {
        Configuration::new(Arc::new(space), pts.to_vec()).unwrap()
    }

    #[test]
    fn two_points_in_the_square_split_it_evenly() {
        let c = config(Space::square(1.0), &[Point::new(0.25, 0.5), Point::new(0.75, 0.5)]);
        let t = Tessellation::build(&c).unwrap();
        assert!((t.volume(0) - 0.5).abs() < 1e-12);
        assert!((t.volume(1) - 0.5).abs() < 1e-12);
        assert_eq!(t.neighbors(0), &[1]);
        assert_eq!(t.neighbors(1), &[0]);
    }

    #[test]
    fn circle_three_point_volumes() {
        let c = config(Space::circle(1.0), &[0.0, 0.1, 0.5].map(Point::on_line));
        let t = Tessellation::build(&c).unwrap();
        for (v, want) in t.volumes().iter().zip([0.30, 0.25, 0.45]) {
            assert!((v - want).abs() < 1e-12, "{v} vs {want}");
        }
        assert!(t.neighbors.iter().all(|n| n.len() == 2));
    }

    #[test]
    fn single_point_owns_everything() {
        for space in [Space::circle(1.0), Space::interval(2.0), Space::square(1.5), Space::torus(1.0)] {
            let p = if space.dim() == 1 { Point::on_line(0.3) } else { Point::new(0.3, 0.6) };
            let total = space.total_measure();
            let t = Tessellation::build(&config(space, &[p])).unwrap();
            assert!((t.volume(0) - total).abs() < 1e-12 * total);
            assert!(t.neighbors(0).is_empty());
        }
    }

    #[test]
    fn interval_cells_are_clipped() {
        let c = config(Space::interval(1.0), &[0.2, 0.6].map(Point::on_line));
        let t = Tessellation::build(&c).unwrap();
        assert!((t.volume(0) - 0.4).abs() < 1e-15);
        assert!((t.volume(1) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn duplicates_are_rejected() {
        let space = Arc::new(Space::square(1.0));
        let err = Configuration::new(space, vec![Point::new(0.1, 0.1), Point::new(0.1, 0.1)]).unwrap_err();
        assert_eq!(err, Error::DuplicatePoints { first: 0, second: 1 });
    }

    #[test]
    fn replacing_with_the_same_point_changes_nothing() {
        let mut c = config(Space::torus(1.0), &[Point::new(0.1, 0.2), Point::new(0.6, 0.7), Point::new(0.3, 0.9)]);
        let mut t = Tessellation::build(&c).unwrap();
        let before = (t.volumes.clone(), t.neighbors.clone());
        t.replace_point(&mut c, 1, Point::new(0.6, 0.7)).unwrap();
        assert_eq!(before, (t.volumes.clone(), t.neighbors.clone()));
    }

    #[test]
    fn replace_onto_an_occupied_location_fails() {
        let mut c = config(Space::square(1.0), &[Point::new(0.1, 0.2), Point::new(0.6, 0.7)]);
        let mut t = Tessellation::build(&c).unwrap();
        let err = t.replace_point(&mut c, 0, Point::new(0.6, 0.7)).unwrap_err();
        assert_eq!(err, Error::DuplicatePoints { first: 0, second: 1 });
        assert_eq!(c.point(0), Point::new(0.1, 0.2));
    }

    #[test]
    fn torus_cell_touching_its_own_translate_is_not_self_adjacent() {
        let c = config(Space::torus(1.0), &[Point::new(0.25, 0.5), Point::new(0.75, 0.5)]);
        let t = Tessellation::build(&c).unwrap();
        assert_eq!(t.neighbors(0), &[1]);
        assert!((t.volume(0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exact_grid_on_torus_has_four_neighbours() {
        // Cocircular everywhere: corner contacts must not count.
        let mut pts = Vec::new();
        // Dyadic spacing keeps every lattice translate exactly on the grid.
        for r in 0..8 {
            for c in 0..8 {
                pts.push(Point::new(c as f64 / 8.0, r as f64 / 8.0));
            }
        }
        let t = Tessellation::build(&config(Space::torus(1.0), &pts)).unwrap();
        t.validate().unwrap();
        for i in 0..pts.len() {
            assert_eq!(t.degree(i), 4, "generator {i}");
            assert!((t.volume(i) - 1.0 / 64.0).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_two_point_square() {
        let c = config(Space::square(1.0), &[Point::new(0.25, 0.5), Point::new(0.75, 0.5)]);
        let o = oracle_cell_stats(&c, 1_000_000);
        assert!((o.volumes[0] - 0.5).abs() < 5e-3);
        assert!((o.volumes[1] - 0.5).abs() < 5e-3);
        assert!(o.neighbors[0].contains(&1));
    }

    #[test]
    fn oracle_circle_three_points() {
        let c = config(Space::circle(1.0), &[0.0, 0.1, 0.5].map(Point::on_line));
        let o = oracle_cell_stats(&c, 1_000_000);
        for (v, want) in o.volumes.iter().zip([0.30, 0.25, 0.45]) {
            assert!((v - want).abs() < 5e-3);
        }
    }

    #[test]
    fn snapshot_format() {
        let c = config(Space::circle(1.0), &[0.0, 0.1, 0.5].map(Point::on_line));
        let t = Tessellation::build(&c).unwrap();
        let mut buf = Vec::new();
        t.write_snapshot(&c, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index,x,cell_volume,degree,neighbors");
        assert_eq!(lines[2], "1,0.1,0.25,2,0;2");
    }
}
