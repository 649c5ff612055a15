//! Dynamic planar Delaunay triangulation.
//!
//! Vertices live in caller-chosen slots so that a generator keeps the same
//! vertex id through repeated delete/insert cycles. Three far-away
//! "super" vertices (slots 0, 1, 2) enclose every real vertex; each real
//! vertex is therefore interior and has a closed star.
//!
//! Insertion is Bowyer-Watson (cavity of triangles whose circumcircle
//! strictly contains the new point). Deletion re-triangulates the star
//! polygon by clipping ears whose circumcircle contains no vertex of the
//! original link. Points exactly on a circumcircle never enter a cavity,
//! so the structure stays a (weak) Delaunay triangulation under any
//! cocircular ties.

use super::predicates::{circumcenter, incircle, orient2d};

pub const NONE: u32 = u32::MAX;
pub const SUPER_VERTICES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateError {
    /// The point coincides with the given live vertex.
    Duplicate(u32),
    /// The affected region exceeds the configured cavity limit; nothing was modified.
    CavityTooLarge(usize),
    /// The walk or the hole filling could not make progress; nothing was modified.
    Stuck,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Change {
    /// Triangles created by the update.
    pub created: Vec<u32>,
    /// Vertices whose star changed (excluding the inserted/removed vertex).
    pub touched: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct Triangulation {
    pts: Vec<[f64; 2]>,
    live: Vec<bool>,
    vert_tri: Vec<u32>,
    tris: Vec<[u32; 3]>,
    nbrs: Vec<[u32; 3]>,
    centers: Vec<[f64; 2]>,
    alive: Vec<bool>,
    free: Vec<u32>,
    hint: u32,
    mark: Vec<u32>,
    stamp: u32,
    cavity_limit: usize,
}

#[inline]
fn next(i: usize) -> usize {
    if i == 2 {
        0
    } else {
        i + 1
    }
}

#[inline]
fn prev(i: usize) -> usize {
    if i == 0 {
        2
    } else {
        i - 1
    }
}

impl Triangulation {
    /// Empty triangulation whose super triangle comfortably encloses `bounds`
    /// (`[xmin, ymin, xmax, ymax]`), with `slots` real vertex slots.
    pub fn new(bounds: [f64; 4], slots: usize) -> Self {
        let cx = 0.5 * (bounds[0] + bounds[2]);
        let cy = 0.5 * (bounds[1] + bounds[3]);
        let half = 0.5 * (bounds[2] - bounds[0]).max(bounds[3] - bounds[1]).max(f64::MIN_POSITIVE);
        // Inradius of the super triangle.
        let r = 1.0e3 * half;
        let s3 = 3f64.sqrt();
        let supers = [[cx, cy + 2.0 * r], [cx - s3 * r, cy - r], [cx + s3 * r, cy - r]];
        let total = SUPER_VERTICES + slots;
        let mut pts = vec![[f64::NAN; 2]; total];
        pts[..3].copy_from_slice(&supers);
        let mut live = vec![false; total];
        live[..3].fill(true);
        let mut vert_tri = vec![NONE; total];
        vert_tri[..3].fill(0);
        let center = circumcenter(supers[0], supers[1], supers[2]);
        Triangulation {
            pts,
            live,
            vert_tri,
            tris: vec![[0, 1, 2]],
            nbrs: vec![[NONE; 3]],
            centers: vec![center],
            alive: vec![true],
            free: Vec::new(),
            hint: 0,
            mark: vec![0],
            stamp: 0,
            cavity_limit: usize::MAX,
        }
    }

    /// Largest number of triangles an incremental update may destroy before
    /// it gives up with [`UpdateError::CavityTooLarge`].
    pub fn set_cavity_limit(&mut self, limit: usize) {
        self.cavity_limit = limit.max(3);
    }

    pub fn slots(&self) -> usize {
        self.pts.len() - SUPER_VERTICES
    }

    pub fn point(&self, vid: u32) -> [f64; 2] {
        self.pts[vid as usize]
    }

    pub fn is_live(&self, vid: u32) -> bool {
        self.live[vid as usize]
    }

    pub fn triangle(&self, t: u32) -> [u32; 3] {
        self.tris[t as usize]
    }

    pub fn center(&self, t: u32) -> [f64; 2] {
        self.centers[t as usize]
    }

    pub fn is_alive(&self, t: u32) -> bool {
        self.alive[t as usize]
    }

    pub fn live_triangles(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.tris.len() as u32).filter(|&t| self.alive[t as usize])
    }

    pub fn triangle_count(&self) -> usize {
        self.tris.len() - self.free.len()
    }

    fn bump_stamp(&mut self) -> u32 {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.mark.fill(0);
            self.stamp = 1;
        }
        self.stamp
    }

    fn alloc(&mut self) -> u32 {
        if let Some(t) = self.free.pop() {
            self.alive[t as usize] = true;
            t
        } else {
            self.tris.push([NONE; 3]);
            self.nbrs.push([NONE; 3]);
            self.centers.push([f64::NAN; 2]);
            self.alive.push(true);
            self.mark.push(0);
            (self.tris.len() - 1) as u32
        }
    }

    fn release(&mut self, t: u32) {
        self.alive[t as usize] = false;
        self.free.push(t);
    }

    fn refresh_center(&mut self, t: u32) {
        let [a, b, c] = self.tris[t as usize];
        self.centers[t as usize] = circumcenter(self.pts[a as usize], self.pts[b as usize], self.pts[c as usize]);
    }

    /// Makes triangle `n` point back to `t` across their shared edge `(u, v)`.
    fn relink(&mut self, n: u32, u: u32, v: u32, t: u32) {
        if n == NONE {
            return;
        }
        let tri = self.tris[n as usize];
        if let Some(j) = tri.iter().position(|&x| x != u && x != v) {
            self.nbrs[n as usize][j] = t;
            return;
        }
        unreachable!("triangle {n} does not contain edge ({u}, {v})");
    }

    fn any_alive_triangle(&self) -> u32 {
        if self.alive[self.hint as usize] {
            return self.hint;
        }
        self.live_triangles().next().expect("triangulation has no triangles")
    }

    /// Triangle whose closure contains `p`, found by a visibility walk.
    pub fn locate(&self, p: [f64; 2]) -> Result<u32, UpdateError> {
        self.locate_from(p, self.any_alive_triangle())
    }

    fn locate_from(&self, p: [f64; 2], start: u32) -> Result<u32, UpdateError> {
        let mut t = start;
        let limit = self.tris.len() + 16;
        let mut steps = 0usize;
        'walk: loop {
            steps += 1;
            if steps > limit {
                return self.locate_brute(p);
            }
            let tri = self.tris[t as usize];
            let rot = steps % 3;
            for k in 0..3 {
                let i = (rot + k) % 3;
                let a = self.pts[tri[next(i)] as usize];
                let b = self.pts[tri[prev(i)] as usize];
                if orient2d(a, b, p) < 0.0 {
                    let n = self.nbrs[t as usize][i];
                    if n == NONE {
                        return Err(UpdateError::Stuck);
                    }
                    t = n;
                    continue 'walk;
                }
            }
            return Ok(t);
        }
    }

    fn locate_brute(&self, p: [f64; 2]) -> Result<u32, UpdateError> {
        self.live_triangles()
            .find(|&t| {
                let [a, b, c] = self.tris[t as usize].map(|v| self.pts[v as usize]);
                orient2d(a, b, p) >= 0.0 && orient2d(b, c, p) >= 0.0 && orient2d(c, a, p) >= 0.0
            })
            .ok_or(UpdateError::Stuck)
    }

    /// Vertex of the triangulation equal to `p`, if any.
    pub fn find_vertex(&self, p: [f64; 2]) -> Option<u32> {
        let t = self.locate(p).ok()?;
        self.tris[t as usize].into_iter().find(|&v| self.pts[v as usize] == p)
    }

    /// Inserts `p` into the empty slot `vid`.
    pub fn insert(&mut self, vid: u32, p: [f64; 2]) -> Result<Change, UpdateError> {
        self.insert_from(vid, p, None)
    }

    /// Like [`insert`](Self::insert) but starts the point-location walk at
    /// a triangle incident to `near` when that vertex is live.
    pub fn insert_near(&mut self, vid: u32, p: [f64; 2], near: u32) -> Result<Change, UpdateError> {
        self.insert_from(vid, p, Some(near))
    }

    fn insert_from(&mut self, vid: u32, p: [f64; 2], near: Option<u32>) -> Result<Change, UpdateError> {
        debug_assert!(vid as usize >= SUPER_VERTICES && !self.live[vid as usize]);
        let start = match near {
            Some(v) if self.live[v as usize] && self.vert_tri[v as usize] != NONE => self.vert_tri[v as usize],
            _ => self.any_alive_triangle(),
        };
        let t0 = self.locate_from(p, start)?;
        for v in self.tris[t0 as usize] {
            if self.pts[v as usize] == p {
                return Err(UpdateError::Duplicate(v));
            }
        }

        // Cavity search; nothing is modified until it succeeds.
        let stamp = self.bump_stamp();
        let mut cavity = vec![t0];
        self.mark[t0 as usize] = stamp;
        let mut boundary: Vec<(u32, u32, u32)> = Vec::new();
        let mut i = 0;
        while i < cavity.len() {
            let t = cavity[i];
            i += 1;
            let tri = self.tris[t as usize];
            for e in 0..3 {
                let n = self.nbrs[t as usize][e];
                if n != NONE {
                    if self.mark[n as usize] == stamp {
                        continue;
                    }
                    let [a, b, c] = self.tris[n as usize].map(|v| self.pts[v as usize]);
                    if incircle(a, b, c, p) > 0.0 {
                        self.mark[n as usize] = stamp;
                        cavity.push(n);
                        if cavity.len() > self.cavity_limit {
                            return Err(UpdateError::CavityTooLarge(cavity.len()));
                        }
                        continue;
                    }
                }
                boundary.push((tri[next(e)], tri[prev(e)], n));
            }
        }
        for &(a, b, _) in &boundary {
            if orient2d(self.pts[a as usize], self.pts[b as usize], p) <= 0.0 {
                return Err(UpdateError::Stuck);
            }
        }

        self.pts[vid as usize] = p;
        self.live[vid as usize] = true;
        for &t in &cavity {
            self.release(t);
        }
        let mut created = Vec::with_capacity(boundary.len());
        for _ in 0..boundary.len() {
            created.push(self.alloc());
        }
        // Start vertex of each boundary edge -> new triangle.
        let mut by_start: Vec<(u32, u32)> = boundary.iter().zip(&created).map(|(&(a, _, _), &t)| (a, t)).collect();
        by_start.sort_unstable();
        let lookup = |v: u32| -> u32 {
            let k = by_start.binary_search_by_key(&v, |&(a, _)| a).expect("open cavity boundary");
            by_start[k].1
        };
        for (&(a, b, outer), &t) in boundary.iter().zip(&created) {
            self.tris[t as usize] = [a, b, vid];
            let across_b = lookup(b);
            // The triangle ending at `a` is the one whose start is a's predecessor;
            // find it from the other side once all starts are known.
            self.nbrs[t as usize] = [across_b, NONE, outer];
            self.relink(outer, a, b, t);
            self.vert_tri[a as usize] = t;
        }
        for &t in &created {
            let across = self.nbrs[t as usize][0];
            self.nbrs[across as usize][1] = t;
            self.refresh_center(t);
        }
        self.vert_tri[vid as usize] = created[0];
        self.hint = created[0];
        let touched = boundary.iter().map(|&(a, _, _)| a).collect();
        Ok(Change { created, touched })
    }

    /// Star of `vid` as `(triangle, b, c)` with `(vid, b, c)` counter-clockwise,
    /// listed counter-clockwise around the vertex.
    pub fn star(&self, vid: u32, out: &mut Vec<(u32, u32, u32)>) {
        out.clear();
        let start = self.vert_tri[vid as usize];
        if start == NONE {
            return;
        }
        let mut t = start;
        loop {
            let tri = self.tris[t as usize];
            let i = tri.iter().position(|&v| v == vid).expect("broken vertex star");
            out.push((t, tri[next(i)], tri[prev(i)]));
            t = self.nbrs[t as usize][next(i)];
            if t == start || t == NONE {
                break;
            }
            if out.len() > self.tris.len() {
                panic!("vertex star of {vid} does not close");
            }
        }
    }

    /// Removes the live vertex `vid` and re-triangulates its star.
    pub fn remove(&mut self, vid: u32) -> Result<Change, UpdateError> {
        debug_assert!(vid as usize >= SUPER_VERTICES && self.live[vid as usize]);
        let mut star = Vec::new();
        self.star(vid, &mut star);
        if star.len() > self.cavity_limit {
            return Err(UpdateError::CavityTooLarge(star.len()));
        }
        let link: Vec<u32> = star.iter().map(|&(_, b, _)| b).collect();
        let outer: Vec<u32> = star
            .iter()
            .map(|&(t, _, _)| {
                let tri = self.tris[t as usize];
                let i = tri.iter().position(|&v| v == vid).unwrap();
                self.nbrs[t as usize][i]
            })
            .collect();
        let d = link.len();
        let lp: Vec<[f64; 2]> = link.iter().map(|&v| self.pts[v as usize]).collect();

        // Ear clipping over link positions.
        let mut poly: Vec<usize> = (0..d).collect();
        let mut ears: Vec<[usize; 3]> = Vec::with_capacity(d.saturating_sub(2));
        while poly.len() > 3 {
            let m = poly.len();
            let mut clipped = false;
            for s in 0..m {
                let (ia, ib, ic) = (poly[s], poly[(s + 1) % m], poly[(s + 2) % m]);
                let (a, b, c) = (lp[ia], lp[ib], lp[ic]);
                if orient2d(a, b, c) <= 0.0 {
                    continue;
                }
                let blocked = (0..d).filter(|&k| k != ia && k != ib && k != ic).any(|k| incircle(a, b, c, lp[k]) > 0.0);
                if blocked {
                    continue;
                }
                ears.push([ia, ib, ic]);
                poly.remove((s + 1) % m);
                clipped = true;
                break;
            }
            if !clipped {
                return Err(UpdateError::Stuck);
            }
        }
        if poly.len() == 3 {
            let (a, b, c) = (lp[poly[0]], lp[poly[1]], lp[poly[2]]);
            if orient2d(a, b, c) <= 0.0 {
                return Err(UpdateError::Stuck);
            }
            ears.push([poly[0], poly[1], poly[2]]);
        }

        for &(t, _, _) in &star {
            self.release(t);
        }
        self.live[vid as usize] = false;
        self.vert_tri[vid as usize] = NONE;
        let mut created = Vec::with_capacity(ears.len());
        for _ in 0..ears.len() {
            created.push(self.alloc());
        }
        // Directed interior edges (from, to) in link positions -> (triangle, opposite slot).
        let mut inner: Vec<((usize, usize), u32, usize)> = Vec::new();
        for (ear, &t) in ears.iter().zip(&created) {
            self.tris[t as usize] = ear.map(|k| link[k]);
            for i in 0..3 {
                let (u, v) = (ear[next(i)], ear[prev(i)]);
                if v == (u + 1) % d {
                    let n = outer[u];
                    self.nbrs[t as usize][i] = n;
                    self.relink(n, link[u], link[v], t);
                } else {
                    inner.push(((u, v), t, i));
                }
            }
            for &k in ear {
                self.vert_tri[link[k] as usize] = t;
            }
            self.refresh_center(t);
        }
        for &((u, v), t, i) in &inner {
            let &(_, other, _) =
                inner.iter().find(|&&(e, _, _)| e == (v, u)).expect("unmatched diagonal while filling a hole");
            self.nbrs[t as usize][i] = other;
        }
        self.hint = created[0];
        Ok(Change { created, touched: link })
    }

    /// Checks orientation, adjacency symmetry and the local Delaunay
    /// property of every live triangle with the exact predicates.
    pub fn validate(&self) -> Result<(), String> {
        for t in self.live_triangles() {
            let tri = self.tris[t as usize];
            let [a, b, c] = tri.map(|v| self.pts[v as usize]);
            if orient2d(a, b, c) <= 0.0 {
                return Err(format!("triangle {t} {tri:?} is not counter-clockwise"));
            }
            for i in 0..3 {
                let n = self.nbrs[t as usize][i];
                if n == NONE {
                    continue;
                }
                if !self.alive[n as usize] {
                    return Err(format!("triangle {t} links dead triangle {n}"));
                }
                let (u, v) = (tri[next(i)], tri[prev(i)]);
                let ntri = self.tris[n as usize];
                let Some(j) = (0..3).find(|&j| ntri[j] != u && ntri[j] != v) else {
                    return Err(format!("triangles {t} and {n} share no edge"));
                };
                if self.nbrs[n as usize][j] != t {
                    return Err(format!("adjacency {t} -> {n} is not symmetric"));
                }
                let opp = self.pts[ntri[j] as usize];
                if incircle(a, b, c, opp) > 0.0 {
                    return Err(format!("triangle {t} violates the empty-circle property"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (*seed >> 11) as f64 / (1u64 << 53) as f64
    }

    fn random_points(n: usize, seed: u64) -> Vec<[f64; 2]> {
        let mut s = seed;
        (0..n).map(|_| [lcg(&mut s), lcg(&mut s)]).collect()
    }

    fn build(points: &[[f64; 2]]) -> Triangulation {
        let mut tri = Triangulation::new([0.0, 0.0, 1.0, 1.0], points.len());
        for (i, &p) in points.iter().enumerate() {
            tri.insert((i + SUPER_VERTICES) as u32, p).unwrap();
        }
        tri
    }

    #[test]
    fn euler_count_of_triangles() {
        let pts = random_points(200, 7);
        let tri = build(&pts);
        tri.validate().unwrap();
        // n interior vertices inside a triangle: 2n + 1 triangles.
        assert_eq!(tri.triangle_count(), 2 * pts.len() + 1);
    }

    #[test]
    fn cocircular_grid_is_handled() {
        let mut pts = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                pts.push([0.05 + 0.1 * i as f64, 0.05 + 0.1 * j as f64]);
            }
        }
        let mut tri = build(&pts);
        tri.validate().unwrap();
        for k in [0u32, 11, 45, 99] {
            tri.remove(k + 3).unwrap();
            tri.validate().unwrap();
        }
        tri.insert(3, pts[0]).unwrap();
        tri.validate().unwrap();
    }

    #[test]
    fn duplicate_insertion_is_rejected() {
        let pts = random_points(20, 3);
        let mut tri = Triangulation::new([0.0, 0.0, 1.0, 1.0], 21);
        for (i, &p) in pts.iter().enumerate() {
            tri.insert((i + 3) as u32, p).unwrap();
        }
        assert_eq!(tri.insert(23, pts[4]), Err(UpdateError::Duplicate(7)));
        tri.validate().unwrap();
    }

    #[test]
    fn remove_then_reinsert_keeps_delaunay() {
        let pts = random_points(300, 11);
        let mut tri = build(&pts);
        let mut s = 99u64;
        for step in 0..2000 {
            let k = (lcg(&mut s) * pts.len() as f64) as u32 + 3;
            tri.remove(k).unwrap();
            tri.insert(k, [lcg(&mut s), lcg(&mut s)]).unwrap();
            if step % 250 == 0 {
                tri.validate().unwrap();
            }
        }
        tri.validate().unwrap();
        assert_eq!(tri.triangle_count(), 2 * pts.len() + 1);
    }

    #[test]
    fn cavity_limit_leaves_structure_untouched() {
        let pts = random_points(50, 5);
        let mut tri = build(&pts);
        let before = tri.triangle_count();
        tri.set_cavity_limit(3);
        let mut hit = false;
        for v in 3..53u32 {
            let p = tri.point(v);
            match tri.remove(v) {
                Err(UpdateError::CavityTooLarge(_)) => hit = true,
                Ok(_) => {
                    tri.insert(v, p).unwrap();
                }
                Err(e) => panic!("{e:?}"),
            }
        }
        assert!(hit);
        assert_eq!(tri.triangle_count(), before);
        tri.validate().unwrap();
    }
}
