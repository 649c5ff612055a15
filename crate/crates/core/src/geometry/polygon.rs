/// Signed shoelace area; positive for counter-clockwise rings.
pub fn signed_area(ring: &[[f64; 2]]) -> f64 {
    if ring.len() < 3 {
        return 0.0;
    }
    let o = ring[0];
    let mut acc = 0.0;
    for w in ring[1..].windows(2) {
        let (p, q) = (w[0], w[1]);
        acc += (p[0] - o[0]) * (q[1] - o[1]) - (q[0] - o[0]) * (p[1] - o[1]);
    }
    0.5 * acc
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.x0 && p[0] <= self.x1 && p[1] >= self.y0 && p[1] <= self.y1
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }
}

#[derive(Clone, Copy)]
enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    fn inside(self, p: [f64; 2], r: &Rect) -> bool {
        match self {
            Side::Left => p[0] >= r.x0,
            Side::Right => p[0] <= r.x1,
            Side::Bottom => p[1] >= r.y0,
            Side::Top => p[1] <= r.y1,
        }
    }

    fn cross(self, p: [f64; 2], q: [f64; 2], r: &Rect) -> [f64; 2] {
        match self {
            Side::Left | Side::Right => {
                let x = if matches!(self, Side::Left) { r.x0 } else { r.x1 };
                let t = (x - p[0]) / (q[0] - p[0]);
                [x, p[1] + t * (q[1] - p[1])]
            }
            Side::Bottom | Side::Top => {
                let y = if matches!(self, Side::Bottom) { r.y0 } else { r.y1 };
                let t = (y - p[1]) / (q[1] - p[1]);
                [p[0] + t * (q[0] - p[0]), y]
            }
        }
    }
}

/// Sutherland-Hodgman clip of a convex (or simple) ring against a rectangle.
pub fn clip_to_rect(ring: &[[f64; 2]], rect: &Rect) -> Vec<[f64; 2]> {
    let mut out: Vec<[f64; 2]> = ring.to_vec();
    for side in [Side::Left, Side::Right, Side::Bottom, Side::Top] {
        if out.is_empty() {
            break;
        }
        let input = std::mem::take(&mut out);
        let mut prev = *input.last().unwrap();
        for &cur in &input {
            let cur_in = side.inside(cur, rect);
            let prev_in = side.inside(prev, rect);
            if cur_in {
                if !prev_in {
                    out.push(side.cross(prev, cur, rect));
                }
                out.push(cur);
            } else if prev_in {
                out.push(side.cross(prev, cur, rect));
            }
            prev = cur;
        }
    }
    out
}

/// Liang-Barsky clip of the segment `p -> q`; `None` when it misses the rectangle.
pub fn clip_segment(p: [f64; 2], q: [f64; 2], rect: &Rect) -> Option<([f64; 2], [f64; 2])> {
    let d = [q[0] - p[0], q[1] - p[1]];
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    let checks = [(-d[0], p[0] - rect.x0), (d[0], rect.x1 - p[0]), (-d[1], p[1] - rect.y0), (d[1], rect.y1 - p[1])];
    for (pk, qk) in checks {
        if pk == 0.0 {
            if qk < 0.0 {
                return None;
            }
        } else {
            let t = qk / pk;
            if pk < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    if t0 > t1 {
        return None;
    }
    Some(([p[0] + t0 * d[0], p[1] + t0 * d[1]], [p[0] + t1 * d[0], p[1] + t1 * d[1]]))
}
